//! Manufactured-solution orders of the layer solver.

mod common;

use common::layer::{space_errors, time_errors};
use common::orders;

#[test]
fn layer_space_order_is_two() {
    let e = space_errors(&[48, 96, 192, 384]);
    let o = orders(&e);
    println!("z errors {e:?} orders {o:?}");
    assert!(o.iter().all(|&p| p >= 1.8), "{o:?}");
}

#[test]
fn layer_time_order_is_at_least_one() {
    let e = time_errors(&[8e-3, 4e-3, 2e-3, 1e-3]);
    let o = orders(&e);
    println!("t errors {e:?} orders {o:?}");
    assert!(o.iter().all(|&p| p >= 0.8), "{o:?}");
}
