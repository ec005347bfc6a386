//! Eigenmode orders of the viscous solvers.

mod common;

use common::ns::{channel_error, channel_time_error};
use common::orders;
use vvlab::euler::Profile1d;
use vvlab::geometry::{Clustering, Geometry};
use vvlab::ns::{solve_ns_swirl, NsSettings};

fn within(o: &[f64], target: f64, tol: f64) -> bool {
    o.iter().all(|p| (p - target).abs() <= tol)
}

#[test]
fn channel_space_order_two() {
    let e: Vec<f64> = [32, 64, 128, 256].iter().map(|&n| channel_error(n, 1e-5)).collect();
    let o = orders(&e);
    println!("space {e:?} {o:?}");
    assert!(within(&o, 2.0, 0.2), "{o:?}");
}

#[test]
fn channel_time_order_two() {
    let e: Vec<f64> = [0.04, 0.02, 0.01, 0.005].iter().map(|&dt| channel_time_error(256, dt)).collect();
    let o = orders(&e);
    println!("time {e:?} {o:?}");
    assert!(within(&o, 2.0, 0.2), "{o:?}");
}

/// Annulus self-convergence: differences between successive dyadic grids
/// for a decaying swirl.
#[test]
fn annulus_self_convergence_order_two() {
    let g = Geometry::annulus(1.0, 2.0, 0.45).unwrap();
    let u0 = Profile1d::Poly(vec![0.0, 1.0, 0.0, -0.25]);
    let run = |n: usize| {
        let s = NsSettings { nr: n, dt: 1e-4, t_end: 0.2, clustering: Clustering::Uniform, ..Default::default() };
        solve_ns_swirl(&g, &u0, 0.1, &s).unwrap().u.last().unwrap().clone()
    };
    let fields: Vec<Vec<f64>> = [32, 64, 128, 256].iter().map(|&n| run(n)).collect();
    // compare on the coarsest nodes, which every finer grid contains
    let d: Vec<f64> = fields
        .windows(2)
        .map(|w| {
            let stride_a = (w[0].len() - 1) / 32;
            let stride_b = (w[1].len() - 1) / 32;
            (0..=32).map(|i| (w[0][i * stride_a] - w[1][i * stride_b]).abs()).fold(0.0, f64::max)
        })
        .collect();
    let o = orders(&d);
    println!("annulus {d:?} {o:?}");
    assert!(within(&o, 2.0, 0.2), "{o:?}");
}
