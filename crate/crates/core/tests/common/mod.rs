//! Shared oracles for the order tests and the acceptance target.
#![allow(dead_code)]

pub mod layer;
pub mod ns;

pub fn orders(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
