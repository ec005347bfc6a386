//! Eigenmode oracles for the viscous solvers.

use std::f64::consts::PI;

use vvlab::euler::Profile1d;
use vvlab::geometry::{Clustering, Geometry};
use vvlab::ns::{solve_ns_channel, NsSettings};

const NU: f64 = 0.05;
const T: f64 = 0.4;

/// `cos(πy)` decays as `e^{-νπ²t}` under slip (`∂_y u = 0`) walls.
pub fn channel_error(nr: usize, dt: f64) -> f64 {
    let g = Geometry::flat_channel(1.0, 0.45).unwrap();
    let s = NsSettings { nr, dt, t_end: T, clustering: Clustering::Uniform, ..Default::default() };
    let sol = solve_ns_channel(&g, &Profile1d::Cosine { k: 1.0, h: 1.0 }, NU, &s).unwrap();
    let decay = (-NU * PI * PI * T).exp();
    let u = sol.u.last().unwrap();
    sol.grid.nodes.iter().zip(u).map(|(y, v)| (v - decay * (PI * y).cos()).abs()).fold(0.0, f64::max)
}

/// Same mode against the semi-discrete solution: on a uniform grid the
/// cosine vector is an eigenvector with eigenvalue `(4/h²) sin²(πh/2)`, so
/// only the time discretization remains.
pub fn channel_time_error(nr: usize, dt: f64) -> f64 {
    let g = Geometry::flat_channel(1.0, 0.45).unwrap();
    let s = NsSettings { nr, dt, t_end: T, clustering: Clustering::Uniform, ..Default::default() };
    let sol = solve_ns_channel(&g, &Profile1d::Cosine { k: 1.0, h: 1.0 }, NU, &s).unwrap();
    let h = 1.0 / (sol.grid.len() - 1) as f64;
    let lambda = 4.0 / (h * h) * (0.5 * PI * h).sin().powi(2);
    let decay = (-NU * lambda * T).exp();
    let u = sol.u.last().unwrap();
    sol.grid.nodes.iter().zip(u).map(|(y, v)| (v - decay * (PI * y).cos()).abs()).fold(0.0, f64::max)
}
