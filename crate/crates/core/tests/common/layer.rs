//! Manufactured profile on the cellular flow, where every coefficient
//! (f, A, K) is active and varies along the wall.

use vvlab::euler::{layer_coefficients, manufactured_base_flow, ManufacturedCase, ProjectionMode};
use vvlab::geometry::{Geometry, Wall};
use vvlab::layer::{solve_layer_with, LayerSettings, LayerSource};

const MIX: [f64; 2] = [1.0, 0.5];

fn amp(t: f64) -> (f64, f64) {
    (t * (1.0 + t), 1.0 + 2.0 * t)
}

/// Exact profile `b = a(t) e^{-z²} (1, 1/2)`; zero at `t = 0`, zero
/// Neumann datum, matching the wall data of the cellular flow.
fn exact(t: f64, z: f64) -> [f64; 2] {
    let e = amp(t).0 * (-z * z).exp();
    [MIX[0] * e, MIX[1] * e]
}

struct Mms<'a> {
    flow: &'a vvlab::euler::BaseFlow,
}

impl LayerSource for Mms<'_> {
    fn forcing(&self, wall: Wall, s: f64, z: f64, t: f64) -> [f64; 2] {
        let c = layer_coefficients(self.flow, t, wall, s, ProjectionMode::Cross);
        let (a, da) = amp(t);
        let e = (-z * z).exp();
        let mut out = [0.0; 2];
        for j in 0..2 {
            let shape = da * e - a * (4.0 * z * z - 2.0) * e + c.f * z * a * (-2.0 * z * e);
            out[j] = MIX[j] * shape + (0..2).map(|k| c.coupling[j][k] * a * e * MIX[k]).sum::<f64>();
        }
        out
    }
}

/// Final profile on both walls as `(z, values)` pairs.
pub fn solve(nz: usize, dt: f64, t_end: f64) -> Vec<(f64, f64)> {
    let geometry = Geometry::flat_channel(1.0, 0.45).unwrap();
    let flow = manufactured_base_flow(ManufacturedCase::Cell, &geometry).unwrap();
    let settings = LayerSettings { nz, dt, t_end, zmax: Some(12.0), slow_samples: 8, ..Default::default() };
    let p = solve_layer_with(&flow, &settings, Some(&Mms { flow: &flow })).unwrap();
    let k = p.times.len() - 1;
    let mut out = Vec::new();
    for w in &p.walls {
        for i in 0..p.slow.len() {
            for (j, &z) in p.fast.z.iter().enumerate() {
                for c in 0..2 {
                    out.push((z, w.ub[k].get(c, i, j)));
                }
            }
        }
    }
    out
}

pub fn max_error(nz: usize, dt: f64, t_end: f64) -> f64 {
    solve(nz, dt, t_end)
        .iter()
        .enumerate()
        .map(|(n, &(z, v))| (v - exact(t_end, z)[n % 2]).abs())
        .fold(0.0, f64::max)
}



/// Max error at `t = 0.1` for each `nz` (`dt = 1e-4`).
pub fn space_errors(levels: &[usize]) -> Vec<f64> {
    levels.iter().map(|&nz| max_error(nz, 1e-4, 0.1)).collect()
}

/// Differences at `t = 0.4` against a `1e-3/8` reference on the same
/// `nz = 128` grid, so the spatial error cancels.
pub fn time_errors(dts: &[f64]) -> Vec<f64> {
    let reference = solve(128, 1e-3 / 8.0, 0.4);
    dts.iter()
        .map(|&dt| {
            let b = solve(128, dt, 0.4);
            b.iter().zip(&reference).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max)
        })
        .collect()
}
