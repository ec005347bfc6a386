use crate::error::Result;
use crate::euler::{layer_coefficients, normal_kernel_at, BaseFlow, LayerCoefficients, ProjectionMode};
use crate::geometry::{Geometry, Wall};
use crate::numerics::{derivative, dot, one_sided_derivative, tail_integral};
use crate::spaces::{weighted_norm, AnisotropicIndex, ProfileField};

use super::LayerProfile;

/// `q(s, z) = −∫_z^{Z_max} (m_k·n) b_k dz'`, so that `∂_z q` is the normal
/// part of the coupling term and `q(Z_max) = 0`.
pub fn pressure_corrector_q(
    ub: &ProfileField,
    flow: &BaseFlow,
    wall: Wall,
    t: f64,
    mode: ProjectionMode,
) -> ProfileField {
    let z = &ub.fast.z;
    let mut q = ProfileField::zeros(ub.slow.clone(), ub.fast.clone(), 1);
    for (i, &s) in ub.slow.s.iter().enumerate() {
        let k = layer_coefficients(flow, t, wall, s, mode).normal_kernel;
        let integrand: Vec<f64> = (0..z.len())
            .map(|j| k[0] * ub.get(0, i, j) + k[1] * ub.get(1, i, j))
            .collect();
        let tail = tail_integral(z, &integrand);
        for (j, v) in tail.into_iter().enumerate() {
            q.set(0, i, j, -v);
        }
    }
    q
}

/// `div_x u^b` for `u^b = b_1 τ1 + b_2 τ2` constant along wall normals.
fn slow_divergence(ub: &ProfileField, geometry: &Geometry, wall: Wall) -> ProfileField {
    let x = geometry.wall_point(wall, 0.0);
    let metric = dot(geometry.slow_gradient(x), geometry.tangent_frame()[0]);
    let mut d = ub.derivative(1, 0);
    d.values_mut().iter_mut().for_each(|v| *v *= metric);
    let mut out = ProfileField::zeros(ub.slow.clone(), ub.fast.clone(), 1);
    for i in 0..ub.slow.len() {
        out.column_mut(0, i).copy_from_slice(d.column(0, i));
    }
    out
}

/// Scalar normal corrector `v̄ = ∫_z^{Z_max} div_x u^b dz'` with `v = v̄ n`
/// and `n` the inward normal, which gives `∂_z v·n = −div_x u^b`.
pub fn velocity_corrector_v(ub: &ProfileField, geometry: &Geometry, wall: Wall) -> ProfileField {
    let div = slow_divergence(ub, geometry, wall);
    let z = &ub.fast.z;
    let mut v = ProfileField::zeros(ub.slow.clone(), ub.fast.clone(), 1);
    for i in 0..ub.slow.len() {
        let tail = tail_integral(z, div.column(0, i));
        v.column_mut(0, i).copy_from_slice(&tail);
    }
    v
}

/// `max |div_x u^b + ∂_z v·n|` with a three-point `z` derivative.
pub fn compatibility_residual(ub: &ProfileField, v: &ProfileField, geometry: &Geometry, wall: Wall) -> f64 {
    let div = slow_divergence(ub, geometry, wall);
    let z = &ub.fast.z;
    let mut worst = 0.0f64;
    for i in 0..ub.slow.len() {
        let dv = derivative(z, v.column(0, i));
        for (a, b) in div.column(0, i).iter().zip(dv) {
            worst = worst.max((a + b).abs());
        }
    }
    worst
}

/// `max |∂_z b(0) − neumann|` using a second-order one-sided difference.
pub fn neumann_defect(ub: &ProfileField, coeffs: &[LayerCoefficients]) -> f64 {
    let z = &ub.fast.z;
    let mut worst = 0.0f64;
    for (i, c) in coeffs.iter().enumerate() {
        for comp in 0..2 {
            let col = ub.column(comp, i);
            let d = one_sided_derivative([z[0], z[1], z[2]], [col[0], col[1], col[2]]);
            worst = worst.max((d - c.neumann[comp]).abs());
        }
    }
    worst
}

/// `∇_x q` in native components, for `q(x, z) = −∫_z^∞ k(x)·b(s(x), z') dz'`
/// with `x` ranging over the collar. The kernel's derivatives come from
/// fourth-order differences of the analytic flow evaluators.
pub fn grad_q_x(ub: &ProfileField, flow: &BaseFlow, wall: Wall, t: f64) -> Result<ProfileField> {
    let g = &flow.geometry;
    let z = &ub.fast.z;
    let n = g.wall_normal(wall);
    let axis = g.normal_axis();
    let q0 = g.wall_coordinate(wall);
    let h = 1e-3 * g.gap();
    let hs = 1e-3 * g.slow_period();
    let d4 = |f: &dyn Fn(f64) -> [f64; 2], step: f64| -> [f64; 2] {
        let (a, b, c, d) = (f(2.0 * step), f(step), f(-step), f(-2.0 * step));
        [0, 1].map(|k| (-a[k] + 8.0 * b[k] - 8.0 * c[k] + d[k]) / (12.0 * step))
    };
    let ds_b = ub.derivative(1, 0);
    let mut out = ProfileField::zeros(ub.slow.clone(), ub.fast.clone(), 3);
    for (i, &s) in ub.slow.s.iter().enumerate() {
        let k = normal_kernel_at(flow, t, wall, s, q0);
        let dn_k = d4(&|e| normal_kernel_at(flow, t, wall, s, q0 + e * n[axis]), h);
        let ds_k = d4(&|e| normal_kernel_at(flow, t, wall, s + e, q0), hs);
        let grad_s = g.slow_gradient(g.wall_point(wall, s));
        let normal_part: Vec<f64> = (0..z.len())
            .map(|j| dn_k[0] * ub.get(0, i, j) + dn_k[1] * ub.get(1, i, j))
            .collect();
        let slow_part: Vec<f64> = (0..z.len())
            .map(|j| {
                (0..2).map(|c| ds_k[c] * ub.get(c, i, j) + k[c] * ds_b.get(c, i, j)).sum()
            })
            .collect();
        let a = tail_integral(z, &normal_part);
        let b = tail_integral(z, &slow_part);
        for j in 0..z.len() {
            for c in 0..3 {
                out.set(c, i, j, -(a[j] * n[c] + b[j] * grad_s[c]));
            }
        }
    }
    Ok(out)
}

/// Weighted norms of a wall's profile at each stored time.
#[derive(Debug, Clone, PartialEq)]
pub struct NormMonitor {
    pub times: Vec<f64>,
    pub indices: Vec<AnisotropicIndex>,
    /// `series[idx][time]`.
    pub series: Vec<Vec<f64>>,
    /// Set when a norm exceeds ten times its value at the first stored positive time.
    pub growth_flags: Vec<bool>,
}

pub fn layer_norm_monitor(
    profile: &LayerProfile,
    wall: Wall,
    indices: &[AnisotropicIndex],
) -> Result<NormMonitor> {
    let w = profile.wall(wall);
    let mut series = Vec::with_capacity(indices.len());
    let mut growth_flags = Vec::with_capacity(indices.len());
    let first = profile.times.iter().position(|&t| t > 0.0);
    for &idx in indices {
        let s = w.ub.iter().map(|b| weighted_norm(b, idx)).collect::<Result<Vec<_>>>()?;
        let flag = match first {
            Some(k) => s[k..].iter().any(|&v| v > 10.0 * s[k]),
            None => false,
        };
        series.push(s);
        growth_flags.push(flag);
    }
    Ok(NormMonitor { times: profile.times.clone(), indices: indices.to_vec(), series, growth_flags })
}
