//! Two-scale ansatz `u⁰ + √ν u^b(x, φ/√ν) + ν v(x, φ/√ν)` on the volume
//! grid, the remainder `R = (u^ν − ansatz)/ν`, and its Leray decomposition.

use crate::error::{Error, Result};
use crate::euler::BaseFlow;
use crate::geometry::{VolumeGrid, Wall};
use crate::layer::LayerProfile;
use crate::numerics::{add, cross, interp_error_proxy, norm, scale, Tridiagonal, Vec3};
use crate::ns::ViscousSolution;
use crate::spaces::{boundary_layer_eval, curl_at_wall, volume_norm, NormSpec, VectorField, WallProfile};

/// Ansatz pieces at each requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzBundle {
    pub nu: f64,
    pub grid: VolumeGrid,
    pub times: Vec<f64>,
    pub u0: Vec<VectorField>,
    /// `√ν χ u^b(x, φ/√ν)`.
    pub layer: Vec<VectorField>,
    /// `ν χ v(x, φ/√ν)`.
    pub corrector: Vec<VectorField>,
    pub approx: Vec<VectorField>,
    /// Estimated cubic-interpolation error of the layer term, per time.
    pub interp_error: Vec<f64>,
    /// `√ν > η/4`: the layer is not thin compared with the collar.
    pub regime_warning: bool,
}

pub fn assemble_ansatz(
    flow: &BaseFlow,
    profile: &LayerProfile,
    grid: &VolumeGrid,
    nu: f64,
    times: &[f64],
) -> Result<AnsatzBundle> {
    if grid.geometry != flow.geometry {
        return Err(Error::GridMismatch("grid and flow geometries differ".into()));
    }
    let g = &grid.geometry;
    let n = grid.len();
    let sq = nu.sqrt();
    let tau_axes = [g.flow_axis(), 2];
    let naxis = g.normal_axis();
    let mut out = AnsatzBundle {
        nu,
        grid: grid.clone(),
        times: times.to_vec(),
        u0: Vec::new(),
        layer: Vec::new(),
        corrector: Vec::new(),
        approx: Vec::new(),
        interp_error: Vec::new(),
        regime_warning: false,
    };
    for &t in times {
        let k = profile
            .time_index(t)
            .ok_or_else(|| Error::Alignment(format!("layer profile has no snapshot at t = {t}")))?;
        let mut u0 = VectorField::zeros(n);
        for i in 0..n {
            let v = flow.velocity(t, grid.point(i));
            for c in 0..3 {
                u0.comps[c][i] = v[c];
            }
        }
        let mut layer = VectorField::zeros(n);
        let mut corr = VectorField::zeros(n);
        let mut ierr = 0.0f64;
        for w in &profile.walls {
            let ub = boundary_layer_eval(&[WallProfile::new(w.wall, &w.ub[k])], grid, nu, 2.0)?;
            let vb = boundary_layer_eval(&[WallProfile::new(w.wall, &w.v[k])], grid, nu, 2.0)?;
            out.regime_warning |= ub.regime_warning;
            let nsign = g.wall_normal(w.wall)[naxis];
            for i in 0..n {
                for c in 0..2 {
                    layer.comps[tau_axes[c]][i] += sq * ub.values[c][i];
                }
                corr.comps[naxis][i] += nu * nsign * vb.values[0][i];
                let d = g.distance_from(w.wall, grid.nodes[i]);
                let chi = g.cutoff(d);
                if chi > 0.0 {
                    for c in 0..2 {
                        let e = interp_error_proxy(&w.ub[k].fast.z, w.ub[k].column(c, 0), d / sq);
                        ierr = ierr.max(sq * chi * e);
                    }
                }
            }
        }
        out.approx.push(u0.add(&layer).add(&corr));
        out.u0.push(u0);
        out.layer.push(layer);
        out.corrector.push(corr);
        out.interp_error.push(ierr);
    }
    Ok(out)
}

/// Remainder and its Leray parts at each bundle time.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderField {
    pub nu: f64,
    pub grid: VolumeGrid,
    pub times: Vec<f64>,
    pub r: Vec<VectorField>,
    pub p_part: Vec<VectorField>,
    pub q_part: Vec<VectorField>,
    /// Interpolation error of the layer term in remainder units (`/ν`).
    pub interp_error: Vec<f64>,
    /// Interpolation error stays below 1% of `‖R‖_∞` at every time.
    pub interp_guard_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderPart {
    Full,
    P,
    IMinusP,
}

impl RemainderPart {
    pub const ALL: [RemainderPart; 3] = [RemainderPart::Full, RemainderPart::P, RemainderPart::IMinusP];

    pub fn label(self) -> &'static str {
        match self {
            RemainderPart::Full => "full",
            RemainderPart::P => "P",
            RemainderPart::IMinusP => "I-P",
        }
    }
}

impl RemainderField {
    pub fn part(&self, part: RemainderPart, k: usize) -> &VectorField {
        match part {
            RemainderPart::Full => &self.r[k],
            RemainderPart::P => &self.p_part[k],
            RemainderPart::IMinusP => &self.q_part[k],
        }
    }

    /// Norm of a part at every stored time.
    pub fn norm_series(&self, part: RemainderPart, spec: NormSpec) -> Result<Vec<f64>> {
        (0..self.times.len())
            .map(|k| volume_norm(&self.grid, self.part(part, k), spec))
            .collect()
    }
}

pub fn extract_remainder(sol: &ViscousSolution, bundle: &AnsatzBundle) -> Result<RemainderField> {
    if sol.nu != bundle.nu {
        return Err(Error::GridMismatch(format!("viscosities differ: {} vs {}", sol.nu, bundle.nu)));
    }
    if !sol.grid.same_nodes(&bundle.grid) {
        return Err(Error::GridMismatch("viscous and ansatz grids differ".into()));
    }
    let inv = 1.0 / sol.nu;
    let mut out = RemainderField {
        nu: sol.nu,
        grid: sol.grid.clone(),
        times: bundle.times.clone(),
        r: Vec::new(),
        p_part: Vec::new(),
        q_part: Vec::new(),
        interp_error: Vec::new(),
        interp_guard_ok: true,
    };
    for (b, &t) in bundle.times.iter().enumerate() {
        let k = sol
            .time_index(t)
            .ok_or_else(|| Error::Alignment(format!("viscous solution has no snapshot at t = {t}")))?;
        let r = sol.field(k).sub(&bundle.approx[b]).scaled(inv);
        let (p, q) = leray_project(&r, &sol.grid)?;
        let ie = bundle.interp_error[b] * inv;
        if ie > 0.01 * r.max_abs() && ie > 1e-12 {
            out.interp_guard_ok = false;
        }
        out.interp_error.push(ie);
        out.r.push(r);
        out.p_part.push(p);
        out.q_part.push(q);
    }
    Ok(out)
}

/// Split `u = P u + ∇χ` with `Δχ = div u`, `∂_n χ = u·n`.
///
/// `χ` lives at cell midpoints and its gradient at nodes; at the walls the
/// gradient equals `u·n`, so `P u` is tangent there. Fields depend on the
/// wall-normal coordinate only, so only the normal component is affected.
pub fn leray_project(field: &VectorField, grid: &VolumeGrid) -> Result<(VectorField, VectorField)> {
    if field.len() != grid.len() {
        return Err(Error::GridMismatch("field and grid lengths differ".into()));
    }
    let g = &grid.geometry;
    let axis = g.normal_axis();
    let x = &grid.nodes;
    let u = &field.comps[axis];
    let n = x.len();
    let cells = n - 1;
    let w: Vec<f64> = x.iter().map(|&q| g.metric(q)).collect();
    let mid: Vec<f64> = x.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    // Flux form per cell: w_{c+1} G_{c+1} − w_c G_c = w_{c+1} u_{c+1} − w_c u_c,
    // with G_i = (χ_i − χ_{i−1})/δ_i inside and G = u on the walls.
    let mut m = Tridiagonal::zeros(cells);
    let mut rhs = vec![0.0; cells];
    for c in 0..cells {
        rhs[c] = w[c + 1] * u[c + 1] - w[c] * u[c];
        if c + 1 < n - 1 {
            let k = w[c + 1] / (mid[c + 1] - mid[c]);
            m.diag[c] -= k;
            m.upper[c] += k;
        } else {
            rhs[c] -= w[n - 1] * u[n - 1];
        }
        if c > 0 {
            let k = w[c] / (mid[c] - mid[c - 1]);
            m.diag[c] -= k;
            m.lower[c] += k;
        } else {
            rhs[c] += w[0] * u[0];
        }
    }
    // pin the first cell (the system is singular up to constants)
    let full = m.clone();
    m.diag[0] = 1.0;
    m.upper[0] = 0.0;
    let mut pinned = rhs.clone();
    pinned[0] = 0.0;
    let mut chi = m.solve(&pinned)?;
    let mean = chi.iter().sum::<f64>() / cells as f64;
    chi.iter_mut().for_each(|v| *v -= mean);
    let mut res = vec![0.0; cells];
    full.apply(&chi, &mut res);
    let scale_ref = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs())) + w.iter().zip(u).fold(0.0f64, |a, (wi, ui)| a.max((wi * ui).abs()));
    let residual = res.iter().zip(&rhs).fold(0.0f64, |a, (r, b)| a.max((r - b).abs()));
    if residual > 1e-9 * scale_ref.max(1e-300) {
        return Err(Error::Solver { residual });
    }
    let mut grad = vec![0.0; n];
    grad[0] = u[0];
    grad[n - 1] = u[n - 1];
    for i in 1..n - 1 {
        grad[i] = (chi[i] - chi[i - 1]) / (mid[i] - mid[i - 1]);
    }
    let mut p = field.clone();
    for i in 0..n {
        p.comps[axis][i] = u[i] - grad[i];
    }
    let q = VectorField::single(n, axis, grad);
    Ok((p, q))
}

/// Max over walls and times of the two remainder boundary identities:
///
/// * `R·n + v̄(t, 0)`,
/// * `|(curl R + ν^{-1/2} curl_x u^b|₀ + curl_x v|₀) × n|`.
pub fn remainder_bc_residual(rem: &RemainderField, profile: &LayerProfile) -> Result<(f64, f64)> {
    let g = &rem.grid.geometry;
    let tau_axes = [g.flow_axis(), 2];
    let inv_sq = 1.0 / rem.nu.sqrt();
    let (mut r52, mut r53) = (0.0f64, 0.0f64);
    for (k, &t) in rem.times.iter().enumerate() {
        let kp = profile
            .time_index(t)
            .ok_or_else(|| Error::Alignment(format!("layer profile has no snapshot at t = {t}")))?;
        for w in &profile.walls {
            let n = g.wall_normal(w.wall);
            let node = match w.wall {
                Wall::Lower => 0,
                Wall::Upper => rem.grid.len() - 1,
            };
            let x = g.wall_point(w.wall, 0.0);
            let grad_s = g.slow_gradient(x);
            let ub = &w.ub[kp];
            let v = &w.v[kp];
            let vbar = v.get(0, 0, 0);
            let rn: f64 = (0..3).map(|c| rem.r[k].comps[c][node] * n[c]).sum();
            r52 = r52.max((rn + vbar).abs());

            let ds_b = ub.derivative(1, 0);
            let ds_v = v.derivative(1, 0);
            let mut curl_ub: Vec3 = [0.0; 3];
            for c in 0..2 {
                let mut tau = [0.0; 3];
                tau[tau_axes[c]] = 1.0;
                curl_ub = add(curl_ub, scale(cross(grad_s, tau), ds_b.get(c, 0, 0)));
                curl_ub = add(curl_ub, scale(g.basis_curl(x, tau_axes[c]), ub.get(c, 0, 0)));
            }
            let curl_v = scale(cross(grad_s, n), ds_v.get(0, 0, 0));
            let curl_r = curl_at_wall(&rem.grid, &rem.r[k], w.wall);
            let total = add(curl_r, add(scale(curl_ub, inv_sq), curl_v));
            r53 = r53.max(norm(cross(total, n)));
        }
    }
    Ok((r52, r53))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Clustering, Geometry};
    use crate::spaces::weighted_inner;

    #[test]
    fn gradient_of_r_squared_projects_to_zero() {
        let g = Geometry::annulus(1.0, 2.0, 0.45).unwrap();
        let grid = g.volume_grid(64, Clustering::Cosine).unwrap();
        let f = VectorField::single(grid.len(), 0, grid.nodes.iter().map(|r| 2.0 * r).collect());
        let (p, q) = leray_project(&f, &grid).unwrap();
        assert!(p.max_abs() < 1e-12);
        assert!(q.sub(&f).max_abs() < 1e-12);
    }

    #[test]
    fn vortex_is_left_alone() {
        let g = Geometry::annulus(1.0, 2.0, 0.45).unwrap();
        let grid = g.volume_grid(64, Clustering::Cosine).unwrap();
        let f = VectorField::single(grid.len(), 1, grid.nodes.iter().map(|r| 1.5 / r).collect());
        let (p, q) = leray_project(&f, &grid).unwrap();
        assert_eq!(p, f);
        assert_eq!(q.max_abs(), 0.0);
        assert_eq!(weighted_inner(&grid, &p, &q), 0.0);
    }
}
