//! Viscous reference solutions on the invariant manifolds of the
//! Navier-slip problem: swirl `u_θ(r)` in the annulus and shear `u_x(y)` in
//! the channel.
//!
//! Both reduce to `∂_t u = ν ω'`, `ω = (w u)'/w`, `ω = 0` on the walls, with
//! metric `w = r` (annulus) or `w = 1` (channel). The discretization stores
//! `ω` at cell midpoints,
//!
//! ```text
//! ω_{i+1/2} = (w_{i+1} u_{i+1} − w_i u_i) / (h_i w_{i+1/2})
//! ```
//!
//! and writes the scheme in weak form `M u_t = −ν Dᵀ W D u` with lumped node
//! masses `M` and midpoint weights `W`. The wall condition enters through the
//! boundary term of the weak form, so `ω = 0` needs no ghost values, `c/r`
//! is annihilated exactly, and the semi-discrete energy identity
//! `d/dt ½ uᵀMu = −ν ωᵀWω` holds exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::Profile1d;
use crate::geometry::{Clustering, Geometry, GeometryKind, VolumeGrid, Wall};
use crate::numerics::Tridiagonal;
use crate::spaces::{curl_at_wall, lp_norm, VectorField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NsSettings {
    /// Number of intervals across the gap.
    pub nr: usize,
    pub dt: f64,
    pub t_end: f64,
    pub store_every: usize,
    pub store_times: Vec<f64>,
    pub clustering: Clustering,
    /// Backward-Euler start-up (four quarter steps) before Crank–Nicolson.
    pub startup: bool,
}

impl Default for NsSettings {
    fn default() -> Self {
        Self {
            nr: 2048,
            dt: 1e-4,
            t_end: 0.5,
            store_every: 0,
            store_times: Vec::new(),
            clustering: Clustering::Cosine,
            startup: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscousSolution {
    pub nu: f64,
    pub grid: VolumeGrid,
    pub times: Vec<f64>,
    /// Tangential flow component (`u_θ` or `u_x`) per stored time.
    pub u: Vec<Vec<f64>>,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: String,
}

impl ViscousSolution {
    pub fn field(&self, k: usize) -> VectorField {
        VectorField::single(self.grid.len(), self.grid.geometry.flow_axis(), self.u[k].clone())
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        crate::layer::find_time(&self.times, t)
    }
}

/// Weak-form operator pieces on a grid.
pub struct SlipOperator {
    pub nodes: Vec<f64>,
    /// Metric at nodes.
    pub w: Vec<f64>,
    /// Metric at midpoints.
    pub w_half: Vec<f64>,
    pub h: Vec<f64>,
    /// Lumped node masses (without the transverse measure).
    pub mass: Vec<f64>,
    /// `W_j = w_{j+1/2} h_j`.
    pub weight: Vec<f64>,
}

impl SlipOperator {
    pub fn new(grid: &VolumeGrid) -> Self {
        let g = &grid.geometry;
        let x = &grid.nodes;
        let n = x.len();
        let w: Vec<f64> = x.iter().map(|&q| g.metric(q)).collect();
        let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
        let w_half: Vec<f64> = x.windows(2).map(|p| g.metric(0.5 * (p[0] + p[1]))).collect();
        let mut mass = vec![0.0; n];
        for j in 0..n - 1 {
            mass[j] += 0.5 * w[j] * h[j];
            mass[j + 1] += 0.5 * w[j + 1] * h[j];
        }
        let weight = w_half.iter().zip(&h).map(|(a, b)| a * b).collect();
        Self { nodes: x.clone(), w, w_half, h, mass, weight }
    }

    /// Midpoint vorticity `ω_{j+1/2}`.
    pub fn vorticity(&self, u: &[f64]) -> Vec<f64> {
        (0..self.h.len())
            .map(|j| (self.w[j + 1] * u[j + 1] - self.w[j] * u[j]) / (self.h[j] * self.w_half[j]))
            .collect()
    }

    /// `Dᵀ W D` as a tridiagonal matrix.
    pub fn stiffness(&self) -> Tridiagonal {
        let n = self.nodes.len();
        let mut a = Tridiagonal::zeros(n);
        for j in 0..n - 1 {
            // ω_j = α u_{j+1} − β u_j
            let alpha = self.w[j + 1] / (self.h[j] * self.w_half[j]);
            let beta = self.w[j] / (self.h[j] * self.w_half[j]);
            let wj = self.weight[j];
            a.diag[j] += wj * beta * beta;
            a.diag[j + 1] += wj * alpha * alpha;
            a.upper[j] -= wj * alpha * beta;
            a.lower[j + 1] -= wj * alpha * beta;
        }
        a
    }

    /// `½ uᵀ M u` (per unit transverse measure).
    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * u.iter().zip(&self.mass).map(|(a, m)| m * a * a).sum::<f64>()
    }

    /// `ωᵀ W ω`.
    pub fn enstrophy(&self, u: &[f64]) -> f64 {
        self.vorticity(u).iter().zip(&self.weight).map(|(o, w)| w * o * o).sum()
    }
}

/// Angular momentum `Σ m_i w_i u_i` (per unit transverse measure); in the
/// channel this is the total momentum.
pub fn angular_momentum(op: &SlipOperator, u: &[f64]) -> f64 {
    u.iter().zip(&op.mass).zip(&op.w).map(|((a, m), w)| m * w * a).sum()
}

/// Exact discrete rate of [`angular_momentum`]: `−2ν (w_N u_N − w_0 u_0)` in
/// the annulus, zero in the channel.
pub fn angular_momentum_flux(op: &SlipOperator, u: &[f64], nu: f64, annulus: bool) -> f64 {
    if !annulus {
        return 0.0;
    }
    let n = u.len() - 1;
    -2.0 * nu * (op.w[n] * u[n] - op.w[0] * u[0])
}

fn solve(grid: VolumeGrid, u0: Vec<f64>, nu: f64, settings: &NsSettings) -> Result<ViscousSolution> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("viscosity must be positive, got {nu}")));
    }
    let nsteps = crate::layer::step_count(settings.dt, settings.t_end)?;
    let dt = settings.dt;
    let mut plan: Vec<(usize, f64)> = vec![(0, 0.0)];
    if settings.store_every > 0 {
        for n in (settings.store_every..=nsteps).step_by(settings.store_every) {
            plan.push((n, n as f64 * dt));
        }
    }
    for &t in &settings.store_times {
        let n = (t / dt).round();
        if !(t >= 0.0) || (n * dt - t).abs() > 1e-6 * dt || n as usize > nsteps {
            return Err(Error::StepSize(format!("store time {t} is not a step of dt = {dt}")));
        }
        plan.push((n as usize, t));
    }
    if plan.iter().all(|p| p.0 != nsteps) {
        plan.push((nsteps, settings.t_end));
    }
    plan.sort_by_key(|p| p.0);
    plan.dedup_by_key(|p| p.0);

    let op = SlipOperator::new(&grid);
    let a = op.stiffness();
    let n = u0.len();
    // (M + θ dt ν A) u⁺ = (M − (1−θ) dt ν A) u
    let system = |theta_dt: f64| {
        let mut m = Tridiagonal::zeros(n);
        for i in 0..n {
            m.diag[i] = op.mass[i] + theta_dt * nu * a.diag[i];
            m.lower[i] = theta_dt * nu * a.lower[i];
            m.upper[i] = theta_dt * nu * a.upper[i];
        }
        m
    };
    let mut u = u0;
    let mut au = vec![0.0; n];
    let mut stored_u = Vec::with_capacity(plan.len());
    let mut next = 0;
    let mut store = |step: usize, u: &Vec<f64>, next: &mut usize| {
        while *next < plan.len() && plan[*next].0 == step {
            stored_u.push(u.clone());
            *next += 1;
        }
    };
    store(0, &u, &mut next);
    let cn = system(0.5 * dt);
    let mut first = 0;
    if settings.startup && nsteps > 0 {
        let be = system(0.25 * dt);
        for _ in 0..4 {
            let rhs: Vec<f64> = u.iter().zip(&op.mass).map(|(v, m)| m * v).collect();
            u = be.solve(&rhs)?;
        }
        store(1, &u, &mut next);
        first = 1;
    }
    for step in first..nsteps {
        a.apply(&u, &mut au);
        let rhs: Vec<f64> = (0..n).map(|i| op.mass[i] * u[i] - 0.5 * dt * nu * au[i]).collect();
        u = cn.solve(&rhs)?;
        store(step + 1, &u, &mut next);
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver { residual: f64::INFINITY });
    }
    Ok(ViscousSolution {
        nu,
        grid,
        times: plan.iter().map(|p| p.1).collect(),
        u: stored_u,
        dt,
        t_end: settings.t_end,
        scheme: format!(
            "weak-form midpoint-vorticity, Crank-Nicolson{}",
            if settings.startup { " with 4 backward-Euler quarter steps" } else { "" }
        ),
    })
}

fn check_nr(nr: usize) -> Result<()> {
    if nr < 32 {
        return Err(Error::Config(format!("need at least 32 intervals, got {nr}")));
    }
    Ok(())
}

pub fn solve_ns_swirl(geometry: &Geometry, u0: &Profile1d, nu: f64, settings: &NsSettings) -> Result<ViscousSolution> {
    if !matches!(geometry.kind, GeometryKind::AnnulusGap { .. }) {
        return Err(Error::Config("swirl solver needs an annulus geometry".into()));
    }
    check_nr(settings.nr)?;
    let grid = geometry.volume_grid(settings.nr, settings.clustering)?;
    let init: Vec<f64> = grid.nodes.iter().map(|&r| u0.value(r)).collect();
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProfile("initial profile not finite".into()));
    }
    solve(grid, init, nu, settings)
}

pub fn solve_ns_channel(geometry: &Geometry, u0: &Profile1d, nu: f64, settings: &NsSettings) -> Result<ViscousSolution> {
    if !matches!(geometry.kind, GeometryKind::FlatChannel { .. }) {
        return Err(Error::Config("channel solver needs a flat channel geometry".into()));
    }
    check_nr(settings.nr)?;
    let grid = geometry.volume_grid(settings.nr, settings.clustering)?;
    let init: Vec<f64> = grid.nodes.iter().map(|&y| u0.value(y)).collect();
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProfile("initial profile not finite".into()));
    }
    solve(grid, init, nu, settings)
}

/// Solve on an explicit grid (used by refinement studies).
pub fn solve_ns_on(grid: VolumeGrid, u0: &Profile1d, nu: f64, settings: &NsSettings) -> Result<ViscousSolution> {
    let init: Vec<f64> = grid.nodes.iter().map(|&q| u0.value(q)).collect();
    solve(grid, init, nu, settings)
}

/// Per stored interval: `|Δ(½‖u‖²)/Δt + ν ‖curl u‖²_avg| / E(0)`, with the
/// enstrophy averaged by the trapezoid rule over the interval.
pub fn energy_identity_residual(sol: &ViscousSolution) -> Vec<f64> {
    let op = SlipOperator::new(&sol.grid);
    let e: Vec<f64> = sol.u.iter().map(|u| op.energy(u)).collect();
    let z: Vec<f64> = sol.u.iter().map(|u| op.enstrophy(u)).collect();
    let e0 = if e[0] > 0.0 { e[0] } else { 1.0 };
    (1..e.len())
        .map(|k| {
            let dt = sol.times[k] - sol.times[k - 1];
            ((e[k] - e[k - 1]) / dt + sol.nu * 0.5 * (z[k] + z[k - 1])).abs() / e0
        })
        .collect()
}

/// Per stored time: max over walls of `|u·n| + |curl u × n|` using
/// second-order one-sided stencils. The normal velocity is zero by
/// construction.
pub fn bc_residual(sol: &ViscousSolution) -> Vec<f64> {
    (0..sol.u.len())
        .map(|k| {
            let f = sol.field(k);
            Wall::BOTH
                .iter()
                .map(|&w| {
                    let c = curl_at_wall(&sol.grid, &f, w);
                    let n = sol.grid.geometry.wall_normal(w);
                    crate::numerics::norm(crate::numerics::cross(c, n))
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `‖u(t) − U0‖_∞` at each stored time.
pub fn drift_from(sol: &ViscousSolution, u0: &Profile1d) -> Result<Vec<f64>> {
    let exact: Vec<f64> = sol.grid.nodes.iter().map(|&q| u0.value(q)).collect();
    let e = VectorField::single(sol.grid.len(), sol.grid.geometry.flow_axis(), exact);
    (0..sol.u.len())
        .map(|k| lp_norm(&sol.grid, &sol.field(k).sub(&e), f64::INFINITY))
        .collect()
}
