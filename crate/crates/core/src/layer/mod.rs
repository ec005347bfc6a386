//! Tangential boundary-layer system on the half line.
//!
//! For each wall the profile `b = (b_1, b_2)` (components along the frame
//! `τ1, τ2`) solves
//!
//! ```text
//! ∂_t b − ∂_z² b + f z ∂_z b + A b + K ∂_s b = S,   ∂_z b(0) = −g_raw,   b(Z_max) = 0
//! ```
//!
//! with coefficients frozen per wall sample (see [`layer_coefficients`]).
//! Diffusion is Crank–Nicolson, the remaining terms are second-order
//! Adams–Bashforth. The first step is split into four backward-Euler
//! quarter steps to damp the start-up incompatibility between zero initial
//! data and a nonzero Neumann datum.

mod correctors;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{layer_coefficients, BaseFlow, FlowKind, LayerCoefficients, ProjectionMode};
use crate::geometry::Wall;
use crate::numerics::{derivative, Tridiagonal};
use crate::spaces::{FastGrid, ProfileField, SlowGrid, DEFAULT_MAP_SCALE};

pub use correctors::{
    compatibility_residual, grad_q_x, layer_norm_monitor, neumann_defect, pressure_corrector_q,
    velocity_corrector_v, NormMonitor,
};
pub use io::{read_snapshots, write_snapshots};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerSettings {
    /// Number of fast-grid nodes.
    pub nz: usize,
    /// Truncation point; `None` picks the automatic value.
    pub zmax: Option<f64>,
    pub map_scale: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Store every this many steps (0: only `store_times` and the endpoints).
    pub store_every: usize,
    pub store_times: Vec<f64>,
    pub mode: ProjectionMode,
    /// Slow samples per wall for flows that vary along the wall.
    pub slow_samples: usize,
    /// Keep `f`, `A` and `K`; off reduces the system to the heat equation.
    pub couplings: bool,
    /// Backward-Euler start-up on the first step.
    pub startup: bool,
}

impl Default for LayerSettings {
    fn default() -> Self {
        Self {
            nz: 512,
            zmax: None,
            map_scale: DEFAULT_MAP_SCALE,
            dt: 1e-4,
            t_end: 0.5,
            store_every: 0,
            store_times: Vec::new(),
            mode: ProjectionMode::Cross,
            slow_samples: 16,
            couplings: true,
            startup: true,
        }
    }
}

/// Extra forcing appended to the right-hand side (manufactured solutions).
pub trait LayerSource: Sync {
    fn forcing(&self, wall: Wall, s: f64, z: f64, t: f64) -> [f64; 2];
}

/// Solution on one wall at the stored times.
#[derive(Debug, Clone, PartialEq)]
pub struct WallLayer {
    pub wall: Wall,
    /// Tangential components `(b_1, b_2)` per stored time.
    pub ub: Vec<ProfileField>,
    /// Pressure corrector per stored time.
    pub q: Vec<ProfileField>,
    /// Scalar normal corrector `v̄` (`v = v̄ n`) per stored time.
    pub v: Vec<ProfileField>,
    /// Coefficients at `t = 0` for each slow sample.
    pub coefficients: Vec<LayerCoefficients>,
}

impl WallLayer {
    pub fn f_used(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.f).collect()
    }

    pub fn g_used(&self) -> Vec<[f64; 2]> {
        self.coefficients.iter().map(|c| [-c.neumann[0], -c.neumann[1]]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerProfile {
    pub settings: LayerSettings,
    pub fast: FastGrid,
    pub slow: SlowGrid,
    pub times: Vec<f64>,
    pub walls: [WallLayer; 2],
}

impl LayerProfile {
    pub fn wall(&self, wall: Wall) -> &WallLayer {
        &self.walls[wall as usize]
    }

    /// Index of the stored time equal to `t` (to round-off).
    pub fn time_index(&self, t: f64) -> Option<usize> {
        find_time(&self.times, t)
    }
}

pub(crate) fn find_time(times: &[f64], t: f64) -> Option<usize> {
    times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1e-3))
}

/// Slow grid used for a flow: one sample for wall-invariant flows.
pub fn slow_grid_for(flow: &BaseFlow, samples: usize) -> SlowGrid {
    match flow.kind {
        FlowKind::Cell { .. } => SlowGrid::periodic(samples.max(1), flow.geometry.slow_period(), 1.0),
        _ => SlowGrid::single(1.0),
    }
}

/// Step indices at which to store, with the time label recorded for each.
fn store_plan(settings: &LayerSettings, nsteps: usize, dt: f64) -> Result<Vec<(usize, f64)>> {
    let mut plan = vec![(0usize, 0.0)];
    if settings.store_every > 0 {
        for n in (settings.store_every..=nsteps).step_by(settings.store_every) {
            plan.push((n, n as f64 * dt));
        }
    }
    for &t in &settings.store_times {
        let n = (t / dt).round();
        if !(t >= 0.0) || (n * dt - t).abs() > 1e-6 * dt || n as usize > nsteps {
            return Err(Error::StepSize(format!("store time {t} is not a step of dt = {dt} within [0, t_end]")));
        }
        plan.push((n as usize, t));
    }
    if plan.iter().all(|p| p.0 != nsteps) {
        plan.push((nsteps, settings.t_end));
    }
    plan.sort_by_key(|p| p.0);
    plan.dedup_by_key(|p| p.0);
    Ok(plan)
}

pub(crate) fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::StepSize(format!("t_end must be nonnegative, got {t_end}")));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-6 * dt {
        return Err(Error::StepSize(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Second-difference operator with the ghost-node Neumann row at `z = 0`.
/// Unknowns are nodes `0..nz-1`; the last node is held at zero.
struct Diffusion {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    h0: f64,
}

impl Diffusion {
    fn new(z: &[f64]) -> Self {
        let m = z.len() - 1;
        let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let h0 = z[1] - z[0];
        diag[0] = -2.0 / (h0 * h0);
        upper[0] = 2.0 / (h0 * h0);
        for j in 1..m {
            let (hm, hp) = (z[j] - z[j - 1], z[j + 1] - z[j]);
            let c = 2.0 / (hm + hp);
            lower[j] = c / hm;
            upper[j] = c / hp;
            diag[j] = -c / hm - c / hp;
        }
        Self { lower, diag, upper, h0 }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let m = self.diag.len();
        for j in 0..m {
            let mut v = self.diag[j] * u[j] + self.upper[j] * u[j + 1];
            if j > 0 {
                v += self.lower[j] * u[j - 1];
            }
            out[j] = v;
        }
    }

    /// `I − θ dt L`.
    fn implicit(&self, theta_dt: f64) -> Tridiagonal {
        let m = self.diag.len();
        let mut t = Tridiagonal::zeros(m);
        for j in 0..m {
            t.diag[j] = 1.0 - theta_dt * self.diag[j];
            if j > 0 {
                t.lower[j] = -theta_dt * self.lower[j];
            }
            if j + 1 < m {
                t.upper[j] = -theta_dt * self.upper[j];
            }
        }
        t
    }
}

struct WallSolver<'a> {
    flow: &'a BaseFlow,
    wall: Wall,
    settings: &'a LayerSettings,
    fast: &'a FastGrid,
    slow: &'a SlowGrid,
    source: Option<&'a dyn LayerSource>,
    /// `max_j z_j / dz_j` for the CFL check.
    z_over_dz: f64,
}

impl WallSolver<'_> {
    fn coefficients(&self, t: f64) -> Vec<LayerCoefficients> {
        self.slow
            .s
            .iter()
            .map(|&s| layer_coefficients(self.flow, t, self.wall, s, self.settings.mode))
            .collect()
    }

    fn check_cfl(&self, coeffs: &[LayerCoefficients], dt: f64) -> Result<()> {
        if !self.settings.couplings {
            return Ok(());
        }
        let fmax = coeffs.iter().fold(0.0f64, |m, c| m.max(c.f.abs()));
        let cfl = fmax * self.z_over_dz * dt;
        if cfl > 1.0 {
            return Err(Error::StepSize(format!("advection CFL number {cfl:.3} exceeds 1")));
        }
        Ok(())
    }

    /// Explicit part `−f z ∂_z b − A b − K ∂_s b + S`.
    fn explicit(&self, t: f64, b: &ProfileField, coeffs: &[LayerCoefficients]) -> ProfileField {
        let z = &self.fast.z;
        let nz = z.len();
        let ns = self.slow.len();
        let mut e = ProfileField::zeros(self.slow.clone(), self.fast.clone(), 2);
        if self.settings.couplings {
            let ds = if ns > 1 { Some(b.derivative(1, 0)) } else { None };
            for (i, c) in coeffs.iter().enumerate() {
                let dz: [Vec<f64>; 2] = [0, 1].map(|k| derivative(z, b.column(k, i)));
                for j in 0..nz - 1 {
                    for comp in 0..2 {
                        let mut v = -c.f * z[j] * dz[comp][j];
                        for k in 0..2 {
                            v -= c.coupling[comp][k] * b.get(k, i, j);
                            if let Some(ds) = &ds {
                                v -= c.advection[comp][k] * ds.get(k, i, j);
                            }
                        }
                        e.set(comp, i, j, v);
                    }
                }
            }
        }
        if let Some(src) = self.source {
            for (i, &s) in self.slow.s.iter().enumerate() {
                for j in 0..nz - 1 {
                    let f = src.forcing(self.wall, s, z[j], t);
                    for comp in 0..2 {
                        e.set(comp, i, j, e.get(comp, i, j) + f[comp]);
                    }
                }
            }
        }
        e
    }

    /// One implicit step of size `dt`: `(I − θdtL) b⁺ = b + (1−θ)dt L b + dt(boundary + E)`.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        diff: &Diffusion,
        mat: &Tridiagonal,
        theta: f64,
        dt: f64,
        b: &mut ProfileField,
        e: &ProfileField,
        c_old: &[LayerCoefficients],
        c_new: &[LayerCoefficients],
    ) -> Result<()> {
        let m = self.fast.len() - 1;
        let mut lu = vec![0.0; m];
        for i in 0..self.slow.len() {
            for comp in 0..2 {
                let col = b.column(comp, i);
                let mut rhs = col[..m].to_vec();
                if theta < 1.0 {
                    diff.apply(col, &mut lu);
                    for j in 0..m {
                        rhs[j] += (1.0 - theta) * dt * lu[j];
                    }
                }
                let a_old = c_old[i].neumann[comp];
                let a_new = c_new[i].neumann[comp];
                rhs[0] += dt * (-2.0 / diff.h0) * ((1.0 - theta) * a_old + theta * a_new);
                for (j, r) in rhs.iter_mut().enumerate() {
                    *r += dt * e.get(comp, i, j);
                }
                let sol = mat.solve(&rhs)?;
                let out = b.column_mut(comp, i);
                out[..m].copy_from_slice(&sol);
                out[m] = 0.0;
            }
        }
        Ok(())
    }

    fn run(&self, nsteps: usize, plan: &[(usize, f64)]) -> Result<(Vec<ProfileField>, Vec<LayerCoefficients>)> {
        let dt = self.settings.dt;
        let diff = Diffusion::new(&self.fast.z);
        let cn = diff.implicit(0.5 * dt);
        let steady = self.flow.steady();
        let c0 = self.coefficients(0.0);
        self.check_cfl(&c0, dt)?;
        let coeffs_at = |t: f64| if steady { c0.clone() } else { self.coefficients(t) };

        let mut b = ProfileField::zeros(self.slow.clone(), self.fast.clone(), 2);
        let mut stored = Vec::with_capacity(plan.len());
        let mut next = 0;
        let store = |n: usize, b: &ProfileField, next: &mut usize, stored: &mut Vec<ProfileField>| {
            while *next < plan.len() && plan[*next].0 == n {
                stored.push(b.clone());
                *next += 1;
            }
        };
        store(0, &b, &mut next, &mut stored);
        if nsteps == 0 {
            return Ok((stored, c0));
        }

        // first step
        let e0 = self.explicit(0.0, &b, &c0);
        if self.settings.startup {
            let q = 0.25 * dt;
            let be = diff.implicit(q);
            let mut c_old = c0.clone();
            for k in 0..4 {
                let t = k as f64 * q;
                let e = if k == 0 { e0.clone() } else { self.explicit(t, &b, &c_old) };
                let c_new = coeffs_at(t + q);
                self.step(&diff, &be, 1.0, q, &mut b, &e, &c_old, &c_new)?;
                c_old = c_new;
            }
        } else {
            let c1 = coeffs_at(dt);
            self.step(&diff, &cn, 0.5, dt, &mut b, &e0, &c0, &c1)?;
        }
        if !b.is_finite() {
            return Err(Error::Solver { residual: f64::INFINITY });
        }
        store(1, &b, &mut next, &mut stored);

        let mut e_prev = e0;
        let mut c_n = coeffs_at(dt);
        for n in 1..nsteps {
            let t = n as f64 * dt;
            let c_next = coeffs_at(t + dt);
            if !steady {
                self.check_cfl(&c_next, dt)?;
            }
            let e_n = self.explicit(t, &b, &c_n);
            let mut e_ab = e_n.clone();
            for (o, p) in e_ab.values_mut().iter_mut().zip(e_prev.values()) {
                *o = 1.5 * *o - 0.5 * p;
            }
            self.step(&diff, &cn, 0.5, dt, &mut b, &e_ab, &c_n, &c_next)?;
            e_prev = e_n;
            c_n = c_next;
            store(n + 1, &b, &mut next, &mut stored);
        }
        if !b.is_finite() {
            return Err(Error::Solver { residual: f64::INFINITY });
        }
        Ok((stored, c0))
    }
}

pub fn solve_layer(flow: &BaseFlow, settings: &LayerSettings) -> Result<LayerProfile> {
    solve_layer_with(flow, settings, None)
}

/// [`solve_layer`] with an additional right-hand side.
pub fn solve_layer_with(
    flow: &BaseFlow,
    settings: &LayerSettings,
    source: Option<&dyn LayerSource>,
) -> Result<LayerProfile> {
    let fast = FastGrid::mapped(settings.nz, settings.map_scale, settings.zmax)?;
    let slow = slow_grid_for(flow, settings.slow_samples);
    solve_layer_on(flow, settings, fast, slow, source)
}

/// Solve on caller-provided grids.
pub fn solve_layer_on(
    flow: &BaseFlow,
    settings: &LayerSettings,
    fast: FastGrid,
    slow: SlowGrid,
    source: Option<&dyn LayerSource>,
) -> Result<LayerProfile> {
    let nsteps = step_count(settings.dt, settings.t_end)?;
    let plan = store_plan(settings, nsteps, settings.dt)?;
    let z = &fast.z;
    let z_over_dz = (1..z.len() - 1)
        .map(|j| z[j] / (z[j] - z[j - 1]).min(z[j + 1] - z[j]))
        .fold(0.0, f64::max);
    let times: Vec<f64> = plan.iter().map(|p| p.1).collect();
    let solve_wall = |wall: Wall| -> Result<WallLayer> {
        let solver = WallSolver {
            flow,
            wall,
            settings,
            fast: &fast,
            slow: &slow,
            source,
            z_over_dz,
        };
        let (ub, coefficients) = solver.run(nsteps, &plan)?;
        let q = ub
            .iter()
            .zip(&times)
            .map(|(b, &t)| pressure_corrector_q(b, flow, wall, t, settings.mode))
            .collect();
        let v = ub.iter().map(|b| velocity_corrector_v(b, &flow.geometry, wall)).collect();
        Ok(WallLayer { wall, ub, q, v, coefficients })
    };
    let walls = std::thread::scope(|scope| {
        let hi = scope.spawn(|| solve_wall(Wall::Upper));
        let lo = solve_wall(Wall::Lower);
        let hi = hi.join().expect("layer worker panicked");
        lo.and_then(|lo| hi.map(|hi| [lo, hi]))
    })?;
    Ok(LayerProfile { settings: settings.clone(), fast, slow, times, walls })
}

/// Closed-form profile of the heat equation on the half line with constant
/// Neumann datum `∂_z b(0) = −g`: `g (2√(t/π) e^{−z²/4t} − z erfc(z/2√t))`.
pub fn erfc_profile(g: f64, t: f64, z: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let st = t.sqrt();
    g * (2.0 * st / std::f64::consts::PI.sqrt() * (-z * z / (4.0 * t)).exp()
        - z * statrs::function::erf::erfc(z / (2.0 * st)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{swirl_base_flow, Profile1d};
    use crate::geometry::Geometry;

    #[test]
    fn vortex_layer_is_identically_zero() {
        let g = Geometry::annulus(1.0, 2.0, 0.45).unwrap();
        let flow = swirl_base_flow(Profile1d::Vortex { c: 1.0 }, &g).unwrap();
        let s = LayerSettings { nz: 64, dt: 1e-3, t_end: 0.05, store_every: 10, ..Default::default() };
        let p = solve_layer(&flow, &s).unwrap();
        for w in &p.walls {
            assert!(w.ub.iter().all(|f| f.max_abs() == 0.0));
            assert!(w.q.iter().all(|f| f.max_abs() == 0.0));
        }
        assert_eq!(p.times.len(), 6);
    }

    #[test]
    fn store_times_must_be_steps() {
        let s = LayerSettings { dt: 1e-2, t_end: 0.1, store_times: vec![0.055], ..Default::default() };
        assert!(matches!(store_plan(&s, 10, 1e-2), Err(Error::StepSize(_))));
        assert!(step_count(0.0, 1.0).is_err());
        assert!(step_count(0.3, 1.0).is_err());
    }

    #[test]
    fn erfc_profile_matches_neumann_datum() {
        let (g, t, h) = (1.7, 0.3, 1e-6);
        let d = (erfc_profile(g, t, h) - erfc_profile(g, t, 0.0)) / h;
        assert!((d + g).abs() < 1e-5);
        assert!((erfc_profile(g, t, 0.0) - 2.0 * g * (t / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }
}
