//! Invariant suite behind `vvlab check`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::euler::{
    channel_base_flow, euler_residual, manufactured_base_flow, swirl_base_flow, ManufacturedCase, Profile1d,
};
use crate::expansion::{assemble_ansatz, extract_remainder, leray_project, remainder_bc_residual};
use crate::geometry::{Clustering, Geometry, VolumeGrid, Wall};
use crate::layer::{compatibility_residual, erfc_profile, neumann_defect, solve_layer, velocity_corrector_v, LayerSettings};
use crate::ns::{bc_residual, energy_identity_residual, solve_ns_swirl, NsSettings, SlipOperator};
use crate::numerics::norm;
use crate::spaces::{
    gronwall_local_bound, hardy_ratio, scaling_exponent_check, weighted_inner, FastGrid, ProfileField,
    ScalingMode, SlowGrid, VectorField, WallProfile,
};

use super::{run_convergence_study, StudyConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &str, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.into(), pass, detail }
}

/// Observed orders `log2(e_k / e_{k+1})` of a dyadic sequence.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn annulus() -> Geometry {
    Geometry::annulus(1.0, 2.0, 0.45).expect("valid")
}

fn channel() -> Geometry {
    Geometry::flat_channel(1.0, 0.45).expect("valid")
}

pub fn check_geometry() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let h = 1e-6;
    for g in [annulus(), channel()] {
        let (a, b) = g.normal_bounds();
        let axis = g.normal_axis();
        for k in 1..40 {
            let q = a + (b - a) * k as f64 / 40.0;
            let x = g.point_at(Wall::Lower, 0.3, q);
            let d = (b - a) * 1e-9;
            if ((q - a) - (b - q)).abs() < 1e-3 {
                continue;
            }
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            let grad = (g.signed_distance(xp)? - g.signed_distance(xm)?) / (2.0 * h);
            let n = g.normal_field(x)?;
            let phi = g.signed_distance(x)?;
            if phi < g.collar_width - d {
                worst = worst.max((grad - n[axis]).abs());
                worst = worst.max((norm(n) - 1.0).abs());
            }
            if phi <= 0.5 * g.collar_width && g.cutoff(phi) != 1.0 {
                worst = f64::INFINITY;
            }
            if phi >= g.collar_width && g.cutoff(phi) != 0.0 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(outcome("geometry: grad phi = n, |n| = 1, cutoff support", worst < 1e-6, format!("max defect {worst:.2e}")))
}

pub fn check_euler() -> Result<CheckOutcome> {
    let a = annulus();
    let c = channel();
    let ga = a.volume_grid(64, Clustering::Uniform)?;
    let gc = c.volume_grid(64, Clustering::Uniform)?;
    let flows = [
        swirl_base_flow(Profile1d::Rigid { omega: 1.0 }, &a)?,
        swirl_base_flow(Profile1d::Vortex { c: 1.0 }, &a)?,
        swirl_base_flow(Profile1d::Poly(vec![0.5, -1.0, 0.75]), &a)?,
        channel_base_flow(Profile1d::Poly(vec![0.0, 0.0, 3.0, -2.0]), &c)?,
        channel_base_flow(Profile1d::Cosine { k: 1.0, h: 1.0 }, &c)?,
        manufactured_base_flow(ManufacturedCase::Cell, &c)?,
        manufactured_base_flow(ManufacturedCase::CellPulse, &c)?,
    ];
    let mut worst = 0.0f64;
    for f in &flows {
        let g = if f.geometry.is_annulus() { &ga } else { &gc };
        worst = worst.max(euler_residual(f, g, 0.2)?);
    }
    let mut wrong = manufactured_base_flow(ManufacturedCase::Cell, &c)?;
    wrong.pressure_scale = 0.0;
    let control = euler_residual(&wrong, &gc, 0.0)?;
    Ok(outcome(
        "euler: exact families balance, wrong pressure does not",
        worst < 1e-10 && control > 0.1,
        format!("max residual {worst:.2e}, negative control {control:.3}"),
    ))
}

fn random_field(rng: &mut ChaCha8Rng, grid: &VolumeGrid) -> VectorField {
    let (a, b) = grid.geometry.normal_bounds();
    let coef: Vec<[f64; 3]> = (0..6).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let mut f = VectorField::zeros(grid.len());
    for (i, &q) in grid.nodes.iter().enumerate() {
        let x = (q - a) / (b - a);
        for c in 0..3 {
            f.comps[c][i] = coef.iter().enumerate().map(|(k, cf)| cf[c] * (k as f64 * PI * x + cf[(c + 1) % 3]).cos()).sum();
        }
    }
    f
}

/// Divergence on cells of the normal component.
fn cell_divergence(grid: &VolumeGrid, f: &VectorField) -> f64 {
    let g = &grid.geometry;
    let u = &f.comps[g.normal_axis()];
    let x = &grid.nodes;
    (0..x.len() - 1)
        .map(|c| {
            let wm = g.metric(0.5 * (x[c] + x[c + 1]));
            ((g.metric(x[c + 1]) * u[c + 1] - g.metric(x[c]) * u[c]) / ((x[c + 1] - x[c]) * wm)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn check_projector() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut idem, mut orth, mut wall, mut div) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for g in [annulus(), channel()] {
        for clustering in [Clustering::Uniform, Clustering::Cosine] {
            let grid = g.volume_grid(96, clustering)?;
            for _ in 0..10 {
                let u = random_field(&mut rng, &grid);
                let scale = u.max_abs().max(1e-300);
                let (p, q) = leray_project(&u, &grid)?;
                let (pp, _) = leray_project(&p, &grid)?;
                idem = idem.max(pp.sub(&p).max_abs() / scale);
                let l2 = weighted_inner(&grid, &u, &u);
                orth = orth.max(weighted_inner(&grid, &p, &q).abs() / l2);
                let axis = g.normal_axis();
                wall = wall.max(p.comps[axis][0].abs()).max(p.comps[axis][grid.len() - 1].abs());
                div = div.max(cell_divergence(&grid, &p) / scale);
            }
        }
    }
    Ok(outcome(
        "projector: idempotent, orthogonal, tangent, divergence-free",
        idem < 1e-10 && orth < 1e-10 && wall < 1e-10 && div < 1e-8,
        format!("idempotence {idem:.1e}, orthogonality {orth:.1e}, wall {wall:.1e}, div {div:.1e}"),
    ))
}

/// Max energy-identity residual (excluding the start-up interval) of the
/// channel cosine eigenmode for each `dt`.
pub fn energy_identity_sequence(dts: &[f64]) -> Result<Vec<f64>> {
    let g = channel();
    let u0 = Profile1d::Cosine { k: 1.0, h: 1.0 };
    dts.iter()
        .map(|&dt| {
            let s = NsSettings { nr: 64, dt, t_end: 0.2, store_every: 1, clustering: Clustering::Uniform, ..Default::default() };
            let sol = crate::ns::solve_ns_channel(&g, &u0, 0.5, &s)?;
            let r = energy_identity_residual(&sol);
            Ok(r[1..].iter().cloned().fold(0.0, f64::max))
        })
        .collect()
}

pub fn check_energy_identity() -> Result<CheckOutcome> {
    let e = energy_identity_sequence(&[1e-2, 5e-3, 2.5e-3, 1.25e-3])?;
    let orders = observed_orders(&e);
    let pass = orders.iter().all(|o| (o - 2.0).abs() <= 0.2);
    Ok(outcome("ns: energy identity residual is second order in dt", pass, format!("residuals {}, orders {:.2?}", sci(&e), orders)))
}

/// Relative error of `b(t, 0)` against `2 g √(t/π)` on both walls.
pub fn erfc_oracle(nz: usize, dt: f64, t: f64) -> Result<f64> {
    let flow = swirl_base_flow(Profile1d::Rigid { omega: 1.0 }, &annulus())?;
    let s = LayerSettings { nz, dt, t_end: t, ..Default::default() };
    let p = solve_layer(&flow, &s)?;
    let k = p.times.len() - 1;
    let mut worst = 0.0f64;
    for w in &p.walls {
        let g = w.g_used()[0][0];
        let exact = erfc_profile(g, t, 0.0);
        worst = worst.max((w.ub[k].get(0, 0, 0) - exact).abs() / exact.abs());
    }
    Ok(worst)
}

pub fn check_erfc() -> Result<CheckOutcome> {
    let e = erfc_oracle(512, 1e-4, 0.25)?;
    Ok(outcome("layer: erfc oracle at z = 0", e < 1e-4, format!("relative error {e:.2e}")))
}

/// Fitted ν-exponents of `‖e^{-φ/√ν}‖_p` for `p = 2, 4, 6` on a flat channel.
pub fn scaling_slopes() -> Result<Vec<(f64, f64)>> {
    let g = channel();
    let grid = g.volume_grid(4096, Clustering::Cosine)?;
    let fast = FastGrid::mapped(2048, 2.0, None)?;
    let prof = ProfileField::from_fn(SlowGrid::single(1.0), fast, 1, |_, _, z| (-z).exp());
    let walls = [WallProfile::new(Wall::Lower, &prof)];
    [2.0, 4.0, 6.0]
        .iter()
        .map(|&p| {
            let c = scaling_exponent_check(&walls, &grid, &[1e-2, 1e-3, 1e-4, 1e-5], p, ScalingMode::Exponent)?;
            Ok((p, c.slope))
        })
        .collect()
}

pub fn check_scaling() -> Result<CheckOutcome> {
    let s = scaling_slopes()?;
    let pass = s.iter().all(|(p, sl)| (sl - 0.5 / p).abs() <= 0.02);
    Ok(outcome("spaces: layer scaling exponent 1/(2p)", pass, format!("(p, slope) {s:.4?}")))
}

pub fn check_hardy() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut pass = true;
    for g in [annulus(), channel()] {
        let grid = g.volume_grid(1024, Clustering::Cosine)?;
        let (a, b) = g.normal_bounds();
        let metric_ratio = g.metric(b) / g.metric(a);
        for &(p, beta) in &[(2.0f64, 0.0f64), (2.0, 0.5), (4.0, 0.0), (4.0, 1.5)] {
            let bound = (p / (p - 1.0 - beta)).powf(p) * metric_ratio;
            for _ in 0..5 {
                let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let u: Vec<f64> = grid
                    .nodes
                    .iter()
                    .map(|&q| {
                        let x = (q - a) / (b - a);
                        c.iter().enumerate().map(|(k, ck)| ck * ((k + 1) as f64 * PI * x).sin()).sum()
                    })
                    .collect();
                let mut u = u;
                let n = u.len();
                u[0] = 0.0;
                u[n - 1] = 0.0;
                let r = hardy_ratio(&grid, &u, p, beta)?;
                worst = worst.max(r / bound);
                pass &= r.is_finite() && r <= bound;
            }
        }
        let zero = vec![0.0; grid.len()];
        pass &= matches!(hardy_ratio(&grid, &zero, 2.0, 1.0), Err(Error::InvalidParameter(_)));
    }
    Ok(outcome("spaces: Hardy ratios bounded", pass, format!("max ratio / bound {worst:.3}")))
}

fn rk4(y0: f64, h: &[f64], c0: f64, alpha: f64, t: f64, sub: usize) -> f64 {
    let m = h.len() - 1;
    let dt_s = t / m as f64;
    let hf = |s: f64| {
        let x = (s / dt_s).clamp(0.0, m as f64);
        let i = (x.floor() as usize).min(m - 1);
        let w = x - i as f64;
        h[i] * (1.0 - w) + h[i + 1] * w
    };
    let f = |s: f64, y: f64| hf(s) + c0 * y.max(0.0).powf(1.0 + alpha);
    let n = m * sub;
    let dt = t / n as f64;
    let mut y = y0;
    for k in 0..n {
        let s = k as f64 * dt;
        let k1 = f(s, y);
        let k2 = f(s + 0.5 * dt, y + 0.5 * dt * k1);
        let k3 = f(s + 0.5 * dt, y + 0.5 * dt * k2);
        let k4 = f(s + dt, y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

/// Runs `cases` randomized comparisons; returns the number where the bound
/// fell below the integrated solution, and the smallest bound/solution ratio.
pub fn gronwall_cases(cases: usize, seed: u64) -> Result<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..cases {
        let y0 = rng.gen_range(0.0..1.0);
        let c0 = rng.gen_range(0.1..2.0);
        let alpha = rng.gen_range(0.25..2.0);
        let m = 64;
        let amp = rng.gen_range(0.0..2.0);
        let freq = rng.gen_range(0.5..6.0);
        let mut t = 1.0;
        let (h, bound) = loop {
            let h: Vec<f64> = (0..=m).map(|i| amp * (1.0 + (freq * t * i as f64 / m as f64).sin())).collect();
            match gronwall_local_bound(y0, &h, c0, alpha, t) {
                Ok(b) => break (h, b),
                Err(Error::BlowUpHorizon { .. }) => t *= 0.5,
                Err(e) => return Err(e),
            }
        };
        let y = rk4(y0, &h, c0, alpha, t, 64);
        if bound < y * (1.0 - 1e-9) {
            violations += 1;
        }
        if y > 0.0 {
            min_ratio = min_ratio.min(bound / y);
        }
    }
    Ok((violations, min_ratio))
}

pub fn check_gronwall() -> Result<CheckOutcome> {
    let (v, r) = gronwall_cases(100, 2024)?;
    Ok(outcome("spaces: Gronwall bound dominates RK4 (100 cases)", v == 0, format!("violations {v}, min bound/solution {r:.4}")))
}

/// NS wall-curl residual for rigid rotation under joint refinement of the
/// grid and the time step.
pub fn ns_bc_sequence(levels: &[usize]) -> Result<Vec<f64>> {
    let g = annulus();
    levels
        .iter()
        .map(|&nr| {
            let dt = 0.8 / nr as f64;
            let s = NsSettings { nr, dt, t_end: dt * (nr as f64 / 8.0).round(), clustering: Clustering::Uniform, ..Default::default() };
            let sol = solve_ns_swirl(&g, &Profile1d::Rigid { omega: 1.0 }, 1e-2, &s)?;
            Ok(*bc_residual(&sol).last().expect("stored"))
        })
        .collect()
}

/// Neumann defect of the rigid-rotation layer under `z` refinement.
pub fn layer_bc_sequence(levels: &[usize]) -> Result<Vec<f64>> {
    let flow = swirl_base_flow(Profile1d::Rigid { omega: 1.0 }, &annulus())?;
    levels
        .iter()
        .map(|&nz| {
            let s = LayerSettings { nz, dt: 1e-3, t_end: 0.1, ..Default::default() };
            let p = solve_layer(&flow, &s)?;
            let k = p.times.len() - 1;
            Ok(p.walls.iter().map(|w| neumann_defect(&w.ub[k], &w.coefficients)).fold(0.0, f64::max))
        })
        .collect()
}

/// Compatibility residual `div_x u^b + ∂_z v·n` for a profile varying along
/// the channel wall, under joint refinement in `s` and `z`.
pub fn compatibility_sequence(levels: &[usize]) -> Result<Vec<f64>> {
    let c = channel();
    levels
        .iter()
        .map(|&nz| {
            let slow = SlowGrid::periodic(nz / 4, c.slow_period(), 1.0);
            let fast = FastGrid::mapped(nz, 2.0, None)?;
            let k = 2.0 * PI / c.slow_period();
            let ub = ProfileField::from_fn(slow, fast, 2, |comp, s, z| {
                if comp == 0 { (k * s).sin() * (-z).exp() } else { 0.0 }
            });
            let v = velocity_corrector_v(&ub, &c, Wall::Lower);
            Ok(compatibility_residual(&ub, &v, &c, Wall::Lower))
        })
        .collect()
}

/// Remainder boundary residuals `(normal, curl)` of the rigid-rotation
/// benchmark under joint refinement of every discretization parameter.
pub fn remainder_bc_sequence(levels: &[usize]) -> Result<Vec<(f64, f64)>> {
    let g = annulus();
    let flow = swirl_base_flow(Profile1d::Rigid { omega: 1.0 }, &g)?;
    let nu = 1e-2;
    let t = 0.1;
    levels
        .iter()
        .map(|&n| {
            let dt = 0.4 / n as f64;
            let ls = LayerSettings { nz: n, dt, t_end: t, ..Default::default() };
            let layer = solve_layer(&flow, &ls)?;
            let ns = NsSettings { nr: n, dt, t_end: t, ..Default::default() };
            let sol = solve_ns_swirl(&g, &Profile1d::Rigid { omega: 1.0 }, nu, &ns)?;
            let bundle = assemble_ansatz(&flow, &layer, &sol.grid, nu, &[t])?;
            let rem = extract_remainder(&sol, &bundle)?;
            remainder_bc_residual(&rem, &layer)
        })
        .collect()
}

pub fn check_bc_orders() -> Result<CheckOutcome> {
    let ns = ns_bc_sequence(&[64, 128, 256, 512])?;
    let layer = layer_bc_sequence(&[64, 128, 256])?;
    let compat = compatibility_sequence(&[64, 128, 256])?;
    let rem = remainder_bc_sequence(&[100, 200, 400])?;
    let rem_curl: Vec<f64> = rem.iter().map(|r| r.1).collect();
    let o = [observed_orders(&ns), observed_orders(&layer), observed_orders(&compat), observed_orders(&rem_curl)];
    let pass = o.iter().all(|v| min_of(v) >= 1.5) && rem.iter().all(|r| r.0 < 1e-12);
    Ok(outcome(
        "bc residuals shrink at order >= 1.5",
        pass,
        format!(
            "ns {:.2?}, layer neumann {:.2?}, compatibility {:.2?}, remainder curl {:.2?} (normal {:.1e})",
            o[0], o[1], o[2], o[3], rem.iter().map(|r| r.0).fold(0.0, f64::max)
        ),
    ))
}

pub fn check_ns_invariants() -> Result<CheckOutcome> {
    let g = annulus();
    let s = NsSettings { nr: 128, dt: 1e-2, t_end: 1.0, store_every: 5, ..Default::default() };
    let vortex = Profile1d::Vortex { c: 1.0 };
    let sol = solve_ns_swirl(&g, &vortex, 1e-2, &s)?;
    let drift = crate::ns::drift_from(&sol, &vortex)?.into_iter().fold(0.0, f64::max);
    let mut monotone = true;
    for dt in [1e-1, 1e-2, 1e-3] {
        let s = NsSettings { nr: 128, dt, t_end: 1.0, store_every: 1, ..Default::default() };
        let sol = solve_ns_swirl(&g, &Profile1d::Poly(vec![0.3, 1.0, -0.4]), 5e-2, &s)?;
        let op = SlipOperator::new(&sol.grid);
        let e: Vec<f64> = sol.u.iter().map(|u| op.energy(u)).collect();
        monotone &= e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14));
    }
    Ok(outcome(
        "ns: c/r steady, energy non-increasing",
        drift < 1e-10 && monotone,
        format!("vortex drift {drift:.1e}, monotone energy {monotone}"),
    ))
}

fn check_preset(name: &str) -> Result<CheckOutcome> {
    let cfg = StudyConfig::preset(name)?;
    let report = run_convergence_study(&cfg, std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let slopes: Vec<String> = report
        .rates
        .iter()
        .map(|r| format!("{}={}", r.norm, r.fit.map_or("n/a".to_string(), |f| format!("{:.3}", f.slope))))
        .collect();
    Ok(outcome(
        &format!("study: preset {name}"),
        report.pass,
        format!("exact regime {}, slopes [{}]", report.exact_regime, slopes.join(", ")),
    ))
}

/// Run the suite, plus the preset's study chain when one is given.
pub fn run_checks(preset: Option<&str>) -> Result<Vec<CheckOutcome>> {
    if let Some(p) = preset {
        StudyConfig::preset(p)?;
    }
    let checks: [fn() -> Result<CheckOutcome>; 10] = [
        check_geometry,
        check_euler,
        check_projector,
        check_energy_identity,
        check_erfc,
        check_scaling,
        check_hardy,
        check_gronwall,
        check_bc_orders,
        check_ns_invariants,
    ];
    let mut out: Vec<CheckOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = checks.iter().map(|c| scope.spawn(c)).collect();
        handles.into_iter().map(|h| h.join().expect("check panicked")).collect::<Result<Vec<_>>>()
    })?;
    if let Some(p) = preset {
        out.push(check_preset(p)?);
    }
    Ok(out)
}
