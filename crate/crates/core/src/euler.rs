//! Inviscid base flows `u⁰` in the reduced geometries and the coefficients
//! they hand to the layer equation.
//!
//! All vectors use the native frame of the geometry. The Jacobian `G`
//! returned by [`BaseFlow::jacobian`] is defined by `(a·∇)u⁰ = G a` and so
//! includes the connection terms of the cylindrical frame.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, GeometryKind, VolumeGrid, Wall};
use crate::numerics::{add, cross, dot, matvec, norm, sub, Vec3};

pub type Mat3 = [[f64; 3]; 3];

/// A smooth function of the wall-normal coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile1d {
    /// `Σ c_i q^i`.
    Poly(Vec<f64>),
    /// `Ω q`.
    Rigid { omega: f64 },
    /// `c / q`.
    Vortex { c: f64 },
    /// `cos(kπ q / h)`.
    Cosine { k: f64, h: f64 },
}

impl Profile1d {
    /// Value and first two derivatives.
    pub fn eval(&self, q: f64) -> [f64; 3] {
        match self {
            Profile1d::Poly(c) => {
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &ci in c.iter().rev() {
                    d2 = d2 * q + 2.0 * d1;
                    d1 = d1 * q + v;
                    v = v * q + ci;
                }
                [v, d1, d2]
            }
            Profile1d::Rigid { omega } => [omega * q, *omega, 0.0],
            Profile1d::Vortex { c } => [c / q, -c / (q * q), 2.0 * c / (q * q * q)],
            Profile1d::Cosine { k, h } => {
                let a = k * PI / h;
                [(a * q).cos(), -a * (a * q).sin(), -a * a * (a * q).cos()]
            }
        }
    }

    pub fn value(&self, q: f64) -> f64 {
        self.eval(q)[0]
    }

    fn check_finite(&self, a: f64, b: f64) -> Result<()> {
        for i in 0..=64 {
            let q = a + (b - a) * i as f64 / 64.0;
            if self.eval(q).iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProfile(format!("profile not finite at q = {q}")));
            }
        }
        Ok(())
    }
}

/// Named base-flow family, as written in configuration files.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Rigid { omega: f64 },
    Vortex { c: f64 },
    SwirlPoly(Vec<f64>),
    ShearPoly(Vec<f64>),
    ShearCos { k: f64 },
    Manufactured(ManufacturedCase),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedCase {
    /// Steady cellular flow.
    Cell,
    /// Cellular flow with time-dependent amplitude, driven by a body force.
    CellPulse,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {t:?} in family coefficients")))
        })
        .collect()
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let scalar = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .parse()
                    .map_err(|_| Error::Config(format!("bad parameter in family {s:?}"))),
            }
        };
        let list = || -> Result<Vec<f64>> {
            arg.ok_or_else(|| Error::Config(format!("family {s:?} needs coefficients")))
                .and_then(parse_list)
        };
        Ok(match head {
            "rigid" => Family::Rigid { omega: scalar(1.0)? },
            "vortex" => Family::Vortex { c: scalar(1.0)? },
            "swirl_poly" => Family::SwirlPoly(list()?),
            "shear_poly" => Family::ShearPoly(list()?),
            "shear_cos" => Family::ShearCos { k: scalar(1.0)? },
            "manufactured" => match arg {
                Some("cell") => Family::Manufactured(ManufacturedCase::Cell),
                Some("cell_pulse") => Family::Manufactured(ManufacturedCase::CellPulse),
                _ => return Err(Error::Config(format!("unknown manufactured case in {s:?}"))),
            },
            _ => return Err(Error::Config(format!("unknown euler family {s:?}"))),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |c: &[f64]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Family::Rigid { omega } => write!(f, "rigid:{omega}"),
            Family::Vortex { c } => write!(f, "vortex:{c}"),
            Family::SwirlPoly(c) => write!(f, "swirl_poly:{}", join(c)),
            Family::ShearPoly(c) => write!(f, "shear_poly:{}", join(c)),
            Family::ShearCos { k } => write!(f, "shear_cos:{k}"),
            Family::Manufactured(ManufacturedCase::Cell) => write!(f, "manufactured:cell"),
            Family::Manufactured(ManufacturedCase::CellPulse) => {
                write!(f, "manufactured:cell_pulse")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    /// `U(r) e_θ` in the annulus.
    Swirl(Profile1d),
    /// `U(y) e_x` in the channel.
    Shear(Profile1d),
    /// Stream function `ψ = ε a(t) sin(kx) sin(ly)`, `l = π/H`.
    Cell { eps: f64, k: f64, l: f64, pulse: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseFlow {
    pub geometry: Geometry,
    pub kind: FlowKind,
    pub tag: String,
    /// Multiplies the pressure; anything other than 1 breaks the momentum
    /// balance (used as a negative control).
    pub pressure_scale: f64,
}

/// Default amplitude of the manufactured cellular flow.
pub const CELL_EPS: f64 = 0.1;

pub fn swirl_base_flow(profile: Profile1d, geometry: &Geometry) -> Result<BaseFlow> {
    let GeometryKind::AnnulusGap { r1, r2, .. } = geometry.kind else {
        return Err(Error::Config("swirl flows need an annulus geometry".into()));
    };
    profile.check_finite(r1, r2)?;
    let tag = match &profile {
        Profile1d::Rigid { omega } => format!("rigid_rotation:{omega}"),
        Profile1d::Vortex { c } => format!("potential_vortex:{c}"),
        _ => "general_swirl".to_string(),
    };
    Ok(BaseFlow { geometry: *geometry, kind: FlowKind::Swirl(profile), tag, pressure_scale: 1.0 })
}

pub fn channel_base_flow(profile: Profile1d, geometry: &Geometry) -> Result<BaseFlow> {
    let GeometryKind::FlatChannel { height, .. } = geometry.kind else {
        return Err(Error::Config("shear flows need a flat channel geometry".into()));
    };
    profile.check_finite(0.0, height)?;
    Ok(BaseFlow {
        geometry: *geometry,
        kind: FlowKind::Shear(profile),
        tag: "channel_shear".into(),
        pressure_scale: 1.0,
    })
}

pub fn manufactured_base_flow(case: ManufacturedCase, geometry: &Geometry) -> Result<BaseFlow> {
    let GeometryKind::FlatChannel { height, lx, .. } = geometry.kind else {
        return Err(Error::Config("manufactured flows need a flat channel geometry".into()));
    };
    let pulse = case == ManufacturedCase::CellPulse;
    Ok(BaseFlow {
        geometry: *geometry,
        kind: FlowKind::Cell { eps: CELL_EPS, k: 2.0 * PI / lx, l: PI / height, pulse },
        tag: if pulse { "manufactured:cell_pulse" } else { "manufactured:cell" }.into(),
        pressure_scale: 1.0,
    })
}

impl Family {
    pub fn build(&self, geometry: &Geometry) -> Result<BaseFlow> {
        match self {
            Family::Rigid { omega } => swirl_base_flow(Profile1d::Rigid { omega: *omega }, geometry),
            Family::Vortex { c } => swirl_base_flow(Profile1d::Vortex { c: *c }, geometry),
            Family::SwirlPoly(c) => swirl_base_flow(Profile1d::Poly(c.clone()), geometry),
            Family::ShearPoly(c) => channel_base_flow(Profile1d::Poly(c.clone()), geometry),
            Family::ShearCos { k } => {
                let (_, h) = geometry.normal_bounds();
                channel_base_flow(Profile1d::Cosine { k: *k, h }, geometry)
            }
            Family::Manufactured(case) => manufactured_base_flow(*case, geometry),
        }
    }
}

impl BaseFlow {
    pub fn steady(&self) -> bool {
        !matches!(self.kind, FlowKind::Cell { pulse: true, .. })
    }

    /// Wall-normal profile of the tangential flow, when the flow is one.
    pub fn profile(&self) -> Option<&Profile1d> {
        match &self.kind {
            FlowKind::Swirl(p) | FlowKind::Shear(p) => Some(p),
            FlowKind::Cell { .. } => None,
        }
    }

    fn amplitude(&self, t: f64) -> (f64, f64) {
        match self.kind {
            FlowKind::Cell { pulse: true, .. } => (1.0 + 0.5 * t, 0.5),
            _ => (1.0, 0.0),
        }
    }

    pub fn velocity(&self, t: f64, x: Vec3) -> Vec3 {
        match &self.kind {
            FlowKind::Swirl(p) => [0.0, p.value(x[0]), 0.0],
            FlowKind::Shear(p) => [p.value(x[1]), 0.0, 0.0],
            FlowKind::Cell { eps, k, l, .. } => {
                let a = self.amplitude(t).0 * eps;
                [
                    a * l * (k * x[0]).sin() * (l * x[1]).cos(),
                    -a * k * (k * x[0]).cos() * (l * x[1]).sin(),
                    0.0,
                ]
            }
        }
    }

    pub fn dt_velocity(&self, t: f64, x: Vec3) -> Vec3 {
        let (a, da) = self.amplitude(t);
        if da == 0.0 {
            return [0.0; 3];
        }
        let u = self.velocity(t, x);
        u.map(|v| v * da / a)
    }

    /// `G` with `(a·∇)u⁰ = G a`.
    pub fn jacobian(&self, t: f64, x: Vec3) -> Mat3 {
        match &self.kind {
            FlowKind::Swirl(p) => {
                let r = x[0];
                let [u, du, _] = p.eval(r);
                [[0.0, -u / r, 0.0], [du, 0.0, 0.0], [0.0; 3]]
            }
            FlowKind::Shear(p) => [[0.0, p.eval(x[1])[1], 0.0], [0.0; 3], [0.0; 3]],
            FlowKind::Cell { eps, k, l, .. } => {
                let a = self.amplitude(t).0 * eps;
                let (sx, cx) = (k * x[0]).sin_cos();
                let (sy, cy) = (l * x[1]).sin_cos();
                [
                    [a * l * k * cx * cy, -a * l * l * sx * sy, 0.0],
                    [a * k * k * sx * sy, -a * k * l * cx * cy, 0.0],
                    [0.0; 3],
                ]
            }
        }
    }

    pub fn curl(&self, t: f64, x: Vec3) -> Vec3 {
        match &self.kind {
            FlowKind::Swirl(p) => {
                let [u, du, _] = p.eval(x[0]);
                [0.0, 0.0, du + u / x[0]]
            }
            FlowKind::Shear(p) => [0.0, 0.0, -p.eval(x[1])[1]],
            FlowKind::Cell { eps, k, l, .. } => {
                let a = self.amplitude(t).0 * eps;
                [0.0, 0.0, a * (k * k + l * l) * (k * x[0]).sin() * (l * x[1]).sin()]
            }
        }
    }

    pub fn divergence(&self, t: f64, x: Vec3) -> f64 {
        let g = self.jacobian(t, x);
        g[0][0] + g[1][1] + g[2][2]
    }

    pub fn pressure(&self, t: f64, x: Vec3) -> f64 {
        let p = match &self.kind {
            FlowKind::Swirl(prof) => {
                let GeometryKind::AnnulusGap { r1, .. } = self.geometry.kind else { unreachable!() };
                match prof {
                    Profile1d::Rigid { omega } => 0.5 * omega * omega * (x[0] * x[0] - r1 * r1),
                    Profile1d::Vortex { c } => 0.5 * c * c * (1.0 / (r1 * r1) - 1.0 / (x[0] * x[0])),
                    _ => simpson(|r| prof.value(r).powi(2) / r, r1, x[0], 256),
                }
            }
            FlowKind::Shear(_) => 0.0,
            FlowKind::Cell { eps, k, l, .. } => {
                let a = self.amplitude(t).0;
                let u = self.velocity(t, x);
                let psi = a * eps * (k * x[0]).sin() * (l * x[1]).sin();
                -0.5 * dot(u, u) - 0.5 * (k * k + l * l) * psi * psi
            }
        };
        self.pressure_scale * p
    }

    pub fn grad_pressure(&self, t: f64, x: Vec3) -> Vec3 {
        let g = match &self.kind {
            FlowKind::Swirl(p) => [p.value(x[0]).powi(2) / x[0], 0.0, 0.0],
            FlowKind::Shear(_) => [0.0; 3],
            FlowKind::Cell { eps, k, l, .. } => {
                // ∇π = -(G^T u) - κ² ψ ∇ψ
                let a = self.amplitude(t).0 * eps;
                let u = self.velocity(t, x);
                let gm = self.jacobian(t, x);
                let psi = a * (k * x[0]).sin() * (l * x[1]).sin();
                let dpsi = [a * k * (k * x[0]).cos() * (l * x[1]).sin(), a * l * (k * x[0]).sin() * (l * x[1]).cos()];
                let kap2 = k * k + l * l;
                [
                    -(gm[0][0] * u[0] + gm[1][0] * u[1]) - kap2 * psi * dpsi[0],
                    -(gm[0][1] * u[0] + gm[1][1] * u[1]) - kap2 * psi * dpsi[1],
                    0.0,
                ]
            }
        };
        g.map(|v| v * self.pressure_scale)
    }

    /// Body force the flow was built with (zero except for driven manufactured cases).
    pub fn forcing(&self, t: f64, x: Vec3) -> Vec3 {
        self.dt_velocity(t, x)
    }

    /// Stretching coefficient `f = u⁰·n/φ` on the wall, i.e. `n·G·n`.
    pub fn stretching(&self, t: f64, wall: Wall, s: f64) -> f64 {
        let x = self.geometry.wall_point(wall, s);
        let n = self.geometry.wall_normal(wall);
        dot(n, matvec(&self.jacobian(t, x), n))
    }

    /// `f = u⁰·n/φ` at an interior collar point at distance `phi` from `wall`.
    pub fn stretching_at(&self, t: f64, wall: Wall, s: f64, phi: f64) -> f64 {
        if phi <= 0.0 {
            return self.stretching(t, wall, s);
        }
        let q = self.geometry.wall_coordinate(wall) + phi * self.geometry.wall_normal(wall)[self.geometry.normal_axis()];
        let x = self.geometry.point_at(wall, s, q);
        dot(self.velocity(t, x), self.geometry.wall_normal(wall)) / phi
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Slow samples used to probe flows that vary along the wall.
fn probe_samples(flow: &BaseFlow) -> Vec<f64> {
    match flow.kind {
        FlowKind::Cell { .. } => {
            let p = flow.geometry.slow_period();
            (0..16).map(|i| p * i as f64 / 16.0).collect()
        }
        _ => vec![0.0],
    }
}

/// `max |∂_t u⁰ + (u⁰·∇)u⁰ + ∇π⁰ − F| + |div u⁰|` over the grid (times the
/// slow probe samples for flows that depend on them).
pub fn euler_residual(flow: &BaseFlow, grid: &VolumeGrid, t: f64) -> Result<f64> {
    if grid.geometry != flow.geometry {
        return Err(Error::GridMismatch("grid and flow geometries differ".into()));
    }
    let mut worst = 0.0f64;
    for s in probe_samples(flow) {
        for &q in &grid.nodes {
            let x = flow.geometry.point_at(Wall::Lower, s, q);
            let u = flow.velocity(t, x);
            let mom = add(
                add(flow.dt_velocity(t, x), matvec(&flow.jacobian(t, x), u)),
                sub(flow.grad_pressure(t, x), flow.forcing(t, x)),
            );
            worst = worst.max(norm(mom) + flow.divergence(t, x).abs());
        }
    }
    Ok(worst)
}

/// Boundary data of one wall, in the tangential frame `(τ1, τ2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallData {
    pub wall: Wall,
    pub s: Vec<f64>,
    /// `curl u⁰ × n`.
    pub g_raw: Vec<[f64; 2]>,
    /// Datum imposed on the layer: `∂_z u^b = -g_raw` at `z = 0`.
    pub neumann: Vec<[f64; 2]>,
    /// Always `"dz_ub = -curl_u0_x_n"`.
    pub sign_convention: String,
}

pub fn curl_cross_n(flow: &BaseFlow, t: f64, wall: Wall, s: f64) -> [f64; 2] {
    let g = &flow.geometry;
    let x = g.wall_point(wall, s);
    let v = cross(flow.curl(t, x), g.wall_normal(wall));
    let [t1, t2] = g.tangent_frame();
    [dot(v, t1), dot(v, t2)]
}

pub fn boundary_data_g(flow: &BaseFlow, t: f64, s: &[f64]) -> [WallData; 2] {
    Wall::BOTH.map(|wall| {
        let g_raw: Vec<[f64; 2]> = s.iter().map(|&si| curl_cross_n(flow, t, wall, si)).collect();
        WallData {
            wall,
            s: s.to_vec(),
            neumann: g_raw.iter().map(|g| [-g[0], -g[1]]).collect(),
            g_raw,
            sign_convention: "dz_ub = -curl_u0_x_n".into(),
        }
    })
}

/// How the vector coupling term is mapped onto the tangent plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// `c ↦ c × n`, as the layer equation is written.
    #[default]
    Cross,
    /// `c ↦ (I − n⊗n) c`.
    Orthogonal,
}

impl FromStr for ProjectionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross" => Ok(Self::Cross),
            "orthogonal" => Ok(Self::Orthogonal),
            _ => Err(Error::Config(format!("unknown projection mode {s:?}"))),
        }
    }
}

fn project(mode: ProjectionMode, c: Vec3, n: Vec3, tau: &[Vec3; 2]) -> [f64; 2] {
    let v = match mode {
        ProjectionMode::Cross => cross(c, n),
        ProjectionMode::Orthogonal => c,
    };
    [dot(v, tau[0]), dot(v, tau[1])]
}

/// Frozen coefficients of the tangential layer system at one wall sample:
///
/// `∂_t b − ∂_z² b + f z ∂_z b + A b + K ∂_s b = 0`, `∂_z b(0) = neumann`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerCoefficients {
    pub f: f64,
    /// `A[j][k] = Proj(m_k)·τ_j` with `m_k = (u⁰·∇)τ_k + G τ_k`.
    pub coupling: [[f64; 2]; 2],
    /// `K[j][k] = Proj((u⁰·∇s) τ_k)·τ_j`.
    pub advection: [[f64; 2]; 2],
    /// `m_k·n`: the pressure-corrector kernel.
    pub normal_kernel: [f64; 2],
    pub neumann: [f64; 2],
    /// `∇s·τ1` on the wall (`div_x u^b = slow_metric ∂_s b_1`).
    pub slow_metric: f64,
}

/// `m_k = (u⁰·∇)τ_k + G τ_k` at a point.
pub fn coupling_vectors(flow: &BaseFlow, t: f64, x: Vec3) -> [Vec3; 2] {
    let g = &flow.geometry;
    let u = flow.velocity(t, x);
    let jac = flow.jacobian(t, x);
    let tau = g.tangent_frame();
    let axes = [g.flow_axis(), 2];
    [0, 1].map(|k| add(g.basis_derivative(x, u, axes[k]), matvec(&jac, tau[k])))
}

/// `m_k·n` at the collar point at wall-normal coordinate `q`.
pub fn normal_kernel_at(flow: &BaseFlow, t: f64, wall: Wall, s: f64, q: f64) -> [f64; 2] {
    let x = flow.geometry.point_at(wall, s, q);
    let n = flow.geometry.wall_normal(wall);
    coupling_vectors(flow, t, x).map(|m| dot(m, n))
}

pub fn layer_coefficients(
    flow: &BaseFlow,
    t: f64,
    wall: Wall,
    s: f64,
    mode: ProjectionMode,
) -> LayerCoefficients {
    let g = &flow.geometry;
    let x = g.wall_point(wall, s);
    let n = g.wall_normal(wall);
    let tau = g.tangent_frame();
    let m = coupling_vectors(flow, t, x);
    let u_ds = dot(flow.velocity(t, x), g.slow_gradient(x));
    let mut coupling = [[0.0; 2]; 2];
    let mut advection = [[0.0; 2]; 2];
    for k in 0..2 {
        let pm = project(mode, m[k], n, &tau);
        let pa = project(mode, tau[k].map(|v| v * u_ds), n, &tau);
        for j in 0..2 {
            coupling[j][k] = pm[j];
            advection[j][k] = pa[j];
        }
    }
    let g_raw = curl_cross_n(flow, t, wall, s);
    LayerCoefficients {
        f: flow.stretching(t, wall, s),
        coupling,
        advection,
        normal_kernel: [dot(m[0], n), dot(m[1], n)],
        neumann: [-g_raw[0], -g_raw[1]],
        slow_metric: dot(g.slow_gradient(x), tau[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Clustering;

    fn annulus() -> Geometry {
        Geometry::annulus(1.0, 2.0, 0.45).unwrap()
    }

    #[test]
    fn rigid_rotation_curl_and_g() {
        let f = swirl_base_flow(Profile1d::Rigid { omega: 1.5 }, &annulus()).unwrap();
        for r in [1.0, 1.3, 2.0] {
            assert!((f.curl(0.0, [r, 0.0, 0.0])[2] - 3.0).abs() < 1e-14);
        }
        let [lo, up] = boundary_data_g(&f, 0.0, &[0.0]);
        assert!((lo.g_raw[0][0] - 3.0).abs() < 1e-14);
        assert!((up.g_raw[0][0] + 3.0).abs() < 1e-14);
        assert_eq!(up.neumann[0][0], 3.0);
    }

    #[test]
    fn vortex_is_irrotational() {
        let f = swirl_base_flow(Profile1d::Vortex { c: 2.0 }, &annulus()).unwrap();
        assert!(f.curl(0.0, [1.7, 0.0, 0.0])[2].abs() < 1e-14);
        let grid = annulus().volume_grid(64, Clustering::Uniform).unwrap();
        assert!(euler_residual(&f, &grid, 0.0).unwrap() < 1e-12);
    }

    #[test]
    fn poly_profile_derivatives() {
        let p = Profile1d::Poly(vec![1.0, -2.0, 3.0]);
        let [v, d1, d2] = p.eval(2.0);
        assert_eq!((v, d1, d2), (9.0, 10.0, 6.0));
    }

    #[test]
    fn family_round_trip() {
        for s in ["rigid:1", "vortex:2", "swirl_poly:0,1,0.5", "shear_poly:0,0,3,-2", "shear_cos:2", "manufactured:cell"] {
            let f: Family = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("bogus".parse::<Family>().unwrap_err().is_config());
    }

    #[test]
    fn cell_flow_is_forced_euler() {
        let g = Geometry::flat_channel(1.0, 0.3).unwrap();
        let grid = g.volume_grid(32, Clustering::Uniform).unwrap();
        for case in [ManufacturedCase::Cell, ManufacturedCase::CellPulse] {
            let f = manufactured_base_flow(case, &g).unwrap();
            assert!(euler_residual(&f, &grid, 0.3).unwrap() < 1e-12);
            // u·n = 0 on both walls
            for s in [0.1, 0.7] {
                for w in Wall::BOTH {
                    let x = g.wall_point(w, s);
                    assert!(dot(f.velocity(0.3, x), g.wall_normal(w)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn stretching_is_limit_of_normal_velocity_over_distance() {
        let g = Geometry::flat_channel(1.0, 0.3).unwrap();
        let f = manufactured_base_flow(ManufacturedCase::Cell, &g).unwrap();
        for w in Wall::BOTH {
            let a = f.stretching(0.0, w, 0.2);
            let b = f.stretching_at(0.0, w, 0.2, 1e-5);
            assert!(a.abs() > 0.1 && (a - b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn swirl_coupling_is_normal() {
        let f = swirl_base_flow(Profile1d::Poly(vec![0.0, 1.0, 0.5]), &annulus()).unwrap();
        for mode in [ProjectionMode::Cross, ProjectionMode::Orthogonal] {
            let c = layer_coefficients(&f, 0.0, Wall::Upper, 0.0, mode);
            assert_eq!(c.coupling, [[0.0; 2]; 2]);
            assert_eq!(c.f, 0.0);
            // m_1·n = -2U/r (e_r·n) with n = -e_r on the outer wall
            let u = f.profile().unwrap().value(2.0);
            assert!((c.normal_kernel[0] - u).abs() < 1e-14);
        }
    }
}
