//! Norm engine for layer profiles and volume fields.
//!
//! Layer profiles live on a product grid: a handful of slow samples along the
//! wall times a mapped half-line grid in the fast variable `z`. The weighted
//! norms below are the discrete counterparts of
//!
//! ```text
//! ‖g‖^p_{k,m,l,p} = Σ_{α≤m, β≤l} ∬ w_k(z) |∂_s^α ∂_z^β g|^p ds dz
//! ```
//!
//! with `w_0 = 1` and `w_k = 1 + z^{2k}` for `k ≥ 1`.

mod inequalities;
mod layer_eval;
mod volume;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{derivative, trapezoid_weights};

pub use inequalities::{gronwall_local_bound, hardy_ratio};
pub use layer_eval::{
    boundary_layer_eval, scaling_exponent_check, LayerEvaluation, ScalingCheck, ScalingMode,
    WallProfile,
};
pub use volume::{
    curl_at_wall, h1_norm, lp_norm, volume_norm, w1p_norm, weighted_inner, VectorField,
};

/// `e^{-Z_max}` stays below this bound when `zmax` is chosen automatically.
pub const ZMAX_DECAY: f64 = 1e-14;

/// Default length scale of the fast-grid mapping `z = -L log(1 - ξ)`.
pub const DEFAULT_MAP_SCALE: f64 = 2.0;

/// Smallest `Z_max` with `e^{-Z_max} < 1e-14`, rounded up.
pub fn auto_zmax() -> f64 {
    (-ZMAX_DECAY.ln()).ceil()
}

/// Mapped half-line grid `z_j = -L log(1 - ξ_j)` with `ξ` uniform on `[0, ξ_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FastGrid {
    pub z: Vec<f64>,
    pub scale: f64,
}

impl FastGrid {
    pub fn mapped(n: usize, scale: f64, zmax: Option<f64>) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!("fast grid needs at least 4 nodes, got {n}")));
        }
        if !(scale > 0.0) {
            return Err(Error::Config(format!("mapping scale must be positive, got {scale}")));
        }
        let zmax = zmax.unwrap_or_else(auto_zmax);
        if !(zmax > 0.0) {
            return Err(Error::Config(format!("zmax must be positive, got {zmax}")));
        }
        let xi_max = -(-zmax / scale).exp_m1();
        let mut z: Vec<f64> = (0..n)
            .map(|j| {
                let xi = xi_max * j as f64 / (n - 1) as f64;
                -scale * (-xi).ln_1p()
            })
            .collect();
        z[0] = 0.0;
        z[n - 1] = zmax;
        Ok(Self { z, scale })
    }

    pub fn from_nodes(z: Vec<f64>) -> Result<Self> {
        if z.len() < 4 || z[0] != 0.0 || z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("fast grid must start at 0 and increase strictly".into()));
        }
        Ok(Self { z, scale: f64::NAN })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn zmax(&self) -> f64 {
        *self.z.last().unwrap()
    }
}

/// Samples of the slow (wall-tangential) coordinate with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowGrid {
    pub s: Vec<f64>,
    pub weights: Vec<f64>,
    pub periodic: bool,
}

impl SlowGrid {
    /// A single sample carrying the whole wall measure (slow-invariant fields).
    pub fn single(measure: f64) -> Self {
        Self { s: vec![0.0], weights: vec![measure], periodic: true }
    }

    /// `n` uniform samples over one period.
    pub fn periodic(n: usize, period: f64, measure: f64) -> Self {
        let s = (0..n).map(|i| period * i as f64 / n as f64).collect();
        Self { s, weights: vec![measure / n as f64; n], periodic: true }
    }

    /// `n ≥ 3` samples on a non-periodic segment, trapezoid weights scaled to `measure`.
    pub fn segment(s0: f64, s1: f64, n: usize, measure: f64) -> Result<Self> {
        if n < 3 || !(s1 > s0) {
            return Err(Error::Config("segment slow grid needs n >= 3 and s1 > s0".into()));
        }
        let s: Vec<f64> = (0..n).map(|i| s0 + (s1 - s0) * i as f64 / (n - 1) as f64).collect();
        let w = trapezoid_weights(&s);
        let f = measure / (s1 - s0);
        Ok(Self { weights: w.into_iter().map(|v| v * f).collect(), s, periodic: false })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// First derivative of samples `f` along `s`.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![0.0];
        }
        if self.periodic {
            let ds = self.s[1] - self.s[0];
            (0..n).map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * ds)).collect()
        } else {
            derivative(&self.s, f)
        }
    }
}

/// Values `g(s, z)` of an `ncomp`-component field on a slow × fast grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileField {
    pub slow: SlowGrid,
    pub fast: FastGrid,
    pub ncomp: usize,
    data: Vec<f64>,
}

impl ProfileField {
    pub fn zeros(slow: SlowGrid, fast: FastGrid, ncomp: usize) -> Self {
        let n = slow.len() * fast.len() * ncomp;
        Self { slow, fast, ncomp, data: vec![0.0; n] }
    }

    /// Tabulate `f(component, s, z)`.
    pub fn from_fn(
        slow: SlowGrid,
        fast: FastGrid,
        ncomp: usize,
        f: impl Fn(usize, f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(slow, fast, ncomp);
        for c in 0..ncomp {
            for i in 0..out.slow.len() {
                let s = out.slow.s[i];
                for j in 0..out.fast.len() {
                    let z = out.fast.z[j];
                    let v = f(c, s, z);
                    out.set(c, i, j, v);
                }
            }
        }
        out
    }

    fn offset(&self, c: usize, i: usize) -> usize {
        (c * self.slow.len() + i) * self.fast.len()
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[self.offset(c, i) + j]
    }

    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f64) {
        let o = self.offset(c, i);
        self.data[o + j] = v;
    }

    /// The `z`-column of component `c` at slow sample `i`.
    pub fn column(&self, c: usize, i: usize) -> &[f64] {
        let o = self.offset(c, i);
        &self.data[o..o + self.fast.len()]
    }

    pub fn column_mut(&mut self, c: usize, i: usize) -> &mut [f64] {
        let o = self.offset(c, i);
        let n = self.fast.len();
        &mut self.data[o..o + n]
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// `∂_s^alpha ∂_z^beta` of every component.
    pub fn derivative(&self, alpha: u32, beta: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..beta {
            for c in 0..self.ncomp {
                for i in 0..self.slow.len() {
                    let d = derivative(&self.fast.z, out.column(c, i));
                    out.column_mut(c, i).copy_from_slice(&d);
                }
            }
        }
        for _ in 0..alpha {
            let nz = self.fast.len();
            for c in 0..self.ncomp {
                for j in 0..nz {
                    let row: Vec<f64> = (0..self.slow.len()).map(|i| out.get(c, i, j)).collect();
                    let d = self.slow.derivative(&row);
                    for (i, v) in d.into_iter().enumerate() {
                        out.set(c, i, j, v);
                    }
                }
            }
        }
        out
    }
}

/// Index `(k, m, l, p)` of an anisotropic weighted space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicIndex {
    /// Decay weight exponent.
    pub k: u32,
    /// Slow-derivative order.
    pub m: u32,
    /// Fast-derivative order.
    pub l: u32,
    /// Integrability, `≥ 1`; `f64::INFINITY` for the sup norm.
    pub p: f64,
}

impl AnisotropicIndex {
    pub fn new(k: u32, m: u32, l: u32, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("integrability p = {p} must be >= 1")));
        }
        Ok(Self { k, m, l, p })
    }

    /// `H^{k,m,l}` shorthand for `p = 2`.
    pub fn h(k: u32, m: u32, l: u32) -> Self {
        Self { k, m, l, p: 2.0 }
    }

    pub fn weight(&self, z: f64) -> f64 {
        if self.k == 0 {
            1.0
        } else {
            1.0 + z.powi(2 * self.k as i32)
        }
    }
}

/// Discrete `‖g‖_{k,m,l,p}`: trapezoid in `z` on the mapped nodes, slow
/// quadrature weights in `s`, pointwise Euclidean magnitude over components.
pub fn weighted_norm(field: &ProfileField, idx: AnisotropicIndex) -> Result<f64> {
    if idx.p.is_infinite() && idx.k > 0 {
        return Err(Error::Unsupported(
            "sup norm cannot be combined with a decay weight (k > 0)".into(),
        ));
    }
    if !(idx.p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {} must be >= 1", idx.p)));
    }
    let need = idx.l.max(1) as usize + 2;
    if field.fast.len() < need || (idx.m > 0 && field.slow.len() > 1 && field.slow.len() < 3) {
        return Err(Error::Config("field too coarse for the requested derivative orders".into()));
    }
    let tz = trapezoid_weights(&field.fast.z);
    let wz: Vec<f64> = field.fast.z.iter().zip(&tz).map(|(&z, &t)| t * idx.weight(z)).collect();
    let mut total = 0.0;
    for alpha in 0..=idx.m {
        for beta in 0..=idx.l {
            let d = field.derivative(alpha, beta);
            if idx.p.is_infinite() {
                let mut sup: f64 = 0.0;
                for i in 0..d.slow.len() {
                    for j in 0..d.fast.len() {
                        sup = sup.max(magnitude(&d, i, j));
                    }
                }
                total += sup;
            } else {
                for i in 0..d.slow.len() {
                    let ws = d.slow.weights[i];
                    for j in 0..d.fast.len() {
                        total += ws * wz[j] * magnitude(&d, i, j).powf(idx.p);
                    }
                }
            }
        }
    }
    Ok(if idx.p.is_infinite() { total } else { total.powf(1.0 / idx.p) })
}

fn magnitude(f: &ProfileField, i: usize, j: usize) -> f64 {
    if f.ncomp == 1 {
        return f.get(0, i, j).abs();
    }
    (0..f.ncomp).map(|c| f.get(c, i, j).powi(2)).sum::<f64>().sqrt()
}

/// Norm requests as they appear in configuration files and report rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    L2,
    Linf,
    H1,
    Lp(f64),
    Aniso(AnisotropicIndex),
}

impl NormSpec {
    /// Proven ν-exponent for `sup_t ‖u^ν − u⁰‖` in this norm, if one applies.
    pub fn theoretical_slope(&self) -> Option<f64> {
        match *self {
            NormSpec::L2 => Some(0.75),
            NormSpec::H1 => Some(0.25),
            NormSpec::Linf => Some(0.5),
            NormSpec::Lp(p) => Some(0.5 + 0.5 / p),
            NormSpec::Aniso(_) => None,
        }
    }

    /// The weaker interpolation-based exponent `3/10 + 9/(10p)`, for comparison.
    pub fn interpolation_slope(&self) -> Option<f64> {
        match *self {
            NormSpec::Lp(p) => Some(0.3 + 0.9 / p),
            NormSpec::L2 => Some(0.75),
            _ => None,
        }
    }

    pub fn is_volume(&self) -> bool {
        !matches!(self, NormSpec::Aniso(_))
    }
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::L2 => write!(f, "l2"),
            NormSpec::Linf => write!(f, "linf"),
            NormSpec::H1 => write!(f, "h1"),
            NormSpec::Lp(p) => write!(f, "lp:{}", fmt_p(*p)),
            NormSpec::Aniso(i) => write!(f, "aniso:{},{},{},{}", i.k, i.m, i.l, fmt_p(i.p)),
        }
    }
}

fn parse_p(s: &str) -> Result<f64> {
    let s = s.trim();
    let p = if s == "inf" {
        f64::INFINITY
    } else {
        s.parse::<f64>().map_err(|_| Error::Config(format!("bad exponent '{s}'")))?
    };
    if !(p >= 1.0) {
        return Err(Error::Config(format!("exponent {p} must be >= 1")));
    }
    Ok(p)
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "l2" => return Ok(NormSpec::L2),
            "linf" => return Ok(NormSpec::Linf),
            "h1" => return Ok(NormSpec::H1),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("lp:") {
            let p = parse_p(rest)?;
            return Ok(if p.is_infinite() {
                NormSpec::Linf
            } else if p == 2.0 {
                NormSpec::L2
            } else {
                NormSpec::Lp(p)
            });
        }
        if let Some(rest) = s.strip_prefix("aniso:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Config(format!("aniso norm needs k,m,l,p: '{s}'")));
            }
            let int = |t: &str| {
                t.trim().parse::<u32>().map_err(|_| Error::Config(format!("bad index '{t}' in '{s}'")))
            };
            let idx = AnisotropicIndex::new(int(parts[0])?, int(parts[1])?, int(parts[2])?, parse_p(parts[3])?)?;
            return Ok(NormSpec::Aniso(idx));
        }
        Err(Error::Config(format!("unknown norm '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_field(measure: f64, n: usize) -> ProfileField {
        let fast = FastGrid::mapped(n, DEFAULT_MAP_SCALE, None).unwrap();
        ProfileField::from_fn(SlowGrid::single(measure), fast, 1, |_, _, z| (-z).exp())
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let fast = FastGrid::mapped(64, 2.0, None).unwrap();
        let f = ProfileField::zeros(SlowGrid::periodic(4, 1.0, 1.0), fast, 2);
        for idx in [AnisotropicIndex::h(0, 0, 0), AnisotropicIndex::h(2, 1, 2)] {
            assert_eq!(weighted_norm(&f, idx).unwrap(), 0.0);
        }
    }

    #[test]
    fn exponential_profile_closed_forms() {
        // ∫ e^{-2z} = 1/2, ∫ z² e^{-2z} = Γ(3)/2³ = 1/4
        let a = 3.0;
        let f = exp_field(a, 4096);
        let n0 = weighted_norm(&f, AnisotropicIndex::h(0, 0, 0)).unwrap();
        assert!((n0 - (a / 2.0).sqrt()).abs() < 1e-5);
        let n1 = weighted_norm(&f, AnisotropicIndex::h(1, 0, 0)).unwrap();
        assert!((n1 - (a * 0.75).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn sup_norm_with_weight_is_unsupported() {
        let f = exp_field(1.0, 32);
        let idx = AnisotropicIndex::new(1, 0, 0, f64::INFINITY).unwrap();
        assert!(matches!(weighted_norm(&f, idx), Err(Error::Unsupported(_))));
        let idx = AnisotropicIndex::new(0, 0, 0, f64::INFINITY).unwrap();
        assert!((weighted_norm(&f, idx).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_strings_round_trip() {
        for s in ["l2", "linf", "h1", "lp:4", "aniso:1,0,2,2", "aniso:0,1,0,inf"] {
            let n: NormSpec = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert!("lp:0.5".parse::<NormSpec>().is_err());
        assert!("bogus".parse::<NormSpec>().is_err());
        assert_eq!("lp:4".parse::<NormSpec>().unwrap().theoretical_slope(), Some(0.625));
    }

    #[test]
    fn fast_grid_reaches_decay_bound() {
        let g = FastGrid::mapped(512, 2.0, None).unwrap();
        assert!((-g.zmax()).exp() < ZMAX_DECAY);
        assert_eq!(g.z[0], 0.0);
        assert!(g.z.windows(2).all(|w| w[1] > w[0]));
    }
}
