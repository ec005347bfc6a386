use crate::error::{Error, Result};
use crate::geometry::{VolumeGrid, Wall};
use crate::numerics::{fit_line, interp_cubic};

use super::{weighted_norm, AnisotropicIndex, ProfileField};

/// A profile attached to one wall.
#[derive(Debug, Clone, Copy)]
pub struct WallProfile<'a> {
    pub wall: Wall,
    pub field: &'a ProfileField,
    /// Slow sample evaluated on the (slow-invariant) volume grid.
    pub sample: usize,
}

impl<'a> WallProfile<'a> {
    pub fn new(wall: Wall, field: &'a ProfileField) -> Self {
        Self { wall, field, sample: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct LayerEvaluation {
    /// `values[c][i]`: component `c` at volume node `i`, cutoff applied.
    pub values: Vec<Vec<f64>>,
    pub norm: f64,
    /// `√ν > η/4`: the layer is too thick for the collar.
    pub regime_warning: bool,
}

/// Evaluate `x ↦ χ(φ(x)) U(x, φ(x)/√ν)` on the volume grid, summing the
/// contributions of the given walls, and its `L^p` norm.
pub fn boundary_layer_eval(
    profiles: &[WallProfile<'_>],
    grid: &VolumeGrid,
    nu: f64,
    p: f64,
) -> Result<LayerEvaluation> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("viscosity must be positive, got {nu}")));
    }
    let ncomp = profiles.first().map(|p| p.field.ncomp).unwrap_or(1);
    if profiles.iter().any(|p| p.field.ncomp != ncomp) {
        return Err(Error::InvalidParameter("profiles disagree on component count".into()));
    }
    let geom = &grid.geometry;
    let sq = nu.sqrt();
    let mut values = vec![vec![0.0; grid.len()]; ncomp];
    for wp in profiles {
        let f = wp.field;
        for (i, &q) in grid.nodes.iter().enumerate() {
            let d = geom.distance_from(wp.wall, q);
            let chi = geom.cutoff(d);
            if chi == 0.0 {
                continue;
            }
            let z = d / sq;
            for (c, vc) in values.iter_mut().enumerate() {
                vc[i] += chi * interp_cubic(&f.fast.z, f.column(c, wp.sample), z);
            }
        }
    }
    let norm = if p.is_infinite() {
        (0..grid.len()).fold(0.0f64, |m, i| m.max(mag(&values, i)))
    } else {
        let s: f64 = (0..grid.len()).map(|i| grid.mass[i] * mag(&values, i).powf(p)).sum();
        s.powf(1.0 / p)
    };
    Ok(LayerEvaluation { values, norm, regime_warning: sq > 0.25 * geom.collar_width })
}

fn mag(values: &[Vec<f64>], i: usize) -> f64 {
    values.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingMode {
    /// Fit the exponent of `ν ↦ ‖U(x, φ/√ν)‖_p`.
    Exponent,
    /// Ratios `‖U(x, φ/√ν)‖_p / ‖U‖_{1,m,1}` (must stay bounded in ν).
    Embedding { m: u32 },
}

#[derive(Debug, Clone)]
pub struct ScalingCheck {
    pub nus: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

pub fn scaling_exponent_check(
    profiles: &[WallProfile<'_>],
    grid: &VolumeGrid,
    nus: &[f64],
    p: f64,
    mode: ScalingMode,
) -> Result<ScalingCheck> {
    if nus.len() < 3 {
        return Err(Error::Config(format!("need at least 3 viscosities, got {}", nus.len())));
    }
    if nus.windows(2).any(|w| !(w[1] < w[0])) || nus.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Config("viscosities must be positive and strictly decreasing".into()));
    }
    if nus[0] / nus[nus.len() - 1] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Config("viscosities must span at least two decades".into()));
    }
    let norms = nus
        .iter()
        .map(|&nu| boundary_layer_eval(profiles, grid, nu, p).map(|e| e.norm))
        .collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = nus.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r_squared) = fit_line(&lx, &ly);
    let mut ratios = Vec::new();
    if let ScalingMode::Embedding { m } = mode {
        let denom: f64 = profiles
            .iter()
            .map(|wp| weighted_norm(wp.field, AnisotropicIndex::h(1, m, 1)).map(|v| v * v))
            .sum::<Result<f64>>()?
            .sqrt();
        if denom == 0.0 {
            return Err(Error::InvalidParameter("profile has zero H^{1,m,1} norm".into()));
        }
        ratios = norms.iter().map(|n| n / denom).collect();
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(ScalingCheck { nus: nus.to_vec(), norms, slope, intercept, r_squared, ratios, max_ratio })
}
