use crate::error::{Error, Result};
use crate::geometry::{VolumeGrid, Wall};
use crate::numerics::{derivative, one_sided_derivative, Vec3};

use super::NormSpec;

/// Vector field on a wall-normal volume grid, native components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(n: usize) -> Self {
        Self { comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    /// Field with a single nonzero native component.
    pub fn single(n: usize, axis: usize, values: Vec<f64>) -> Self {
        let mut f = Self::zeros(n);
        assert_eq!(values.len(), n);
        f.comps[axis] = values;
        f
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps[0].is_empty()
    }

    pub fn at(&self, i: usize) -> Vec3 {
        [self.comps[0][i], self.comps[1][i], self.comps[2][i]]
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        let v = self.at(i);
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            for (o, b) in out.comps[c].iter_mut().zip(&other.comps[c]) {
                *o = f(*o, *b);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.comps.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v *= s));
        out
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).fold(0.0, |m, i| m.max(self.magnitude(i)))
    }
}

fn check(grid: &VolumeGrid, f: &VectorField) -> Result<()> {
    if grid.len() != f.len() {
        return Err(Error::GridMismatch(format!(
            "field has {} nodes, grid has {}",
            f.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// `(∫ |u|^p dx)^{1/p}` with node quadrature; `p = ∞` gives the nodal maximum.
pub fn lp_norm(grid: &VolumeGrid, f: &VectorField, p: f64) -> Result<f64> {
    check(grid, f)?;
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let s: f64 = (0..f.len()).map(|i| grid.mass[i] * f.magnitude(i).powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Squared Frobenius norm of `∇u` at each node for θ/z-independent fields.
fn grad_sq(grid: &VolumeGrid, f: &VectorField) -> Vec<f64> {
    let d: Vec<Vec<f64>> = f.comps.iter().map(|c| derivative(&grid.nodes, c)).collect();
    let annulus = grid.geometry.is_annulus();
    (0..f.len())
        .map(|i| {
            let mut s = d[0][i].powi(2) + d[1][i].powi(2) + d[2][i].powi(2);
            if annulus {
                let r = grid.nodes[i];
                s += (f.comps[0][i] / r).powi(2) + (f.comps[1][i] / r).powi(2);
            }
            s
        })
        .collect()
}

/// `(‖u‖_p^p + ‖∇u‖_p^p)^{1/p}`.
pub fn w1p_norm(grid: &VolumeGrid, f: &VectorField, p: f64) -> Result<f64> {
    check(grid, f)?;
    let g = grad_sq(grid, f);
    if p.is_infinite() {
        let gm = g.iter().fold(0.0f64, |m, v| m.max(v.sqrt()));
        return Ok(f.max_abs() + gm);
    }
    let s: f64 = (0..f.len())
        .map(|i| grid.mass[i] * (f.magnitude(i).powf(p) + g[i].powf(0.5 * p)))
        .sum();
    Ok(s.powf(1.0 / p))
}

pub fn h1_norm(grid: &VolumeGrid, f: &VectorField) -> Result<f64> {
    w1p_norm(grid, f, 2.0)
}

pub fn volume_norm(grid: &VolumeGrid, f: &VectorField, spec: NormSpec) -> Result<f64> {
    match spec {
        NormSpec::L2 => lp_norm(grid, f, 2.0),
        NormSpec::Linf => lp_norm(grid, f, f64::INFINITY),
        NormSpec::Lp(p) => lp_norm(grid, f, p),
        NormSpec::H1 => h1_norm(grid, f),
        NormSpec::Aniso(_) => Err(Error::Unsupported(
            "anisotropic norms apply to layer profiles, not volume fields".into(),
        )),
    }
}

/// `∫ u·v dx` with node quadrature.
pub fn weighted_inner(grid: &VolumeGrid, a: &VectorField, b: &VectorField) -> f64 {
    (0..a.len())
        .map(|i| {
            let (x, y) = (a.at(i), b.at(i));
            grid.mass[i] * (x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
        })
        .sum()
}

/// `curl u` at a wall node by second-order one-sided differences, for fields
/// that depend on the wall-normal coordinate only.
pub fn curl_at_wall(grid: &VolumeGrid, f: &VectorField, wall: Wall) -> Vec3 {
    let n = grid.len();
    let idx = match wall {
        Wall::Lower => [0, 1, 2],
        Wall::Upper => [n - 1, n - 2, n - 3],
    };
    let x = idx.map(|i| grid.nodes[i]);
    let d = |vals: [f64; 3]| one_sided_derivative(x, vals);
    if grid.geometry.is_annulus() {
        let r0 = x[0];
        // curl(u_r, u_θ, u_z)(r) = (0, -u_z', (r u_θ)'/r)
        let ruth = idx.map(|i| grid.nodes[i] * f.comps[1][i]);
        let uz = idx.map(|i| f.comps[2][i]);
        [0.0, -d(uz), d(ruth) / r0]
    } else {
        // curl(u_x, u_y, u_z)(y) = (u_z', 0, -u_x')
        let ux = idx.map(|i| f.comps[0][i]);
        let uz = idx.map(|i| f.comps[2][i]);
        [d(uz), 0.0, -d(ux)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Clustering, Geometry};

    #[test]
    fn l2_of_rigid_rotation() {
        let g = Geometry::annulus(1.0, 2.0, 0.3).unwrap();
        let grid = g.volume_grid(2048, Clustering::Cosine).unwrap();
        let f = VectorField::single(grid.len(), 1, grid.nodes.clone());
        // ∫ r² r dr dθ dz = 2π (16 - 1)/4
        let exact = (2.0 * std::f64::consts::PI * 15.0 / 4.0).sqrt();
        assert!((lp_norm(&grid, &f, 2.0).unwrap() - exact).abs() < 1e-5);
        // ∇(r e_θ) has |∇u|² = 1 + 1: H¹² = L²² + 2 * area
        let h1 = h1_norm(&grid, &f).unwrap();
        let area = 2.0 * std::f64::consts::PI * 1.5;
        assert!((h1 * h1 - exact * exact - 2.0 * area).abs() < 1e-4);
    }

    #[test]
    fn wall_curl_of_swirl() {
        let g = Geometry::annulus(1.0, 2.0, 0.3).unwrap();
        let grid = g.volume_grid(64, Clustering::Uniform).unwrap();
        let f = VectorField::single(grid.len(), 1, grid.nodes.iter().map(|r| 1.0 / r).collect());
        let c = curl_at_wall(&grid, &f, Wall::Upper);
        assert!(c[2].abs() < 1e-12);
        let f = VectorField::single(grid.len(), 1, grid.nodes.clone());
        let c = curl_at_wall(&grid, &f, Wall::Lower);
        assert!((c[2] - 2.0).abs() < 1e-12);
    }
}
