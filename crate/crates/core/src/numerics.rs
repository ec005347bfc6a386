//! Small numerical kernels shared by the solvers: banded solves, nonuniform
//! stencils, interpolation and quadrature.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Matrix-vector product for row-major 3x3 matrices.
pub fn matvec(m: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// Tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Thomas algorithm. Fails on a vanishing pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut beta = self.diag[0];
        if beta.abs() < 1e-300 {
            return Err(Error::Solver { residual: f64::INFINITY });
        }
        c[0] = if n > 1 { self.upper[0] / beta } else { 0.0 };
        d[0] = rhs[0] / beta;
        for i in 1..n {
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            if beta.abs() < 1e-300 {
                return Err(Error::Solver { residual: f64::INFINITY });
            }
            if i + 1 < n {
                c[i] = self.upper[i] / beta;
            }
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

/// Weights of the three-point first derivative at `x[i]` on a nonuniform grid.
/// Centered in the interior, second-order one-sided at the ends.
pub fn derivative_weights(x: &[f64], i: usize) -> ([usize; 3], [f64; 3]) {
    let n = x.len();
    let (idx, at) = if i == 0 {
        ([0, 1, 2], 0)
    } else if i == n - 1 {
        ([n - 3, n - 2, n - 1], 2)
    } else {
        ([i - 1, i, i + 1], 1)
    };
    let (x0, x1, x2) = (x[idx[0]], x[idx[1]], x[idx[2]]);
    let xe = [x0, x1, x2][at];
    // derivative of the Lagrange basis polynomials evaluated at xe
    let w0 = ((xe - x1) + (xe - x2)) / ((x0 - x1) * (x0 - x2));
    let w1 = ((xe - x0) + (xe - x2)) / ((x1 - x0) * (x1 - x2));
    let w2 = ((xe - x0) + (xe - x1)) / ((x2 - x0) * (x2 - x1));
    (idx, [w0, w1, w2])
}

/// First derivative of tabulated `f` on nodes `x`.
pub fn derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (idx, w) = derivative_weights(x, i);
            w[0] * f[idx[0]] + w[1] * f[idx[1]] + w[2] * f[idx[2]]
        })
        .collect()
}

/// One-sided second-order derivative at the first node of `(x, f)` triples.
pub fn one_sided_derivative(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[0];
    -(h1 + h2) / (h1 * h2) * f[0] + h2 / (h1 * (h2 - h1)) * f[1] - h1 / (h2 * (h2 - h1)) * f[2]
}

pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2)
        .zip(f.windows(2))
        .map(|(xw, fw)| 0.5 * (xw[1] - xw[0]) * (fw[0] + fw[1]))
        .sum()
}

/// Trapezoid weights so that `sum(w * f)` equals [`trapezoid`].
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// `F(z_j) = ∫_{z_j}^{z_last} f dz` by the trapezoid rule, accumulated from the far end.
pub fn tail_integral(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for j in (0..n - 1).rev() {
        out[j] = out[j + 1] + 0.5 * (x[j + 1] - x[j]) * (f[j] + f[j + 1]);
    }
    out
}

/// Index `i` with `x[i] <= xq < x[i+1]`, clamped to the valid interval range.
pub fn locate(x: &[f64], xq: f64) -> usize {
    let n = x.len();
    if xq <= x[0] {
        return 0;
    }
    if xq >= x[n - 1] {
        return n - 2;
    }
    match x.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

fn lagrange(xs: &[f64], fs: &[f64], xq: f64) -> f64 {
    let mut acc = 0.0;
    for (a, (&xa, &fa)) in xs.iter().zip(fs).enumerate() {
        let mut l = 1.0;
        for (b, &xb) in xs.iter().enumerate() {
            if a != b {
                l *= (xq - xb) / (xa - xb);
            }
        }
        acc += l * fa;
    }
    acc
}

/// Piecewise-cubic (local four-point Lagrange) interpolation. Exact at nodes;
/// values beyond the last node return the last value.
pub fn interp_cubic(x: &[f64], f: &[f64], xq: f64) -> f64 {
    let n = x.len();
    if xq >= x[n - 1] {
        return f[n - 1];
    }
    if n < 4 {
        let i = locate(x, xq);
        let t = (xq - x[i]) / (x[i + 1] - x[i]);
        return f[i] * (1.0 - t) + f[i + 1] * t;
    }
    let i = locate(x, xq);
    if xq == x[i] {
        return f[i];
    }
    let start = i.saturating_sub(1).min(n - 4);
    lagrange(&x[start..start + 4], &f[start..start + 4], xq)
}

/// Difference between the cubic interpolant and the three-point quadratic one;
/// a computable proxy for the cubic interpolation error.
pub fn interp_error_proxy(x: &[f64], f: &[f64], xq: f64) -> f64 {
    let n = x.len();
    if n < 4 || xq >= x[n - 1] {
        return 0.0;
    }
    let i = locate(x, xq);
    let start = i.saturating_sub(1).min(n - 4);
    let q = lagrange(&x[start..start + 3], &f[start..start + 3], xq);
    (interp_cubic(x, f, xq) - q).abs()
}

/// Ordinary least squares line fit. Returns `(slope, intercept, r_squared)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_solution() {
        let mut t = Tridiagonal::zeros(4);
        t.diag = vec![4.0, 4.0, 4.0, 4.0];
        t.lower = vec![0.0, 1.0, 1.0, 1.0];
        t.upper = vec![1.0, 1.0, 1.0, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let mut rhs = vec![0.0; 4];
        t.apply(&x_true, &mut rhs);
        let x = t.solve(&rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let x = [0.0, 0.1, 0.25, 0.45, 0.7];
        let f: Vec<f64> = x.iter().map(|v| 3.0 * v * v - v + 2.0).collect();
        let d = derivative(&x, &f);
        for (xi, di) in x.iter().zip(d) {
            assert!((di - (6.0 * xi - 1.0)).abs() < 1e-12);
        }
        let g = one_sided_derivative([0.0, 0.1, 0.25], [f[0], f[1], f[2]]);
        assert!((g + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let x: Vec<f64> = (0..10).map(|i| (i as f64).powf(1.3)).collect();
        let p = |v: f64| v * v * v - 2.0 * v + 1.0;
        let f: Vec<f64> = x.iter().map(|&v| p(v)).collect();
        for q in [0.05, 1.7, 4.4, 12.0] {
            assert!((interp_cubic(&x, &f, q) - p(q)).abs() < 1e-9 * p(q).abs().max(1.0));
        }
    }

    #[test]
    fn tail_integral_of_exponential() {
        let x: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let t = tail_integral(&x, &f);
        assert!((t[0] - (1.0 - (-40.0f64).exp())).abs() < 1e-5);
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        let (s, i, r2) = fit_line(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }
}
