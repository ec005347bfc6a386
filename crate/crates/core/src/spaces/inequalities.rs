use crate::error::{Error, Result};
use crate::geometry::{VolumeGrid, Wall};
use crate::numerics::derivative;

/// `∫ |u|^p / d^{p-β}  /  ∫ |∇u|^p d^β` for a scalar field vanishing at the
/// walls, `d` the distance to the nearest wall.
pub fn hardy_ratio(grid: &VolumeGrid, u: &[f64], p: f64, beta: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
    }
    if !(beta < p - 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be < p - 1 = {}", p - 1.0)));
    }
    if u.len() != grid.len() {
        return Err(Error::GridMismatch("field and grid lengths differ".into()));
    }
    let n = u.len();
    if u[0] != 0.0 || u[n - 1] != 0.0 {
        return Err(Error::InvalidParameter("field must vanish on the walls".into()));
    }
    let g = &grid.geometry;
    let du = derivative(&grid.nodes, u);
    let mut left = 0.0;
    let mut right = 0.0;
    for i in 0..n {
        let q = grid.nodes[i];
        let d = g.distance_from(Wall::Lower, q).min(g.distance_from(Wall::Upper, q));
        right += grid.mass[i] * du[i].abs().powf(p) * d.powf(beta);
        if d > 0.0 {
            left += grid.mass[i] * u[i].abs().powf(p) / d.powf(p - beta);
        }
    }
    if left == 0.0 {
        return Ok(0.0);
    }
    if right == 0.0 {
        return Err(Error::InvalidParameter("gradient integral vanishes".into()));
    }
    Ok(left / right)
}

/// Closed-form local bound for `y' ≤ h + c0 y^{1+α}`:
/// `y(t) ≤ H + H((1 − α c0 H^α t)^{-1/α} − 1)`, `H(t) = y0 + ∫_0^t h`.
///
/// `h` is sampled uniformly on `[0, t]` (first sample at 0, last at `t`).
pub fn gronwall_local_bound(y0: f64, h: &[f64], c0: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(y0 >= 0.0) || !(c0 > 0.0) || !(alpha > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need y0 >= 0, c0 > 0, alpha > 0, t >= 0 (got {y0}, {c0}, {alpha}, {t})"
        )));
    }
    if h.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter("h must be nonnegative".into()));
    }
    if t > 0.0 && h.len() < 2 {
        return Err(Error::InvalidParameter("h needs at least two samples on [0, t]".into()));
    }
    let m = h.len().saturating_sub(1).max(1);
    let dt = t / m as f64;
    // cumulative H at sample times
    let mut big_h = vec![y0; h.len().max(1)];
    for i in 1..h.len() {
        big_h[i] = big_h[i - 1] + 0.5 * dt * (h[i - 1] + h[i]);
    }
    let horizon = |hh: f64, tt: f64| alpha * c0 * hh.powf(alpha) * tt;
    let h_end = *big_h.last().unwrap();
    if horizon(h_end, t) >= 1.0 {
        // first sample interval where the product crosses 1, then bisection on the linear interpolant
        let mut critical = t;
        for i in 1..big_h.len() {
            let (ta, tb) = ((i - 1) as f64 * dt, i as f64 * dt);
            if horizon(big_h[i], tb) >= 1.0 {
                let (mut lo, mut hi) = (ta, tb);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let w = (mid - ta) / dt;
                    let hm = big_h[i - 1] * (1.0 - w) + big_h[i] * w;
                    if horizon(hm, mid) >= 1.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                critical = hi;
                break;
            }
        }
        return Err(Error::BlowUpHorizon { critical_time: critical });
    }
    let factor = (1.0 - horizon(h_end, t)).powf(-1.0 / alpha) - 1.0;
    Ok(h_end + h_end * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gronwall_examples() {
        assert_eq!(gronwall_local_bound(0.0, &[0.0, 0.0], 1.0, 1.0, 0.7).unwrap(), 0.0);
        let b = gronwall_local_bound(1.0, &[0.0; 11], 1.0, 1.0, 0.5).unwrap();
        assert!((b - 2.0).abs() < 1e-14);
        // tiny c0, h ≡ 1: bound → t
        let b = gronwall_local_bound(0.0, &[1.0; 101], 1e-12, 1.0, 0.3).unwrap();
        assert!((b - 0.3).abs() < 1e-10);
    }

    #[test]
    fn gronwall_horizon_error_reports_critical_time() {
        // y0 = 1, h = 0, c0 = α = 1: critical time is exactly 1
        match gronwall_local_bound(1.0, &[0.0; 201], 1.0, 1.0, 2.0) {
            Err(Error::BlowUpHorizon { critical_time }) => {
                assert!((critical_time - 1.0).abs() < 1e-9)
            }
            other => panic!("expected horizon error, got {other:?}"),
        }
    }

    #[test]
    fn hardy_rejects_bad_beta() {
        use crate::geometry::{Clustering, Geometry};
        let g = Geometry::flat_channel(1.0, 0.3).unwrap();
        let grid = g.volume_grid(16, Clustering::Uniform).unwrap();
        let u = vec![0.0; grid.len()];
        assert!(matches!(hardy_ratio(&grid, &u, 2.0, 1.0), Err(Error::InvalidParameter(_))));
        assert_eq!(hardy_ratio(&grid, &u, 2.0, 0.0).unwrap(), 0.0);
    }
}
