//! Property tests for norms, fits and the projector.

use proptest::prelude::*;

use vvlab::expansion::leray_project;
use vvlab::geometry::{Clustering, Geometry};
use vvlab::spaces::{volume_norm, weighted_inner, weighted_norm, AnisotropicIndex, FastGrid, NormSpec, ProfileField, SlowGrid, VectorField};
use vvlab::study::fit_rate;

fn field(grid: &vvlab::geometry::VolumeGrid, c: &[f64]) -> VectorField {
    let (a, b) = grid.geometry.normal_bounds();
    let mut f = VectorField::zeros(grid.len());
    for (i, &q) in grid.nodes.iter().enumerate() {
        let x = (q - a) / (b - a);
        for comp in 0..3 {
            f.comps[comp][i] = c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck * ((k + comp) as f64 * 1.7 * x).cos())
                .sum();
        }
    }
    f
}

fn profile(c: &[f64]) -> ProfileField {
    let slow = SlowGrid::periodic(16, 2.0 * std::f64::consts::PI, 1.0);
    let fast = FastGrid::mapped(128, 2.0, None).unwrap();
    ProfileField::from_fn(slow, fast, 2, |comp, s, z| {
        c.iter().enumerate().map(|(k, ck)| ck * ((k as f64) * s + comp as f64).cos() * (-(1.0 + 0.3 * k as f64) * z).exp()).sum()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn volume_norms_are_absolutely_homogeneous(
        c in prop::collection::vec(-1.0f64..1.0, 4),
        lambda in -8.0f64..8.0,
    ) {
        let grid = Geometry::annulus(1.0, 2.0, 0.45).unwrap().volume_grid(64, Clustering::Cosine).unwrap();
        let f = field(&grid, &c);
        let mut g = f.clone();
        for comp in g.comps.iter_mut() {
            for v in comp.iter_mut() {
                *v *= lambda;
            }
        }
        for spec in [NormSpec::L2, NormSpec::H1, NormSpec::Linf, NormSpec::Lp(4.0)] {
            let a = volume_norm(&grid, &f, spec).unwrap();
            let b = volume_norm(&grid, &g, spec).unwrap();
            prop_assert!((b - lambda.abs() * a).abs() <= 1e-12 * (1.0 + b), "{spec:?}: {a} {b}");
        }
    }

    #[test]
    fn anisotropic_norms_nest(
        c in prop::collection::vec(-1.0f64..1.0, 3),
        m in 0u32..2, l in 0u32..2, p in prop::sample::select(vec![1.0, 2.0, 4.0]),
    ) {
        let f = profile(&c);
        let base = weighted_norm(&f, AnisotropicIndex::new(0, m, l, p).unwrap()).unwrap();
        let more_s = weighted_norm(&f, AnisotropicIndex::new(0, m + 1, l, p).unwrap()).unwrap();
        let more_z = weighted_norm(&f, AnisotropicIndex::new(0, m, l + 1, p).unwrap()).unwrap();
        let weighted = weighted_norm(&f, AnisotropicIndex::new(1, m, l, p).unwrap()).unwrap();
        prop_assert!(more_s >= base && more_z >= base && weighted >= base);
    }

    #[test]
    fn fitted_slope_ignores_error_scale(
        e in prop::collection::vec(1e-6f64..1.0, 5),
        k in -20i32..20,
        c in 1e-3f64..1e3,
    ) {
        let nus = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
        let pairs: Vec<(f64, f64)> = nus.iter().copied().zip(e.iter().copied()).collect();
        let base = fit_rate(&pairs).unwrap();
        let two = 2f64.powi(k);
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(n, v)| (n, v * two)).collect();
        let f2 = fit_rate(&scaled).unwrap();
        prop_assert_eq!(f2.slope.to_bits(), base.slope.to_bits());
        prop_assert!((f2.intercept - base.intercept - two.ln()).abs() < 1e-12);
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(n, v)| (n, v * c)).collect();
        let fc = fit_rate(&scaled).unwrap();
        prop_assert!((fc.slope - base.slope).abs() < 1e-12);
    }

    #[test]
    fn projector_is_an_orthogonal_projection(
        c in prop::collection::vec(-1.0f64..1.0, 5),
        annulus in any::<bool>(),
    ) {
        let g = if annulus { Geometry::annulus(1.0, 2.0, 0.45) } else { Geometry::flat_channel(1.0, 0.45) }.unwrap();
        let grid = g.volume_grid(80, Clustering::Cosine).unwrap();
        let u = field(&grid, &c);
        let (p, q) = leray_project(&u, &grid).unwrap();
        let (pp, qq) = leray_project(&p, &grid).unwrap();
        let scale = weighted_inner(&grid, &u, &u).max(1e-300);
        prop_assert!(pp.sub(&p).max_abs() <= 1e-10 * (1.0 + u.max_abs()));
        prop_assert!(qq.max_abs() <= 1e-10 * (1.0 + u.max_abs()));
        prop_assert!(weighted_inner(&grid, &p, &q).abs() <= 1e-10 * scale);
        // P + (I - P) reassembles u
        prop_assert!(p.add(&q).sub(&u).max_abs() <= 1e-12 * (1.0 + u.max_abs()));
    }
}
