//! Finite-difference checks of the collar geometry.

use vvlab::geometry::{Geometry, Wall};

fn geometries() -> [Geometry; 2] {
    [Geometry::annulus(1.0, 2.0, 0.45).unwrap(), Geometry::flat_channel(1.0, 0.45).unwrap()]
}

fn phi_at(g: &Geometry, q: f64) -> f64 {
    g.signed_distance(g.point_at(Wall::Lower, 0.0, q)).unwrap()
}

#[test]
fn gradient_of_phi_is_the_unit_normal_in_the_collar() {
    let h = 1e-6;
    for g in geometries() {
        let (a, b) = g.normal_bounds();
        for wall in [Wall::Lower, Wall::Upper] {
            for k in 1..20 {
                let d = g.collar_width * k as f64 / 20.0;
                let q = match wall {
                    Wall::Lower => a + d,
                    Wall::Upper => b - d,
                };
                let x = g.point_at(wall, 0.3, q);
                let n = g.normal_field(x).unwrap();
                let fd = (phi_at(&g, q + h) - phi_at(&g, q - h)) / (2.0 * h);
                assert!((fd - n[g.normal_axis()]).abs() < 1e-8, "{fd} vs {n:?}");
                assert!((n.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn laplacian_of_phi_matches_second_differences() {
    let h = 1e-4;
    for g in geometries() {
        let (a, _) = g.normal_bounds();
        for k in 1..10 {
            let q = a + 0.4 * k as f64 / 10.0;
            let d2 = (phi_at(&g, q + h) - 2.0 * phi_at(&g, q) + phi_at(&g, q - h)) / (h * h);
            let d1 = (phi_at(&g, q + h) - phi_at(&g, q - h)) / (2.0 * h);
            // radial Laplacian picks up φ'/r in the annulus
            let fd = d2 + if g.is_annulus() { d1 / q } else { 0.0 };
            let exact = g.laplacian_phi(g.point_at(Wall::Lower, 0.0, q)).unwrap();
            assert!((fd - exact).abs() < 1e-5, "q = {q}: {fd} vs {exact}");
        }
    }
}

#[test]
fn phi_is_capped_smoothly_away_from_the_walls() {
    for g in geometries() {
        let (a, b) = g.normal_bounds();
        let n = 400;
        let vals: Vec<f64> = (0..=n).map(|i| phi_at(&g, a + (b - a) * i as f64 / n as f64)).collect();
        let mid = vals[n / 2];
        assert!(vals.iter().all(|&v| v <= mid + 1e-12 && v >= 0.0));
        let dq = (b - a) / n as f64;
        let slope: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]) / dq).collect();
        // no kinks: |φ''| <= 2/w on the cap, w = gap/2 - η
        let w = 0.5 * g.gap() - g.collar_width;
        let jump = slope.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(jump <= 1.05 * 2.0 / w * dq, "slope jump {jump}");
    }
}

#[test]
fn cutoff_is_one_near_the_wall_and_zero_beyond_the_collar() {
    for g in geometries() {
        let eta = g.collar_width;
        for i in 0..=100 {
            let phi = eta * 1.5 * i as f64 / 100.0;
            let c = g.cutoff(phi);
            if phi <= 0.5 * eta {
                assert_eq!(c, 1.0);
            } else if phi >= eta {
                assert_eq!(c, 0.0);
            } else {
                assert!(c > 0.0 && c < 1.0);
            }
        }
    }
}

#[test]
fn tangent_frame_is_orthonormal_and_normal_to_the_walls() {
    for g in geometries() {
        let [t1, t2] = g.tangent_frame();
        let dot = |a: [f64; 3], b: [f64; 3]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert_eq!(dot(t1, t2), 0.0);
        assert_eq!(dot(t1, t1), 1.0);
        for w in [Wall::Lower, Wall::Upper] {
            let n = g.wall_normal(w);
            assert_eq!(dot(n, t1), 0.0);
            assert_eq!(dot(n, t2), 0.0);
        }
    }
}

#[test]
fn midline_is_ambiguous_and_outside_points_are_rejected() {
    let g = Geometry::annulus(1.0, 2.0, 0.45).unwrap();
    assert!(g.wall_of([1.5, 0.0, 0.0]).is_err());
    assert!(g.signed_distance([2.5, 0.0, 0.0]).is_err());
    assert!(Geometry::annulus(1.0, 2.0, 0.6).is_err());
}
