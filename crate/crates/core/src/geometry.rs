//! Reduced domain backends: a flat channel and the gap between two coaxial
//! cylinders.
//!
//! Points and vectors are expressed in the native orthonormal frame of each
//! backend: `(e_x, e_y, e_z)` for the channel, `(e_r, e_θ, e_z)` for the
//! annulus. Everything is independent of the periodic tangential coordinates
//! except where a slow coordinate is sampled explicitly (`x` for the channel,
//! `θ` for the annulus).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    /// `y = 0` for the channel, `r = r1` for the annulus.
    Lower,
    /// `y = H` for the channel, `r = r2` for the annulus.
    Upper,
}

impl Wall {
    pub const BOTH: [Wall; 2] = [Wall::Lower, Wall::Upper];

    pub fn name(self) -> &'static str {
        match self {
            Wall::Lower => "lower",
            Wall::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryKind {
    /// `0 < y < height`, periodic in `x` (period `lx`) and `z` (period `lz`).
    FlatChannel { height: f64, lx: f64, lz: f64 },
    /// `r1 < r < r2`, periodic in `θ` and in the axial direction (period `lz`).
    AnnulusGap { r1: f64, r2: f64, lz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    /// Collar width η: the layer lives in `{φ < η}` near each wall.
    pub collar_width: f64,
}

/// Grid clustering for the wall-normal volume grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Clustering {
    Uniform,
    /// `q = q_lo + L (1 - cos πξ)/2`, clustering quadratically at both walls.
    #[default]
    Cosine,
}

impl Geometry {
    pub fn flat_channel(height: f64, collar_width: f64) -> Result<Self> {
        Self::new(GeometryKind::FlatChannel { height, lx: 2.0, lz: 1.0 }, collar_width)
    }

    pub fn annulus(r1: f64, r2: f64, collar_width: f64) -> Result<Self> {
        Self::new(GeometryKind::AnnulusGap { r1, r2, lz: 1.0 }, collar_width)
    }

    pub fn new(kind: GeometryKind, collar_width: f64) -> Result<Self> {
        let g = Self { kind, collar_width };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GeometryKind::FlatChannel { height, lx, lz } => {
                if !(height > 0.0) || !(lx > 0.0) || !(lz > 0.0) {
                    return Err(Error::Config(format!(
                        "flat channel needs H, lx, lz > 0 (got {height}, {lx}, {lz})"
                    )));
                }
            }
            GeometryKind::AnnulusGap { r1, r2, lz } => {
                if !(r1 > 0.0) || !(r2 > r1) || !(lz > 0.0) {
                    return Err(Error::Config(format!(
                        "annulus needs 0 < r1 < r2 and lz > 0 (got r1={r1}, r2={r2}, lz={lz})"
                    )));
                }
            }
        }
        let eta = self.collar_width;
        if !(eta > 0.0) || !(eta < 0.5 * self.gap()) {
            return Err(Error::Config(format!(
                "collar width {eta} must satisfy 0 < eta < gap/2 = {}",
                0.5 * self.gap()
            )));
        }
        Ok(())
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self.kind, GeometryKind::AnnulusGap { .. })
    }

    /// Index of the wall-normal coordinate in native components.
    pub fn normal_axis(&self) -> usize {
        match self.kind {
            GeometryKind::FlatChannel { .. } => 1,
            GeometryKind::AnnulusGap { .. } => 0,
        }
    }

    /// Index of the native component carrying the primary tangential flow
    /// (`x` in the channel, `θ` in the annulus).
    pub fn flow_axis(&self) -> usize {
        match self.kind {
            GeometryKind::FlatChannel { .. } => 0,
            GeometryKind::AnnulusGap { .. } => 1,
        }
    }

    pub fn normal_bounds(&self) -> (f64, f64) {
        match self.kind {
            GeometryKind::FlatChannel { height, .. } => (0.0, height),
            GeometryKind::AnnulusGap { r1, r2, .. } => (r1, r2),
        }
    }

    pub fn gap(&self) -> f64 {
        let (a, b) = self.normal_bounds();
        b - a
    }

    pub fn wall_coordinate(&self, wall: Wall) -> f64 {
        let (a, b) = self.normal_bounds();
        match wall {
            Wall::Lower => a,
            Wall::Upper => b,
        }
    }

    /// Radial metric factor of the volume element: `r` for the annulus, 1 for the channel.
    pub fn metric(&self, q: f64) -> f64 {
        if self.is_annulus() {
            q
        } else {
            1.0
        }
    }

    /// Measure of the transverse periodic directions per unit metric
    /// (`2π lz` or `lx lz`).
    pub fn transverse_measure(&self) -> f64 {
        match self.kind {
            GeometryKind::FlatChannel { lx, lz, .. } => lx * lz,
            GeometryKind::AnnulusGap { lz, .. } => 2.0 * std::f64::consts::PI * lz,
        }
    }

    /// Area of a wall.
    pub fn wall_area(&self, wall: Wall) -> f64 {
        self.transverse_measure() * self.metric(self.wall_coordinate(wall))
    }

    /// Period of the sampled slow coordinate (`x` or `θ`).
    pub fn slow_period(&self) -> f64 {
        match self.kind {
            GeometryKind::FlatChannel { lx, .. } => lx,
            GeometryKind::AnnulusGap { .. } => 2.0 * std::f64::consts::PI,
        }
    }

    /// Point on `wall` at slow coordinate `s`.
    pub fn wall_point(&self, wall: Wall, s: f64) -> Vec3 {
        self.point_at(wall, s, self.wall_coordinate(wall))
    }

    /// Point at slow coordinate `s` and wall-normal coordinate `q`.
    pub fn point_at(&self, _wall: Wall, s: f64, q: f64) -> Vec3 {
        match self.kind {
            GeometryKind::FlatChannel { .. } => [s, q, 0.0],
            GeometryKind::AnnulusGap { .. } => [q, s, 0.0],
        }
    }

    pub fn normal_coordinate(&self, point: Vec3) -> f64 {
        point[self.normal_axis()]
    }

    fn check_inside(&self, point: Vec3) -> Result<f64> {
        let q = self.normal_coordinate(point);
        let (a, b) = self.normal_bounds();
        let tol = 1e-12 * self.gap();
        if !q.is_finite() || q < a - tol || q > b + tol {
            return Err(Error::DomainViolation { point });
        }
        Ok(q.clamp(a, b))
    }

    /// Distance to the nearest wall and that wall; `None` when equidistant.
    fn nearest_wall(&self, q: f64) -> (f64, Option<Wall>) {
        let (a, b) = self.normal_bounds();
        let dl = q - a;
        let du = b - q;
        if (dl - du).abs() <= 1e-12 * self.gap() {
            (dl.min(du), None)
        } else if dl < du {
            (dl, Some(Wall::Lower))
        } else {
            (du, Some(Wall::Upper))
        }
    }

    /// The smoothed distance φ. Equals the wall distance inside the collar and
    /// is capped by a monotone cubic blend outside it.
    pub fn signed_distance(&self, point: Vec3) -> Result<f64> {
        let q = self.check_inside(point)?;
        let (d, _) = self.nearest_wall(q);
        Ok(self.cap_distance(d))
    }

    /// Cap rule applied to a raw wall distance `d`.
    pub fn cap_distance(&self, d: f64) -> f64 {
        let eta = self.collar_width;
        if d <= eta {
            return d;
        }
        // φ' = (1 - s/w)^2 vanishes at the midline, so φ is C² across it.
        let w = 0.5 * self.gap() - eta;
        let s = (d - eta).min(w);
        eta + s - s * s / w + s * s * s / (3.0 * w * w)
    }

    /// Unit normal `n = ∇φ` of a wall, pointing into the domain.
    pub fn wall_normal(&self, wall: Wall) -> Vec3 {
        let mut n = [0.0; 3];
        n[self.normal_axis()] = match wall {
            Wall::Lower => 1.0,
            Wall::Upper => -1.0,
        };
        n
    }

    /// Which wall's collar a point belongs to (nearest wall).
    pub fn wall_of(&self, point: Vec3) -> Result<Wall> {
        let q = self.check_inside(point)?;
        self.nearest_wall(q).1.ok_or(Error::AmbiguousWall(q))
    }

    pub fn normal_field(&self, point: Vec3) -> Result<Vec3> {
        Ok(self.wall_normal(self.wall_of(point)?))
    }

    /// `Δφ` with φ the distance to the nearest wall.
    pub fn laplacian_phi(&self, point: Vec3) -> Result<f64> {
        let wall = self.wall_of(point)?;
        Ok(match self.kind {
            GeometryKind::FlatChannel { .. } => 0.0,
            GeometryKind::AnnulusGap { .. } => {
                let r = self.normal_coordinate(point);
                match wall {
                    Wall::Lower => 1.0 / r,
                    Wall::Upper => -1.0 / r,
                }
            }
        })
    }

    /// Smooth collar cutoff: 1 for `φ ≤ η/2`, 0 for `φ ≥ η`, smoothstep between.
    pub fn cutoff(&self, phi: f64) -> f64 {
        let eta = self.collar_width;
        let x = ((phi - 0.5 * eta) / (0.5 * eta)).clamp(0.0, 1.0);
        1.0 - x * x * (3.0 - 2.0 * x)
    }

    /// Wall distance from `wall` for wall-normal coordinate `q`.
    pub fn distance_from(&self, wall: Wall, q: f64) -> f64 {
        match wall {
            Wall::Lower => q - self.wall_coordinate(Wall::Lower),
            Wall::Upper => self.wall_coordinate(Wall::Upper) - q,
        }
    }

    /// Tangential frame `(τ1, τ2)` used for layer quantities; identical on both walls.
    /// τ1 is the sampled slow direction (`e_x` or `e_θ`), τ2 is `e_z`.
    pub fn tangent_frame(&self) -> [Vec3; 2] {
        let mut t1 = [0.0; 3];
        t1[self.flow_axis()] = 1.0;
        [t1, [0.0, 0.0, 1.0]]
    }

    /// `(a·∇) e_j` for the native basis vector `e_j` at `point`.
    pub fn basis_derivative(&self, point: Vec3, a: Vec3, j: usize) -> Vec3 {
        match self.kind {
            GeometryKind::FlatChannel { .. } => [0.0; 3],
            GeometryKind::AnnulusGap { .. } => {
                let r = point[0];
                match j {
                    0 => [0.0, a[1] / r, 0.0],
                    1 => [-a[1] / r, 0.0, 0.0],
                    _ => [0.0; 3],
                }
            }
        }
    }

    /// `curl e_j` for the native basis vector `e_j`.
    pub fn basis_curl(&self, point: Vec3, j: usize) -> Vec3 {
        match self.kind {
            GeometryKind::FlatChannel { .. } => [0.0; 3],
            GeometryKind::AnnulusGap { .. } => {
                if j == 1 {
                    [0.0, 0.0, 1.0 / point[0]]
                } else {
                    [0.0; 3]
                }
            }
        }
    }

    /// `∇s` for the sampled slow coordinate.
    pub fn slow_gradient(&self, point: Vec3) -> Vec3 {
        match self.kind {
            GeometryKind::FlatChannel { .. } => [1.0, 0.0, 0.0],
            GeometryKind::AnnulusGap { .. } => [0.0, 1.0 / point[0], 0.0],
        }
    }

    /// Wall-normal volume grid with `n` intervals (`n + 1` nodes).
    pub fn volume_grid(&self, n: usize, clustering: Clustering) -> Result<VolumeGrid> {
        VolumeGrid::new(self, n, clustering)
    }

    /// Collar charts of both walls with `n_points` wall-normal samples each.
    pub fn build_collar(&self, n_points: usize) -> Result<[CollarChart; 2]> {
        self.build_collar_with(n_points, 1.1, &[0.0])
    }

    /// As [`Geometry::build_collar`] with an explicit stretching ratio and slow samples.
    pub fn build_collar_with(
        &self,
        n_points: usize,
        ratio: f64,
        s_grid: &[f64],
    ) -> Result<[CollarChart; 2]> {
        if n_points < 4 {
            return Err(Error::Config(format!("collar needs at least 4 points, got {n_points}")));
        }
        if !(1.0..=2.0).contains(&ratio) {
            return Err(Error::Config(format!("stretching ratio {ratio} outside [1, 2]")));
        }
        if s_grid.is_empty() {
            return Err(Error::Config("collar needs at least one slow sample".into()));
        }
        // geometric stretching, last sample just inside the collar
        let span = 0.95 * self.collar_width;
        let m = n_points - 1;
        let total: f64 = if (ratio - 1.0).abs() < 1e-14 {
            m as f64
        } else {
            (ratio.powi(m as i32) - 1.0) / (ratio - 1.0)
        };
        let h0 = span / total;
        let mut phi = Vec::with_capacity(n_points);
        let mut acc = 0.0;
        let mut step = h0;
        phi.push(0.0);
        for _ in 0..m {
            acc += step;
            step *= ratio;
            phi.push(acc);
        }
        *phi.last_mut().unwrap() = span;

        let build = |wall: Wall| -> Result<CollarChart> {
            let mut coord = Vec::with_capacity(n_points);
            let mut normal = Vec::with_capacity(n_points);
            let mut lap = Vec::with_capacity(n_points);
            let mut phis = Vec::with_capacity(n_points);
            for &d in &phi {
                let q = match wall {
                    Wall::Lower => self.wall_coordinate(wall) + d,
                    Wall::Upper => self.wall_coordinate(wall) - d,
                };
                let p = self.point_at(wall, s_grid[0], q);
                coord.push(q);
                phis.push(self.signed_distance(p)?);
                normal.push(self.normal_field(p)?);
                lap.push(self.laplacian_phi(p)?);
            }
            Ok(CollarChart {
                wall,
                s_grid: s_grid.to_vec(),
                coord,
                phi: phis,
                normal,
                lap_phi: lap,
            })
        };
        Ok([build(Wall::Lower)?, build(Wall::Upper)?])
    }
}

/// Tabulated collar geometry of one wall.
#[derive(Debug, Clone, PartialEq)]
pub struct CollarChart {
    pub wall: Wall,
    /// Slow-coordinate samples along the wall.
    pub s_grid: Vec<f64>,
    /// Wall-normal coordinate (`y` or `r`) of each sample.
    pub coord: Vec<f64>,
    pub phi: Vec<f64>,
    pub normal: Vec<Vec3>,
    pub lap_phi: Vec<f64>,
}

/// Nodes `q_0 < … < q_n` across the gap with quadrature data.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    pub geometry: Geometry,
    pub clustering: Clustering,
    pub nodes: Vec<f64>,
    /// Node quadrature weights including metric and transverse measure.
    pub mass: Vec<f64>,
}

impl VolumeGrid {
    pub fn new(geometry: &Geometry, n: usize, clustering: Clustering) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!("volume grid needs at least 4 intervals, got {n}")));
        }
        let (a, b) = geometry.normal_bounds();
        let nodes: Vec<f64> = (0..=n)
            .map(|i| {
                let xi = i as f64 / n as f64;
                let s = match clustering {
                    Clustering::Uniform => xi,
                    Clustering::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * xi).cos()),
                };
                if i == n {
                    b
                } else {
                    a + (b - a) * s
                }
            })
            .collect();
        Ok(Self::from_nodes(geometry, nodes, clustering))
    }

    pub fn from_nodes(geometry: &Geometry, nodes: Vec<f64>, clustering: Clustering) -> Self {
        let tm = geometry.transverse_measure();
        let n = nodes.len();
        let mut mass = vec![0.0; n];
        for i in 0..n - 1 {
            let h = nodes[i + 1] - nodes[i];
            mass[i] += 0.5 * h;
            mass[i + 1] += 0.5 * h;
        }
        for (m, q) in mass.iter_mut().zip(&nodes) {
            *m *= geometry.metric(*q) * tm;
        }
        Self { geometry: *geometry, clustering, nodes, mass }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec3 {
        self.geometry.point_at(Wall::Lower, 0.0, self.nodes[i])
    }

    /// Wall distance φ (capped) at node `i`.
    pub fn phi(&self, i: usize) -> f64 {
        let q = self.nodes[i];
        let g = &self.geometry;
        let d = g.distance_from(Wall::Lower, q).min(g.distance_from(Wall::Upper, q));
        g.cap_distance(d)
    }

    pub fn same_nodes(&self, other: &VolumeGrid) -> bool {
        self.nodes == other.nodes && self.geometry == other.geometry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm;

    #[test]
    fn channel_distance_and_normal() {
        let g = Geometry::flat_channel(1.0, 0.3).unwrap();
        assert!((g.signed_distance([0.0, 0.1, 0.0]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(g.normal_field([0.0, 0.1, 0.0]).unwrap(), [0.0, 1.0, 0.0]);
        assert_eq!(g.normal_field([0.0, 0.95, 0.0]).unwrap(), [0.0, -1.0, 0.0]);
        assert_eq!(g.laplacian_phi([0.0, 0.1, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn annulus_distance_cap_and_normals() {
        let g = Geometry::annulus(1.0, 2.0, 0.25).unwrap();
        assert!((g.signed_distance([1.9, 0.0, 0.0]).unwrap() - 0.1).abs() < 1e-12);
        let mid = g.signed_distance([1.5, 0.0, 0.0]).unwrap();
        assert!(mid >= 0.25);
        assert_eq!(g.normal_field([1.9, 0.0, 0.0]).unwrap(), [-1.0, 0.0, 0.0]);
        assert_eq!(g.normal_field([1.1, 0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0]);
        assert!((g.laplacian_phi([1.9, 0.0, 0.0]).unwrap() + 1.0 / 1.9).abs() < 1e-15);
        assert!((g.laplacian_phi([1.1, 0.0, 0.0]).unwrap() - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn errors_outside_and_at_midline() {
        let g = Geometry::annulus(1.0, 2.0, 0.25).unwrap();
        assert!(matches!(g.signed_distance([2.5, 0.0, 0.0]), Err(Error::DomainViolation { .. })));
        assert!(matches!(g.normal_field([1.5, 0.0, 0.0]), Err(Error::AmbiguousWall(_))));
        assert!(Geometry::annulus(2.0, 1.0, 0.1).is_err());
        assert!(Geometry::flat_channel(1.0, 0.5).is_err());
        assert!(matches!(g.build_collar(3), Err(Error::Config(_))));
    }

    #[test]
    fn cap_is_monotone_and_continuous() {
        let g = Geometry::flat_channel(1.0, 0.3).unwrap();
        let mut prev = -1.0;
        for i in 0..=500 {
            let d = 0.5 * i as f64 / 500.0;
            let phi = g.cap_distance(d);
            assert!(phi >= prev);
            prev = phi;
        }
        assert!((g.cap_distance(0.3 + 1e-9) - 0.3).abs() < 1e-8);
    }

    #[test]
    fn collar_is_monotone_unit_and_deterministic() {
        let g = Geometry::flat_channel(1.0, 0.3).unwrap();
        let [lo, _] = g.build_collar(8).unwrap();
        assert_eq!(lo.phi.len(), 8);
        assert_eq!(lo.phi[0], 0.0);
        assert!(lo.phi.windows(2).all(|w| w[1] > w[0]));

        let a = Geometry::annulus(1.0, 2.0, 0.3).unwrap();
        let charts = a.build_collar(16).unwrap();
        for c in &charts {
            for n in &c.normal {
                assert!((norm(*n) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(a.build_collar(16).unwrap(), charts);
        // disjoint collars
        let max_lo = charts[0].coord.iter().cloned().fold(f64::MIN, f64::max);
        let min_up = charts[1].coord.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max_lo < min_up);
    }

    #[test]
    fn volume_grid_mass_integrates_metric() {
        let g = Geometry::annulus(1.0, 2.0, 0.3).unwrap();
        let grid = g.volume_grid(256, Clustering::Cosine).unwrap();
        let total: f64 = grid.mass.iter().sum();
        let exact = g.transverse_measure() * 1.5;
        assert!((total - exact).abs() < 1e-12 * exact);
    }
}
