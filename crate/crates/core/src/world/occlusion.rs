//! Line-of-sight tests against prism obstacles.

use nalgebra::{Point2, Point3, Unit, Vector3};

use super::polygon::{classify_point, split_parameters, Location, EPS};
use super::{Prism, Scene};

/// Parameter sub-intervals of `s→t` (in `[0, 1]`) strictly inside `prism`.
fn prism_intervals(s: Point3<f64>, t: Point3<f64>, prism: &Prism, out: &mut Vec<(f64, f64)>) {
    // Height slab.
    let dz = t.z - s.z;
    let (z0, z1) = if dz.abs() <= f64::EPSILON * (s.z.abs() + t.z.abs()).max(1.0) {
        if s.z > prism.heights.min && s.z < prism.heights.max {
            (0.0, 1.0)
        } else {
            return;
        }
    } else {
        let a = (prism.heights.min - s.z) / dz;
        let b = (prism.heights.max - s.z) / dz;
        (a.min(b).max(0.0), a.max(b).min(1.0))
    };
    if z1 <= z0 {
        return;
    }

    let poly = &prism.footprint;
    let tol = EPS * poly.scale().max(1.0);
    let p = Point2::new(s.x, s.y);
    let q = Point2::new(t.x, t.y);
    if (q - p).norm() <= tol {
        if classify_point(poly.vertices(), p, tol) == Location::Inside {
            out.push((z0, z1));
        }
        return;
    }

    let mut params = vec![0.0, 1.0];
    for (r, e) in poly.edges() {
        split_parameters(p, q, r, e, tol, &mut params);
    }
    params.sort_by(f64::total_cmp);
    let d = q - p;
    for w in params.windows(2) {
        let (a, b) = (w[0].max(z0), w[1].min(z1));
        if b <= a {
            continue;
        }
        let mid = p + d * (0.5 * (w[0] + w[1]));
        if classify_point(poly.vertices(), mid, tol) == Location::Inside {
            out.push((a, b));
        }
    }
}

/// Total length of the parts of segment `s→t` strictly inside any obstacle.
/// Zero means `t` is visible from `s`. Overlapping obstacles are not double counted.
pub fn segment_occluded(s: Point3<f64>, t: Point3<f64>, scene: &Scene) -> f64 {
    // Canonical endpoint order makes the result bitwise symmetric in (s, t).
    let (s, t) = if (s.x, s.y, s.z) <= (t.x, t.y, t.z) {
        (s, t)
    } else {
        (t, s)
    };
    let mut intervals = Vec::new();
    for prism in &scene.obstacles {
        prism_intervals(s, t, prism, &mut intervals);
    }
    if intervals.is_empty() {
        return 0.0;
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut covered = 0.0;
    let (mut lo, mut hi) = intervals[0];
    for &(a, b) in &intervals[1..] {
        if a > hi {
            covered += hi - lo;
            lo = a;
            hi = b;
        } else {
            hi = hi.max(b);
        }
    }
    covered += hi - lo;
    covered * (t - s).norm()
}

/// Fixed ray layout inside a cone: the axis ray plus `rings` concentric rings
/// of eight equally spaced rays. Ring `k` sits at `k / rings` of the half-angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RayFan {
    pub rings: usize,
}

impl RayFan {
    pub const RAYS_PER_RING: usize = 8;

    pub fn new(rings: usize) -> Self {
        Self { rings }
    }

    pub fn n_rays(&self) -> usize {
        1 + Self::RAYS_PER_RING * self.rings
    }
}

impl Default for RayFan {
    fn default() -> Self {
        Self { rings: 3 }
    }
}

/// Orthonormal pair perpendicular to `axis`. The first vector is horizontal
/// whenever the axis is not vertical.
fn perpendicular_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let z = Vector3::z();
    let mut e1 = axis.cross(&z);
    if e1.norm() < 1e-9 {
        e1 = axis.cross(&Vector3::x());
    }
    let e1 = e1.normalize();
    let e2 = e1.cross(axis);
    (e1, e2)
}

/// Unit ray directions of `fan` around `axis` with the given half-angle.
pub fn cone_rays(axis: &Unit<Vector3<f64>>, half_angle: f64, fan: RayFan) -> Vec<Vector3<f64>> {
    let a = axis.into_inner();
    let (e1, e2) = perpendicular_basis(&a);
    let mut rays = Vec::with_capacity(fan.n_rays());
    rays.push(a);
    for k in 1..=fan.rings {
        let phi = half_angle * k as f64 / fan.rings as f64;
        let (sp, cp) = phi.sin_cos();
        for j in 0..RayFan::RAYS_PER_RING {
            let psi = std::f64::consts::TAU * j as f64 / RayFan::RAYS_PER_RING as f64;
            let (ss, cs) = psi.sin_cos();
            rays.push(a * cp + (e1 * cs + e2 * ss) * sp);
        }
    }
    rays
}

/// Mean occluded length over the rays of `fan`, each ray truncated at `range`.
pub fn cone_occlusion(
    apex: Point3<f64>,
    axis: &Unit<Vector3<f64>>,
    half_angle: f64,
    range: f64,
    fan: RayFan,
    scene: &Scene,
) -> f64 {
    if scene.obstacles.is_empty() {
        return 0.0;
    }
    let rays = cone_rays(axis, half_angle, fan);
    let total: f64 = rays
        .iter()
        .map(|d| segment_occluded(apex, apex + d * range, scene))
        .sum();
    total / rays.len() as f64
}
