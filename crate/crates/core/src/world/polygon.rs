//! Simple planar polygons and the collision-line criterion between two of them.
//!
//! The collision line of two overlapping footprints is the boundary of their
//! intersection region. Its length is assembled from the pieces of each
//! polygon's boundary that lie strictly inside the other one, plus the
//! boundary stretches the two polygons share with their interiors on the same
//! side. No intersection polygon is ever materialized, so concave inputs and
//! multi-component intersections need no special handling.

use nalgebra::{Point2, Vector2};

use super::GeometryError;

/// Relative tolerance used for on-boundary and parallelism tests.
pub(crate) const EPS: f64 = 1e-12;

/// A simple, counter-clockwise polygon without holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2<f64>>,
}

impl Polygon {
    /// Validates and wraps a vertex ring. The ring must not repeat its first vertex.
    pub fn new(vertices: Vec<Point2<f64>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let area = signed_area(&vertices);
        let scale = bbox_diagonal(&vertices).max(f64::MIN_POSITIVE);
        if area.abs() <= EPS * scale * scale {
            return Err(GeometryError::ZeroArea);
        }
        if area < 0.0 {
            return Err(GeometryError::Clockwise);
        }
        if let Some((i, j)) = first_self_intersection(&vertices) {
            return Err(GeometryError::SelfIntersecting(i, j));
        }
        Ok(Self { vertices })
    }

    /// Like [`Polygon::new`] but accepts clockwise rings by reversing them.
    pub fn from_any_orientation(mut vertices: Vec<Point2<f64>>) -> Result<Self, GeometryError> {
        if vertices.len() >= 3 && signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self::new(vertices)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Edges as `(start, end)` pairs, closing the ring.
    pub fn edges(&self) -> impl Iterator<Item = (Point2<f64>, Point2<f64>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Applies a rigid motion: rotation by `theta` about the origin, then translation.
    /// Rigid motions preserve simplicity and orientation, so no re-validation is needed.
    pub fn transformed(&self, tx: f64, ty: f64, theta: f64) -> Polygon {
        let (s, c) = theta.sin_cos();
        let vertices = self
            .vertices
            .iter()
            .map(|p| Point2::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty))
            .collect();
        Polygon { vertices }
    }

    pub(crate) fn scale(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }

    pub fn classify(&self, p: Point2<f64>) -> Location {
        classify_point(&self.vertices, p, EPS * self.scale().max(1.0))
    }

    pub fn contains_strictly(&self, p: Point2<f64>) -> bool {
        self.classify(p) == Location::Inside
    }

    /// Bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point2<f64>, Point2<f64>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

/// Where a point sits relative to a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

fn signed_area(vertices: &[Point2<f64>]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}

fn bbox_diagonal(vertices: &[Point2<f64>]) -> f64 {
    let (mut lo, mut hi) = (vertices[0], vertices[0]);
    for p in vertices {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (hi - lo).norm()
}

fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn point_segment_distance(p: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub(crate) fn classify_point(vertices: &[Point2<f64>], p: Point2<f64>, tol: f64) -> Location {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if point_segment_distance(p, a, b) <= tol {
            return Location::Boundary;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Returns the indices of the first pair of non-adjacent edges that touch or cross.
fn first_self_intersection(vertices: &[Point2<f64>]) -> Option<(usize, usize)> {
    let n = vertices.len();
    let tol = EPS * bbox_diagonal(vertices).max(1.0);
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        if (b - a).norm() <= tol {
            return Some((i, i));
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if adjacent {
                // Adjacent edges may only share their common vertex: reject folding back.
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let u = p - shared;
                let v = q - shared;
                if cross(u, v).abs() <= tol * (u.norm() + v.norm()) && u.dot(&v) > 0.0 {
                    return Some((i, j));
                }
                continue;
            }
            if segments_touch(a, b, c, d, tol) {
                return Some((i, j));
            }
        }
    }
    None
}

fn segments_touch(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>, d: Point2<f64>, tol: f64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol
        || point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
}

/// Parameters along `p→q` where it meets segment `r→s`, including the ends of
/// collinear overlaps. Only parameters strictly inside `(0, 1)` are pushed.
pub(crate) fn split_parameters(
    p: Point2<f64>,
    q: Point2<f64>,
    r: Point2<f64>,
    s: Point2<f64>,
    tol: f64,
    out: &mut Vec<f64>,
) {
    let d = q - p;
    let e = s - r;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return;
    }
    let denom = cross(d, e);
    let w = r - p;
    let mut push = |t: f64| {
        if t > 0.0 && t < 1.0 {
            out.push(t);
        }
    };
    if denom.abs() <= tol * d.norm() * e.norm() {
        // Parallel: only collinear overlaps contribute split points.
        if cross(d, w).abs() <= tol * d.norm().max(1.0) {
            push(w.dot(&d) / len2);
            push((s - p).dot(&d) / len2);
        }
        return;
    }
    let t = cross(w, e) / denom;
    let u = cross(w, d) / denom;
    let ut = tol / e.norm().max(tol);
    if (-ut..=1.0 + ut).contains(&u) {
        push(t);
    }
    // Endpoints of r→s lying on p→q within tolerance also split it.
    for v in [r, s] {
        if point_segment_distance(v, p, q) <= tol {
            push((v - p).dot(&d) / len2);
        }
    }
}

/// Length of `poly`'s boundary lying strictly inside `other`, plus, when
/// `count_shared` is set, the length it shares with `other`'s boundary with
/// both interiors on the same side.
fn boundary_inside(poly: &Polygon, other: &Polygon, count_shared: bool) -> f64 {
    let tol = EPS * poly.scale().max(other.scale()).max(1.0);
    let mut total = 0.0;
    let mut params = Vec::new();
    for (p, q) in poly.edges() {
        params.clear();
        params.push(0.0);
        params.push(1.0);
        for (r, s) in other.edges() {
            split_parameters(p, q, r, s, tol, &mut params);
        }
        params.sort_by(f64::total_cmp);
        let d = q - p;
        let edge_len = d.norm();
        for w in params.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 0.0 {
                continue;
            }
            let mid = p + d * (0.5 * (t0 + t1));
            match classify_point(other.vertices(), mid, tol) {
                Location::Inside => total += (t1 - t0) * edge_len,
                Location::Boundary if count_shared => {
                    if shares_interior_side(mid, d, other, tol) {
                        total += (t1 - t0) * edge_len;
                    }
                }
                _ => {}
            }
        }
    }
    total
}

/// Whether the edge of `other` through `mid` runs in the same direction as `dir`.
/// Both polygons are CCW, so same direction means both interiors lie on the left.
fn shares_interior_side(mid: Point2<f64>, dir: Vector2<f64>, other: &Polygon, tol: f64) -> bool {
    other.edges().any(|(r, s)| {
        let e = s - r;
        point_segment_distance(mid, r, s) <= tol
            && cross(dir, e).abs() <= 1e-9 * dir.norm() * e.norm()
            && dir.dot(&e) > 0.0
    })
}

/// Length of the collision line between two footprints: the perimeter of
/// their intersection region, summed over all connected components. Touching
/// footprints with disjoint interiors give zero.
pub fn collision_length(a: &Polygon, b: &Polygon) -> f64 {
    let (alo, ahi) = a.bounds();
    let (blo, bhi) = b.bounds();
    if ahi.x <= blo.x || bhi.x <= alo.x || ahi.y <= blo.y || bhi.y <= alo.y {
        return 0.0;
    }
    boundary_inside(a, b, true) + boundary_inside(b, a, false)
}
