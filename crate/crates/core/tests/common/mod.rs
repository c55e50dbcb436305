//! Independent reference computations used as test oracles.
//!
//! Nothing here calls into the library's geometry; each routine is a
//! textbook method written separately so the two can disagree.

#![allow(dead_code)]

use mas_planner::world::Polygon;
use nalgebra::{Point2, Point3};
use rand::Rng;

pub type Pt = (f64, f64);

pub fn pts(poly: &Polygon) -> Vec<Pt> {
    poly.vertices().iter().map(|p| (p.x, p.y)).collect()
}

pub fn polygon(v: &[Pt]) -> Polygon {
    Polygon::from_any_orientation(v.iter().map(|&(x, y)| Point2::new(x, y)).collect()).expect("valid polygon")
}

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn ccw(mut v: Vec<Pt>) -> Vec<Pt> {
    let area: f64 = (0..v.len()).map(|i| {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        a.0 * b.1 - b.0 * a.1
    }).sum();
    if area < 0.0 {
        v.reverse();
    }
    v
}

/// Sutherland-Hodgman: `subject` clipped by the convex polygon `clip`.
pub fn clip_convex(subject: &[Pt], clip: &[Pt]) -> Vec<Pt> {
    let clip = ccw(clip.to_vec());
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        if input.is_empty() {
            break;
        }
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (dp, dq) = (cross(a, b, p), cross(a, b, q));
            if dp >= 0.0 {
                out.push(p);
            }
            if (dp >= 0.0) != (dq >= 0.0) {
                let t = dp / (dp - dq);
                out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
            }
        }
    }
    out
}

pub fn area(v: &[Pt]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    0.5 * (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
}

pub fn perimeter(v: &[Pt]) -> f64 {
    (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            (b.0 - a.0).hypot(b.1 - a.1)
        })
        .sum()
}

/// Perimeter of the intersection of two convex polygons, or 0 when the
/// intersection has no area.
pub fn convex_collision_length(a: &[Pt], b: &[Pt]) -> f64 {
    let i = clip_convex(a, b);
    if area(&i) < 1e-12 {
        0.0
    } else {
        perimeter(&i)
    }
}

/// Separating-axis depth for convex polygons: the smallest projection
/// overlap over all edge normals. Positive means the interiors intersect.
pub fn sat_depth(a: &[Pt], b: &[Pt]) -> f64 {
    let mut depth = f64::INFINITY;
    for poly in [a, b] {
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (nx, ny) = (q.1 - p.1, p.0 - q.0);
            let len = nx.hypot(ny);
            let proj = |v: &[Pt]| {
                v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, y)| {
                    let d = (x * nx + y * ny) / len;
                    (lo.min(d), hi.max(d))
                })
            };
            let (alo, ahi) = proj(a);
            let (blo, bhi) = proj(b);
            depth = depth.min(ahi.min(bhi) - alo.max(blo));
        }
    }
    depth
}

/// Even-odd point membership; points on an edge count as outside.
pub fn strictly_inside(v: &[Pt], p: Pt) -> bool {
    let mut inside = false;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        if cross(a, b, p).abs() < 1e-12
            && p.0 >= a.0.min(b.0) - 1e-12
            && p.0 <= a.0.max(b.0) + 1e-12
            && p.1 >= a.1.min(b.1) - 1e-12
            && p.1 <= a.1.max(b.1) + 1e-12
        {
            return false;
        }
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1) {
            inside = !inside;
        }
    }
    inside
}

/// Monte-Carlo search for a point inside both polygons.
pub fn common_point(a: &[Pt], b: &[Pt], samples: usize, rng: &mut impl Rng) -> bool {
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &(x, y) in a {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    (0..samples).any(|_| {
        let p = (rng.gen_range(lo.0..=hi.0), rng.gen_range(lo.1..=hi.1));
        strictly_inside(a, p) && strictly_inside(b, p)
    })
}

/// Random convex polygon: a regular n-gon with jittered radii is not always
/// convex, so take the hull of random points on a circle instead.
pub fn random_convex(rng: &mut impl Rng, center: Pt, radius: f64) -> Vec<Pt> {
    let n = rng.gen_range(3..=7);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 0.2);
    if angles.len() < 3 {
        angles = vec![0.0, 2.1, 4.2];
    }
    let r = rng.gen_range(0.2 * radius..=radius);
    angles.iter().map(|t| (center.0 + r * t.cos(), center.1 + r * t.sin())).collect()
}

/// Length of the segment `s..t` inside the box `[lo, hi]`, by the slab method.
pub fn slab_length(s: Point3<f64>, t: Point3<f64>, lo: [f64; 3], hi: [f64; 3]) -> f64 {
    let d = t - s;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            if s[k] <= lo[k] || s[k] >= hi[k] {
                return 0.0;
            }
        } else {
            let (a, b) = ((lo[k] - s[k]) / d[k], (hi[k] - s[k]) / d[k]);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    ((t1 - t0).max(0.0)) * d.norm()
}
