//! Scene representation and the geometric criteria the agents descend on.
//!
//! Obstacles are prisms: a planar footprint extruded over a height interval.
//! Everything here is a pure function of its inputs.

mod gradient;
mod occlusion;
mod polygon;

pub use gradient::{central_difference, fd_gradient, Gradient, GradientStep};
pub use occlusion::{cone_occlusion, cone_rays, segment_occluded, RayFan};
pub use polygon::{collision_length, Location, Polygon};

use std::f64::consts::{PI, TAU};

use nalgebra::{Point2, Point3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("polygon is clockwise; footprints must be counter-clockwise")]
    Clockwise,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("polygon has a non-finite coordinate")]
    NonFinite,
    #[error("prism heights must satisfy z_min < z_max (got {0} and {1})")]
    EmptyHeightRange(f64, f64),
    #[error("target ({0}, {1}) lies outside the scene bounds")]
    TargetOutOfBounds(f64, f64),
    #[error("bounds are empty")]
    EmptyBounds,
}

/// Closed height interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightRange {
    pub min: f64,
    pub max: f64,
}

impl HeightRange {
    pub fn new(min: f64, max: f64) -> Result<Self, GeometryError> {
        if !(min < max) {
            return Err(GeometryError::EmptyHeightRange(min, max));
        }
        Ok(Self { min, max })
    }

    /// Interiors overlap; ranges that only touch do not.
    pub fn overlaps(&self, other: &HeightRange) -> bool {
        self.min < other.max && other.min < self.max
    }
}

/// An obstacle: footprint extruded over a height range.
#[derive(Debug, Clone, PartialEq)]
pub struct Prism {
    pub name: String,
    pub footprint: Polygon,
    pub heights: HeightRange,
}

impl Prism {
    pub fn new(name: impl Into<String>, footprint: Polygon, heights: HeightRange) -> Self {
        Self {
            name: name.into(),
            footprint,
            heights,
        }
    }
}

/// Axis-aligned plan-view rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point2<f64>,
    pub max: Point2<f64>,
}

impl Bounds {
    pub fn new(min: Point2<f64>, max: Point2<f64>) -> Result<Self, GeometryError> {
        if !(min.x < max.x && min.y < max.y) {
            return Err(GeometryError::EmptyBounds);
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.min.x..=self.max.x).contains(&x) && (self.min.y..=self.max.y).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub obstacles: Vec<Prism>,
    pub target: Point3<f64>,
    pub bounds: Bounds,
}

impl Scene {
    pub fn new(
        obstacles: Vec<Prism>,
        target: Point3<f64>,
        bounds: Bounds,
    ) -> Result<Self, GeometryError> {
        if !bounds.contains(target.x, target.y) {
            return Err(GeometryError::TargetOutOfBounds(target.x, target.y));
        }
        Ok(Self {
            obstacles,
            target,
            bounds,
        })
    }

    /// Obstacle-free scene whose bounds are a square of half-width `extent` around the origin.
    pub fn empty(target: Point3<f64>, extent: f64) -> Result<Self, GeometryError> {
        let bounds = Bounds::new(Point2::new(-extent, -extent), Point2::new(extent, extent))?;
        Self::new(Vec::new(), target, bounds)
    }
}

/// Trunk pose in the floor plane. `theta` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    theta: f64,
}

impl PlanarPose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self::new(self.x, self.y, theta)
    }

    pub fn plan_distance(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Sum of collision lengths between `footprint` and every obstacle whose
/// height range overlaps `heights`.
pub fn total_collision_length(footprint: &Polygon, scene: &Scene, heights: HeightRange) -> f64 {
    scene
        .obstacles
        .iter()
        .filter(|o| o.heights.overlaps(&heights))
        .map(|o| collision_length(footprint, &o.footprint))
        .sum()
}
