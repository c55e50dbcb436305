//! Embodiment kinematics: trunk pose, head (or camera) joints, eye point,
//! vision axis and the visibility cone aperture.
//!
//! The vision axis is `Rz(θ_m + θ_b) · Ry(-α_b) · x̂`: yaw is the sum of
//! trunk heading and head yaw, pitch is positive when looking up, and roll
//! (`β_b`) spins about the axis without moving it.

use nalgebra::{Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::world::{wrap_angle, HeightRange, PlanarPose, Polygon, Scene};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embodiment {
    Manikin,
    Robot,
}

/// Head-to-trunk joint angles (radians).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeadJoints {
    /// Pitch.
    pub alpha: f64,
    /// Roll about the vision axis.
    pub beta: f64,
    /// Yaw.
    pub theta: f64,
}

impl HeadJoints {
    pub fn new(alpha: f64, beta: f64, theta: f64) -> Self {
        Self { alpha, beta, theta }
    }
}

/// Closed angular interval containing zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointRange {
    pub min: f64,
    pub max: f64,
}

impl JointRange {
    /// `min == max == 0` is allowed and models a locked joint.
    pub fn new(min: f64, max: f64) -> Result<Self, Error> {
        let locked = min == 0.0 && max == 0.0;
        if !(locked || min < max) || min > 0.0 || max < 0.0 {
            return Err(Error::Config(format!(
                "joint range [{min}, {max}] must satisfy min < max and contain 0"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub alpha: JointRange,
    pub beta: JointRange,
    pub theta: JointRange,
}

impl JointLimits {
    /// Plausible adult neck range: yaw ±60°, pitch ±45°, roll ±40°.
    pub fn manikin() -> Self {
        Self {
            alpha: JointRange { min: -45f64.to_radians(), max: 45f64.to_radians() },
            beta: JointRange { min: -40f64.to_radians(), max: 40f64.to_radians() },
            theta: JointRange { min: -60f64.to_radians(), max: 60f64.to_radians() },
        }
    }

    /// Pan/tilt camera mast: pan ±170°, tilt ±90°, no roll.
    pub fn robot() -> Self {
        Self {
            alpha: JointRange { min: -90f64.to_radians(), max: 90f64.to_radians() },
            beta: JointRange { min: 0.0, max: 0.0 },
            theta: JointRange { min: -170f64.to_radians(), max: 170f64.to_radians() },
        }
    }

    pub fn for_embodiment(e: Embodiment) -> Self {
        match e {
            Embodiment::Manikin => Self::manikin(),
            Embodiment::Robot => Self::robot(),
        }
    }

    pub fn contains(&self, h: &HeadJoints) -> bool {
        self.alpha.contains(h.alpha) && self.beta.contains(h.beta) && self.theta.contains(h.theta)
    }
}

/// Clamps every joint into its interval. Idempotent.
pub fn clamp_to_limits(head: HeadJoints, limits: &JointLimits) -> HeadJoints {
    HeadJoints {
        alpha: limits.alpha.clamp(head.alpha),
        beta: limits.beta.clamp(head.beta),
        theta: limits.theta.clamp(head.theta),
    }
}

/// Aperture bounds of the visibility cone and the per-firing adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeLimits {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ConeLimits {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, Error> {
        if !(0.0 < min && min <= max && max < std::f64::consts::FRAC_PI_2 && step > 0.0) {
            return Err(Error::Config(format!(
                "cone limits need 0 < min <= max < 90°, step > 0 (got {min}, {max}, {step})"
            )));
        }
        Ok(Self { min, max, step })
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

impl Default for ConeLimits {
    fn default() -> Self {
        Self {
            min: 2f64.to_radians(),
            max: 25f64.to_radians(),
            step: 0.5f64.to_radians(),
        }
    }
}

/// Eye point `S`, vision axis `y_s` and the eye-to-target direction `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisionFrame {
    pub eye: Point3<f64>,
    pub axis: Unit<Vector3<f64>>,
    pub u: Unit<Vector3<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyState {
    pub embodiment: Embodiment,
    pub trunk: PlanarPose,
    pub head: HeadJoints,
    pub limits: JointLimits,
    pub cone_half_angle: f64,
    pub cone_limits: ConeLimits,
    /// Plan-view outline in the trunk frame (x forward).
    pub footprint: Polygon,
    /// Vertical extent of the body used for collision filtering.
    pub height: f64,
    pub eye_height: f64,
    pub eye_forward_offset: f64,
}

impl BodyState {
    /// A manikin at `trunk` with neutral head, minimum cone aperture and default limits.
    pub fn manikin(trunk: PlanarPose, footprint: Polygon) -> Self {
        let cone_limits = ConeLimits::default();
        Self {
            embodiment: Embodiment::Manikin,
            trunk,
            head: HeadJoints::default(),
            limits: JointLimits::manikin(),
            cone_half_angle: cone_limits.min,
            cone_limits,
            footprint,
            height: 1.8,
            eye_height: 1.6,
            eye_forward_offset: 0.1,
        }
    }

    /// Checks the head-limit and cone-aperture invariants.
    pub fn validate(&self) -> Result<(), Error> {
        if !self.limits.contains(&self.head) {
            return Err(Error::Config(format!("head joints {:?} outside limits", self.head)));
        }
        let c = self.cone_half_angle;
        if !(self.cone_limits.min..=self.cone_limits.max).contains(&c) {
            return Err(Error::Config(format!("cone aperture {c} outside its limits")));
        }
        if !(self.height > 0.0) {
            return Err(Error::Config("body height must be positive".into()));
        }
        Ok(())
    }

    pub fn with_trunk(&self, trunk: PlanarPose) -> Self {
        Self { trunk, ..self.clone() }
    }

    pub fn heights(&self) -> HeightRange {
        HeightRange { min: 0.0, max: self.height }
    }
}

pub fn eye_point(state: &BodyState) -> Point3<f64> {
    let (s, c) = state.trunk.theta().sin_cos();
    Point3::new(
        state.trunk.x + state.eye_forward_offset * c,
        state.trunk.y + state.eye_forward_offset * s,
        state.eye_height,
    )
}

/// Axis for the given trunk heading and head pitch/yaw.
pub fn axis_from_angles(trunk_theta: f64, alpha: f64, head_theta: f64) -> Unit<Vector3<f64>> {
    let (sy, cy) = (trunk_theta + head_theta).sin_cos();
    let (sp, cp) = alpha.sin_cos();
    Unit::new_normalize(Vector3::new(cp * cy, cp * sy, sp))
}

pub fn vision_axis(state: &BodyState) -> Unit<Vector3<f64>> {
    axis_from_angles(state.trunk.theta(), state.head.alpha, state.head.theta)
}

/// Unit direction from `eye` toward `aim`.
pub fn direction_to(eye: Point3<f64>, aim: Point3<f64>) -> Result<Unit<Vector3<f64>>, Error> {
    let d = aim - eye;
    let n = d.norm();
    if !(n > 1e-12) {
        return Err(Error::DegenerateDirection);
    }
    Ok(Unit::new_unchecked(d / n))
}

pub fn target_direction(state: &BodyState, scene: &Scene) -> Result<Unit<Vector3<f64>>, Error> {
    direction_to(eye_point(state), scene.target)
}

/// Angle between two unit vectors in `[0, π]`.
pub fn angle_between(a: &Unit<Vector3<f64>>, b: &Unit<Vector3<f64>>) -> f64 {
    // atan2 keeps full precision near 0 and π where acos would not.
    let c = a.dot(b).clamp(-1.0, 1.0);
    a.cross(b).norm().atan2(c)
}

/// Misalignment toward an arbitrary aim point.
pub fn misalignment_to(state: &BodyState, aim: Point3<f64>) -> Result<f64, Error> {
    let u = direction_to(eye_point(state), aim)?;
    Ok(angle_between(&vision_axis(state), &u))
}

pub fn misalignment(state: &BodyState, scene: &Scene) -> Result<f64, Error> {
    misalignment_to(state, scene.target)
}

pub fn vision_frame(state: &BodyState, aim: Point3<f64>) -> Result<VisionFrame, Error> {
    let eye = eye_point(state);
    Ok(VisionFrame {
        eye,
        axis: vision_axis(state),
        u: direction_to(eye, aim)?,
    })
}

/// Head pitch and yaw (relative to `trunk_theta`) that point the axis along `u`.
/// The yaw is wrapped into `(-π, π]`; limits are not applied.
pub fn aiming_angles(trunk_theta: f64, u: &Unit<Vector3<f64>>) -> (f64, f64) {
    let alpha = u.z.atan2(u.x.hypot(u.y));
    let yaw = if u.x == 0.0 && u.y == 0.0 { 0.0 } else { u.y.atan2(u.x) };
    (alpha, wrap_angle(yaw - trunk_theta))
}

/// The local footprint placed at the trunk pose.
pub fn world_footprint(state: &BodyState) -> Polygon {
    state
        .footprint
        .transformed(state.trunk.x, state.trunk.y, state.trunk.theta())
}
