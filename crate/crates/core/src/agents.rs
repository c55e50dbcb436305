//! The elementary agents.
//!
//! Each agent sees only a [`WorldState`] snapshot and its own configuration,
//! and answers with a raw [`Contribution`] toward its own goal. Scaling to the
//! shared step sizes happens later, in [`crate::blackboard::normalize`].

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::blackboard::{Contribution, WorldState};
use crate::body::{
    aiming_angles, axis_from_angles, direction_to, eye_point, misalignment_to, world_footprint, BodyState,
};
use crate::world::{
    central_difference, cone_occlusion, fd_gradient, total_collision_length, wrap_angle, Gradient,
    GradientStep, PlanarPose, RayFan, Scene,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Attraction,
    Repulsion,
    HeadOrientation,
    Visibility,
    Operator,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Attraction,
        AgentKind::Repulsion,
        AgentKind::HeadOrientation,
        AgentKind::Visibility,
        AgentKind::Operator,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Attraction => "attraction",
            AgentKind::Repulsion => "repulsion",
            AgentKind::HeadOrientation => "head-orientation",
            AgentKind::Visibility => "visibility",
            AgentKind::Operator => "operator",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown agent kind `{s}`")))
    }
}

/// One joystick sample: plan-view direction and turn rate, each in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SteerSample {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl SteerSample {
    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.omega.is_finite()
    }
}

/// An elementary agent.
pub trait Agent: Send + Sync {
    fn id(&self) -> &str;

    fn kind(&self) -> AgentKind;

    /// Observes the snapshot and proposes a raw contribution for `state.tick`.
    fn act(&self, state: &WorldState) -> Result<Contribution, Error>;

    /// Live operator input, delivered at a tick boundary. Agents that take
    /// no input ignore it and return `false`.
    fn steer(&mut self, _sample: SteerSample, _tick: u64) -> bool {
        false
    }

    /// Informs the agent of its firing period (ticks between firings).
    fn set_period(&mut self, _period: u32) {}
}

/// Pulls the trunk toward the aim point and turns it to face it.
#[derive(Debug, Clone)]
pub struct AttractionAgent {
    id: String,
    reach: f64,
}

impl AttractionAgent {
    /// An agent that walks all the way onto the aim point.
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), reach: 0.0 }
    }

    /// Stops translating once the trunk is within `reach` of the scene
    /// target in plan view. Turning toward it continues. Intermediate
    /// targets are always walked onto.
    pub fn with_reach(mut self, reach: f64) -> Self {
        self.reach = reach.max(0.0);
        self
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }
}

/// Raw attraction move. Translation stops once the plan distance to the
/// scene target is at most `reach`; an intermediate target ignores `reach`.
pub fn attraction_step(id: &str, state: &WorldState, reach: f64) -> Contribution {
    let aim = state.aim_point();
    let body = &state.body;
    let mut c = Contribution::zero(id, state.tick);
    let (dx, dy) = (aim.x - body.trunk.x, aim.y - body.trunk.y);
    let dist = dx.hypot(dy);
    let reach = if state.intermediate_target.is_some() { 0.0 } else { reach };
    if dist > crate::blackboard::TRANSLATION_DEAD_BAND && dist > reach {
        c.d_xy = [dx, dy];
    }
    let eye = eye_point(body);
    let (ux, uy) = (aim.x - eye.x, aim.y - eye.y);
    // Undefined bearing (aim straight above or below the eye): no turn.
    if ux.hypot(uy) > 1e-12 {
        c.d_theta = wrap_angle(uy.atan2(ux) - body.trunk.theta());
    }
    c
}

impl Agent for AttractionAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Attraction
    }

    fn act(&self, state: &WorldState) -> Result<Contribution, Error> {
        Ok(attraction_step(&self.id, state, self.reach))
    }
}

/// Descends the collision-line length between the body and the scene.
#[derive(Debug, Clone)]
pub struct RepulsionAgent {
    id: String,
    step: GradientStep,
}

impl RepulsionAgent {
    pub fn new(id: impl Into<String>, step: GradientStep) -> Self {
        Self { id: id.into(), step }
    }
}

/// Collision-line length of `body` placed at `pose`.
pub fn body_collision_length(body: &BodyState, pose: PlanarPose, scene: &Scene) -> f64 {
    let placed = body.with_trunk(pose);
    total_collision_length(&world_footprint(&placed), scene, body.heights())
}

/// Gradient of `f` plus whether any sample (center included) was nonzero.
fn sampled_gradient(
    f: impl Fn(PlanarPose) -> f64,
    pose: PlanarPose,
    step: GradientStep,
) -> Result<(Gradient, bool), Error> {
    let touched = Cell::new(f(pose) != 0.0);
    let g = fd_gradient(
        |p| {
            let v = f(p);
            if v != 0.0 {
                touched.set(true);
            }
            v
        },
        pose,
        step,
    )?;
    Ok((g, touched.get()))
}

pub fn repulsion_step(id: &str, state: &WorldState, step: GradientStep) -> Result<Contribution, Error> {
    let body = &state.body;
    let scene = &state.scene;
    let mut c = Contribution::zero(id, state.tick);
    let (g, touched) = sampled_gradient(|p| body_collision_length(body, p, scene), body.trunk, step)?;
    if touched {
        c.d_xy = [-g.x, -g.y];
        c.d_theta = -g.theta;
    }
    Ok(c)
}

impl Agent for RepulsionAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Repulsion
    }

    fn act(&self, state: &WorldState) -> Result<Contribution, Error> {
        repulsion_step(&self.id, state, self.step)
    }
}

/// Turns the head so the vision axis points at the aim point, within limits.
#[derive(Debug, Clone)]
pub struct HeadOrientationAgent {
    id: String,
}

impl HeadOrientationAgent {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into() }
    }
}

pub fn head_orientation_step(id: &str, state: &WorldState) -> Contribution {
    let body = &state.body;
    let mut c = Contribution::zero(id, state.tick);
    let Ok(u) = direction_to(eye_point(body), state.aim_point()) else {
        return c;
    };
    let (alpha, yaw) = aiming_angles(body.trunk.theta(), &u);
    let alpha = body.limits.alpha.clamp(alpha);
    let yaw = body.limits.theta.clamp(yaw);
    c.d_head = [alpha - body.head.alpha, yaw - body.head.theta];
    c
}

impl Agent for HeadOrientationAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::HeadOrientation
    }

    fn act(&self, state: &WorldState) -> Result<Contribution, Error> {
        Ok(head_orientation_step(&self.id, state))
    }
}

/// Keeps the cone toward the target free of obstacles and adapts its aperture.
#[derive(Debug, Clone)]
pub struct VisibilityAgent {
    id: String,
    step: GradientStep,
    fan: RayFan,
}

impl VisibilityAgent {
    pub fn new(id: impl Into<String>, step: GradientStep, fan: RayFan) -> Self {
        Self { id: id.into(), step, fan }
    }
}

/// Occlusion of the visibility cone for a body with the given trunk pose and
/// head pitch/yaw, truncated at the distance from the eye to `aim`.
pub fn cone_measure(
    body: &BodyState,
    pose: PlanarPose,
    alpha: f64,
    head_theta: f64,
    aim: Point3<f64>,
    fan: RayFan,
    scene: &Scene,
) -> f64 {
    let placed = body.with_trunk(pose);
    let eye = eye_point(&placed);
    let axis = axis_from_angles(pose.theta(), alpha, head_theta);
    let range = (aim - eye).norm();
    cone_occlusion(eye, &axis, body.cone_half_angle, range, fan, scene)
}

/// Cone aperture increment: widen while the vision axis is strictly inside
/// the cone, narrow otherwise. Clamping happens when the board applies it.
pub fn adapt_cone(state: &WorldState) -> f64 {
    let body = &state.body;
    match misalignment_to(body, state.aim_point()) {
        Ok(m) if m < body.cone_half_angle => body.cone_limits.step,
        Ok(_) => -body.cone_limits.step,
        Err(_) => 0.0,
    }
}

pub fn visibility_step(
    id: &str,
    state: &WorldState,
    step: GradientStep,
    fan: RayFan,
) -> Result<Contribution, Error> {
    let body = &state.body;
    let scene = &state.scene;
    let aim = state.aim_point();
    let (alpha, yaw) = (body.head.alpha, body.head.theta);
    let mut c = Contribution::zero(id, state.tick);
    c.d_cone = adapt_cone(state);

    let (g, touched) = sampled_gradient(
        |p| cone_measure(body, p, alpha, yaw, aim, fan, scene),
        body.trunk,
        step,
    )?;
    let touched_head = Cell::new(false);
    let record = |v: f64| {
        if v != 0.0 {
            touched_head.set(true);
        }
        v
    };
    let h = step.delta_theta();
    let g_alpha = central_difference(
        |a| record(cone_measure(body, body.trunk, a, yaw, aim, fan, scene)),
        alpha,
        h,
    )?;
    let g_yaw = central_difference(
        |t| record(cone_measure(body, body.trunk, alpha, t, aim, fan, scene)),
        yaw,
        h,
    )?;
    if touched || touched_head.get() {
        c.d_xy = [-g.x, -g.y];
        c.d_theta = -g.theta;
        c.d_head = [-g_alpha, -g_yaw];
    }
    Ok(c)
}

impl Agent for VisibilityAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Visibility
    }

    fn act(&self, state: &WorldState) -> Result<Contribution, Error> {
        visibility_step(&self.id, state, self.step, self.fan)
    }
}

/// One line of an operator script.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub tick: u64,
    pub sample: SteerSample,
}

/// Timed joystick input. Each entry holds until the next one replaces it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorScript {
    entries: Vec<ScriptEntry>,
}

impl OperatorScript {
    pub fn new(entries: Vec<ScriptEntry>) -> Result<Self, Error> {
        if let Some(w) = entries.windows(2).find(|w| w[1].tick < w[0].tick) {
            return Err(Error::Config(format!(
                "operator script ticks must be non-decreasing ({} after {})",
                w[1].tick, w[0].tick
            )));
        }
        if entries.iter().any(|e| !e.sample.is_finite()) {
            return Err(Error::Config("operator script contains a non-finite value".into()));
        }
        Ok(Self { entries })
    }

    /// Parses the line format `tick vx vy omega`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| Error::Parse {
                line: n + 1,
                column: 1,
                message: format!("operator script: {what}"),
            };
            if fields.len() != 4 {
                return Err(bad("expected `tick vx vy omega`"));
            }
            let tick = fields[0].parse::<u64>().map_err(|_| bad("tick must be a non-negative integer"))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("vx, vy and omega must be numbers"));
            entries.push(ScriptEntry {
                tick,
                sample: SteerSample {
                    vx: num(fields[1])?,
                    vy: num(fields[2])?,
                    omega: num(fields[3])?,
                },
            });
        }
        Self::new(entries).map_err(|e| match e {
            Error::Config(m) => Error::Parse { line: 0, column: 0, message: m },
            e => e,
        })
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    /// The sample in force at `tick`, if any.
    pub fn sample_at(&self, tick: u64) -> Option<SteerSample> {
        let idx = self.entries.partition_point(|e| e.tick <= tick);
        idx.checked_sub(1).map(|i| self.entries[i].sample)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# tick vx vy omega\n");
        for e in &self.entries {
            s.push_str(&format!("{} {} {} {}\n", e.tick, e.sample.vx, e.sample.vy, e.sample.omega));
        }
        s
    }
}

/// Where the operator agent gets its input from.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorInput {
    Script(OperatorScript),
    /// Most recent live sample and the tick boundary it arrived at.
    Live(Option<(SteerSample, u64)>),
}

/// Moves the trunk as the human operator directs.
#[derive(Debug, Clone)]
pub struct OperatorAgent {
    id: String,
    input: OperatorInput,
    period: u32,
}

impl OperatorAgent {
    pub fn scripted(id: impl Into<String>, script: OperatorScript) -> Self {
        Self {
            id: id.into(),
            input: OperatorInput::Script(script),
            period: 1,
        }
    }

    pub fn live(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            input: OperatorInput::Live(None),
            period: 1,
        }
    }

    pub fn input(&self) -> &OperatorInput {
        &self.input
    }

    /// The sample this agent would apply at `tick`.
    pub fn sample_at(&self, tick: u64) -> Option<SteerSample> {
        match &self.input {
            OperatorInput::Script(s) => s.sample_at(tick),
            // Live samples go stale after one firing period.
            OperatorInput::Live(Some((s, at))) if tick >= *at && tick - at < u64::from(self.period) => Some(*s),
            OperatorInput::Live(_) => None,
        }
    }
}

pub fn operator_step(id: &str, state: &WorldState, sample: Option<SteerSample>) -> Contribution {
    let mut c = Contribution::zero(id, state.tick);
    if let Some(s) = sample {
        c.d_xy = [s.vx, s.vy];
        c.d_theta = s.omega;
    }
    c
}

impl Agent for OperatorAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Operator
    }

    fn act(&self, state: &WorldState) -> Result<Contribution, Error> {
        Ok(operator_step(&self.id, state, self.sample_at(state.tick)))
    }

    fn steer(&mut self, sample: SteerSample, tick: u64) -> bool {
        match &mut self.input {
            OperatorInput::Live(slot) => {
                *slot = Some((sample, tick));
                true
            }
            OperatorInput::Script(_) => false,
        }
    }

    fn set_period(&mut self, period: u32) {
        self.period = period.max(1);
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use nalgebra::Point2;

    use super::*;
    use crate::blackboard::{normalize, NormalizationConstants};
    use crate::body::BodyState;
    use crate::world::{Bounds, HeightRange, Polygon, Prism};

    fn state_at(pose: PlanarPose, target: Point3<f64>, obstacles: Vec<Prism>) -> WorldState {
        let fp = Polygon::rectangle(-0.5, -0.5, 0.5, 0.5).unwrap();
        let mut body = BodyState::manikin(pose, fp);
        body.eye_forward_offset = 0.0;
        let bounds = Bounds::new(Point2::new(-10.0, -10.0), Point2::new(10.0, 10.0)).unwrap();
        WorldState::new(body, Scene::new(obstacles, target, bounds).unwrap()).unwrap()
    }

    fn wall(x0: f64, x1: f64, y0: f64, y1: f64) -> Prism {
        Prism::new(
            "wall",
            Polygon::rectangle(x0, y0, x1, y1).unwrap(),
            HeightRange::new(0.0, 2.5).unwrap(),
        )
    }

    #[test]
    fn attraction_zero_at_goal() {
        let s = state_at(PlanarPose::new(1.0, 1.0, 0.0), Point3::new(1.0, 1.0, 0.5), vec![]);
        assert!(attraction_step("a", &s, 0.0).is_zero());
    }

    #[test]
    fn attraction_stops_translating_within_reach() {
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.8, 1.0), vec![]);
        let c = attraction_step("a", &s, 1.0);
        assert_eq!(c.d_xy, [0.0, 0.0]);
        assert!(c.d_theta > 0.0);
        assert_ne!(attraction_step("a", &s, 0.5).d_xy, [0.0, 0.0]);
    }

    #[test]
    fn attraction_points_at_target() {
        let s = state_at(PlanarPose::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.0, 1.6), vec![]);
        let raw = attraction_step("a", &s, 0.0);
        let n = normalize(&raw, NormalizationConstants::new(0.05, 0.05).unwrap()).unwrap();
        assert!((n.d_xy[0] + 0.05).abs() < 1e-15 && n.d_xy[1] == 0.0);
    }

    #[test]
    fn attraction_turn_is_signed_bearing_error() {
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(0.0, 3.0, 1.6), vec![]);
        let raw = attraction_step("a", &s, 0.0);
        assert!((raw.d_theta - FRAC_PI_2).abs() < 1e-15);
        // Target straight above the eye: bearing undefined, no turn.
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, 3.0), vec![]);
        assert_eq!(attraction_step("a", &s, 0.0).d_theta, 0.0);
    }

    #[test]
    fn repulsion_far_from_obstacles_is_zero() {
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(5.0, 5.0, 1.0), vec![wall(3.0, 4.0, -1.0, 1.0)]);
        assert!(repulsion_step("r", &s, GradientStep::default()).unwrap().is_zero());
    }

    #[test]
    fn repulsion_pushes_away_from_wall_on_plus_x() {
        // Body spans x ∈ [-0.5, 0.5]; wall starts at x = 0.2.
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(-5.0, 0.0, 1.0), vec![wall(0.2, 1.2, -2.0, 2.0)]);
        let c = repulsion_step("r", &s, GradientStep::default()).unwrap();
        assert!(c.d_xy[0] < 0.0);
        assert!(c.d_xy[1].abs() < 1e-9);
    }

    #[test]
    fn repulsion_symmetric_thin_wall_has_no_translation() {
        // Thin wall through the body center, longer than the body in y.
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(-5.0, 3.0, 1.0), vec![wall(-0.05, 0.05, -2.0, 2.0)]);
        let c = repulsion_step("r", &s, GradientStep::default()).unwrap();
        assert!(c.d_xy[0].abs() < 1e-9, "{c:?}");
        assert!(c.d_xy[1].abs() < 1e-9, "{c:?}");
    }

    #[test]
    fn head_zero_when_collinear() {
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(3.0, 0.0, 1.6), vec![]);
        assert!(head_orientation_step("h", &s).is_zero());
    }

    #[test]
    fn head_turns_toward_in_plane_bearing() {
        let target = Point3::new(3.0 * 0.3f64.cos(), 3.0 * 0.3f64.sin(), 1.6);
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), target, vec![]);
        let c = head_orientation_step("h", &s);
        assert!(c.d_head[0].abs() < 1e-15);
        assert!((c.d_head[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn head_target_behind_pins_at_limit() {
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(-3.0, -0.1, 1.6), vec![]);
        let c = head_orientation_step("h", &s);
        assert_eq!(c.d_head[1], s.body.limits.theta.min);
    }

    #[test]
    fn adapt_cone_rules() {
        let mut s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(3.0, 0.0, 1.6), vec![]);
        s.body.cone_half_angle = s.body.cone_limits.max;
        assert_eq!(adapt_cone(&s), s.body.cone_limits.step);
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(0.0, 3.0, 1.6), vec![]);
        assert_eq!(adapt_cone(&s), -s.body.cone_limits.step);
        // Misalignment exactly equal to the aperture counts as outside.
        let mut s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(3.0, 0.0, 1.6), vec![]);
        s.body.head.alpha = s.body.cone_half_angle;
        let m = misalignment_to(&s.body, s.aim_point()).unwrap();
        s.body.cone_half_angle = m;
        assert_eq!(adapt_cone(&s), -s.body.cone_limits.step);
    }

    #[test]
    fn visibility_clear_cone_moves_nothing() {
        let s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(3.0, 0.0, 1.6), vec![]);
        let c = visibility_step("v", &s, GradientStep::default(), RayFan::default()).unwrap();
        assert_eq!(c.d_xy, [0.0, 0.0]);
        assert_eq!(c.d_head, [0.0, 0.0]);
        assert_eq!(c.d_theta, 0.0);
    }

    #[test]
    fn script_parsing_and_holding() {
        let s = OperatorScript::parse("# comment\n9 0 -1 0\n\n20 0 0 0 # stop\n").unwrap();
        assert_eq!(s.sample_at(8), None);
        assert_eq!(s.sample_at(9), Some(SteerSample { vx: 0.0, vy: -1.0, omega: 0.0 }));
        assert_eq!(s.sample_at(19), Some(SteerSample { vx: 0.0, vy: -1.0, omega: 0.0 }));
        assert_eq!(s.sample_at(25), Some(SteerSample::default()));
        assert!(OperatorScript::parse("5 1 1 0\n3 0 0 0\n").is_err());
        assert!(matches!(OperatorScript::parse("1 2 x 3"), Err(Error::Parse { line: 1, .. })));
        let round = OperatorScript::parse(&s.to_text()).unwrap();
        assert_eq!(round, s);
    }

    #[test]
    fn operator_script_normalizes_to_step() {
        let script = OperatorScript::parse("9 0 -1 0").unwrap();
        let op = OperatorAgent::scripted("operator", script);
        let mut s = state_at(PlanarPose::new(0.0, 0.0, 0.0), Point3::new(3.0, 0.0, 1.6), vec![]);
        s.tick = 9;
        let n = normalize(&op.act(&s).unwrap(), NormalizationConstants::new(0.05, 0.05).unwrap()).unwrap();
        assert_eq!(n.d_xy, [0.0, -0.05]);
        s.tick = 3;
        assert!(op.act(&s).unwrap().is_zero());
    }

    #[test]
    fn live_input_last_wins_and_goes_stale() {
        let mut op = OperatorAgent::live("operator");
        op.set_period(3);
        assert_eq!(op.sample_at(0), None);
        op.steer(SteerSample { vx: 1.0, vy: 0.0, omega: 0.0 }, 4);
        op.steer(SteerSample { vx: 0.0, vy: 1.0, omega: 0.0 }, 4);
        assert_eq!(op.sample_at(4).unwrap().vy, 1.0);
        assert!(op.sample_at(6).is_some());
        assert_eq!(op.sample_at(7), None);
    }
}
