//! Scenario files, bundled benchmark scenes and run metrics.
//!
//! Scenarios are TOML. Lengths are meters; every angle in the file is in
//! degrees (fields end in `_deg`) and is converted to radians when the
//! scenario is built. `docs/scenario-format.md` at the repository root
//! describes every field.

pub mod bundled;
mod metrics;

pub use metrics::{metrics, MetricsFormat, RunMetrics};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};

use crate::agents::{
    AgentKind, AttractionAgent, HeadOrientationAgent, OperatorAgent, OperatorScript, RepulsionAgent,
    VisibilityAgent,
};
use crate::blackboard::{NormalizationConstants, WorldState};
use crate::body::{BodyState, ConeLimits, Embodiment, HeadJoints, JointLimits, JointRange};
use crate::scheduler::{Command, Convergence, RunConfig, Scheduler, TraceHeader, TRACE_VERSION};
use crate::world::{Bounds, GradientStep, HeightRange, PlanarPose, Polygon, Prism, RayFan, Scene};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub scene: SceneSpec,
    pub body: BodySpec,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub run: RunSpec,
    /// Path of an operator script, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_script: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub target: [f64; 3],
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub name: String,
    pub footprint: Vec<[f64; 2]>,
    /// `[z_min, z_max]`.
    pub z: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub theta_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadSpec {
    #[serde(default)]
    pub alpha_deg: f64,
    #[serde(default)]
    pub beta_deg: f64,
    #[serde(default)]
    pub theta_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub alpha_deg: [f64; 2],
    pub beta_deg: [f64; 2],
    pub theta_deg: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub min_deg: f64,
    pub max_deg: f64,
    pub step_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub embodiment: Embodiment,
    /// Plan-view outline in the trunk frame, x forward, counter-clockwise.
    pub footprint: Vec<[f64; 2]>,
    pub height: f64,
    pub eye_height: f64,
    pub eye_forward_offset: f64,
    pub pose: PoseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<HeadSpec>,
    /// Defaults depend on the embodiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub kind: AgentKind,
    pub rate: u32,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub active: bool,
}

fn yes() -> bool {
    true
}

fn is_true(v: &bool) -> bool {
    *v
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_pos: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_or_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step_xy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step_theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub align_tol_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_ticks: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ticks: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_rings: Option<usize>,
}

/// A control command scheduled at a tick, mirroring the live console controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub tick: u64,
    #[serde(flatten)]
    pub action: EventAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventAction {
    /// Sets the intermediate target; omit `target` to clear it.
    IntermediateTarget {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<[f64; 3]>,
    },
    Pause { agent: String },
    Work { agent: String },
    Rate { agent: String, value: u32 },
    Delta {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pos: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        or_deg: Option<f64>,
    },
}

impl EventAction {
    fn to_command(&self) -> Command {
        match self {
            EventAction::IntermediateTarget { target } => Command::IntermediateTarget { target: *target },
            EventAction::Pause { agent } => Command::SetActive { agent: agent.clone(), active: false },
            EventAction::Work { agent } => Command::SetActive { agent: agent.clone(), active: true },
            EventAction::Rate { agent, value } => Command::SetRate { agent: agent.clone(), rate: *value },
            EventAction::Delta { pos, or_deg } => Command::SetNormalization {
                delta_pos: *pos,
                delta_or: or_deg.map(f64::to_radians),
            },
        }
    }
}

fn polygon(points: &[[f64; 2]]) -> Result<Polygon, Error> {
    Ok(Polygon::new(points.iter().map(|&[x, y]| Point2::new(x, y)).collect())?)
}

fn range_deg([lo, hi]: [f64; 2]) -> Result<JointRange, Error> {
    JointRange::new(lo.to_radians(), hi.to_radians())
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    /// Canonical text form; `parse(to_toml())` gives back an equal value.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario structures always serialize")
    }

    fn limits(&self) -> Result<JointLimits, Error> {
        match &self.body.limits {
            None => Ok(JointLimits::for_embodiment(self.body.embodiment)),
            Some(l) => Ok(JointLimits {
                alpha: range_deg(l.alpha_deg)?,
                beta: range_deg(l.beta_deg)?,
                theta: range_deg(l.theta_deg)?,
            }),
        }
    }

    fn cone_limits(&self) -> Result<ConeLimits, Error> {
        match &self.body.cone {
            None => Ok(ConeLimits::default()),
            Some(c) => ConeLimits::new(c.min_deg.to_radians(), c.max_deg.to_radians(), c.step_deg.to_radians()),
        }
    }

    /// Every validation problem, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut err = |e: String| errors.push(e);

        let bounds = Bounds::new(
            Point2::new(self.scene.bounds.min[0], self.scene.bounds.min[1]),
            Point2::new(self.scene.bounds.max[0], self.scene.bounds.max[1]),
        );
        match &bounds {
            Err(e) => err(format!("scene.bounds: {e}")),
            Ok(b) => {
                let [x, y, _] = self.scene.target;
                if !b.contains(x, y) {
                    err(format!("scene.target: ({x}, {y}) lies outside the scene bounds"));
                }
            }
        }
        if self.scene.target.iter().any(|v| !v.is_finite()) {
            err("scene.target: coordinates must be finite".into());
        }
        let mut names = BTreeSet::new();
        for (i, o) in self.scene.obstacles.iter().enumerate() {
            let at = format!("scene.obstacles[{i}] `{}`", o.name);
            if !names.insert(o.name.as_str()) {
                err(format!("{at}: duplicate obstacle name"));
            }
            if let Err(e) = polygon(&o.footprint) {
                err(format!("{at}: footprint: {e}"));
            }
            if let Err(e) = HeightRange::new(o.z[0], o.z[1]) {
                err(format!("{at}: z: {e}"));
            }
        }

        let b = &self.body;
        if let Err(e) = polygon(&b.footprint) {
            err(format!("body.footprint: {e}"));
        }
        if !(b.height > 0.0) {
            err("body.height: must be positive".into());
        }
        if !b.eye_height.is_finite() || !b.eye_forward_offset.is_finite() {
            err("body: eye geometry must be finite".into());
        }
        let limits = self.limits();
        if let Err(e) = &limits {
            err(format!("body.limits: {e}"));
        }
        let cone = self.cone_limits();
        match &cone {
            Err(e) => err(format!("body.cone: {e}")),
            Ok(c) => {
                if let Some(init) = b.cone.and_then(|c| c.initial_deg) {
                    if !(c.min..=c.max).contains(&init.to_radians()) {
                        err("body.cone.initial_deg: must lie within [min_deg, max_deg]".into());
                    }
                }
            }
        }
        if let (Ok(l), Some(h)) = (&limits, &b.head) {
            let head = HeadJoints::new(h.alpha_deg.to_radians(), h.beta_deg.to_radians(), h.theta_deg.to_radians());
            if !l.contains(&head) {
                err("body.head: joints outside their limits".into());
            }
        }

        let mut ids = BTreeSet::new();
        for (i, a) in self.agents.iter().enumerate() {
            let at = format!("agents[{i}] `{}`", a.id);
            if !ids.insert(a.id.as_str()) {
                err(format!("{at}: duplicate agent id"));
            }
            if a.rate < 1 {
                err(format!("{at}: rate must be >= 1 (got {})", a.rate));
            }
        }
        if self.agents.iter().filter(|a| a.kind == AgentKind::Operator).count() > 1 {
            err("agents: at most one operator agent".into());
        }

        let r = &self.run;
        let positive = [
            ("run.delta_pos", r.delta_pos),
            ("run.delta_or_deg", r.delta_or_deg),
            ("run.fd_step_xy", r.fd_step_xy),
            ("run.fd_step_theta_deg", r.fd_step_theta_deg),
            ("run.d_tol", r.d_tol),
            ("run.visibility_tol", r.visibility_tol),
            ("run.align_tol_deg", r.align_tol_deg),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    err(format!("{name}: must be positive (got {v})"));
                }
            }
        }
        if r.stall_ticks == Some(0) {
            err("run.stall_ticks: must be >= 1".into());
        }

        for (i, e) in self.events.iter().enumerate() {
            let agent = match &e.action {
                EventAction::Pause { agent } | EventAction::Work { agent } => Some(agent),
                EventAction::Rate { agent, value } => {
                    if *value < 1 {
                        err(format!("events[{i}]: rate must be >= 1"));
                    }
                    Some(agent)
                }
                EventAction::IntermediateTarget { target: Some(t) } if t.iter().any(|v| !v.is_finite()) => {
                    err(format!("events[{i}]: target must be finite"));
                    None
                }
                _ => None,
            };
            if let Some(a) = agent {
                if !ids.contains(a.as_str()) {
                    err(format!("events[{i}]: unknown agent `{a}`"));
                }
            }
        }
        errors
    }

    fn scene(&self) -> Result<Scene, Error> {
        let obstacles = self
            .scene
            .obstacles
            .iter()
            .map(|o| Ok(Prism::new(o.name.clone(), polygon(&o.footprint)?, HeightRange::new(o.z[0], o.z[1])?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let s = &self.scene;
        let bounds = Bounds::new(Point2::new(s.bounds.min[0], s.bounds.min[1]), Point2::new(s.bounds.max[0], s.bounds.max[1]))?;
        Ok(Scene::new(obstacles, Point3::new(s.target[0], s.target[1], s.target[2]), bounds)?)
    }

    fn body_state(&self) -> Result<BodyState, Error> {
        let b = &self.body;
        let cone_limits = self.cone_limits()?;
        let head = b.head.unwrap_or_default();
        let body = BodyState {
            embodiment: b.embodiment,
            trunk: PlanarPose::new(b.pose.x, b.pose.y, b.pose.theta_deg.to_radians()),
            head: HeadJoints::new(head.alpha_deg.to_radians(), head.beta_deg.to_radians(), head.theta_deg.to_radians()),
            limits: self.limits()?,
            cone_half_angle: b.cone.and_then(|c| c.initial_deg).map_or(cone_limits.min, f64::to_radians),
            cone_limits,
            footprint: polygon(&b.footprint)?,
            height: b.height,
            eye_height: b.eye_height,
            eye_forward_offset: b.eye_forward_offset,
        };
        body.validate()?;
        Ok(body)
    }

    /// Run settings; anything the file leaves out takes the
    /// [`RunConfig::default`] value.
    pub fn run_config(&self) -> Result<RunConfig, Error> {
        let r = &self.run;
        let d = RunConfig::default();
        let config = RunConfig {
            normalization: NormalizationConstants::new(
                r.delta_pos.unwrap_or(d.normalization.delta_pos()),
                r.delta_or_deg.map_or(d.normalization.delta_or(), f64::to_radians),
            )?,
            gradient: GradientStep::new(
                r.fd_step_xy.unwrap_or(d.gradient.delta_xy()),
                r.fd_step_theta_deg.map_or(d.gradient.delta_theta(), f64::to_radians),
            )?,
            convergence: Convergence {
                d_tol: r.d_tol.unwrap_or(d.convergence.d_tol),
                visibility_tol: r.visibility_tol.unwrap_or(d.convergence.visibility_tol),
                align_tol: r.align_tol_deg.map_or(d.convergence.align_tol, f64::to_radians),
                stall_ticks: r.stall_ticks.unwrap_or(d.convergence.stall_ticks),
            },
            max_ticks: r.max_ticks.unwrap_or(d.max_ticks),
            ray_fan: r.cone_rings.map_or(d.ray_fan, RayFan::new),
        };
        config.validate()?;
        Ok(config)
    }

    /// Initial blackboard state.
    pub fn initial_state(&self) -> Result<WorldState, Error> {
        WorldState::new(self.body_state()?, self.scene()?)
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// How the operator agent receives input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorMode {
    /// Scripted input (or none at all).
    #[default]
    Headless,
    /// Live steering through the command queue.
    Live,
}

/// Command-line style adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub rates: Vec<(String, u32)>,
    pub pause: Vec<String>,
    pub work: Vec<String>,
    pub delta_pos: Option<f64>,
    pub delta_or_deg: Option<f64>,
    pub max_ticks: Option<u64>,
    pub stall_ticks: Option<u64>,
    /// Replaces the scenario's script; adds an operator agent if there is none.
    pub operator_script: Option<OperatorScript>,
    /// Drops the scenario's operator script.
    pub no_operator_script: bool,
    pub events: Vec<EventSpec>,
}

/// A validated scenario together with its loaded operator script.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub script: Option<OperatorScript>,
}

impl Scenario {
    pub fn from_parts(file: ScenarioFile, script: Option<OperatorScript>) -> Result<Self, Error> {
        let errors = file.validate();
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        Ok(Self { file, script })
    }

    /// Parses and validates a scenario, resolving the operator script
    /// relative to `base_dir`.
    pub fn from_str_in(text: &str, base_dir: &Path) -> Result<Self, Error> {
        Self::from_str_with(text, |rel| {
            let path = base_dir.join(rel);
            std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
        })
    }

    /// Parses and validates a scenario, reading the operator script through `read_script`.
    pub fn from_str_with(text: &str, read_script: impl Fn(&str) -> Result<String, String>) -> Result<Self, Error> {
        let file = ScenarioFile::parse(text)?;
        let errors = file.validate();
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let script = match &file.operator_script {
            None => None,
            Some(rel) => {
                let text = read_script(rel).map_err(|e| Error::Validation(vec![format!("operator_script: {e}")]))?;
                Some(OperatorScript::parse(&text)?)
            }
        };
        Ok(Self { file, script })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str_in(&text, &base)
    }

    /// Loads `bundled:NAME` from the built-in scenes, anything else from disk.
    pub fn open(spec: &str) -> Result<Self, Error> {
        match spec.strip_prefix("bundled:") {
            Some(name) => bundled::load(name),
            None => Self::load(spec),
        }
    }

    /// Operator mode a trace was recorded in.
    pub fn mode_of(header: &TraceHeader) -> OperatorMode {
        if header.live {
            OperatorMode::Live
        } else {
            OperatorMode::Headless
        }
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    /// Applies `overrides` and re-validates.
    pub fn with_overrides(&self, o: &Overrides) -> Result<Self, Error> {
        let mut file = self.file.clone();
        let mut script = self.script.clone();
        for (id, rate) in &o.rates {
            match file.agents.iter_mut().find(|a| &a.id == id) {
                Some(a) => a.rate = *rate,
                None => return Err(Error::Validation(vec![format!("--rate: unknown agent `{id}`")])),
            }
        }
        for (ids, active) in [(&o.pause, false), (&o.work, true)] {
            for id in ids {
                match file.agents.iter_mut().find(|a| &a.id == id) {
                    Some(a) => a.active = active,
                    None => return Err(Error::Validation(vec![format!("unknown agent `{id}`")])),
                }
            }
        }
        if o.delta_pos.is_some() {
            file.run.delta_pos = o.delta_pos;
        }
        if o.delta_or_deg.is_some() {
            file.run.delta_or_deg = o.delta_or_deg;
        }
        if o.max_ticks.is_some() {
            file.run.max_ticks = o.max_ticks;
        }
        if o.stall_ticks.is_some() {
            file.run.stall_ticks = o.stall_ticks;
        }
        if o.no_operator_script {
            script = None;
            file.operator_script = None;
        }
        if let Some(s) = &o.operator_script {
            script = Some(s.clone());
        }
        if script.is_some() && !file.agents.iter().any(|a| a.kind == AgentKind::Operator) {
            file.agents.push(AgentSpec {
                id: "operator".into(),
                kind: AgentKind::Operator,
                rate: 1,
                active: true,
            });
        }
        file.events.extend(o.events.iter().cloned());
        file.events.sort_by_key(|e| e.tick);
        Self::from_parts(file, script)
    }

    /// Builds a ready-to-run scheduler.
    pub fn build(&self, mode: OperatorMode) -> Result<Scheduler, Error> {
        let config = self.file.run_config()?;
        let mut sched = Scheduler::new(self.file.initial_state()?, config)?;
        let mut agents = self.file.agents.clone();
        if mode == OperatorMode::Live && !agents.iter().any(|a| a.kind == AgentKind::Operator) {
            agents.push(AgentSpec {
                id: "operator".into(),
                kind: AgentKind::Operator,
                rate: 1,
                active: true,
            });
        }
        for a in &agents {
            let agent: Box<dyn crate::agents::Agent> = match a.kind {
                AgentKind::Attraction => Box::new(AttractionAgent::new(&a.id).with_reach(config.convergence.d_tol)),
                AgentKind::Repulsion => Box::new(RepulsionAgent::new(&a.id, config.gradient)),
                AgentKind::HeadOrientation => Box::new(HeadOrientationAgent::new(&a.id)),
                AgentKind::Visibility => Box::new(VisibilityAgent::new(&a.id, config.gradient, config.ray_fan)),
                AgentKind::Operator => match mode {
                    OperatorMode::Live => Box::new(OperatorAgent::live(&a.id)),
                    OperatorMode::Headless => {
                        Box::new(OperatorAgent::scripted(&a.id, self.script.clone().unwrap_or_default()))
                    }
                },
            };
            sched.register(agent, a.rate, a.active)?;
        }
        for e in &self.file.events {
            sched.schedule(e.tick, e.action.to_command());
        }
        Ok(sched)
    }

    pub fn trace_header(&self) -> Result<TraceHeader, Error> {
        let config = self.file.run_config()?;
        Ok(TraceHeader {
            v: TRACE_VERSION,
            scenario: self.file.name.clone(),
            agents: self
                .file
                .agents
                .iter()
                .map(|a| crate::scheduler::AgentConfig {
                    agent_id: a.id.clone(),
                    rate: a.rate,
                    active: a.active,
                })
                .collect(),
            delta_pos: config.normalization.delta_pos(),
            delta_or: config.normalization.delta_or(),
            initial_digest: self.file.initial_state()?.digest(),
            live: false,
        })
    }
}
