//! The shared database between agents.
//!
//! Agents never talk to each other. They read an immutable [`WorldState`]
//! snapshot and hand back a [`Contribution`]; the scheduler normalizes the
//! contributions of one tick and applies them here in a single transaction.
//! Contributions are summed before any clamping, so the merged result does
//! not depend on their order.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::body::{clamp_to_limits, BodyState, HeadJoints};
use crate::world::{PlanarPose, Scene};
use crate::Error;

/// Translations shorter than this are treated as zero by [`normalize`].
pub const TRANSLATION_DEAD_BAND: f64 = 1e-9;

/// Grid on which [`WorldState::coarse_digest`] compares states.
pub const STALL_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub body: BodyState,
    pub scene: Arc<Scene>,
    pub tick: u64,
    pub intermediate_target: Option<Point3<f64>>,
}

impl WorldState {
    pub fn new(body: BodyState, scene: Scene) -> Result<Self, Error> {
        body.validate()?;
        Ok(Self {
            body,
            scene: Arc::new(scene),
            tick: 0,
            intermediate_target: None,
        })
    }

    /// Where the goal-seeking agents currently aim.
    pub fn aim_point(&self) -> Point3<f64> {
        self.intermediate_target.unwrap_or(self.scene.target)
    }

    fn fields(&self) -> [f64; 10] {
        let b = &self.body;
        let it = self.intermediate_target.map_or([f64::NAN; 3], |p| [p.x, p.y, p.z]);
        [
            b.trunk.x,
            b.trunk.y,
            b.trunk.theta(),
            b.head.alpha,
            b.head.beta,
            b.head.theta,
            b.cone_half_angle,
            it[0],
            it[1],
            it[2],
        ]
    }

    fn hash(s: &str) -> u64 {
        let hash = Sha256::digest(s.as_bytes());
        u64::from_be_bytes(hash[..8].try_into().expect("sha256 output is 32 bytes"))
    }

    /// 64-bit digest of the mutable state (tick excluded), computed over a
    /// canonical rendering with 17 significant digits per float.
    pub fn digest(&self) -> u64 {
        let mut s = String::with_capacity(256);
        for v in self.fields() {
            let _ = write!(s, "{v:.16e};");
        }
        Self::hash(&s)
    }

    /// Digest of the state rounded to [`STALL_RESOLUTION`] (meters and
    /// radians alike), so that floating-point noise around a fixed point
    /// does not count as progress.
    pub fn coarse_digest(&self) -> u64 {
        let mut s = String::with_capacity(256);
        for v in self.fields() {
            if v.is_nan() {
                s.push_str("none;");
            } else {
                let _ = write!(s, "{};", (v / STALL_RESOLUTION).round() as i64);
            }
        }
        Self::hash(&s)
    }
}

/// Step sizes every normalized contribution is held to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConstants {
    delta_pos: f64,
    delta_or: f64,
}

impl NormalizationConstants {
    pub fn new(delta_pos: f64, delta_or: f64) -> Result<Self, Error> {
        if !(delta_pos > 0.0 && delta_or > 0.0 && delta_pos.is_finite() && delta_or.is_finite()) {
            return Err(Error::Config(format!(
                "normalization constants must be positive (got {delta_pos}, {delta_or})"
            )));
        }
        Ok(Self { delta_pos, delta_or })
    }

    pub fn delta_pos(&self) -> f64 {
        self.delta_pos
    }

    pub fn delta_or(&self) -> f64 {
        self.delta_or
    }
}

/// A per-agent increment on the body state. Raw when emitted by an agent,
/// normalized once it has passed through [`normalize`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Contribution {
    pub agent_id: String,
    pub tick: u64,
    pub d_xy: [f64; 2],
    pub d_theta: f64,
    /// Head pitch and yaw increments.
    pub d_head: [f64; 2],
    pub d_cone: f64,
}

impl Contribution {
    pub fn zero(agent_id: impl Into<String>, tick: u64) -> Self {
        Self {
            agent_id: agent_id.into(),
            tick,
            ..Default::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.d_xy == [0.0, 0.0] && self.d_theta == 0.0 && self.d_head == [0.0, 0.0] && self.d_cone == 0.0
    }

    fn components(&self) -> [f64; 6] {
        [
            self.d_xy[0],
            self.d_xy[1],
            self.d_theta,
            self.d_head[0],
            self.d_head[1],
            self.d_cone,
        ]
    }
}

/// Rescales the translation to exactly `Δ_pos` (zero stays zero) and clamps
/// every rotational component into `[-Δ_or, Δ_or]`. The cone increment is the
/// visibility agent's own fixed step and passes through unchanged.
pub fn normalize(raw: &Contribution, k: NormalizationConstants) -> Result<Contribution, Error> {
    if raw.components().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite contribution from agent {}",
            raw.agent_id
        )));
    }
    let [dx, dy] = raw.d_xy;
    let norm = dx.hypot(dy);
    let d_xy = if norm > TRANSLATION_DEAD_BAND {
        let s = k.delta_pos / norm;
        [dx * s, dy * s]
    } else {
        [0.0, 0.0]
    };
    let rot = |v: f64| v.clamp(-k.delta_or, k.delta_or);
    Ok(Contribution {
        agent_id: raw.agent_id.clone(),
        tick: raw.tick,
        d_xy,
        d_theta: rot(raw.d_theta),
        d_head: [rot(raw.d_head[0]), rot(raw.d_head[1])],
        d_cone: raw.d_cone,
    })
}

/// Holds the current state and the set of agents allowed to write to it.
#[derive(Debug, Clone)]
pub struct Blackboard {
    state: Arc<WorldState>,
    agents: BTreeSet<String>,
}

impl Blackboard {
    pub fn new(state: WorldState) -> Self {
        Self {
            state: Arc::new(state),
            agents: BTreeSet::new(),
        }
    }

    pub fn register_agent(&mut self, id: impl Into<String>) {
        self.agents.insert(id.into());
    }

    pub fn is_registered(&self, id: &str) -> bool {
        self.agents.contains(id)
    }

    /// Immutable view of the current state; cheap to clone and share.
    pub fn snapshot(&self) -> Arc<WorldState> {
        Arc::clone(&self.state)
    }

    /// Applies one tick's normalized contributions and advances the tick.
    /// Nothing is written if any contribution is rejected.
    pub fn apply(&mut self, contributions: &[Contribution]) -> Result<Arc<WorldState>, Error> {
        let tick = self.state.tick;
        for c in contributions {
            if !self.agents.contains(&c.agent_id) {
                return Err(Error::Protocol(format!("unknown agent `{}`", c.agent_id)));
            }
            if c.tick != tick {
                return Err(Error::Protocol(format!(
                    "contribution from `{}` is for tick {} but the board is at tick {tick}",
                    c.agent_id, c.tick
                )));
            }
        }
        // Float addition is not associative; a canonical order makes the
        // result independent of how the list was assembled.
        let mut ordered: Vec<&Contribution> = contributions.iter().collect();
        ordered.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
        let mut sum = [0.0f64; 6];
        for c in ordered {
            for (acc, v) in sum.iter_mut().zip(c.components()) {
                *acc += v;
            }
        }
        let [dx, dy, dth, dal, dhy, dcone] = sum;

        let mut next = (*self.state).clone();
        let body = &mut next.body;
        let t = body.trunk;
        body.trunk = PlanarPose::new(t.x + dx, t.y + dy, t.theta() + dth);
        let head = HeadJoints {
            alpha: body.head.alpha + dal,
            beta: body.head.beta,
            theta: body.head.theta + dhy,
        };
        body.head = clamp_to_limits(head, &body.limits);
        body.cone_half_angle = body.cone_limits.clamp(body.cone_half_angle + dcone);
        next.tick = tick + 1;
        self.state = Arc::new(next);
        Ok(self.snapshot())
    }

    pub fn set_intermediate_target(&mut self, target: Option<Point3<f64>>) {
        Arc::make_mut(&mut self.state).intermediate_target = target;
    }

    /// Replaces the body state wholesale (used by scenario setup and tests).
    pub fn set_body(&mut self, body: BodyState) -> Result<(), Error> {
        body.validate()?;
        Arc::make_mut(&mut self.state).body = body;
        Ok(())
    }
}
