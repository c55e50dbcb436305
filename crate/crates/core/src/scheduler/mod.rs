//! Deterministic tick loop.
//!
//! Every agent has a firing period `rate` (in ticks) and fires at tick `t`
//! when it is active and `t % rate == 0`. A tick takes one snapshot, invokes
//! the firing agents in registration order, normalizes their contributions
//! and applies them to the blackboard in one transaction. Control commands
//! (retuning, pause/work, operator input, intermediate targets) queue up and
//! are drained only at tick boundaries.

mod trace;

pub use trace::{
    CommandOrigin, CommandRecord, Delta, FiringRecord, StateSummary, TickRecord, Trace, TraceEnd,
    TraceHeader, TRACE_VERSION,
};

use std::collections::{BTreeMap, HashSet};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{body_collision_length, Agent, AgentKind, SteerSample};
use crate::blackboard::{normalize, Blackboard, Contribution, NormalizationConstants, WorldState};
use crate::body::{eye_point, misalignment};
use crate::world::{segment_occluded, GradientStep, RayFan};
use crate::Error;

/// Per-agent scheduling state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub agent_id: String,
    pub rate: u32,
    pub active: bool,
}

impl AgentConfig {
    pub fn new(agent_id: impl Into<String>, rate: u32) -> Self {
        Self {
            agent_id: agent_id.into(),
            rate,
            active: true,
        }
    }

    pub fn fires_at(&self, tick: u64) -> bool {
        self.active && tick % u64::from(self.rate) == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStatus {
    #[serde(flatten)]
    pub config: AgentConfig,
    pub kind: AgentKind,
    /// Normalized contribution from the agent's most recent firing.
    pub last: Option<Delta>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub d_tol: f64,
    pub visibility_tol: f64,
    pub align_tol: f64,
    pub stall_ticks: u64,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            d_tol: 0.05,
            visibility_tol: 1e-6,
            align_tol: 1e-3,
            stall_ticks: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub normalization: NormalizationConstants,
    pub gradient: GradientStep,
    pub convergence: Convergence,
    pub max_ticks: u64,
    pub ray_fan: RayFan,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let c = &self.convergence;
        if !(c.d_tol > 0.0 && c.visibility_tol > 0.0 && c.align_tol > 0.0 && c.stall_ticks > 0) {
            return Err(Error::Config("convergence tolerances must all be positive".into()));
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            normalization: NormalizationConstants::new(0.05, 0.05).expect("positive constants"),
            gradient: GradientStep::default(),
            convergence: Convergence::default(),
            max_ticks: 5000,
            ray_fan: RayFan::default(),
        }
    }
}

/// A control request, applied at the next tick boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    SetRate { agent: String, rate: u32 },
    SetActive { agent: String, active: bool },
    SetNormalization {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_pos: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_or: Option<f64>,
    },
    Steer(SteerSample),
    IntermediateTarget { target: Option<[f64; 3]> },
}

/// Thread-safe handle for submitting commands from outside the tick loop.
#[derive(Debug, Clone)]
pub struct CommandSender(Sender<(CommandOrigin, Command)>);

impl CommandSender {
    /// Returns `false` once the scheduler is gone.
    pub fn send(&self, command: Command) -> bool {
        self.0.send((CommandOrigin::Live, command)).is_ok()
    }
}

/// Which goals hold in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConvergenceFlags {
    pub reached: bool,
    pub visible: bool,
    pub aligned: bool,
    pub collision_free: bool,
}

impl ConvergenceFlags {
    pub fn converged(&self) -> bool {
        self.reached && self.visible && self.aligned && self.collision_free
    }
}

/// Evaluates the stop condition against the scene's final target.
pub fn convergence_flags(state: &WorldState, c: &Convergence) -> ConvergenceFlags {
    let body = &state.body;
    let target = state.scene.target;
    ConvergenceFlags {
        reached: body.trunk.plan_distance(target.x, target.y) <= c.d_tol,
        visible: segment_occluded(eye_point(body), target, &state.scene) <= c.visibility_tol,
        aligned: misalignment(body, &state.scene).is_ok_and(|m| m <= c.align_tol),
        collision_free: body_collision_length(body, body.trunk, &state.scene) == 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    Stalled,
    MaxTicks,
}

impl Outcome {
    /// Process exit status for this outcome.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::Stalled => 2,
            Outcome::MaxTicks => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub ticks: u64,
    pub final_state: Arc<WorldState>,
    pub flags: ConvergenceFlags,
}

struct Slot {
    agent: Box<dyn Agent>,
    config: AgentConfig,
    last: Option<Contribution>,
}

pub struct Scheduler {
    board: Blackboard,
    slots: Vec<Slot>,
    config: RunConfig,
    scripted: BTreeMap<u64, Vec<Command>>,
    tx: Sender<(CommandOrigin, Command)>,
    rx: Receiver<(CommandOrigin, Command)>,
    pool: Option<rayon::ThreadPool>,
}

impl Scheduler {
    pub fn new(state: WorldState, config: RunConfig) -> Result<Self, Error> {
        config.validate()?;
        let (tx, rx) = mpsc::channel();
        Ok(Self {
            board: Blackboard::new(state),
            slots: Vec::new(),
            config,
            scripted: BTreeMap::new(),
            tx,
            rx,
            pool: None,
        })
    }

    /// Adds an agent; registration order is invocation order.
    pub fn register(&mut self, mut agent: Box<dyn Agent>, rate: u32, active: bool) -> Result<(), Error> {
        let id = agent.id().to_string();
        if self.slots.iter().any(|s| s.config.agent_id == id) {
            return Err(Error::Config(format!("agent `{id}` registered twice")));
        }
        if rate == 0 {
            return Err(Error::Config(format!("agent `{id}`: rate must be >= 1")));
        }
        agent.set_period(rate);
        self.board.register_agent(id.clone());
        self.slots.push(Slot {
            agent,
            config: AgentConfig { agent_id: id, rate, active },
            last: None,
        });
        Ok(())
    }

    /// Evaluates firing agents on `threads` worker threads (1 = inline).
    pub fn set_threads(&mut self, threads: usize) -> Result<(), Error> {
        self.pool = if threads <= 1 {
            None
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Some(pool)
        };
        Ok(())
    }

    /// Queues `command` to be applied at the boundary of `tick`, ahead of live commands.
    pub fn schedule(&mut self, tick: u64, command: Command) {
        self.scripted.entry(tick).or_default().push(command);
    }

    pub fn command_sender(&self) -> CommandSender {
        CommandSender(self.tx.clone())
    }

    pub fn submit(&self, command: Command) {
        // The receiver lives in `self`, so this cannot fail.
        let _ = self.tx.send((CommandOrigin::Live, command));
    }

    fn slot(&self, agent: &str) -> Result<&Slot, Error> {
        self.slots
            .iter()
            .find(|s| s.config.agent_id == agent)
            .ok_or_else(|| Error::Protocol(format!("unknown agent `{agent}`")))
    }

    /// Requests a new firing period; effective from the next tick boundary.
    pub fn set_rate(&self, agent: &str, rate: u32) -> Result<(), Error> {
        self.slot(agent)?;
        if rate == 0 {
            return Err(Error::Protocol("rate must be >= 1".into()));
        }
        self.submit(Command::SetRate { agent: agent.into(), rate });
        Ok(())
    }

    /// Pause (`false`) or resume (`true`) an agent from the next tick boundary.
    pub fn set_active(&self, agent: &str, active: bool) -> Result<(), Error> {
        self.slot(agent)?;
        self.submit(Command::SetActive { agent: agent.into(), active });
        Ok(())
    }

    pub fn set_normalization(&self, k: NormalizationConstants) {
        self.submit(Command::SetNormalization {
            delta_pos: Some(k.delta_pos()),
            delta_or: Some(k.delta_or()),
        });
    }

    pub fn state(&self) -> Arc<WorldState> {
        self.board.snapshot()
    }

    pub fn run_config(&self) -> &RunConfig {
        &self.config
    }

    pub fn agent_configs(&self) -> Vec<AgentConfig> {
        self.slots.iter().map(|s| s.config.clone()).collect()
    }

    /// Configuration, kind and last normalized contribution of each agent,
    /// in registration order.
    pub fn agent_status(&self) -> Vec<AgentStatus> {
        self.slots
            .iter()
            .map(|s| AgentStatus {
                config: s.config.clone(),
                kind: s.agent.kind(),
                last: s.last.as_ref().map(Delta::from),
            })
            .collect()
    }

    pub fn flags(&self) -> ConvergenceFlags {
        convergence_flags(&self.board.snapshot(), &self.config.convergence)
    }

    fn apply_command(&mut self, command: &Command, tick: u64) -> Result<(), Error> {
        match command {
            Command::SetRate { agent, rate } => {
                if *rate == 0 {
                    return Err(Error::Protocol("rate must be >= 1".into()));
                }
                let slot = self.slot_mut(agent)?;
                slot.config.rate = *rate;
                slot.agent.set_period(*rate);
            }
            Command::SetActive { agent, active } => self.slot_mut(agent)?.config.active = *active,
            Command::SetNormalization { delta_pos, delta_or } => {
                let k = self.config.normalization;
                self.config.normalization = NormalizationConstants::new(
                    delta_pos.unwrap_or(k.delta_pos()),
                    delta_or.unwrap_or(k.delta_or()),
                )
                .map_err(|e| Error::Protocol(e.to_string()))?;
            }
            Command::Steer(sample) => {
                if !sample.is_finite() {
                    return Err(Error::Protocol("non-finite steer sample".into()));
                }
                let mut taken = false;
                for slot in &mut self.slots {
                    taken |= slot.agent.steer(*sample, tick);
                }
                if !taken {
                    return Err(Error::Protocol("no agent accepts live steering".into()));
                }
            }
            Command::IntermediateTarget { target } => {
                if target.is_some_and(|p| p.iter().any(|v| !v.is_finite())) {
                    return Err(Error::Protocol("non-finite intermediate target".into()));
                }
                self.board
                    .set_intermediate_target(target.map(|[x, y, z]| Point3::new(x, y, z)));
            }
        }
        Ok(())
    }

    fn slot_mut(&mut self, agent: &str) -> Result<&mut Slot, Error> {
        self.slots
            .iter_mut()
            .find(|s| s.config.agent_id == agent)
            .ok_or_else(|| Error::Protocol(format!("unknown agent `{agent}`")))
    }

    fn drain_commands(&mut self, tick: u64) -> Vec<CommandRecord> {
        let mut pending: Vec<(CommandOrigin, Command)> = self
            .scripted
            .remove(&tick)
            .unwrap_or_default()
            .into_iter()
            .map(|c| (CommandOrigin::Scripted, c))
            .collect();
        pending.extend(self.rx.try_iter());
        pending
            .into_iter()
            .map(|(origin, command)| {
                let error = self.apply_command(&command, tick).err().map(|e| e.to_string());
                CommandRecord { origin, command, error }
            })
            .collect()
    }

    /// Executes one tick and returns its trace record.
    pub fn tick(&mut self) -> TickRecord {
        let tick = self.board.snapshot().tick;
        let commands = self.drain_commands(tick);
        let snapshot = self.board.snapshot();
        let firing: Vec<usize> = (0..self.slots.len())
            .filter(|&i| self.slots[i].config.fires_at(tick))
            .collect();

        let evaluate = |i: &usize| self.slots[*i].agent.act(&snapshot);
        let raws: Vec<Result<Contribution, Error>> = match &self.pool {
            Some(pool) => pool.install(|| firing.par_iter().map(evaluate).collect()),
            None => firing.iter().map(evaluate).collect(),
        };

        let k = self.config.normalization;
        let mut firings = Vec::with_capacity(firing.len());
        let mut applied = Vec::with_capacity(firing.len());
        for (&i, raw) in firing.iter().zip(raws) {
            let id = self.slots[i].config.agent_id.clone();
            let (raw, normalized, error) = match raw.and_then(|r| normalize(&r, k).map(|n| (r, n))) {
                Ok((r, n)) => (Some(r), n, None),
                Err(e) => (None, Contribution::zero(id.clone(), tick), Some(e.to_string())),
            };
            firings.push(FiringRecord {
                agent: id,
                raw: raw.as_ref().map(Delta::from),
                normalized: Delta::from(&normalized),
                error,
            });
            self.slots[i].last = Some(normalized.clone());
            applied.push(normalized);
        }

        let state = self
            .board
            .apply(&applied)
            .expect("contributions come from registered agents for the current tick");
        TickRecord {
            tick,
            commands,
            firings,
            state: StateSummary::from(&*state),
            digest: state.digest(),
        }
    }

    /// Runs until converged, stalled, or out of ticks, feeding each record to `sink`.
    pub fn run(&mut self, mut sink: impl FnMut(&TickRecord)) -> RunReport {
        let mut runner = Runner::new(self);
        if let Some(report) = runner.check_start(self) {
            return report;
        }
        loop {
            let (record, done) = runner.advance(self);
            sink(&record);
            if let Some(report) = done {
                return report;
            }
        }
    }

    /// Convenience wrapper collecting the full trace.
    pub fn run_traced(&mut self, header: TraceHeader) -> (RunReport, Trace) {
        let mut records = Vec::new();
        let report = self.run(|r| records.push(r.clone()));
        let trace = Trace {
            header,
            records,
            end: Some(TraceEnd {
                outcome: report.outcome,
                ticks: report.ticks,
            }),
        };
        (report, trace)
    }
}

/// Termination bookkeeping for [`Scheduler::run`] and [`replay`].
pub struct Runner {
    seen: HashSet<u64>,
    repeats: u64,
}

impl Runner {
    pub fn new(scheduler: &Scheduler) -> Self {
        let mut seen = HashSet::new();
        seen.insert(scheduler.board.snapshot().coarse_digest());
        Self { seen, repeats: 0 }
    }

    fn report(scheduler: &Scheduler, outcome: Outcome) -> RunReport {
        let state = scheduler.board.snapshot();
        RunReport {
            outcome,
            ticks: state.tick,
            flags: convergence_flags(&state, &scheduler.config.convergence),
            final_state: state,
        }
    }

    /// Outcome before any tick runs, if the run should not start at all.
    pub fn check_start(&self, scheduler: &Scheduler) -> Option<RunReport> {
        let state = scheduler.board.snapshot();
        if scheduler.flags().converged() {
            return Some(Self::report(scheduler, Outcome::Converged));
        }
        if state.tick >= scheduler.config.max_ticks {
            return Some(Self::report(scheduler, Outcome::MaxTicks));
        }
        None
    }

    /// Runs one tick and decides whether the run is over.
    pub fn advance(&mut self, scheduler: &mut Scheduler) -> (TickRecord, Option<RunReport>) {
        let record = scheduler.tick();
        // A state seen before (up to rounding noise) means no progress this tick.
        if self.seen.insert(scheduler.board.snapshot().coarse_digest()) {
            self.repeats = 0;
        } else {
            self.repeats += 1;
        }
        let outcome = if scheduler.flags().converged() {
            Some(Outcome::Converged)
        } else if self.repeats >= scheduler.config.convergence.stall_ticks {
            Some(Outcome::Stalled)
        } else if scheduler.board.snapshot().tick >= scheduler.config.max_ticks {
            Some(Outcome::MaxTicks)
        } else {
            None
        };
        (record, outcome.map(|o| Self::report(scheduler, o)))
    }
}

/// First point where a replay departs from its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub tick: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayVerdict {
    pub ticks_compared: u64,
    pub divergence: Option<Divergence>,
}

impl ReplayVerdict {
    pub fn matches(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Re-executes a run from `scheduler` (freshly built from the same scenario)
/// and compares every tick digest with `trace`. Live commands recorded in the
/// trace are re-injected at the tick they were drained.
pub fn replay(trace: &Trace, scheduler: &mut Scheduler) -> ReplayVerdict {
    let mut runner = Runner::new(scheduler);
    let diverge = |tick: u64, compared: u64, reason: String| ReplayVerdict {
        ticks_compared: compared,
        divergence: Some(Divergence { tick, reason }),
    };
    let start = runner.check_start(scheduler);
    if let Some(report) = start {
        return match trace.records.first() {
            Some(r) => diverge(r.tick, 0, format!("re-execution ended ({:?}) before tick {}", report.outcome, r.tick)),
            None => ReplayVerdict { ticks_compared: 0, divergence: None },
        };
    }
    let mut compared = 0;
    for expected in &trace.records {
        for c in expected.commands.iter().filter(|c| c.origin == CommandOrigin::Live) {
            scheduler.submit(c.command.clone());
        }
        let (record, done) = runner.advance(scheduler);
        if record.tick != expected.tick {
            return diverge(record.tick, compared, format!("trace expects tick {}", expected.tick));
        }
        if record.digest != expected.digest {
            return diverge(
                record.tick,
                compared,
                format!("digest {:016x} != recorded {:016x}", record.digest, expected.digest),
            );
        }
        compared += 1;
        if let Some(report) = done {
            if compared as usize != trace.records.len() {
                return diverge(
                    record.tick + 1,
                    compared,
                    format!("re-execution ended ({:?}) while the trace continues", report.outcome),
                );
            }
            if let Some(end) = &trace.end {
                if end.outcome != report.outcome {
                    return diverge(record.tick, compared, format!("outcome {:?} != recorded {:?}", report.outcome, end.outcome));
                }
            }
            return ReplayVerdict { ticks_compared: compared, divergence: None };
        }
    }
    let next = scheduler.state().tick;
    diverge(next, compared, format!("trace ends before tick {next} but re-execution continues"))
}
