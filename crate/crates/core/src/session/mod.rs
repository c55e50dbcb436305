//! Live operator sessions.
//!
//! A [`Session`] owns a scheduler built in live-operator mode and speaks a
//! small JSON protocol, version [`PROTOCOL_VERSION`]. Every message is a JSON
//! object with a `v` field and a `type` field. [`server`] carries the
//! protocol over a web socket and paces the ticks; the session itself is
//! transport-free and can be driven directly.
//!
//! Client to server:
//!
//! ```text
//! {"v":1,"type":"steer","vx":0.0,"vy":1.0,"omega":0.0}
//! {"v":1,"type":"pause","agent":"attraction"}
//! {"v":1,"type":"work","agent":"attraction"}
//! {"v":1,"type":"rate","agent":"attraction","value":3}
//! {"v":1,"type":"delta","param":"pos","value":0.05}      // param: "pos" (m) or "or" (rad)
//! {"v":1,"type":"intermediate-target","target":{"x":1.0,"y":2.0,"z":0.9}}
//! {"v":1,"type":"intermediate-target","target":null}
//! {"v":1,"type":"stop"}
//! ```
//!
//! Server to client: `state` (sent on connect with the scene included, then
//! after every tick), `trace-event` (applied commands, agent failures,
//! stalls, rejected messages) and `ended`.
//!
//! Only the first connected client holds steering authority; control
//! messages from the others are rejected. When the authority holder
//! disconnects, the longest-connected remaining client takes over.

pub mod server;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::{OperatorMode, Scenario, SceneSpec};
use crate::scheduler::{
    AgentStatus, Command, ConvergenceFlags, Outcome, Runner, Scheduler, StateSummary, TickRecord, Trace, TraceEnd,
    TraceHeader,
};
use crate::agents::SteerSample;
use crate::Error;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaParam {
    Pos,
    Or,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClientMessage {
    Steer { vx: f64, vy: f64, omega: f64 },
    Pause { agent: String },
    Work { agent: String },
    Rate { agent: String, value: u32 },
    Delta { param: DeltaParam, value: f64 },
    IntermediateTarget { target: Option<Point> },
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub delta_pos: f64,
    pub delta_or: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Messages that were not valid protocol JSON.
    pub malformed: u64,
    /// Control messages from clients without steering authority.
    pub unauthorized: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub tick: u64,
    pub body: StateSummary,
    pub cone_half_angle: f64,
    pub agents: Vec<AgentStatus>,
    pub flags: ConvergenceFlags,
    pub normalization: Normalization,
    /// Whether the receiving client holds steering authority.
    pub steering: bool,
    pub diagnostics: Diagnostics,
    /// Present only in the first message a client receives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    /// A control command reached the scheduler at a tick boundary.
    Command {
        tick: u64,
        #[serde(flatten)]
        command: Command,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    AgentFailed { tick: u64, agent: String, error: String },
    /// No progress for the configured number of ticks; operator help needed.
    Stalled { tick: u64 },
    /// The client's last message was dropped.
    Rejected { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndReason {
    Converged,
    MaxTicks,
    /// A client sent `stop` or the server was interrupted.
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ServerMessage {
    State(Box<StateMessage>),
    TraceEvent(TraceEvent),
    Ended { reason: EndReason, ticks: u64 },
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope { v: PROTOCOL_VERSION, body: self }).expect("server messages serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let e: Envelope<ServerMessage> = serde_json::from_str(text).map_err(|e| Error::Protocol(e.to_string()))?;
        check_version(e.v)?;
        Ok(e.body)
    }
}

impl ClientMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope { v: PROTOCOL_VERSION, body: self }).expect("client messages serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let e: Envelope<ClientMessage> = serde_json::from_str(text).map_err(|e| Error::Protocol(e.to_string()))?;
        check_version(e.v)?;
        Ok(e.body)
    }

    fn into_command(self) -> Result<Option<Command>, Error> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Protocol(format!("{what} must be finite")))
            }
        };
        Ok(Some(match self {
            ClientMessage::Steer { vx, vy, omega } => Command::Steer(SteerSample {
                vx: finite(vx, "vx")?,
                vy: finite(vy, "vy")?,
                omega: finite(omega, "omega")?,
            }),
            ClientMessage::Pause { agent } => Command::SetActive { agent, active: false },
            ClientMessage::Work { agent } => Command::SetActive { agent, active: true },
            ClientMessage::Rate { agent, value } => {
                if value == 0 {
                    return Err(Error::Protocol("rate must be >= 1".into()));
                }
                Command::SetRate { agent, rate: value }
            }
            ClientMessage::Delta { param, value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::Protocol("delta must be positive".into()));
                }
                match param {
                    DeltaParam::Pos => Command::SetNormalization { delta_pos: Some(value), delta_or: None },
                    DeltaParam::Or => Command::SetNormalization { delta_pos: None, delta_or: Some(value) },
                }
            }
            ClientMessage::IntermediateTarget { target } => Command::IntermediateTarget {
                target: match target {
                    Some(p) => Some([finite(p.x, "x")?, finite(p.y, "y")?, finite(p.z, "z")?]),
                    None => None,
                },
            },
            ClientMessage::Stop => return Ok(None),
        }))
    }
}

fn check_version(v: u32) -> Result<(), Error> {
    if v == PROTOCOL_VERSION {
        Ok(())
    } else {
        Err(Error::Protocol(format!("unsupported protocol version {v}")))
    }
}

pub type ClientId = u64;

/// Where an outgoing message goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipient {
    All,
    Client(ClientId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outgoing {
    pub to: Recipient,
    pub message: ServerMessage,
}

impl Outgoing {
    fn all(message: ServerMessage) -> Self {
        Self { to: Recipient::All, message }
    }

    fn to(id: ClientId, message: ServerMessage) -> Self {
        Self { to: Recipient::Client(id), message }
    }
}

/// Result of a finished session.
#[derive(Debug, Clone)]
pub struct SessionSummary {
    pub reason: EndReason,
    pub ticks: u64,
    pub trace: Trace,
    pub diagnostics: Diagnostics,
}

/// A live planning session: scheduler, connected clients and authority.
pub struct Session {
    scene: SceneSpec,
    scheduler: Scheduler,
    runner: Runner,
    header: TraceHeader,
    records: Vec<TickRecord>,
    /// Connected clients in connection order; the first one steers.
    clients: BTreeMap<ClientId, ()>,
    next_id: ClientId,
    diagnostics: Diagnostics,
    stop_requested: bool,
    stalled: bool,
    ended: Option<EndReason>,
}

impl Session {
    pub fn new(scenario: &Scenario) -> Result<Self, Error> {
        let scheduler = scenario.build(OperatorMode::Live)?;
        let mut header = scenario.trace_header()?;
        header.agents = scheduler.agent_configs();
        header.live = true;
        let runner = Runner::new(&scheduler);
        let mut session = Self {
            scene: scenario.file.scene.clone(),
            scheduler,
            runner,
            header,
            records: Vec::new(),
            clients: BTreeMap::new(),
            next_id: 1,
            diagnostics: Diagnostics::default(),
            stop_requested: false,
            stalled: false,
            ended: None,
        };
        if let Some(report) = session.runner.check_start(&session.scheduler) {
            session.ended = Some(match report.outcome {
                Outcome::Converged => EndReason::Converged,
                _ => EndReason::MaxTicks,
            });
        }
        Ok(session)
    }

    pub fn scheduler(&self) -> &Scheduler {
        &self.scheduler
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn ended(&self) -> Option<EndReason> {
        self.ended
    }

    /// The client currently holding steering authority.
    pub fn authority(&self) -> Option<ClientId> {
        self.clients.keys().next().copied()
    }

    pub fn client_count(&self) -> usize {
        self.clients.len()
    }

    fn state_message(&self, for_client: Option<ClientId>, with_scene: bool) -> ServerMessage {
        let state = self.scheduler.state();
        let k = self.scheduler.run_config().normalization;
        ServerMessage::State(Box::new(StateMessage {
            tick: state.tick,
            body: StateSummary::from(&*state),
            cone_half_angle: state.body.cone_half_angle,
            agents: self.scheduler.agent_status(),
            flags: self.scheduler.flags(),
            normalization: Normalization {
                delta_pos: k.delta_pos(),
                delta_or: k.delta_or(),
            },
            steering: for_client.is_some() && for_client == self.authority(),
            diagnostics: self.diagnostics,
            scene: with_scene.then(|| self.scene.clone()),
        }))
    }

    /// Registers a client; the reply is a full state snapshot including the scene.
    pub fn connect(&mut self) -> (ClientId, Vec<Outgoing>) {
        let id = self.next_id;
        self.next_id += 1;
        self.clients.insert(id, ());
        let mut out = vec![Outgoing::to(id, self.state_message(Some(id), true))];
        if let Some(reason) = self.ended {
            out.push(Outgoing::to(id, ServerMessage::Ended { reason, ticks: self.scheduler.state().tick }));
        }
        (id, out)
    }

    pub fn disconnect(&mut self, id: ClientId) {
        self.clients.remove(&id);
    }

    /// Handles one text frame from `id`.
    pub fn handle(&mut self, id: ClientId, text: &str) -> Vec<Outgoing> {
        let reject = |reason: String| vec![Outgoing::to(id, ServerMessage::TraceEvent(TraceEvent::Rejected { reason }))];
        let message = match ClientMessage::from_json(text) {
            Ok(m) => m,
            Err(e) => {
                self.diagnostics.malformed += 1;
                return reject(e.to_string());
            }
        };
        if self.authority() != Some(id) {
            self.diagnostics.unauthorized += 1;
            return reject("another client holds steering authority".into());
        }
        match message.into_command() {
            Ok(Some(command)) => {
                self.scheduler.submit(command);
                Vec::new()
            }
            Ok(None) => {
                self.stop_requested = true;
                Vec::new()
            }
            Err(e) => {
                self.diagnostics.malformed += 1;
                reject(e.to_string())
            }
        }
    }

    /// Ends the session from outside (signal, shutdown).
    pub fn stop(&mut self) -> Vec<Outgoing> {
        self.finish(EndReason::Stopped)
    }

    fn finish(&mut self, reason: EndReason) -> Vec<Outgoing> {
        if self.ended.is_some() {
            return Vec::new();
        }
        self.ended = Some(reason);
        vec![Outgoing::all(ServerMessage::Ended { reason, ticks: self.scheduler.state().tick })]
    }

    /// Runs one tick. Returns nothing once the session has ended.
    pub fn step(&mut self) -> Vec<Outgoing> {
        if self.ended.is_some() {
            return Vec::new();
        }
        if self.stop_requested {
            return self.finish(EndReason::Stopped);
        }
        let (record, done) = self.runner.advance(&mut self.scheduler);
        let mut out = Vec::new();
        for c in &record.commands {
            out.push(Outgoing::all(ServerMessage::TraceEvent(TraceEvent::Command {
                tick: record.tick,
                command: c.command.clone(),
                error: c.error.clone(),
            })));
        }
        for f in &record.firings {
            if let Some(error) = &f.error {
                out.push(Outgoing::all(ServerMessage::TraceEvent(TraceEvent::AgentFailed {
                    tick: record.tick,
                    agent: f.agent.clone(),
                    error: error.clone(),
                })));
            }
        }
        self.records.push(record);
        for &id in self.clients.keys() {
            out.push(Outgoing::to(id, self.state_message(Some(id), false)));
        }
        match done.map(|r| r.outcome) {
            Some(Outcome::Converged) => out.extend(self.finish(EndReason::Converged)),
            Some(Outcome::MaxTicks) => out.extend(self.finish(EndReason::MaxTicks)),
            // A live run keeps going after a stall: this is when the operator steps in.
            Some(Outcome::Stalled) => {
                if !self.stalled {
                    self.stalled = true;
                    let tick = self.scheduler.state().tick;
                    out.push(Outgoing::all(ServerMessage::TraceEvent(TraceEvent::Stalled { tick })));
                }
            }
            None => self.stalled = false,
        }
        out
    }

    /// Trace of the session so far; replayable against the same scenario
    /// built in live-operator mode.
    pub fn trace(&self) -> Trace {
        Trace {
            header: self.header.clone(),
            records: self.records.clone(),
            end: self.ended.and_then(|r| match r {
                EndReason::Converged => Some(TraceEnd { outcome: Outcome::Converged, ticks: self.scheduler.state().tick }),
                EndReason::MaxTicks => Some(TraceEnd { outcome: Outcome::MaxTicks, ticks: self.scheduler.state().tick }),
                EndReason::Stopped => None,
            }),
        }
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            reason: self.ended.unwrap_or(EndReason::Stopped),
            ticks: self.scheduler.state().tick,
            trace: self.trace(),
            diagnostics: self.diagnostics,
        }
    }
}
