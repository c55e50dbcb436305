//! Per-tick trace records and their newline-delimited JSON file form.
//!
//! A trace file holds one header line, one line per tick, and an end line
//! when the run finished normally:
//!
//! ```text
//! {"type":"header","v":1,"scenario":"empty-plane",...}
//! {"type":"tick","tick":0,"commands":[],"firings":[...],"state":{...},"digest":"9c1e..."}
//! {"type":"end","outcome":"converged","ticks":21}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{AgentConfig, Command, Outcome};
use crate::blackboard::{Contribution, WorldState};
use crate::Error;

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandOrigin {
    /// Part of the scenario; regenerated on replay.
    Scripted,
    /// Arrived from outside the run; re-injected on replay.
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandRecord {
    pub origin: CommandOrigin,
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The state-changing part of a contribution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Delta {
    pub d_xy: [f64; 2],
    pub d_theta: f64,
    pub d_head: [f64; 2],
    pub d_cone: f64,
}

impl From<&Contribution> for Delta {
    fn from(c: &Contribution) -> Self {
        Self {
            d_xy: c.d_xy,
            d_theta: c.d_theta,
            d_head: c.d_head,
            d_cone: c.d_cone,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringRecord {
    pub agent: String,
    /// Absent when the agent failed.
    pub raw: Option<Delta>,
    pub normalized: Delta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Body state after a tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub alpha_b: f64,
    pub beta_b: f64,
    pub theta_b: f64,
    pub cone_half_angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediate_target: Option<[f64; 3]>,
}

impl From<&WorldState> for StateSummary {
    fn from(s: &WorldState) -> Self {
        let b = &s.body;
        Self {
            x: b.trunk.x,
            y: b.trunk.y,
            theta: b.trunk.theta(),
            alpha_b: b.head.alpha,
            beta_b: b.head.beta,
            theta_b: b.head.theta,
            cone_half_angle: b.cone_half_angle,
            intermediate_target: s.intermediate_target.map(|p| [p.x, p.y, p.z]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub commands: Vec<CommandRecord>,
    pub firings: Vec<FiringRecord>,
    pub state: StateSummary,
    #[serde(with = "hex_u64")]
    pub digest: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub v: u32,
    pub scenario: String,
    pub agents: Vec<AgentConfig>,
    pub delta_pos: f64,
    pub delta_or: f64,
    #[serde(with = "hex_u64")]
    pub initial_digest: u64,
    /// Recorded from a live session; replay must build the live operator.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub live: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEnd {
    pub outcome: Outcome,
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum Line {
    Header(TraceHeader),
    Tick(TickRecord),
    End(TraceEnd),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TickRecord>,
    pub end: Option<TraceEnd>,
}

impl Trace {
    pub fn write_to(&self, mut w: impl Write) -> Result<(), Error> {
        let mut line = |l: &Line| -> Result<(), Error> {
            serde_json::to_writer(&mut w, l).map_err(|e| Error::Io(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| Error::Io(e.to_string()))
        };
        line(&Line::Header(self.header.clone()))?;
        for r in &self.records {
            line(&Line::Tick(r.clone()))?;
        }
        if let Some(end) = self.end {
            line(&Line::End(end))?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, Error> {
        let mut header = None;
        let mut records = Vec::new();
        let mut end = None;
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: n + 1,
                column: e.column(),
                message: e.to_string(),
            })?;
            let misplaced = |what: &str| Error::Parse {
                line: n + 1,
                column: 1,
                message: format!("unexpected {what} record"),
            };
            match parsed {
                Line::Header(h) if header.is_none() && records.is_empty() => header = Some(h),
                Line::Header(_) => return Err(misplaced("header")),
                Line::Tick(_) | Line::End(_) if header.is_none() => return Err(misplaced("record before header")),
                Line::Tick(t) if end.is_none() => records.push(t),
                Line::End(e) if end.is_none() => end = Some(e),
                _ => return Err(misplaced("record after end")),
            }
        }
        let header = header.ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "trace has no header".into(),
        })?;
        if header.v != TRACE_VERSION {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unsupported trace version {}", header.v),
            });
        }
        Ok(Self { header, records, end })
    }
}

mod hex_u64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}
