//! Summary metrics computed from a trace.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::Scenario;
use crate::agents::body_collision_length;
use crate::scheduler::{Outcome, Trace};
use crate::world::PlanarPose;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub scenario: String,
    /// `None` for a trace that was cut off before the run ended.
    pub outcome: Option<Outcome>,
    pub ticks: u64,
    /// Planar distance travelled by the trunk, meters.
    pub path_length: f64,
    /// Largest absolute head joint angles reached, degrees.
    pub max_alpha_deg: f64,
    pub max_beta_deg: f64,
    pub max_theta_deg: f64,
    pub final_cone_half_angle_deg: f64,
    /// Ticks whose resulting state has a positive collision-line length.
    pub collision_ticks: u64,
}

/// Derives metrics for `trace`, which must have been produced from `scenario`.
pub fn metrics(trace: &Trace, scenario: &Scenario) -> Result<RunMetrics, Error> {
    let initial = scenario.file.initial_state()?;
    if trace.header.scenario != scenario.name() || trace.header.initial_digest != initial.digest() {
        return Err(Error::Validation(vec![format!(
            "trace was recorded from `{}`, not from scenario `{}` as loaded",
            trace.header.scenario,
            scenario.name()
        )]));
    }
    let body = &initial.body;
    let mut prev = (body.trunk.x, body.trunk.y);
    let mut m = RunMetrics {
        scenario: trace.header.scenario.clone(),
        outcome: trace.end.map(|e| e.outcome),
        ticks: trace.records.len() as u64,
        path_length: 0.0,
        max_alpha_deg: body.head.alpha.abs().to_degrees(),
        max_beta_deg: body.head.beta.abs().to_degrees(),
        max_theta_deg: body.head.theta.abs().to_degrees(),
        final_cone_half_angle_deg: body.cone_half_angle.to_degrees(),
        collision_ticks: 0,
    };
    for r in &trace.records {
        let s = &r.state;
        m.path_length += (s.x - prev.0).hypot(s.y - prev.1);
        prev = (s.x, s.y);
        m.max_alpha_deg = m.max_alpha_deg.max(s.alpha_b.abs().to_degrees());
        m.max_beta_deg = m.max_beta_deg.max(s.beta_b.abs().to_degrees());
        m.max_theta_deg = m.max_theta_deg.max(s.theta_b.abs().to_degrees());
        m.final_cone_half_angle_deg = s.cone_half_angle.to_degrees();
        if body_collision_length(body, PlanarPose::new(s.x, s.y, s.theta), &initial.scene) > 0.0 {
            m.collision_ticks += 1;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricsFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for MetricsFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown metrics format `{other}` (text, csv, json)"))),
        }
    }
}

fn outcome_str(o: Option<Outcome>) -> &'static str {
    match o {
        Some(Outcome::Converged) => "converged",
        Some(Outcome::Stalled) => "stalled",
        Some(Outcome::MaxTicks) => "max-ticks",
        None => "incomplete",
    }
}

impl RunMetrics {
    pub fn render(&self, format: MetricsFormat) -> String {
        let mut out = String::new();
        match format {
            MetricsFormat::Text => {
                let rows: [(&str, String); 9] = [
                    ("scenario", self.scenario.clone()),
                    ("outcome", outcome_str(self.outcome).into()),
                    ("ticks", self.ticks.to_string()),
                    ("path_length_m", format!("{:.4}", self.path_length)),
                    ("max_alpha_deg", format!("{:.3}", self.max_alpha_deg)),
                    ("max_beta_deg", format!("{:.3}", self.max_beta_deg)),
                    ("max_theta_deg", format!("{:.3}", self.max_theta_deg)),
                    ("final_cone_half_angle_deg", format!("{:.3}", self.final_cone_half_angle_deg)),
                    ("collision_ticks", self.collision_ticks.to_string()),
                ];
                for (k, v) in rows {
                    let _ = writeln!(out, "{k:<27} {v}");
                }
            }
            MetricsFormat::Csv => {
                out.push_str(
                    "scenario,outcome,ticks,path_length_m,max_alpha_deg,max_beta_deg,max_theta_deg,final_cone_half_angle_deg,collision_ticks\n",
                );
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    self.scenario,
                    outcome_str(self.outcome),
                    self.ticks,
                    self.path_length,
                    self.max_alpha_deg,
                    self.max_beta_deg,
                    self.max_theta_deg,
                    self.final_cone_half_angle_deg,
                    self.collision_ticks
                );
            }
            MetricsFormat::Json => {
                out = serde_json::to_string_pretty(self).expect("metrics serialize");
                out.push('\n');
            }
        }
        out
    }
}
