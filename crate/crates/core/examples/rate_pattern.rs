//! Firing periods encode priority: an agent with rate `r` fires on every
//! `r`-th tick. Retuning takes effect at the next tick boundary.
//!
//! ```text
//! cargo run --example rate_pattern
//! ```

use mas_planner::agents::{Agent, AgentKind};
use mas_planner::blackboard::{Contribution, WorldState};
use mas_planner::body::BodyState;
use mas_planner::scheduler::{Command, RunConfig, Scheduler};
use mas_planner::world::{PlanarPose, Polygon, Scene};
use mas_planner::Error;
use nalgebra::Point3;

/// Proposes nothing; only its firings are of interest.
struct Quiet(&'static str);

impl Agent for Quiet {
    fn id(&self) -> &str {
        self.0
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Attraction
    }

    fn act(&self, state: &WorldState) -> Result<Contribution, Error> {
        Ok(Contribution::zero(self.0, state.tick))
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = Scene::empty(Point3::new(3.0, 0.0, 1.0), 5.0)?;
    let body = BodyState::manikin(PlanarPose::new(0.0, 0.0, 0.0), Polygon::rectangle(-0.2, -0.2, 0.2, 0.2)?);
    let mut sched = Scheduler::new(WorldState::new(body, scene)?, RunConfig::default())?;
    for (id, rate) in [("fast", 1), ("medium", 3), ("slow", 9)] {
        sched.register(Box::new(Quiet(id)), rate, true)?;
    }
    sched.schedule(18, Command::SetRate { agent: "slow".into(), rate: 2 });

    let mut rows: Vec<String> = vec![String::new(); 3];
    for _ in 0..27 {
        let record = sched.tick();
        for (row, id) in rows.iter_mut().zip(["fast", "medium", "slow"]) {
            row.push(if record.firings.iter().any(|f| f.agent == id) { '#' } else { '.' });
        }
    }
    println!("ticks 0..27, `slow` retuned to rate 2 at tick 18");
    for (row, id) in rows.iter().zip(["fast", "medium", "slow"]) {
        println!("{id:>7} {row}");
    }
    Ok(())
}
