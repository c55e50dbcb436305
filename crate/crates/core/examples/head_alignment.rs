//! The head-orientation agent alone turns the gaze onto the target.
//!
//! Each firing moves pitch and yaw by at most the orientation step, so a
//! misalignment of `m` radians needs about `m / delta_or` firings.
//!
//! ```text
//! cargo run --example head_alignment
//! ```

use mas_planner::agents::HeadOrientationAgent;
use mas_planner::blackboard::WorldState;
use mas_planner::body::{misalignment, BodyState};
use mas_planner::scheduler::{RunConfig, Scheduler};
use mas_planner::world::{PlanarPose, Polygon, Scene};
use nalgebra::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = Scene::empty(Point3::new(4.0, 2.0, 0.5), 10.0)?;
    let footprint = Polygon::rectangle(-0.15, -0.25, 0.15, 0.25)?;
    let body = BodyState::manikin(PlanarPose::new(0.0, 0.0, 0.0), footprint);
    let state = WorldState::new(body, scene)?;

    let mut sched = Scheduler::new(state, RunConfig::default())?;
    sched.register(Box::new(HeadOrientationAgent::new("head")), 1, true)?;

    let start = misalignment(&sched.state().body, &sched.state().scene)?;
    println!("initial misalignment {:.4} rad", start);
    for _ in 0..40 {
        sched.tick();
        let s = sched.state();
        let m = misalignment(&s.body, &s.scene)?;
        println!(
            "tick {:>2}  pitch {:>8.4}  yaw {:>8.4}  misalignment {:.6}",
            s.tick, s.body.head.alpha, s.body.head.theta, m
        );
        if m < 1e-3 {
            break;
        }
    }
    Ok(())
}
