//! Attraction and head agents on an empty floor: a straight walk to the target.
//!
//! ```text
//! cargo run --example attraction_empty_plane
//! ```

use mas_planner::scenario::{bundled, OperatorMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = bundled::load("empty-plane")?;
    let mut sched = scenario.build(OperatorMode::Headless)?;
    let mut path = Vec::new();
    let report = sched.run(|r| path.push((r.tick, r.state.x, r.state.y, r.state.theta)));

    for (tick, x, y, theta) in path.iter().step_by(5) {
        println!("tick {tick:>3}  x {x:>7.3}  y {y:>7.3}  heading {:>7.2} deg", theta.to_degrees());
    }
    let f = &report.final_state.body;
    println!(
        "{:?} after {} ticks at ({:.3}, {:.3}); flags {:?}",
        report.outcome, report.ticks, f.trunk.x, f.trunk.y, report.flags
    );
    Ok(())
}
