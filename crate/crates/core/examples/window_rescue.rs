//! A wall with a window the target sits behind. The agents alone settle in
//! front of the wall; a short scripted push from the operator gets the
//! manikin in front of the opening.
//!
//! ```text
//! cargo run --release --example window_rescue
//! ```

use mas_planner::scenario::{bundled, OperatorMode, Overrides};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = bundled::load("wall-with-window")?;
    let unaided = scenario.with_overrides(&Overrides { no_operator_script: true, ..Default::default() })?;

    for (label, s) in [("with operator script", &scenario), ("agents only", &unaided)] {
        let started = std::time::Instant::now();
        let report = s.build(OperatorMode::Headless)?.run(|_| {});
        let b = &report.final_state.body;
        println!(
            "{label:<22} {:?} after {} ticks in {:.2} s at ({:.2}, {:.2}), flags {:?}",
            report.outcome,
            report.ticks,
            started.elapsed().as_secs_f64(),
            b.trunk.x,
            b.trunk.y,
            report.flags
        );
    }
    Ok(())
}
