//! Escaping a local minimum. The concave pocket traps the attraction and
//! repulsion agents; either an operator script or a chain of intermediate
//! targets leads the manikin out and around.
//!
//! ```text
//! cargo run --example pocket_rescue
//! ```

use mas_planner::agents::OperatorScript;
use mas_planner::scenario::{bundled, EventAction, EventSpec, OperatorMode, Overrides, Scenario};

fn waypoint(tick: u64, target: Option<[f64; 3]>) -> EventSpec {
    EventSpec { tick, action: EventAction::IntermediateTarget { target } }
}

fn report(label: &str, s: &Scenario) -> Result<(), Box<dyn std::error::Error>> {
    let r = s.build(OperatorMode::Headless)?.run(|_| {});
    let b = &r.final_state.body;
    println!(
        "{label:<20} {:?} (exit {}) after {} ticks at ({:.2}, {:.2})",
        r.outcome,
        r.outcome.exit_code(),
        r.ticks,
        b.trunk.x,
        b.trunk.y
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pocket = bundled::load("concave-pocket")?;
    report("agents only", &pocket)?;

    let script = OperatorScript::parse(bundled::script("concave-pocket.ops").expect("bundled script"))?;
    let scripted = pocket.with_overrides(&Overrides { operator_script: Some(script), ..Default::default() })?;
    report("operator script", &scripted)?;

    let waypoints = pocket.with_overrides(&Overrides {
        events: vec![
            waypoint(100, Some([-0.4, 0.0, 0.9])),
            waypoint(150, Some([-0.4, 1.5, 0.9])),
            waypoint(200, Some([2.8, 1.5, 0.9])),
            waypoint(260, None),
        ],
        ..Default::default()
    })?;
    report("intermediate targets", &waypoints)?;
    Ok(())
}
