//! Author a scenario in TOML, validate it and run it.
//!
//! ```text
//! cargo run --example custom_scenario
//! ```

use mas_planner::scenario::{OperatorMode, Scenario, ScenarioFile};

const SCENE: &str = r#"
name = "pillar"

[scene]
target = [4.0, 0.0, 1.0]
bounds = { min = [-2.0, -3.0], max = [6.0, 3.0] }

[[scene.obstacles]]
name = "pillar"
footprint = [[1.8, 0.0], [2.2, 0.0], [2.2, 0.5], [1.8, 0.5]]
z = [0.0, 3.0]

[body]
embodiment = "manikin"
footprint = [[-0.15, -0.25], [0.15, -0.25], [0.15, 0.25], [-0.15, 0.25]]
height = 1.8
eye_height = 1.6
eye_forward_offset = 0.1
pose = { x = 0.0, y = 0.0, theta_deg = 0.0 }

[[agents]]
id = "repulsion"
kind = "repulsion"
rate = 1

[[agents]]
id = "attraction"
kind = "attraction"
rate = 1

[[agents]]
id = "head"
kind = "head-orientation"
rate = 1

[run]
d_tol = 1.0
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A broken copy: every problem is reported at once.
    let broken = SCENE.replace("rate = 1", "rate = 0").replace("[4.0, 0.0, 1.0]", "[40.0, 0.0, 1.0]");
    let errors = ScenarioFile::parse(&broken)?.validate();
    println!("broken copy has {} problems:", errors.len());
    for e in &errors {
        println!("  {e}");
    }

    let scenario = Scenario::from_parts(ScenarioFile::parse(SCENE)?, None)?;
    let report = scenario.build(OperatorMode::Headless)?.run(|_| {});
    let b = &report.final_state.body;
    println!("{:?} after {} ticks at ({:.2}, {:.2})", report.outcome, report.ticks, b.trunk.x, b.trunk.y);
    Ok(())
}
