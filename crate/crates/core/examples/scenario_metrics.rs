//! Run a bundled scene and summarize its trace in each output format.
//!
//! ```text
//! cargo run --release --example scenario_metrics [scene]
//! ```

use mas_planner::scenario::{bundled, metrics, MetricsFormat, OperatorMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "aircraft-trap".into());
    let scenario = bundled::load(&name)?;
    let (_, trace) = scenario.build(OperatorMode::Headless)?.run_traced(scenario.trace_header()?);
    let m = metrics(&trace, &scenario)?;
    for format in [MetricsFormat::Text, MetricsFormat::Csv, MetricsFormat::Json] {
        println!("{}", m.render(format));
    }
    Ok(())
}
