//! Record a run to an NDJSON trace, read it back and re-execute it.
//!
//! ```text
//! cargo run --example replay_trace
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter};

use mas_planner::scenario::{bundled, OperatorMode};
use mas_planner::scheduler::{replay, Command, Trace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = bundled::load("single-wall")?;
    let (report, trace) = scenario.build(OperatorMode::Headless)?.run_traced(scenario.trace_header()?);
    println!("recorded {:?} after {} ticks", report.outcome, report.ticks);

    let path = std::env::temp_dir().join("mas-single-wall.ndjson");
    trace.write_to(BufWriter::new(File::create(&path)?))?;
    let loaded = Trace::read_from(BufReader::new(File::open(&path)?))?;
    println!("trace written to {} ({} records)", path.display(), loaded.records.len());

    let verdict = replay(&loaded, &mut scenario.build(OperatorMode::Headless)?);
    println!("faithful replay: {} ticks compared, divergence {:?}", verdict.ticks_compared, verdict.divergence);

    // The same trace against a perturbed run: a rate change at tick 10.
    let mut altered = scenario.build(OperatorMode::Headless)?;
    altered.schedule(10, Command::SetRate { agent: "attraction".into(), rate: 2 });
    let verdict = replay(&loaded, &mut altered);
    println!("perturbed replay: divergence {:?}", verdict.divergence);
    Ok(())
}
