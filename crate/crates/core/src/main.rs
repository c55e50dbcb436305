//! `mas`: run, replay, measure, serve and validate planner scenarios.
//!
//! Exit codes: 0 converged (or success), 1 replay diverged, 2 stalled,
//! 3 max_ticks, 64 usage, 65 invalid data, 74 i/o failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mas_planner::agents::OperatorScript;
use mas_planner::scenario::{metrics, EventAction, EventSpec, MetricsFormat, OperatorMode, Overrides, Scenario};
use mas_planner::scheduler::{replay, Trace};
use mas_planner::session::server::{self, ServerConfig};
use mas_planner::session::Session;
use mas_planner::Error;

const EXIT_DIVERGED: u8 = 1;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "mas", version, about = "Blackboard multi-agent access and visibility planner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario headless.
    Run {
        /// Scenario file, or `bundled:NAME`.
        scenario: String,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Write the NDJSON trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write metrics here (`-` for stdout).
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: MetricsFormat,
        /// Worker threads for agent evaluation (1 = sequential).
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Re-execute a trace and compare every tick digest.
    Replay {
        scenario: String,
        trace: PathBuf,
        /// The overrides the trace was recorded with.
        #[command(flatten)]
        overrides: OverrideArgs,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Summarize a trace.
    Metrics {
        scenario: String,
        trace: PathBuf,
        #[arg(long, default_value = "text")]
        format: MetricsFormat,
    },
    /// Host a live session for the operator console.
    Serve {
        scenario: String,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: SocketAddr,
        /// Ticks per second.
        #[arg(long, default_value_t = 30.0)]
        tick_hz: f64,
        /// Write the session trace here when it ends.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check scenario files and report every problem.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<String>,
    },
}

#[derive(Args, Default)]
struct OverrideArgs {
    /// Firing period of an agent, `AGENT=N`. Repeatable.
    #[arg(long = "rate", value_parser = parse_rate)]
    rates: Vec<(String, u32)>,
    /// Start an agent paused. Repeatable.
    #[arg(long)]
    pause: Vec<String>,
    /// Start an agent working. Repeatable.
    #[arg(long)]
    work: Vec<String>,
    /// Translation step per tick, meters.
    #[arg(long)]
    delta_pos: Option<f64>,
    /// Rotation step per tick, degrees.
    #[arg(long)]
    delta_or: Option<f64>,
    #[arg(long)]
    max_ticks: Option<u64>,
    #[arg(long)]
    stall_ticks: Option<u64>,
    /// Operator script to use instead of the scenario's.
    #[arg(long, conflicts_with = "no_operator_script")]
    operator_script: Option<PathBuf>,
    /// Ignore the scenario's operator script.
    #[arg(long)]
    no_operator_script: bool,
    /// Intermediate target from a tick on, `TICK:X,Y,Z`, or `TICK:clear`. Repeatable.
    #[arg(long, value_parser = parse_waypoint)]
    waypoint: Vec<EventSpec>,
}

fn parse_rate(s: &str) -> Result<(String, u32), String> {
    let (agent, n) = s.split_once('=').ok_or("expected AGENT=N")?;
    let n: u32 = n.parse().map_err(|e| format!("rate `{n}`: {e}"))?;
    Ok((agent.to_string(), n))
}

fn parse_waypoint(s: &str) -> Result<EventSpec, String> {
    let (tick, rest) = s.split_once(':').ok_or("expected TICK:X,Y,Z or TICK:clear")?;
    let tick: u64 = tick.parse().map_err(|e| format!("tick `{tick}`: {e}"))?;
    let target = if rest == "clear" {
        None
    } else {
        let v: Vec<f64> = rest
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("coordinate `{c}`: {e}")))
            .collect::<Result<_, _>>()?;
        let [x, y, z] = v[..] else {
            return Err("a waypoint needs three coordinates".into());
        };
        Some([x, y, z])
    };
    Ok(EventSpec { tick, action: EventAction::IntermediateTarget { target } })
}

impl OverrideArgs {
    fn resolve(&self) -> Result<Overrides, Failure> {
        let operator_script = match &self.operator_script {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                Some(OperatorScript::parse(&text).map_err(Failure::Data)?)
            }
            None => None,
        };
        Ok(Overrides {
            rates: self.rates.clone(),
            pause: self.pause.clone(),
            work: self.work.clone(),
            delta_pos: self.delta_pos,
            delta_or_deg: self.delta_or,
            max_ticks: self.max_ticks,
            stall_ticks: self.stall_ticks,
            operator_script,
            no_operator_script: self.no_operator_script,
            events: self.waypoint.clone(),
        })
    }
}

enum Failure {
    Data(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Data(other),
        }
    }
}

fn open(spec: &str, overrides: &OverrideArgs) -> Result<Scenario, Failure> {
    let base = Scenario::open(spec)?;
    Ok(base.with_overrides(&overrides.resolve()?)?)
}

fn read_trace(path: &Path) -> Result<Trace, Failure> {
    let f = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Trace::read_from(BufReader::new(f))?)
}

fn write_out(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        write(&mut out)?;
        return out.flush().map_err(io);
    }
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write(&mut w)?;
    w.flush().map_err(io)
}

fn run(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Run { scenario, overrides, trace, metrics: metrics_out, format, threads } => {
            let scenario = open(&scenario, &overrides)?;
            let mut sched = scenario.build(OperatorMode::Headless)?;
            sched.set_threads(threads)?;
            let started = std::time::Instant::now();
            let (report, recorded) = sched.run_traced(scenario.trace_header()?);
            eprintln!(
                "{}: {:?} after {} ticks ({:.3} s)",
                scenario.name(),
                report.outcome,
                report.ticks,
                started.elapsed().as_secs_f64()
            );
            if let Some(path) = &trace {
                write_out(path, |w| recorded.write_to(w))?;
            }
            if let Some(path) = &metrics_out {
                let text = metrics(&recorded, &scenario)?.render(format);
                write_out(path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())))?;
            }
            Ok(report.outcome.exit_code() as u8)
        }
        Cmd::Replay { scenario, trace, overrides, threads } => {
            let scenario = open(&scenario, &overrides)?;
            let recorded = read_trace(&trace)?;
            let mut sched = scenario.build(Scenario::mode_of(&recorded.header))?;
            sched.set_threads(threads)?;
            let expected = scenario.trace_header()?;
            if recorded.header.scenario != expected.scenario || recorded.header.initial_digest != expected.initial_digest {
                eprintln!("trace was recorded from `{}`, not from this scenario", recorded.header.scenario);
                return Ok(EXIT_DIVERGED);
            }
            let verdict = replay(&recorded, &mut sched);
            match verdict.divergence {
                None => {
                    println!("replay matches: {} ticks", verdict.ticks_compared);
                    Ok(0)
                }
                Some(d) => {
                    println!("replay diverged at tick {}: {}", d.tick, d.reason);
                    Ok(EXIT_DIVERGED)
                }
            }
        }
        Cmd::Metrics { scenario, trace, format } => {
            let scenario = Scenario::open(&scenario)?;
            let recorded = read_trace(&trace)?;
            print!("{}", metrics(&recorded, &scenario)?.render(format));
            Ok(0)
        }
        Cmd::Serve { scenario, overrides, addr, tick_hz, trace } => {
            let scenario = open(&scenario, &overrides)?;
            let session = Session::new(&scenario)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            let summary = rt.block_on(async {
                let bound = server::bind(addr).await?;
                eprintln!("serving {} on ws://{}/ws", scenario.name(), bound.local_addr()?);
                let ctrl_c = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                bound.serve(session, ServerConfig { tick_hz }, ctrl_c).await
            })?;
            eprintln!("session ended ({:?}) after {} ticks", summary.reason, summary.ticks);
            if let Some(path) = &trace {
                write_out(path, |w| summary.trace.write_to(w))?;
            }
            Ok(0)
        }
        Cmd::Validate { scenarios } => {
            let mut code = 0;
            for spec in &scenarios {
                match Scenario::open(spec) {
                    Ok(_) => println!("{spec}: ok"),
                    Err(e) => {
                        println!("{spec}: {e}");
                        code = if matches!(e, Error::Io(_)) { EXIT_IO } else { EXIT_DATA };
                    }
                }
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
