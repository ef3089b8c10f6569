use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use teleop_server::{run_live, summarize_file, GatewayHub, RunOutput, Runner, Scenario, WsServer};

#[derive(Parser)]
#[command(name = "teleop", version, about = "Connectivity-aware teleoperation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        /// Scenario file (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Run the virtual clock as fast as possible with the scripted operator.
        #[arg(long)]
        headless: bool,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Serve the UI gateway on this port.
        #[arg(long)]
        ws_port: Option<u16>,
        /// Write the metrics summary here instead of stdout.
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        /// Write the JSON-lines event trace here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Real-time factor for interactive runs.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
    /// Summarize a trace file written by `run`.
    Replay {
        /// JSON-lines trace file.
        #[arg(long)]
        trace: PathBuf,
    },
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write(&mut w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn emit(out: &RunOutput, metrics_out: Option<&Path>, trace_out: Option<&Path>) -> Result<()> {
    let metrics = serde_json::to_string_pretty(&out.metrics)?;
    match metrics_out {
        Some(p) => write_file(p, |w| Ok(writeln!(w, "{metrics}")?))?,
        None => println!("{metrics}"),
    }
    if let Some(p) = trace_out {
        write_file(p, |w| Ok(out.trace.write_jsonl(w)?))?;
    }
    Ok(())
}

fn run(
    scenario: &Path,
    headless: bool,
    seed: Option<u64>,
    ws_port: Option<u16>,
    speed: f64,
) -> Result<RunOutput> {
    let mut sc = Scenario::load(scenario).with_context(|| format!("loading {}", scenario.display()))?;
    if let Some(seed) = seed {
        sc = sc.with_seed(seed);
    }
    let mut runner = Runner::new(sc).context("starting scenario")?;
    let hub = Arc::new(GatewayHub::default());
    let gateway = ws_port
        .map(|p| WsServer::bind(("0.0.0.0", p), hub.clone()))
        .transpose()
        .context("starting gateway")?;
    let started = Instant::now();
    let out = if headless {
        while !runner.finished() {
            if let Some(f) = runner.step() {
                if gateway.is_some() {
                    hub.broadcast(&f);
                }
            }
        }
        runner.finish()
    } else {
        run_live(runner, &hub, speed)
    };
    log::info!(
        "simulated {:.2} s in {:.3} s wall time",
        out.metrics.duration,
        started.elapsed().as_secs_f64()
    );
    if let Some(g) = gateway {
        g.shutdown();
    }
    Ok(out)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            scenario,
            headless,
            seed,
            ws_port,
            metrics_out,
            trace_out,
            speed,
        } => {
            let out = run(&scenario, headless, seed, ws_port, speed)?;
            emit(&out, metrics_out.as_deref(), trace_out.as_deref())
        }
        Command::Replay { trace } => {
            let s = summarize_file(&trace).with_context(|| format!("reading {}", trace.display()))?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(())
        }
    }
}
