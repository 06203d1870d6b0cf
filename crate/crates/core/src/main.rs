//! Command-line entry point: train, evaluate, stats, simulate, plot.

use clap::{Args, Parser, Subcommand};
use mpq_dpg::error::{Error, Result};
use mpq_dpg::harness::config::{parse_trajectory, Algorithm, RunConfig};
use mpq_dpg::harness::{evaluate, simulate, stats, svg, train};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "mpq-dpg", about = "Ensemble actor-critic tracking control for a 3-DOF AUV")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a training trial and write training.csv + checkpoint.bin.
    Train(TrainArgs),
    /// Roll out a checkpoint's average policy without exploration noise.
    Evaluate(EvaluateArgs),
    /// Summarize training CSVs over an episode window.
    Stats(StatsArgs),
    /// Open-loop dynamics rollout under constant controls.
    Simulate(SimulateArgs),
    /// Render a rollout CSV as an SVG trajectory figure.
    Plot(PlotArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Flat `key = value` config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["mpq-dpg", "ddpg"])]
    algo: Option<String>,
    #[arg(long, value_parser = ["rt1", "rt2"])]
    trajectory: Option<String>,
    #[arg(long)]
    actors: Option<usize>,
    #[arg(long)]
    critics: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_parser = ["rt1", "rt2"])]
    trajectory: String,
    /// Output directory for rollout.csv.
    #[arg(long)]
    out: PathBuf,
    /// Optional config file (episode length, bounds, seed defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StatsArgs {
    /// 1-based inclusive episode window, START:END.
    #[arg(long, default_value = "500:1500")]
    window: String,
    /// Baseline training CSV(s); averaged pointwise, then windowed.
    #[arg(long, required = true)]
    baseline: Vec<PathBuf>,
    /// Training CSVs of the algorithm under study (one per trial).
    #[arg(required = true)]
    csv: Vec<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Constant thrust (N); saturated to the actuator bound.
    #[arg(long)]
    thrust: f64,
    /// Constant rudder angle (rad); saturated to the actuator bound.
    #[arg(long)]
    rudder: f64,
    /// Simulated duration (s).
    #[arg(long)]
    duration: f64,
    /// Output CSV path.
    #[arg(long, default_value = "open_loop.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_window(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("window '{s}' is not START:END")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("window bound '{v}' is not an integer")))
    };
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let mut cfg = RunConfig::default();
            if let Some(path) = &args.config {
                cfg.apply_file(path)?;
            }
            if let Some(algo) = &args.algo {
                cfg.algorithm = Algorithm::parse(algo)?;
            }
            if let Some(traj) = &args.trajectory {
                cfg.trajectory = parse_trajectory(traj)?;
            }
            if let Some(n) = args.actors {
                cfg.n_actors = n;
            }
            if let Some(m) = args.critics {
                cfg.m_critics = m;
            }
            if let Some(e) = args.episodes {
                cfg.episodes = e;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if let Some(out) = args.out {
                cfg.out_dir = out;
            }
            cfg.validate()?;
            let records = train(&cfg)?;
            let last = records.last().map(|r| r.total_reward);
            println!(
                "trained {} ({}, {} episodes, seed {}) -> {}",
                cfg.algorithm.name(),
                cfg.trajectory.name(),
                records.len(),
                cfg.seed,
                cfg.out_dir.display()
            );
            if let Some(r) = last {
                println!("final episode total reward: {r:.3}");
            }
        }
        Command::Evaluate(args) => {
            let mut cfg = RunConfig::default();
            if let Some(path) = &args.config {
                cfg.apply_file(path)?;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            let trajectory = parse_trajectory(&args.trajectory)?;
            std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
            let csv = args.out.join("rollout.csv");
            let summary = evaluate(&args.checkpoint, trajectory, &cfg, &csv)?;
            println!(
                "evaluated {} on {}: total reward {:.3}, RMS tracking error {:.4} m over {} steps",
                args.checkpoint.display(),
                trajectory.name(),
                summary.total_reward,
                summary.rms_error,
                summary.steps
            );
            println!("rollout written to {}", csv.display());
        }
        Command::Stats(args) => {
            let window = parse_window(&args.window)?;
            let read_all = |paths: &[PathBuf]| -> Result<Vec<Vec<f64>>> {
                paths.iter().map(|p| train::read_training_rewards(p)).collect()
            };
            let baseline_seqs = read_all(&args.baseline)?;
            // the baseline's own windowed mean; IR of the baseline against
            // itself is zero by construction
            let baseline = stats(&baseline_seqs, window, -1.0)?;
            let s = stats(&read_all(&args.csv)?, window, baseline.r_av)?;
            println!("R_best   = {:.4}", s.r_best);
            println!("R_av     = {:.4}", s.r_av);
            println!("STD_DEV  = {:.4}", s.std_dev_r);
            println!("baseline = {:.4}", baseline.r_av);
            println!("IR       = {:.4}", s.ir);
        }
        Command::Simulate(args) => {
            let cfg = RunConfig::default();
            simulate(args.thrust, args.rudder, args.duration, &cfg, &args.out)?;
            println!("open-loop rollout written to {}", args.out.display());
        }
        Command::Plot(args) => {
            svg::emit_svg(&args.input, &args.out)?;
            println!("figure written to {}", args.out.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
