use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mvmf::pipeline::{self, EstimateArgs, EvaluateArgs, PlanArgs, SimulateArgs};
use mvmf::{CliError, Scenario};

/// Estimate currents from drifters, plan float drops and pickups for a
/// vessel fleet, and simulate the plan.
#[derive(Debug, Parser)]
#[command(name = "mvmf", version)]
struct Cli {
    /// Scenario TOML file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for the written artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a divergence-free current field to drifter tracks.
    Estimate {
        /// Tracks CSV (drifter_id,time_s,x_m,y_m,received).
        #[arg(
            long,
            conflicts_with = "synthesize",
            required_unless_present = "synthesize"
        )]
        tracks: Option<PathBuf>,
        /// Simulate the scenario's drifter deployment in the truth field.
        #[arg(long)]
        synthesize: bool,
    },
    /// Select drifts and schedule them across the fleet.
    Plan {
        /// GridField JSON to plan in; the scenario truth when omitted.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Also solve exhaustively and record the comparison.
        #[arg(long)]
        oracle_check: bool,
        /// Reroute transits around drifting floats.
        #[arg(long, value_enum)]
        wake_safe: Option<Switch>,
    },
    /// Execute a plan against the truth field.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum)]
        wake: Option<Switch>,
        #[arg(long)]
        start_delay_s: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        rotate_deg_per_hour: Option<f64>,
    },
    /// Recompute the mission report from a stored log.
    Evaluate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, value_enum)]
        wake: Option<Switch>,
        #[arg(long, allow_negative_numbers = true)]
        rotate_deg_per_hour: Option<f64>,
    },
    /// Re-emit events, trajectories and GeoJSON from a stored log.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

fn run(cli: Cli) -> mvmf::Result<()> {
    let path = cli
        .scenario
        .ok_or_else(|| CliError::Input("--scenario is required".into()))?;
    let sc = Scenario::load(&path)?;
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Estimate { tracks, synthesize } => {
            let s = pipeline::estimate(
                &sc,
                &EstimateArgs {
                    tracks,
                    synthesize,
                    seed: cli.seed,
                    out_dir,
                },
            )?;
            let h = s.hyperparams;
            println!(
                "estimated from {} tracks: length scale {} m, signal std {} m/s, noise std {} m/s, holdout error {:.3} m",
                s.tracks.len(),
                h.length_scale,
                h.signal_std,
                h.noise_std,
                s.search.best_score
            );
        }
        Command::Plan {
            field,
            oracle_check,
            wake_safe,
        } => {
            let args = PlanArgs {
                field,
                seed: cli.seed,
                out_dir,
                oracle_check,
                wake_safe: wake_safe.map(bool::from),
            };
            let p = pipeline::plan(&sc, &args)?;
            println!(
                "planned {} actions, makespan {:.3} s, cost {:.3}",
                p.actions.len(),
                p.makespan,
                p.cost
            );
            if let Some(o) = p.oracle {
                println!(
                    "exhaustive makespan {:.3} s, ratio {:.6}",
                    o.exhaustive_makespan, o.ratio
                );
            }
        }
        Command::Simulate {
            plan,
            wake,
            start_delay_s,
            rotate_deg_per_hour,
        } => {
            let args = SimulateArgs {
                plan,
                seed: cli.seed,
                out_dir,
                wake: wake.map(bool::from),
                start_delay: start_delay_s,
                rotate_deg_per_hour,
            };
            let (_, r) = pipeline::simulate(&sc, &args)?;
            println!(
                "mean pick tardiness {:.3} s, {} lost, {} detours, mean deviation {:.3} m, {} wake conflicts",
                r.tardiness.mean_pick,
                r.tardiness.lost,
                r.detours,
                r.mean_deviation,
                r.wake_conflicts.len()
            );
        }
        Command::Evaluate {
            plan,
            log,
            wake,
            rotate_deg_per_hour,
        } => {
            let args = EvaluateArgs {
                plan,
                log,
                out_dir,
                rotate_deg_per_hour,
                wake: wake.map(bool::from),
            };
            let r = pipeline::evaluate(&sc, &args)?;
            println!(
                "mean pick tardiness {:.3} s, mean deviation {:.3} m",
                r.tardiness.mean_pick, r.mean_deviation
            );
        }
        Command::Replay { log } => {
            pipeline::replay(&sc, &log, &out_dir)?;
            println!("exports written to {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mvmf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
