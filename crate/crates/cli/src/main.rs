//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 non-convergence in a
//! non-sweep run, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mobility_cli::{
    run_poa_sweep, run_prospect_sweep, sweep_csv, write_csv, write_json, PricingVariant,
    SolveReport,
};
use mobility_core::equilibrium::verify_nash;
use mobility_core::scenario::{load_scenario, BehaviorKind, ScenarioConfig};
use mobility_core::rng::SeededRng;
use mobility_core::{run_dynamics, Assignment, Behavior};

#[derive(Parser)]
#[command(name = "mobility", about = "Mobility-game equilibrium and anarchy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BehaviorArg {
    Rational,
    Prospect,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run best-response dynamics on a scenario and emit the equilibrium.
    Solve {
        #[arg(long)]
        scenario: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario behavior.
        #[arg(long)]
        behavior: Option<BehaviorArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Anarchy-ratio sweep over the number of travelers.
    SweepPoa {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 2)]
        i_min: u32,
        #[arg(long, default_value_t = 12)]
        i_max: u32,
        #[arg(long, default_value_t = 20)]
        replications: u32,
        /// Pricing variant: t1 (quadratic) or t2 (two-thirds exponent).
        #[arg(long, default_value = "t1")]
        variant: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Anarchy-ratio sweep over the prospect rational index.
    SweepBeta3 {
        #[arg(long)]
        scenario: String,
        /// Comma-separated rational-index values in (0, 1].
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 5)]
        replications: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a stored assignment against a scenario.
    Verify {
        #[arg(long)]
        scenario: String,
        /// JSON report produced by `solve --format json`.
        #[arg(long)]
        assignment: PathBuf,
    },
}

fn behavior_for(
    config: &ScenarioConfig,
    network: &mobility_core::NetworkSpec,
) -> Result<Behavior, mobility_core::ScenarioError> {
    Ok(match config.behavior {
        BehaviorKind::Rational => Behavior::Rational,
        BehaviorKind::Prospect => Behavior::Prospect(
            config.prospect_model(network)?.expect("validated prospect block"),
        ),
    })
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), ExitCode> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("io error writing {}: {e}", p.display());
            ExitCode::from(3)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(scenario: &str) -> Result<ScenarioConfig, ExitCode> {
    load_scenario(scenario).map_err(|e| {
        eprintln!("scenario error: {e}");
        ExitCode::from(1)
    })
}

fn validation(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("scenario error: {e}");
    ExitCode::from(1)
}

fn run() -> Result<(), ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { scenario, seed, behavior, out, format } => {
            let mut config = load(&scenario)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(b) = behavior {
                config.behavior = match b {
                    BehaviorArg::Rational => BehaviorKind::Rational,
                    BehaviorArg::Prospect => BehaviorKind::Prospect,
                };
                config.validate().map_err(validation)?;
            }
            let instance = config.instantiate(config.seed).map_err(validation)?;
            let behavior = behavior_for(&config, &instance.network).map_err(validation)?;
            let initial = match config.initial_assignment(&instance).map_err(validation)? {
                Some(assignment) => assignment,
                None => {
                    let mut rng = SeededRng::child(config.seed, 0x1217);
                    instance.random_assignment(&mut rng)
                }
            };
            let report = run_dynamics(&instance, &behavior, initial, &config.solver);
            let solve = SolveReport::new(
                &config.name,
                &config.content_hash(),
                config.seed,
                &behavior,
                &instance,
                &report,
            );
            let text = match format {
                FormatArg::Csv => write_csv(&solve),
                FormatArg::Json => write_json(&solve),
            };
            emit(&out, &text)?;
            if !report.converged {
                eprintln!(
                    "dynamics did not converge within {} rounds (worst gap {})",
                    config.solver.max_rounds, report.worst_gap
                );
                return Err(ExitCode::from(2));
            }
            Ok(())
        }
        Command::SweepPoa { scenario, i_min, i_max, replications, variant, out } => {
            let config = load(&scenario)?;
            let variant: PricingVariant = variant.parse().map_err(validation)?;
            let rows =
                run_poa_sweep(&config, i_min, i_max, replications, variant).map_err(validation)?;
            emit(&out, &sweep_csv(&rows))
        }
        Command::SweepBeta3 { scenario, values, replications, out } => {
            let config = load(&scenario)?;
            let parsed: Result<Vec<f64>, _> =
                values.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let beta3_values = parsed.map_err(|e| validation(format!("bad --values list: {e}")))?;
            let rows =
                run_prospect_sweep(&config, &beta3_values, replications).map_err(validation)?;
            emit(&out, &sweep_csv(&rows))
        }
        Command::Verify { scenario, assignment } => {
            let config = load(&scenario)?;
            let text = std::fs::read_to_string(&assignment).map_err(|e| {
                eprintln!("io error reading {}: {e}", assignment.display());
                ExitCode::from(3)
            })?;
            let stored: SolveReport = serde_json::from_str(&text)
                .map_err(|e| validation(format!("bad assignment file: {e}")))?;
            let instance = config.instantiate(stored.seed).map_err(validation)?;
            if stored.actions.len() != instance.traveler_count() {
                return Err(validation(format!(
                    "assignment has {} actions for {} travelers",
                    stored.actions.len(),
                    instance.traveler_count()
                )));
            }
            let behavior = behavior_for(&config, &instance.network).map_err(validation)?;
            let profile = Assignment::new(stored.actions.clone());
            let (is_nash, gap) = verify_nash(&instance, &behavior, &profile, &config.solver);
            println!("is_nash: {is_nash}");
            println!("worst_deviation_gap: {gap}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
