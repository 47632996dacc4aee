use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use mechfluid::integrate::integrate_second_order;
use mechfluid::scenario::{bundled, compile, run_scenario, RunOptions, Scenario, BUNDLED};
use mechfluid::identities::run_identities;

#[derive(Parser)]
#[command(name = "mechfluid", version, about = "Residual checks for mechanical systems and fluid flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and trajectory of a scenario.
    Check {
        /// Scenario TOML file, or the name of a bundled scenario.
        #[arg(long)]
        scenario: String,
        /// Replace every check tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Replace the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Worker threads (results do not depend on it).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Integrate one trajectory of a scenario and write it as CSV.
    Integrate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        trajectory: String,
        #[arg(long)]
        dt: f64,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized identity suites on a builtin metric.
    Identities {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the bundled scenarios.
    Scenarios,
}

fn load(scenario: &str) -> anyhow::Result<Scenario> {
    let path = Path::new(scenario);
    if !path.exists() {
        if let Some(s) = bundled(scenario) {
            return Ok(s);
        }
    }
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Scenario::from_toml(&src)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Check {
            scenario,
            tol,
            seed,
            out,
            format,
            threads,
        } => {
            let scenario = load(&scenario)?;
            let opts = RunOptions {
                seed,
                tolerance: tol,
                threads,
            };
            let report = run_scenario(&scenario, &opts)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)?;
            eprint!("{}", report.summary());
            Ok(report.passed)
        }
        Command::Integrate {
            scenario,
            trajectory,
            dt,
            t_end,
            out,
        } => {
            let scenario = load(&scenario)?;
            let compiled = compile(&scenario)?;
            let spec = scenario
                .trajectories
                .iter()
                .find(|t| t.name == trajectory)
                .ok_or_else(|| anyhow!("scenario `{}` has no trajectory `{trajectory}`", scenario.name))?;
            let state0 = compiled.initial_state(spec)?;
            let (traj, failure) = match integrate_second_order(&compiled.newton, &state0, t_end, dt) {
                Ok(t) => (t, None),
                Err(aborted) => (aborted.partial, Some(aborted.error)),
            };
            let mut file = io::BufWriter::new(
                fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?,
            );
            traj.write_csv(&mut file, compiled.metric.as_ref(), compiled.chart.time)?;
            file.flush()?;
            match failure {
                Some(e) => {
                    eprintln!("integration aborted after {} steps: {e}", traj.len().saturating_sub(1));
                    Ok(false)
                }
                None => {
                    eprintln!("wrote {} rows to {}", traj.len(), out.display());
                    Ok(true)
                }
            }
        }
        Command::Identities {
            metric,
            dim,
            trials,
            seed,
        } => {
            let results = run_identities(&metric, dim, trials, seed)?;
            for r in &results {
                println!(
                    "{} {:<30} max {:.3e} tol {:.1e} ({} trials)",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.max,
                    r.tolerance,
                    r.trials
                );
            }
            Ok(results.iter().all(|r| r.passed()))
        }
        Command::Scenarios => {
            for (name, _) in BUNDLED {
                let s = bundled(name).expect("bundled");
                println!("{name:<20} {}", s.description.unwrap_or_default());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
