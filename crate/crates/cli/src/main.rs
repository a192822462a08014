use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hetassoc::harness::{
    export_cdf_csv, export_csv, export_json, monte_carlo, run_algorithm, ExperimentResults,
    SolverSettings,
};
use hetassoc::oracle::{build_3sat_gadget, verify_sat_equivalence, BlockGains, CnfFormula};
use hetassoc::scenario::generate_hetnet;
use hetassoc::{Algorithm, ExperimentSpec, Network, ScenarioConfig, Status};
use serde::Serialize;

mod selftest;

/// Max-min fair BS association and power allocation.
#[derive(Parser)]
#[command(name = "hetassoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random HetNet from a scenario config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the BS and user positions.
        #[arg(long)]
        geometry: Option<PathBuf>,
    },
    /// Solve one network and print the result as JSON.
    Solve {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        alg: Algorithm,
        /// Final auction precision (aufp).
        #[arg(long)]
        eps: Option<f64>,
        /// Fixed-point tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Monte-Carlo sweep, one CSV row per trial and algorithm.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Overrides the base seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte-Carlo sweep, empirical CDF of the min-SINR.
    Cdf {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the network encoding a 3-CNF formula (DIMACS).
    Gadget {
        #[arg(long)]
        cnf: PathBuf,
        /// Compare satisfiability with the network optimum.
        #[arg(long)]
        verify: bool,
        /// Write the network JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the literal gain table inside variable blocks.
        #[arg(long)]
        table_gains: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Quick oracle-equivalence checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

// writeln! rather than println! so a closed pipe is an error, not a panic.
fn print_json<T: Serialize>(v: &T) -> Result<()> {
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn load_spec(path: &Path, seed: Option<u64>) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_json(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    Ok(spec)
}

fn summarize(res: &ExperimentResults) -> bool {
    eprintln!("{:>8} {:>8} {:>14} {:>10} {:>6} {:>6} {:>6}", "alg", "snr_db", "mean_sinr", "mean_db", "n", "skip", "fail");
    let mut any_failed = false;
    for r in &res.summary {
        eprintln!(
            "{:>8} {:>8} {:>14.6} {:>10.3} {:>6} {:>6} {:>6}",
            r.algorithm.name(),
            r.snr_db,
            r.mean_linear,
            r.mean_db,
            r.n_values,
            r.n_skipped,
            r.n_failed
        );
        any_failed |= r.n_failed > 0;
    }
    any_failed
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Gen {
            config,
            seed,
            out,
            geometry,
        } => {
            let mut cfg: ScenarioConfig = serde_json::from_str(&read(&config)?)
                .with_context(|| format!("parsing {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let h = generate_hetnet(&cfg)?;
            write(&out, &h.network.to_json()?)?;
            if let Some(g) = geometry {
                write(&g, &serde_json::to_string_pretty(&h.geometry)?)?;
            }
        }
        Command::Solve { net, alg, eps, tol } => {
            let network = Network::from_json(&read(&net)?)
                .with_context(|| format!("parsing {}", net.display()))?;
            let mut settings = SolverSettings {
                eps,
                ..Default::default()
            };
            if let Some(t) = tol {
                settings.tol = t;
            }
            let out = run_algorithm(&network, alg, &settings);
            print_json(&out)?;
            if out.status != Status::Ok {
                if let Some(m) = &out.message {
                    eprintln!("{}: {m}", out.status.name());
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep {
            spec,
            out,
            json,
            seed,
        } => {
            let spec = load_spec(&spec, seed)?;
            let res = monte_carlo(&spec)?;
            export_csv(&res, &out)?;
            if let Some(j) = json {
                export_json(&res, &j)?;
            }
            if summarize(&res) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Cdf { spec, out, seed } => {
            let spec = load_spec(&spec, seed)?;
            let res = monte_carlo(&spec)?;
            export_cdf_csv(&res, &out)?;
            if summarize(&res) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Gadget {
            cnf,
            verify,
            out,
            table_gains,
            tol,
        } => {
            let formula: CnfFormula = read(&cnf)?
                .parse()
                .with_context(|| format!("parsing {}", cnf.display()))?;
            let block = if table_gains {
                BlockGains::TableFaithful
            } else {
                BlockGains::Corrected
            };
            let gadget = build_3sat_gadget(&formula, block);
            match (&out, verify) {
                (Some(path), _) => write(path, &gadget.network.to_json()?)?,
                (None, false) => writeln!(io::stdout().lock(), "{}", gadget.network.to_json()?)?,
                (None, true) => {}
            }
            if verify {
                let check = verify_sat_equivalence(&formula, tol)?;
                print_json(&check)?;
                if !check.agrees {
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Command::Selftest { seed } => {
            if !selftest::run(seed)? {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
