use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use matmono::harness::{compare_with_oracle, rows_to_csv, run_sweep, validate_scenario, CheckOutcome, ExperimentConfig, SweepRow};
use matmono::model::json::{scenario_from_json, solution_to_json};
use matmono::monotone::eval_objective;
use matmono::robust::{effective_pi, solve_scenario};
use matmono::structure::Design;
use matmono::Error;

const SEED_VAR: &str = "MATMONO_SEED";

/// Matrix-monotonic MIMO precoder design and experiment sweeps.
#[derive(Parser)]
#[command(name = "matmono", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design the precoder for one scenario.
    Design {
        scenario: PathBuf,
        /// Write the solution here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accept worst-case designs that only optimize an upper bound.
        #[arg(long)]
        allow_upper_bound: bool,
    },
    /// Design one scenario and run the invariant checks on the result.
    Validate { scenario: PathBuf },
    /// Run an experiment sweep and write the CSV table.
    Sweep {
        experiment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare weighted-constraint designs with the covariance oracle.
    OracleCompare {
        experiment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Lib(Error),
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Lib(Error::InvalidInput(_) | Error::Unsupported(_) | Error::TooLarge(_)) => 2,
            Self::Lib(Error::Infeasible(_)) => 3,
            Self::Lib(Error::NotConverged(_) | Error::SingularMatrix(_) | Error::DegenerateRescaling(_)) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Self::Lib(e) => e.to_string(),
            Self::Config(m) => m.clone(),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seed_override() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::Config(format!("{SEED_VAR}={v:?} is not a decimal 64-bit seed"))),
        Err(_) => Ok(None),
    }
}

fn experiment(path: &Path) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::from_json(&read(path)?)?;
    if let Some(seed) = seed_override()? {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn design(path: &Path, out: Option<&Path>, allow_upper_bound: bool) -> Outcome {
    let s = scenario_from_json(&read(path)?)?;
    let sol = solve_scenario(&s, &Design::new(s.streams), allow_upper_bound)?;
    let x = sol.x();
    let value = eval_objective(&s.objective, &x, &effective_pi(&s, &x)?)?;
    emit(out, &(solution_to_json(&sol, value)? + "\n"))?;
    if !sol.diagnostics.converged {
        eprintln!("weighting loop stopped after {} iterations, residual {:.3e}", sol.diagnostics.iterations, sol.diagnostics.kkt_residual);
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(path: &Path) -> Outcome {
    let s = scenario_from_json(&read(path)?)?;
    let report = validate_scenario(&s, seed_override()?.unwrap_or(0))?;
    println!("objective {:.12e}", report.objective);
    for c in &report.checks {
        let tag = match c.outcome {
            CheckOutcome::Pass => "PASS",
            CheckOutcome::Fail => "FAIL",
            CheckOutcome::Skip => "SKIP",
        };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn table(rows: &[SweepRow], out: Option<&Path>) -> Outcome {
    emit(out, &rows_to_csv(rows))?;
    let failed: usize = rows.iter().map(|r| r.failures).sum();
    if failed > 0 {
        eprintln!("{failed} trial designs failed and were left out of the means");
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Design { scenario, out, allow_upper_bound } => design(&scenario, out.as_deref(), allow_upper_bound),
        Command::Validate { scenario } => validate(&scenario),
        Command::Sweep { experiment: path, out } => table(&run_sweep(&experiment(&path)?)?, out.as_deref()),
        Command::OracleCompare { experiment: path, out } => table(&compare_with_oracle(&experiment(&path)?)?, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
