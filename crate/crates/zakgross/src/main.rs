use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use zakgross::output::{csv_text, write_atomic};
use zakgross::run::outcome_rows;
use zakgross::sweep::{self, GridMethod, SweepKind};
use zakgross::{circuit, parse_circuit, run, verify, Mode, RunOptions};
use zakgross_core::estimator::DEFAULT_SAMPLE_CAP;
use zakgross_core::symplectic::{decompose, IntSymplectic};

#[derive(Parser)]
#[command(name = "zakgross", version, about = "Phase-space simulation of GKP qudit circuits")]
struct Cli {
    /// Master seed for sampling and estimation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Numeric tolerance: quadrature target for `negativity`, agreement
    /// tolerance for `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunMode {
    Exact,
    Sample,
    Estimate,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a circuit document.
    Run {
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: RunMode,
        /// Draws in sample mode.
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta_fail: Option<f64>,
        /// Largest admissible planned sample count.
        #[arg(long, default_value_t = DEFAULT_SAMPLE_CAP)]
        sample_cap: u64,
        /// Result JSON (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Outcome table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Tabulate a single-mode Wigner function as `u,v,W` CSV.
    Wigner {
        /// logical_<j> or phase_state.
        #[arg(long, default_value = "logical_0")]
        state: SweepKind,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 3)]
        d: u32,
        /// Grid points per axis.
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// theta, series or oracle.
        #[arg(long, default_value = "theta")]
        method: GridMethod,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Logarithmic negativity sweep as `delta,M,log_M` CSV.
    Negativity {
        /// logical_<j>, phase_state or vacuum.
        #[arg(long, default_value = "logical_0")]
        state: SweepKind,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decompose an integer symplectic matrix into generators.
    Decompose {
        /// JSON rows, e.g. `[[1,0],[1,1]]`, or `@file`.
        matrix: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the oracle-agreement suite.
    Verify,
}

enum Failure {
    Schema(String),
    Numeric(String),
    Infeasible(String),
    Io(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Schema(m) => (2, m),
            Failure::Numeric(m) => (3, m),
            Failure::Infeasible(m) => (4, m),
            Failure::Io(m) => (1, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn io<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Io(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return Failure::Io(e.to_string()).report();
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}

fn execute(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Run {
            circuit,
            mode,
            shots,
            epsilon,
            delta_fail,
            sample_cap,
            output,
            csv,
        } => {
            let text = fs::read_to_string(circuit).map_err(|e| Failure::Io(format!("{}: {e}", circuit.display())))?;
            let spec = parse_circuit(&text).map_err(|e| Failure::Schema(e.to_string()))?;
            let mode = match mode {
                RunMode::Exact => Mode::Exact,
                RunMode::Sample => Mode::Sample,
                RunMode::Estimate => Mode::Estimate,
            };
            let opts = RunOptions {
                seed: cli.seed,
                shots: *shots,
                epsilon: *epsilon,
                delta_fail: *delta_fail,
                sample_cap: *sample_cap,
            };
            let result = run(&spec, mode, &opts).map_err(|e| match e.exit_code() {
                2 => Failure::Schema(e.to_string()),
                4 => Failure::Infeasible(e.to_string()),
                _ => Failure::Numeric(e.to_string()),
            })?;
            let mut json = serde_json::to_value(&result).map_err(io)?;
            json["format"] = "zakgross-result/1".into();
            json["circuit"] = serde_json::from_str(&circuit::emit_circuit(&spec)).map_err(io)?;
            emit(output.as_deref(), &(serde_json::to_string_pretty(&json).map_err(io)? + "\n"))?;
            if let Some(p) = csv {
                let (header, rows) = outcome_rows(&result);
                write_atomic(p, csv_text(&header, &rows).map_err(io)?.as_bytes()).map_err(io)?;
            }
        }
        Command::Wigner {
            state,
            delta,
            d,
            points,
            method,
            output,
        } => {
            let spec = sweep::realistic_spec(*state, *d, *delta).map_err(|e| Failure::Schema(e.to_string()))?;
            let grid = sweep::wigner_grid(&spec, *points, *method).map_err(|e| Failure::Numeric(e.to_string()))?;
            let rows: Vec<Vec<String>> = grid
                .iter()
                .map(|r| r.iter().map(|x| format!("{x:.17e}")).collect())
                .collect();
            emit(output.as_deref(), &csv_text(&sweep::GRID_HEADER, &rows).map_err(io)?)?;
        }
        Command::Negativity {
            state,
            deltas,
            d,
            output,
        } => {
            if let Some(bad) = deltas.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
                return Err(Failure::Schema(format!("delta {bad} outside (0, 1]")));
            }
            let rows = sweep::negativity_sweep(*state, deltas, *d, &sweep::quadrature_rule(cli.tol));
            let failed = rows.iter().any(|r| !r.error.is_empty());
            emit(output.as_deref(), &csv_text(&sweep::SWEEP_HEADER, &sweep::sweep_rows(&rows)).map_err(io)?)?;
            if failed {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Decompose { matrix, output } => {
            let text = match matrix.strip_prefix('@') {
                Some(p) => fs::read_to_string(p).map_err(|e| Failure::Io(format!("{p}: {e}")))?,
                None => matrix.clone(),
            };
            let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| Failure::Schema(e.to_string()))?;
            let s = IntSymplectic::from_f64_rows(&rows).map_err(|e| Failure::Schema(e.to_string()))?;
            let word = decompose(&s).map_err(|e| Failure::Numeric(e.to_string()))?;
            let json = serde_json::json!({ "length": word.len(), "ops": circuit::word_json(&word) });
            emit(output.as_deref(), &(serde_json::to_string_pretty(&json).map_err(io)? + "\n"))?;
        }
        Command::Verify => {
            let checks = verify::run_suite(cli.seed.unwrap_or(0), cli.tol);
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().any(|c| !c.pass) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
