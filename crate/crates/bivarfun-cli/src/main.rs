use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use bivarfun::blocking::SplitStrategy;
use bivarfun::{builtin_function, fun2m, AtomMethod, ComplexMatrix, Error, EvalOptions, Result};
use bivarfun_cli::baselines::diag_hp_oracle;
use bivarfun_cli::bench::{run_experiment, write_csv};
use bivarfun_cli::io::{format_cmx, read_cmx, write_cmx};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bivarfun", version, about = "Evaluate bivariate matrix functions f{A,B^T}(C)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate f{A,B^T}(C) from cmx matrix files
    Eval(EvalArgs),
    /// Run a benchmark experiment and emit a CSV table
    Bench(BenchArgs),
    /// Evaluate the fixed-digit high-precision reference
    Oracle(OracleArgs),
}

#[derive(Args)]
struct MatrixArgs {
    /// Built-in function name (f1, f2g[:exp|:sqrt], f3h[:exp|:sqrt],
    /// sqrt_sum, inv_sqrt_sum, exp_over_sum, exp_sqrt_sum, inv_sqrt_sum_diff)
    #[arg(long)]
    f: String,
    /// Left matrix file (cmx)
    #[arg(long)]
    a: PathBuf,
    /// Right matrix file (cmx)
    #[arg(long)]
    b: PathBuf,
    /// Right-hand-side matrix file (cmx)
    #[arg(long)]
    c: PathBuf,
    /// Result file (cmx); written to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed; defaults to the BIVARFUN_SEED environment variable, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Transpose the B file on ingestion, so f1 solves A X + X B = C for the
    /// files as written; pass false to hand the file to the engine literally,
    /// which then sees its transpose as the right multiplier
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    transpose_b: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: MatrixArgs,
    /// Atomic-block evaluator
    #[arg(long, value_parser = ["taylor", "diag"], default_value = "diag")]
    atom: String,
    /// Blocking separation
    #[arg(long)]
    delta: Option<f64>,
    /// Sub-clustering separation inside the diagonalization atom
    #[arg(long)]
    delta1: Option<f64>,
    /// Collapse recursion below this block size
    #[arg(long)]
    nmin: Option<usize>,
    /// Recursive split rule
    #[arg(long, value_parser = ["balanced", "single"], default_value = "balanced")]
    strategy: String,
    /// Taylor truncation tolerance
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sylvester conditioning threshold for merging
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment number: 1 (atom contrast), 2 (gallery accuracy), 3 (timing)
    #[arg(long)]
    experiment: u8,
    /// Comma-separated sizes overriding the experiment's defaults
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// RNG seed; defaults to the BIVARFUN_SEED environment variable, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// CSV file; written to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: MatrixArgs,
    /// Working precision in decimal digits
    #[arg(long, default_value_t = 128)]
    digits: u32,
}

fn resolve_seed(cli: Option<u64>) -> Result<u64> {
    if let Some(s) = cli {
        return Ok(s);
    }
    match std::env::var("BIVARFUN_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::arg("seed", format!("BIVARFUN_SEED={v:?} is not a u64"))),
        Err(_) => Ok(0),
    }
}

struct LoadedProblem {
    f: std::sync::Arc<dyn bivarfun::BivariateFunction>,
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    out: Option<PathBuf>,
    seed: u64,
}

fn load(common: &MatrixArgs) -> Result<LoadedProblem> {
    let f = builtin_function(&common.f)?;
    let a = read_cmx(&common.a)?;
    let b = read_cmx(&common.b)?;
    let c = read_cmx(&common.c)?;
    Ok(LoadedProblem {
        f,
        a,
        b: if common.transpose_b { b.transpose() } else { b },
        c,
        out: common.out.clone(),
        seed: resolve_seed(common.seed)?,
    })
}

fn emit_matrix(out: &Option<PathBuf>, m: &ComplexMatrix) -> Result<()> {
    match out {
        Some(path) => write_cmx(path, m),
        None => {
            print!("{}", format_cmx(m));
            Ok(())
        }
    }
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let p = load(&args.common)?;
    let opts = EvalOptions {
        atom_method: if args.atom == "taylor" { AtomMethod::Taylor } else { AtomMethod::Diag },
        delta: args.delta.unwrap_or(EvalOptions::default().delta),
        delta1: args.delta1.unwrap_or(EvalOptions::default().delta1),
        n_min: args.nmin.unwrap_or(EvalOptions::default().n_min),
        strategy: if args.strategy == "single" { SplitStrategy::Single } else { SplitStrategy::Balanced },
        epsilon: args.epsilon.unwrap_or(EvalOptions::default().epsilon),
        gamma: args.gamma.unwrap_or(EvalOptions::default().gamma),
        seed: p.seed,
    };
    let (result, report) = fun2m(p.f.as_ref(), &p.a, &p.b, &p.c, &opts);
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::arg("report", e.to_string()))?;
    match result {
        Ok(m) => {
            emit_matrix(&p.out, &m)?;
            // The report rides on the stream the matrix does not occupy.
            if p.out.is_some() {
                println!("{json}");
            } else {
                eprintln!("{json}");
            }
            Ok(())
        }
        Err(e) => {
            eprintln!("{json}");
            Err(e)
        }
    }
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let rows = run_experiment(args.experiment, args.sizes.as_deref(), resolve_seed(args.seed)?)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::arg("bench", format!("{}: {e}", path.display())))?;
            write_csv(&rows, file)
        }
        None => write_csv(&rows, std::io::stdout().lock()),
    }
}

fn run_oracle(args: &OracleArgs) -> Result<()> {
    let p = load(&args.common)?;
    let m = diag_hp_oracle(p.f.as_ref(), &p.a, &p.b, &p.c, args.digits, p.seed)?;
    emit_matrix(&p.out, &m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Eval(args) => run_eval(args),
        Cmd::Bench(args) => run_bench(args),
        Cmd::Oracle(args) => run_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument { .. } => 2,
                _ => 1,
            })
        }
    }
}
