//! `erkn`: condition checks, convergence studies, long-time energy runs and
//! resonance reports for the built-in ERKN schemes.
//!
//! Exit status: 0 when every assertion holds, 1 on a failed assertion
//! (condition mismatch, slope out of range), 2 on divergence or any other
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use erkn::harness::benchmark::{BENCH_H, BENCH_LAMBDA, BENCH_OMEGA, BENCH_T_END};
use erkn::harness::{
    run_checks, run_convergence, run_longrun, run_resonance, ChecksReport, ExperimentConfig,
};
use erkn::{Builtin, ErknError};

#[derive(Parser)]
#[command(
    name = "erkn",
    version,
    about = "ERKN integrators for highly oscillatory Hamiltonian systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Order, symmetry, symplecticity and energy-condition checks.
    Check {
        /// ERKN1..ERKN4, or `all`.
        scheme: String,
    },
    /// Self-convergence study on the benchmark system.
    Converge(ConvergeArgs),
    /// Long-time energy-error run described by a config file.
    Longrun(LongrunArgs),
    /// Resonance module and non-resonance margin.
    Resonance(ResonanceArgs),
}

#[derive(Args)]
struct ConvergeArgs {
    scheme: String,
    /// Descending step sizes.
    #[arg(long = "h", value_delimiter = ',', default_values_t = [0.02, 0.01, 0.005])]
    h: Vec<f64>,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    /// `1 / eps`.
    #[arg(long, default_value_t = 10.0)]
    omega: f64,
    /// Smallest accepted slope.
    #[arg(long, default_value_t = 1.8)]
    min_slope: f64,
    /// Largest accepted slope.
    #[arg(long, default_value_t = 2.2)]
    max_slope: f64,
}

#[derive(Args)]
struct LongrunArgs {
    config: PathBuf,
    #[arg(long = "h")]
    h: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Integrate to t = 10000 (overridden by `--t-end`).
    #[arg(long)]
    full_paper_run: bool,
}

#[derive(Args)]
struct ResonanceArgs {
    #[arg(long, value_delimiter = ',', default_values_t = BENCH_LAMBDA)]
    lambda: Vec<f64>,
    /// Largest `|k|_1` scanned.
    #[arg(long, short = 'N', default_value_t = 3)]
    order: u32,
    /// Resonance tolerance; defaults to `1e-9 * max lambda`.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "h", default_value_t = BENCH_H)]
    h: f64,
    #[arg(long, default_value_t = BENCH_OMEGA)]
    omega: f64,
}

enum Failure {
    Assertion(String),
    Error(ErknError),
}

impl From<ErknError> for Failure {
    fn from(e: ErknError) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { scheme } => check(&scheme),
        Command::Converge(args) => converge(args),
        Command::Longrun(args) => longrun(args),
        Command::Resonance(args) => resonance(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn check(scheme: &str) -> Result<(), Failure> {
    let names: Vec<String> = if scheme.eq_ignore_ascii_case("all") {
        Builtin::ALL.iter().map(|b| b.name().to_string()).collect()
    } else {
        vec![scheme.to_string()]
    };
    // independent schemes are checked on separate threads
    let reports: Vec<Result<ChecksReport, ErknError>> = std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| s.spawn(move || run_checks(n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });
    let mut mismatched = Vec::new();
    for r in reports {
        let r = r?;
        print!("{r}");
        if !r.matches_expected() {
            mismatched.push(r.scheme.clone());
        }
    }
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "unexpected check results for {}",
            mismatched.join(", ")
        )))
    }
}

fn converge(args: ConvergeArgs) -> Result<(), Failure> {
    let report = run_convergence(&args.scheme, &args.h, args.t_end, args.omega)?;
    println!("{report}");
    let (lo, hi) = (args.min_slope, args.max_slope);
    match report.slope {
        Some(s) if !(lo..=hi).contains(&s) => Err(Failure::Assertion(format!(
            "slope {s:.4} outside [{lo}, {hi}]"
        ))),
        _ => Ok(()),
    }
}

fn longrun(args: LongrunArgs) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if args.full_paper_run {
        cfg.t_end = BENCH_T_END;
    }
    if let Some(h) = args.h {
        cfg.h = h;
    }
    if let Some(t) = args.t_end {
        cfg.t_end = t;
    }
    if let Some(w) = args.omega {
        cfg.epsilon_inv = w;
    }
    if let Some(out) = args.output {
        cfg.output_path = out;
    }
    if let Some(n) = args.sample_every {
        cfg.sample_every = n;
    }
    cfg.validate()?;

    let outcome = run_longrun(&cfg)?;
    let series = &outcome.series;
    println!(
        "{} h = {} t_end = {} -> {} ({} rows)",
        cfg.scheme_name,
        cfg.h,
        cfg.t_end,
        cfg.output_path.display(),
        series.len()
    );
    for col in &series.columns {
        println!("  max |{col}| = {:e}", series.max_abs_all(col)?);
    }
    match outcome.failure {
        Some(e) => Err(Failure::Error(e)),
        None => Ok(()),
    }
}

fn resonance(args: ResonanceArgs) -> Result<(), Failure> {
    if !(args.omega > 0.0) {
        return Err(ErknError::InvalidArgument(format!(
            "omega must be positive, got {}",
            args.omega
        ))
        .into());
    }
    let report = run_resonance(&args.lambda, args.order, args.tol, args.h, 1.0 / args.omega)?;
    println!("{report}");
    Ok(())
}
