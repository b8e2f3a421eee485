use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::{info, LevelFilter};

use fermion_distill::covariance::{parse_text, validate};
use fermion_distill::distill::{run_protocol, CSV_HEADER};
use fermion_distill::lattice::{plot_data, rate_sweep, KernelMethod, SweepConfig};
use fermion_distill::verify::oracle_suite;
use fermion_distill::CovarianceMatrix;

const EXIT_INVALID: u8 = 1;
const EXIT_NOT_DISTILLABLE: u8 = 2;

/// Largest block size accepted by `oracle-compare`.
const ORACLE_MAX_D: usize = 3;

#[derive(Parser, Debug)]
#[command(name = "fermion-distill", version, about = "Entanglement distillation for fermionic Gaussian states")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distillation rate of the free-fermion chain over a range of block sizes.
    Sweep(SweepArgs),
    /// Run the protocol on a covariance file.
    Report(ReportArgs),
    /// Check a covariance file.
    Validate {
        file: PathBuf,
    },
    /// Compare the Gaussian formulas with the dense Fock-space reference.
    OracleCompare(OracleArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Block sizes as `min:max` or a single value.
    #[arg(long = "d", default_value = "2:40")]
    range: DRange,

    /// Modes kept per side after the normal form.
    #[arg(long, default_value_t = 2)]
    keep: usize,

    /// CSV output path.
    #[arg(long)]
    out: PathBuf,

    /// Optional two-column `d R/d` output for plotting.
    #[arg(long)]
    plot: Option<PathBuf>,

    /// Take the equal-parity probability as 1.
    #[arg(long)]
    conservative_p: bool,

    /// Evaluate the kernel by quadrature with this many intervals.
    #[arg(long)]
    quadrature: Option<usize>,

    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    file: PathBuf,

    /// Modes kept per side (default: min(2, d)).
    #[arg(long)]
    keep: Option<usize>,

    #[arg(long)]
    conservative_p: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Largest block size; every d from 1 up to this is checked.
    #[arg(long = "d", default_value_t = 3)]
    d: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Debug, Clone, Copy)]
struct DRange {
    min: usize,
    max: usize,
}

impl FromStr for DRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad block size `{x}`: {e}"));
        let (min, max) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let d = parse(s)?;
                (d, d)
            }
        };
        if min > max {
            return Err(format!("empty range {min}:{max}"));
        }
        Ok(Self { min, max })
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), String> {
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let cfg = SweepConfig {
        d_min: args.range.min,
        d_max: args.range.max,
        n_keep: args.keep,
        conservative_p: args.conservative_p,
        kernel: match args.quadrature {
            Some(points) => KernelMethod::Quadrature { points },
            None => KernelMethod::ClosedForm,
        },
        parallel: true,
    };
    info!("sweeping d = {}..={} with {} kept modes", cfg.d_min, cfg.d_max, cfg.n_keep);
    let rows = rate_sweep(&cfg).map_err(|e| e.to_string())?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    fs::write(&args.out, csv).map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
    if let Some(path) = &args.plot {
        fs::write(path, plot_data(&rows)).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    info!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

/// Reads and validates a covariance file, printing the residual report on
/// failure.
fn load(path: &PathBuf) -> Result<CovarianceMatrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let (d_a, d_b, m) = parse_text(&text).map_err(|e| e.to_string())?;
    let report = validate(d_a, d_b, &m);
    if !report.is_ok() {
        return Err(format!("invalid covariance matrix\n{report}"));
    }
    CovarianceMatrix::new(d_a, d_b, m).map_err(|e| e.to_string())
}

fn cmd_report(args: &ReportArgs) -> Result<bool, String> {
    let s = load(&args.file)?;
    let keep = args.keep.unwrap_or_else(|| s.d_a().min(s.d_b()).min(2));
    let report = run_protocol(&s, keep, args.conservative_p).map_err(|e| e.to_string())?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", report.summary());
    let _ = writeln!(out, "{CSV_HEADER}");
    let _ = writeln!(out, "{}", report.csv_row());
    Ok(report.distillable)
}

fn cmd_validate(file: &PathBuf) -> Result<(), String> {
    let s = load(file)?;
    println!("{}", s.validate());
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<bool, String> {
    if args.d == 0 || args.d > ORACLE_MAX_D {
        return Err(format!("--d must lie in 1..={ORACLE_MAX_D}"));
    }
    let mut all = true;
    for d in 1..=args.d {
        let report = oracle_suite(d, args.trials, args.seed).map_err(|e| e.to_string())?;
        print!("{report}");
        all &= report.passed();
    }
    println!("{}", if all { "all residuals within tolerance" } else { "FAILED" });
    Ok(all)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let outcome = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args).map(|_| ExitCode::SUCCESS),
        Command::Report(args) => {
            cmd_report(args).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_NOT_DISTILLABLE) })
        }
        Command::Validate { file } => cmd_validate(file).map(|_| ExitCode::SUCCESS),
        Command::OracleCompare(args) => {
            cmd_oracle(args).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INVALID) })
        }
    };
    outcome.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        ExitCode::from(EXIT_INVALID)
    })
}
