use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpls::ensembles::{haar_unitary, random_unit_vector, RandsvdSpec, RngStream, SpecError};
use lpls::harness::cmat::{read_cmat, write_cmat, CmatError};
use lpls::harness::selftest::run_selftest;
use lpls::harness::svg::render_sweep_svg;
use lpls::harness::sweep::{run_sweep, write_csv, SweepConfig, SweepError};
use lpls::matrix::gemm_exact;
use lpls::par::Parallelism;
use lpls::pipeline::{measure_error, SolveOptions, TrialOutcome};
use lpls::{BoundReport, LinalgError, PrecisionContext, PrecisionError, RangePolicy};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "lpls", version, about = "Low-precision least-squares round-off experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random test matrix in CMAT format.
    Gen(GenArgs),
    /// Evaluate every round-off bound for a matrix.
    Bound(BoundArgs),
    /// Solve one least-squares problem in low precision and report errors.
    Solve(SolveArgs),
    /// Monte-Carlo sweep over condition numbers.
    Sweep(SweepArgs),
    /// Run the quick statistical invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Target cond2 for an exponential spectrum.
    #[arg(long, default_value_t = 1.0)]
    cond: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit a square Haar unitary instead (requires rows == cols).
    #[arg(long)]
    haar: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Range {
    Unbounded,
    Binary16,
}

impl From<Range> for RangePolicy {
    fn from(r: Range) -> Self {
        match r {
            Range::Unbounded => RangePolicy::Unbounded,
            Range::Binary16 => RangePolicy::Binary16Clamp,
        }
    }
}

#[derive(Args)]
struct PrecisionArgs {
    /// Stored fraction bits of the emulated format.
    #[arg(long, default_value_t = 10)]
    mantissa_bits: u32,
    /// Round products before accumulation instead of fusing.
    #[arg(long)]
    no_fma: bool,
    #[arg(long, value_enum, default_value_t = Range::Unbounded)]
    range: Range,
}

impl PrecisionArgs {
    fn context(&self) -> Result<PrecisionContext, CliError> {
        Ok(PrecisionContext::new(self.mantissa_bits)?
            .with_fma(!self.no_fma)
            .with_range(self.range.into()))
    }
}

#[derive(Args)]
struct BoundArgs {
    matrix: PathBuf,
    #[arg(long, default_value_t = 10)]
    mantissa_bits: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SolveArgs {
    matrix: PathBuf,
    /// Right-hand side in CMAT format (rows x 1 or rows x k).
    #[arg(long, conflicts_with = "random_rhs")]
    rhs: Option<PathBuf>,
    /// Use Y = H x0 with x0 a random unit vector drawn from this seed.
    #[arg(long)]
    random_rhs: Option<u64>,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Compute the final W Y product in binary64.
    #[arg(long)]
    exact_wy: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 32)]
    rows: usize,
    #[arg(long, default_value_t = 32)]
    cols: usize,
    #[arg(long, default_value_t = 1.0)]
    cond_min: f64,
    #[arg(long, default_value_t = 100.0)]
    cond_max: f64,
    #[arg(long, default_value_t = 20)]
    cond_points: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[arg(long)]
    exact_wy: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<PrecisionError> for CliError {
    fn from(e: PrecisionError) -> Self {
        match e {
            PrecisionError::InvalidMantissa(_) | PrecisionError::NonFinite => Self::Invalid(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::DimensionMismatch { .. } | LinalgError::TooLarge { .. } => Self::Invalid(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<CmatError> for CliError {
    fn from(e: CmatError) -> Self {
        Self::Invalid(e.to_string())
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        Self::Invalid(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Precision(p) => p.into(),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Invalid(e.to_string())
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display()))),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let h = if a.haar {
        if a.rows != a.cols {
            return Err(CliError::Invalid("--haar needs rows == cols".into()));
        }
        haar_unitary(a.rows, &mut RngStream::new(a.seed, 0))
    } else {
        RandsvdSpec::new(a.rows, a.cols, a.cond, a.seed).generate()?
    };
    match &a.out {
        Some(p) => write_cmat(p, &h)?,
        None => write_output(None, &lpls::harness::cmat::format_cmat(&h))?,
    }
    Ok(())
}

fn cmd_bound(a: &BoundArgs) -> Result<(), CliError> {
    let h = read_cmat(&a.matrix)?;
    if h.rows() < h.cols() {
        return Err(CliError::Invalid(format!(
            "least squares needs rows >= cols, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let ctx = PrecisionContext::new(a.mantissa_bits)?;
    let r = BoundReport::for_matrix(&h, &ctx)?;
    let fields: [(&str, String); 16] = [
        ("rows", r.rows.to_string()),
        ("cols", r.cols.to_string()),
        ("mantissa_bits", r.mantissa_bits.to_string()),
        ("eps", format!("{:e}", r.eps)),
        ("u", format!("{:e}", r.u)),
        ("fro_a", format!("{:e}", r.fro_a)),
        ("cond2_h", format!("{:e}", r.cond2_h)),
        ("cond_f_a", format!("{:e}", r.cond_f_a)),
        ("classical_fro", format!("{:e}", r.classical_fro)),
        ("classical_spectral", format!("{:e}", r.classical_spectral)),
        ("classical_elementwise_max", format!("{:e}", r.classical_elementwise_max)),
        ("gram_bound", format!("{:e}", r.gram_bound)),
        ("cholesky_bound", format!("{:e}", r.cholesky_bound)),
        ("cholesky_bound_symmetric", format!("{:e}", r.cholesky_bound_symmetric)),
        ("final_bound", format!("{:e}", r.final_bound)),
        ("final_bound_cond2_form", format!("{:e}", r.final_bound_cond2_form)),
    ];
    let text = match a.format {
        Format::Text => fields.iter().map(|(k, v)| format!("{k:<26} {v}\n")).collect(),
        Format::Csv => {
            let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let vals: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
    };
    write_output(None, &text)
}

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let h = read_cmat(&a.matrix)?;
    let y = match &a.rhs {
        Some(p) => read_cmat(p)?,
        None => {
            let mut rng = RngStream::new(a.random_rhs.unwrap_or(0), 0);
            gemm_exact(&h, &random_unit_vector(h.cols(), &mut rng), false)?
        }
    };
    if y.rows() != h.rows() {
        return Err(CliError::Invalid(format!(
            "rhs has {} rows, matrix has {}",
            y.rows(),
            h.rows()
        )));
    }
    if h.rows() < h.cols() {
        return Err(CliError::Invalid(format!(
            "least squares needs rows >= cols, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let ctx = a.precision.context()?;
    let opts = SolveOptions {
        apply_wy_in_lp: !a.exact_wy,
    };
    match measure_error(&h, &y, &ctx, &opts)? {
        TrialOutcome::Solved(m) => {
            println!("stage          none");
            println!("rel_err        {:e}", m.rel_err);
            println!("backward_err   {:e}", m.backward_err);
            println!("gram_err       {:e}", m.gram_err);
            Ok(())
        }
        TrialOutcome::Failed { stage, gram_err } => {
            println!("stage          {}", stage.as_str());
            if let Some(g) = gram_err {
                println!("gram_err       {g:e}");
            }
            Err(CliError::Numerical(format!(
                "low-precision solve failed in stage {}",
                stage.as_str()
            )))
        }
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let cfg = SweepConfig {
        rows: a.rows,
        cols: a.cols,
        cond_min: a.cond_min,
        cond_max: a.cond_max,
        cond_points: a.cond_points,
        trials: a.trials,
        mantissa_bits: a.precision.mantissa_bits,
        fma: !a.precision.no_fma,
        range: a.precision.range.into(),
        apply_wy_in_lp: !a.exact_wy,
        seed: a.seed,
        parallelism: Parallelism::from_workers(a.workers),
    };
    let records = run_sweep(&cfg)?;
    let mut csv = Vec::new();
    write_csv(&records, &mut csv)?;
    write_output(a.out_csv.as_ref(), &String::from_utf8_lossy(&csv))?;
    if let Some(p) = &a.out_svg {
        let title = format!("{}x{} RANDSVD, b={}, {} trials", a.rows, a.cols, cfg.mantissa_bits, a.trials);
        write_output(Some(p), &render_sweep_svg(&records, &title))?;
    }
    Ok(())
}

fn cmd_selftest(a: &SelftestArgs) -> Result<(), CliError> {
    let checks = run_selftest(a.seed, Parallelism::from_workers(a.workers));
    let mut failed = 0;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
