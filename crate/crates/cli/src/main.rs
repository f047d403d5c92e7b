use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::Serialize;

use zrecover::formats::{DecodeResultJson, MatrixJson, MeasurementJson, VectorJson};
use zrecover::matrix::{build_matrix, encode, exceeds_sparsity, MatrixParams};
use zrecover::recovery::{decode, DecodeConfig, DecodeStatus};
use zrecover::rootfind::DEFAULT_EXHAUSTIVE_THRESHOLD;
use zrecover::sweep::{self, SparsityTerm, SweepGrid};
use zrecover::{FieldModulus, RootStrategy, SolveMethod};

mod selftest;

const EXIT_INVALID: u8 = 2;
const EXIT_SPARSITY: u8 = 3;
const EXIT_UNRECOVERABLE: u8 = 4;

#[derive(Parser)]
#[command(name = "zrecover", version, about = "Exact recovery of sparse integer vectors from small-entry measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a measurement matrix and write it as JSON.
    Gen(GenArgs),
    /// Compute y = Phi x.
    Encode(EncodeArgs),
    /// Recover x from y.
    Decode(DecodeArgs),
    /// Run seeded round-trip trials over a parameter grid and write CSV.
    Bench(BenchArgs),
    /// Quick built-in consistency checks.
    Selftest,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Number of columns (default p - 1).
    #[arg(long)]
    columns: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    slack: f64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Vector JSON; `-` for stdin.
    #[arg(long)]
    vector: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RootsArg {
    Auto,
    Exhaustive,
    Split,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Gaussian,
    Vandermonde,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement JSON; `-` for stdin.
    #[arg(long)]
    measurement: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Give up (not-recoverable) after this many digits.
    #[arg(long)]
    max_digits: Option<usize>,
    /// Known bound on max |x_j|; caps the digit count accordingly.
    #[arg(long = "M", alias = "magnitude", value_parser = parse_big)]
    magnitude: Option<BigInt>,
    #[arg(long, value_enum, default_value_t = RootsArg::Auto)]
    roots: RootsArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Gaussian)]
    solver: SolverArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<u64>,
    /// Comma-separated row counts.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    /// Comma-separated magnitude bounds (`1000`, `1e6`, `10^18`).
    #[arg(long = "M", alias = "magnitude", value_delimiter = ',', value_parser = parse_big, default_value = "1e6")]
    magnitude: Vec<BigInt>,
    /// Comma-separated sparsities: a number, `m/k`, or `auto` (uniform in 1..=m/2).
    #[arg(long, value_delimiter = ',', value_parser = parse_sparsity, default_value = "auto")]
    s: Vec<SparsityTerm>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    slack: f64,
    #[arg(long, value_enum, default_value_t = RootsArg::Auto)]
    roots: RootsArg,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_big(s: &str) -> Result<BigInt, String> {
    sweep::parse_magnitude(s).ok_or_else(|| format!("not an integer: {s:?}"))
}

fn parse_sparsity(s: &str) -> Result<SparsityTerm, String> {
    SparsityTerm::parse(s).ok_or_else(|| format!("expected a number, m/k or auto, got {s:?}"))
}

fn roots_strategy(arg: RootsArg, seed: u64) -> RootStrategy {
    match arg {
        RootsArg::Auto => RootStrategy::Auto { threshold: DEFAULT_EXHAUSTIVE_THRESHOLD, seed },
        RootsArg::Exhaustive => RootStrategy::Exhaustive,
        RootsArg::Split => RootStrategy::Split { seed },
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INVALID, message: message.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Selftest => Ok(selftest::run()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ZRECOVER_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::invalid(format!("ZRECOVER_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, message: e.to_string() })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::invalid(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: malformed JSON: {e}", path.display())))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match out {
        Some(path) => fs::write(path, bytes),
        None => io::stdout().write_all(bytes),
    };
    res.map_err(|e| Failure { code: 1, message: format!("write failed: {e}") })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string(value).expect("serializable");
    text.push('\n');
    write_output(out, text.as_bytes())
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let modulus = FieldModulus::new(a.p).map_err(Failure::invalid)?;
    let columns = a.columns.unwrap_or((a.p - 1) as usize);
    let params = MatrixParams::new(modulus, a.m, columns, a.slack).map_err(Failure::invalid)?;
    let mx = build_matrix(params);
    write_json(a.out.as_deref(), &MatrixJson::from(&mx))?;
    eprintln!(
        "p={} m={} columns={}: {}/{} columns meet |phi| <= {:.1} (slack {}), max |phi| = {}",
        a.p,
        a.m,
        columns,
        mx.bound_met_count(),
        columns,
        params.element_bound(),
        a.slack,
        mx.max_abs_entry()
    );
    Ok(0)
}

fn load_matrix(path: &Path) -> Result<zrecover::MeasurementMatrix, Failure> {
    read_json::<MatrixJson>(path)?.into_matrix().map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn cmd_encode(a: EncodeArgs) -> CmdResult {
    let mx = load_matrix(&a.matrix)?;
    let x = read_json::<VectorJson>(&a.vector)?
        .into_vector()
        .map_err(|e| Failure::invalid(format!("{}: {e}", a.vector.display())))?;
    let y = encode(&mx, &x).map_err(Failure::invalid)?;
    if exceeds_sparsity(&mx, &x) {
        eprintln!(
            "warning: vector has {} nonzeros but only {} are recoverable with m = {}",
            x.sparsity(),
            mx.rows() / 2,
            mx.rows()
        );
    }
    write_json(a.out.as_deref(), &MeasurementJson::from(&y))?;
    Ok(0)
}

fn cmd_decode(a: DecodeArgs) -> CmdResult {
    let mx = load_matrix(&a.matrix)?;
    let y = read_json::<MeasurementJson>(&a.measurement)?
        .into_measurement()
        .map_err(|e| Failure::invalid(format!("{}: {e}", a.measurement.display())))?;
    let config = DecodeConfig {
        max_digits: a.max_digits,
        magnitude_hint: a.magnitude,
        roots: roots_strategy(a.roots, a.seed),
        solver: match a.solver {
            SolverArg::Gaussian => SolveMethod::Gaussian,
            SolverArg::Vandermonde => SolveMethod::TransposedVandermonde,
        },
        trace: false,
    };
    let r = decode(&mx, &y, &config).map_err(Failure::invalid)?;
    write_json(a.out.as_deref(), &DecodeResultJson::from(&r))?;
    Ok(match r.status {
        DecodeStatus::Success => 0,
        DecodeStatus::SparsityExceeded => EXIT_SPARSITY,
        DecodeStatus::NotRecoverable => EXIT_UNRECOVERABLE,
    })
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let grid = SweepGrid {
        primes: a.p,
        rows: a.m,
        magnitudes: a.magnitude,
        sparsity: a.s,
        trials: a.trials,
        seed: a.seed,
        slack: a.slack,
        roots: roots_strategy(a.roots, a.seed),
    };
    if let Some(bad) = grid.magnitudes.iter().find(|m| **m < BigInt::from(1)) {
        return Err(Failure::invalid(format!("M must be at least 1, got {bad}")));
    }
    if let Some(bad) = grid.sparsity.iter().find(|s| **s == SparsityTerm::Fixed(0)) {
        return Err(Failure::invalid(format!("sparsity must be positive, got {bad}")));
    }
    let matrices = sweep::build_matrices(&grid).map_err(Failure::invalid)?;
    let records = sweep::run_sweep_with(&grid, &matrices);

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &records {
            w.serialize(r).map_err(|e| Failure { code: 1, message: e.to_string() })?;
        }
        w.flush().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    }
    write_output(a.csv.as_deref(), &buf)?;

    let s = sweep::summarize(&records);
    eprintln!(
        "{} trials: {} success, {} sparsity-exceeded, {} not-recoverable; {} failures",
        s.trials, s.successes, s.sparsity_exceeded, s.not_recoverable, s.failures
    );
    if s.trials > 0 {
        eprintln!("max field-op ratio {:.3}, max ring-op ratio {:.3}", s.max_field_ratio, s.max_ring_ratio);
        for spread in sweep::ring_ratio_spread(&records) {
            let means: Vec<String> = spread.means.iter().map(|(m, r)| format!("m={m}:{r:.2}")).collect();
            eprintln!(
                "ring-op ratio spread p={} M={}: {:.2}x [{}]",
                spread.p,
                spread.magnitude,
                spread.factor,
                means.join(" ")
            );
        }
    }
    Ok(if s.failures == 0 { 0 } else { 1 })
}
