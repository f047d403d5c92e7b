//! Seeded random round-trip trials over a parameter grid.
//!
//! Each trial draws an `s`-sparse vector with coordinates in `[-M, M] \ {0}`,
//! encodes it, decodes it, and checks the result together with the step,
//! digit and magnitude bounds. Trial `t` of grid cell `c` uses a ChaCha
//! stream `(c << 32) | t` of the sweep seed, so records are reproducible
//! and independent of scheduling.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::{BigInt, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::FieldModulus;
use crate::matrix::{build_matrix, encode, MatrixError, MatrixParams, MeasurementMatrix, SparseIntVector};
use crate::metrics::{check_bounds, magnitude_bound, BoundParams, DEFAULT_RATIO_CONSTANT};
use crate::recovery::{decode, DecodeConfig, DecodeStatus};
use crate::rootfind::RootStrategy;

/// Parses `1000`, `1e6`, `10^18` or `-5` into an integer.
pub fn parse_magnitude(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let (mant, exp) = if let Some((a, b)) = s.split_once(['e', 'E']) {
        (a, b)
    } else if let Some((a, b)) = s.split_once('^') {
        if a != "10" {
            return None;
        }
        ("1", b)
    } else {
        return BigInt::from_str(s).ok();
    };
    let mant = BigInt::from_str(mant).ok()?;
    let exp: u32 = exp.parse().ok()?;
    Some(mant * BigInt::from(10u32).pow(exp))
}

/// How many nonzeros a trial gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SparsityTerm {
    Fixed(usize),
    /// `floor(m / d)`, at least 1.
    Fraction(usize),
    /// Uniform in `1..=floor(m/2)` per trial.
    Auto,
}

impl SparsityTerm {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "auto" {
            return Some(Self::Auto);
        }
        if let Some(d) = s.strip_prefix("m/") {
            return d.parse().ok().filter(|&d| d > 0).map(Self::Fraction);
        }
        s.parse().ok().map(Self::Fixed)
    }

    pub fn resolve(self, rows: usize, rng: &mut impl Rng) -> usize {
        match self {
            Self::Fixed(n) => n,
            Self::Fraction(d) => (rows / d).max(1),
            Self::Auto => rng.gen_range(1..=(rows / 2).max(1)),
        }
    }
}

impl std::fmt::Display for SparsityTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Fixed(n) => write!(f, "{n}"),
            Self::Fraction(d) => write!(f, "m/{d}"),
            Self::Auto => write!(f, "auto"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub primes: Vec<u64>,
    pub rows: Vec<usize>,
    pub magnitudes: Vec<BigInt>,
    pub sparsity: Vec<SparsityTerm>,
    pub trials: usize,
    pub seed: u64,
    pub slack: f64,
    pub roots: RootStrategy,
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &p in &self.primes {
            for &m in &self.rows {
                for mag in &self.magnitudes {
                    for &s in &self.sparsity {
                        out.push(Cell { index: out.len() as u64, p, rows: m, magnitude: mag.clone(), sparsity: s });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub index: u64,
    pub p: u64,
    pub rows: usize,
    pub magnitude: BigInt,
    pub sparsity: SparsityTerm,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub m: usize,
    pub p: u64,
    #[serde(rename = "M")]
    pub magnitude: String,
    pub s: usize,
    pub field_ops: u64,
    pub ring_ops: u64,
    pub peak_magnitude: String,
    #[serde(rename = "L")]
    pub steps: usize,
    #[serde(rename = "kappa_L")]
    pub inner_steps: usize,
    pub trial: usize,
    pub lifts: usize,
    pub valuation_total: u64,
    pub status: DecodeStatus,
    pub root_path: String,
    pub field_ratio: f64,
    pub ring_ratio: f64,
    /// Success with the planted vector, or (for `s > m/2`) anything but a
    /// wrong vector.
    pub correct: bool,
    pub digit_bound_ok: bool,
    pub step_bound_ok: bool,
    pub magnitude_bound_ok: bool,
}

impl TrialRecord {
    /// Trial counts as a failure of the decoder, as opposed to an expected
    /// sparsity-exceeded outcome.
    pub fn failed(&self) -> bool {
        !self.correct || !self.digit_bound_ok || !self.step_bound_ok || !self.magnitude_bound_ok
    }
}

pub fn trial_rng(seed: u64, cell: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((cell << 32) | trial as u64);
    rng
}

/// `s` distinct columns with coordinates uniform in `[-M, M] \ {0}`.
pub fn random_sparse_vector(rng: &mut impl Rng, columns: usize, s: usize, magnitude: &BigInt) -> SparseIntVector {
    let s = s.min(columns);
    let lo = -magnitude.clone();
    let hi = magnitude + BigInt::one();
    let pairs: Vec<(usize, BigInt)> = sample(rng, columns, s)
        .into_iter()
        .map(|c| {
            let v = loop {
                let v = rng.gen_bigint_range(&lo, &hi);
                if !v.is_zero() {
                    break v;
                }
            };
            (c + 1, v)
        })
        .collect();
    SparseIntVector::from_pairs(columns, pairs).expect("distinct in-range indices")
}

pub fn run_trial(matrix: &MeasurementMatrix, cell: &Cell, trial: usize, seed: u64, roots: RootStrategy) -> TrialRecord {
    let mut rng = trial_rng(seed, cell.index, trial);
    let rows = matrix.rows();
    let p = matrix.modulus().value();
    let s = cell.sparsity.resolve(rows, &mut rng);
    let x = random_sparse_vector(&mut rng, matrix.columns(), s, &cell.magnitude);
    let y = encode(matrix, &x).expect("vector length matches");
    let config = DecodeConfig { magnitude_hint: Some(cell.magnitude.clone()), roots, ..Default::default() };
    let r = decode(matrix, &y, &config).expect("measurement length matches");

    let valid = s <= rows / 2;
    let correct = if valid { r.is_success() && r.x == x } else { !r.is_success() || r.x == x };
    let true_m = x.max_abs();
    let two_m: BigInt = &true_m * 2;
    let (digit_bound_ok, step_bound_ok, magnitude_bound_ok) = if r.is_success() {
        // exact form of valuation_total <= log_p(2M): p^total <= 2M
        let pow = BigInt::from(p).pow(r.stats.valuation_total as u32);
        let digit_ok = true_m.is_zero() || ((r.stats.lifts as u64) <= r.stats.valuation_total && pow <= two_m);
        let bound = magnitude_bound(&true_m, &y.max_abs(), rows, p, matrix.max_abs_entry());
        let peak = BigInt::from(r.stats.ledger.peak_magnitude.clone());
        (digit_ok, r.stats.steps <= s, peak <= bound)
    } else {
        (true, true, true)
    };
    let root_path = r.stats.root_path.unwrap_or_else(|| roots.path_for(p));
    let report = check_bounds(
        &r.stats.ledger,
        &BoundParams { rows, p, magnitude: true_m, sparsity: s, root_path },
        DEFAULT_RATIO_CONSTANT,
    );
    TrialRecord {
        m: rows,
        p,
        magnitude: cell.magnitude.to_string(),
        s,
        field_ops: r.stats.ledger.field_ops,
        ring_ops: r.stats.ledger.ring_ops,
        peak_magnitude: r.stats.ledger.peak_magnitude.to_string(),
        steps: r.stats.steps,
        inner_steps: r.stats.inner_steps,
        trial,
        lifts: r.stats.lifts,
        valuation_total: r.stats.valuation_total,
        status: r.status,
        root_path: format!("{root_path:?}").to_lowercase(),
        field_ratio: report.field_ratio,
        ring_ratio: report.ring_ratio,
        correct,
        digit_bound_ok,
        step_bound_ok,
        magnitude_bound_ok,
    }
}

/// Builds (or reuses) one matrix per `(p, m)` pair of the grid.
pub fn build_matrices(grid: &SweepGrid) -> Result<BTreeMap<(u64, usize), MeasurementMatrix>, SweepError> {
    let mut out = BTreeMap::new();
    for &p in &grid.primes {
        let modulus = FieldModulus::new(p).map_err(SweepError::Field)?;
        for &m in &grid.rows {
            let params = MatrixParams::new(modulus, m, (p - 1) as usize, grid.slack)?;
            out.insert((p, m), build_matrix(params));
        }
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Field(crate::field::FieldError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Runs every trial of the grid; records come back in (cell, trial) order.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<TrialRecord>, SweepError> {
    let matrices = build_matrices(grid)?;
    Ok(run_sweep_with(grid, &matrices))
}

pub fn run_sweep_with(grid: &SweepGrid, matrices: &BTreeMap<(u64, usize), MeasurementMatrix>) -> Vec<TrialRecord> {
    let jobs: Vec<(Cell, usize)> =
        grid.cells().into_iter().flat_map(|c| (0..grid.trials).map(move |t| (c.clone(), t))).collect();
    let run = |(cell, t): &(Cell, usize)| {
        let mx = &matrices[&(cell.p, cell.rows)];
        run_trial(mx, cell, *t, grid.seed, grid.roots)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(run).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepSummary {
    pub trials: usize,
    pub successes: usize,
    pub sparsity_exceeded: usize,
    pub not_recoverable: usize,
    pub failures: usize,
    pub max_field_ratio: f64,
    pub max_ring_ratio: f64,
}

pub fn summarize(records: &[TrialRecord]) -> SweepSummary {
    let mut s = SweepSummary { trials: records.len(), ..Default::default() };
    for r in records {
        match r.status {
            DecodeStatus::Success => s.successes += 1,
            DecodeStatus::SparsityExceeded => s.sparsity_exceeded += 1,
            DecodeStatus::NotRecoverable => s.not_recoverable += 1,
        }
        if r.failed() {
            s.failures += 1;
        }
        s.max_field_ratio = s.max_field_ratio.max(r.field_ratio);
        s.max_ring_ratio = s.max_ring_ratio.max(r.ring_ratio);
    }
    s
}

/// Spread of the mean ring-op ratio across `m` at fixed `(p, M)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSpread {
    pub p: u64,
    pub magnitude: String,
    /// `(m, mean ratio)` in increasing `m`.
    pub means: Vec<(usize, f64)>,
    pub factor: f64,
}

pub fn ring_ratio_spread(records: &[TrialRecord]) -> Vec<RatioSpread> {
    let mut groups: BTreeMap<(u64, String), BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == DecodeStatus::Success) {
        let e = groups.entry((r.p, r.magnitude.clone())).or_default().entry(r.m).or_insert((0.0, 0));
        e.0 += r.ring_ratio;
        e.1 += 1;
    }
    groups
        .into_iter()
        .map(|((p, magnitude), by_m)| {
            let means: Vec<(usize, f64)> = by_m.into_iter().map(|(m, (sum, n))| (m, sum / n as f64)).collect();
            let hi = means.iter().map(|x| x.1).fold(f64::MIN, f64::max);
            let lo = means.iter().map(|x| x.1).fold(f64::MAX, f64::min);
            RatioSpread { p, magnitude, means, factor: hi / lo }
        })
        .collect()
}
