//! The decoder: recovers a sparse integer vector `x` from `y = Phi x`.
//!
//! Outline:
//!
//! 1. Strip the common `p`-adic valuation `alpha` of `y` (it equals that of
//!    `x`). A zero measurement decodes to the zero vector.
//! 2. Main step: the residual sequence reduced mod `p` satisfies a linear
//!    recurrence whose minimal characteristic polynomial divides
//!    `prod_{j in I} (t - j)`. Its roots are support indices and are added to
//!    the current support.
//! 3. Inner procedure: while the residual mod `p` lies in the span of the
//!    current support's columns, solve for the coefficients `xi_j`, record
//!    their signed representatives as `p`-adic digits, form the integer error
//!    `e = residual - Phi xi`, and replace the residual by `e / p^gamma`
//!    where `gamma >= 1` is the full valuation of `e`. An exact zero error
//!    ends the decode; an inconsistent solve hands back to the main step.
//!
//! Every coordinate is then the signed-digit sum
//! `x_j = p^alpha * sum_k xi_j^(k) p^(e_(k-1))`.
//!
//! The error vector is divided by `p` on the fly (balanced remainder carried
//! term by term), so the full difference `residual - Phi xi` is never formed.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldModulus, SignedRep};
use crate::linsolve::{solve_coefficients_with, SolveMethod};
use crate::matrix::{Measurement, MeasurementMatrix, SparseIntVector};
use crate::metrics::{IntOps, LedgerSnapshot, OpLedger, Phase, RootPath};
use crate::recurrence::berlekamp_massey;
use crate::rootfind::{find_roots, splits_completely, RootStrategy};

/// Digit cap used when neither `max_digits` nor a magnitude hint is given.
pub const DEFAULT_MAX_DIGITS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("measurement has {found} values, matrix has {expected} rows")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Default)]
pub struct DecodeConfig {
    /// Hard cap on extracted digits (inner iterations).
    pub max_digits: Option<usize>,
    /// Caller-supplied bound `M >= max |x_j|`; sets the digit cap to
    /// `ceil(log_p(2M)) + 1` when `max_digits` is absent.
    pub magnitude_hint: Option<BigInt>,
    pub roots: RootStrategy,
    pub solver: SolveMethod,
    /// Record a step-by-step [`TraceEvent`] log.
    pub trace: bool,
}

impl DecodeConfig {
    pub fn digit_cap(&self, p: FieldModulus) -> usize {
        if let Some(cap) = self.max_digits {
            return cap;
        }
        match &self.magnitude_hint {
            Some(m) => ceil_log(&(m * 2u32), p.value()) + 1,
            None => DEFAULT_MAX_DIGITS,
        }
    }
}

/// Smallest `e` with `p^e >= n` (0 for `n <= 1`).
pub fn ceil_log(n: &BigInt, p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut pow = BigInt::one();
    let mut e = 0;
    while &pow < n {
        pow *= &pb;
        e += 1;
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeStatus {
    Success,
    NotRecoverable,
    SparsityExceeded,
}

impl DecodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeStatus::Success => "success",
            DecodeStatus::NotRecoverable => "not-recoverable",
            DecodeStatus::SparsityExceeded => "sparsity-exceeded",
        }
    }
}

/// A terminal, non-success outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Halt {
    pub status: DecodeStatus,
    pub reason: String,
}

impl Halt {
    fn new(status: DecodeStatus, reason: impl Into<String>) -> Self {
        Self { status, reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripped {
    pub values: Measurement,
    pub alpha: u32,
    pub is_zero: bool,
}

/// Largest `alpha` with `p^alpha` dividing every `y_l`, and `y / p^alpha`.
pub fn strip_p_valuation(y: &Measurement, p: FieldModulus) -> Stripped {
    strip_counted(y, p, &IntOps::new(None))
}

fn strip_counted(y: &Measurement, p: FieldModulus, ints: &IntOps) -> Stripped {
    if y.is_zero() {
        return Stripped { values: y.clone(), alpha: 0, is_zero: true };
    }
    let pb = p.as_bigint();
    let mut values = y.values().to_vec();
    let mut alpha = 0;
    while values.iter().all(|v| v.is_zero() || ints.is_divisible(v, &pb)) {
        for v in values.iter_mut().filter(|v| !v.is_zero()) {
            *v = ints.div_exact(v, &pb);
        }
        alpha += 1;
    }
    Stripped { values: Measurement::new(values), alpha, is_zero: false }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digit {
    pub digit: SignedRep,
    /// Cumulative valuation `gamma_1 + ... + gamma_(k-1)` at which the digit sits.
    pub exponent: u64,
}

/// Signed `p`-adic digits per support index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PadicAccumulator {
    alpha: u32,
    digits: BTreeMap<usize, Vec<Digit>>,
}

impl PadicAccumulator {
    pub fn new(alpha: u32) -> Self {
        Self { alpha, digits: BTreeMap::new() }
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// Appends a digit; exponents must strictly increase per index.
    pub fn push(&mut self, index: usize, digit: SignedRep, exponent: u64) {
        let entry = self.digits.entry(index).or_default();
        assert!(entry.last().is_none_or(|d| d.exponent < exponent), "digit exponents must increase");
        entry.push(Digit { digit, exponent });
    }

    pub fn digits(&self, index: usize) -> &[Digit] {
        self.digits.get(&index).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.digits.keys().copied()
    }
}

/// Exact integers from the accumulated digits; indices summing to zero are dropped.
pub fn reconstruct(acc: &PadicAccumulator, p: FieldModulus, length: usize) -> SparseIntVector {
    reconstruct_counted(acc, p, length, &IntOps::new(None))
}

fn reconstruct_counted(acc: &PadicAccumulator, p: FieldModulus, length: usize, ints: &IntOps) -> SparseIntVector {
    let pb = p.as_bigint();
    let mut scale = BigInt::one();
    for _ in 0..acc.alpha {
        scale = ints.mul(&scale, &pb);
    }
    let mut pairs = Vec::new();
    for (&j, digits) in &acc.digits {
        let mut sum = BigInt::zero();
        let mut power = BigInt::one();
        let mut at = 0u64;
        for d in digits {
            while at < d.exponent {
                power = ints.mul(&power, &pb);
                at += 1;
            }
            if d.digit.0 != 0 {
                let term = ints.mul(&BigInt::from(d.digit), &power);
                sum = ints.add(&sum, &term);
            }
        }
        if !sum.is_zero() {
            let xj = if acc.alpha > 0 { ints.mul(&sum, &scale) } else { sum };
            pairs.push((j, xj));
        }
    }
    SparseIntVector::from_pairs(length, pairs).expect("support indices come from valid columns")
}

/// Mutable decoder state between steps.
#[derive(Debug, Clone)]
pub struct RecoveryState {
    /// Current support `I_nu`, sorted.
    pub support: Vec<usize>,
    /// `y^(kappa)`: what remains to be explained, divided by `p^exponent`.
    pub residual: Vec<BigInt>,
    pub accumulator: PadicAccumulator,
    /// Main steps taken (`L`).
    pub step: usize,
    /// Digits extracted so far (`kappa`).
    pub inner_step: usize,
    /// Divisions of the residual by `p^gamma`.
    pub lifts: usize,
    /// `gamma_1 + ... + gamma_kappa`.
    pub exponent: u64,
    residue_cache: Option<Vec<FieldElement>>,
}

impl RecoveryState {
    pub fn new(stripped: &Stripped) -> Self {
        Self {
            support: Vec::new(),
            residual: stripped.values.values().to_vec(),
            accumulator: PadicAccumulator::new(stripped.alpha),
            step: 0,
            inner_step: 0,
            lifts: 0,
            exponent: 0,
            residue_cache: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerOutcome {
    /// The error vector vanished: the vector is fully determined.
    Finished,
    /// The residual was replaced by `e / p^gamma`.
    Lifted { gamma: u64 },
    /// The residual mod `p` is outside the current support's span.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Strip {
        alpha: u32,
    },
    MainStep {
        step: usize,
        residual_mod_p: Vec<u64>,
        recurrence: Vec<u64>,
        roots: Vec<u64>,
        new_indices: Vec<usize>,
        support: Vec<usize>,
    },
    Digits {
        inner_step: usize,
        exponent: u64,
        digits: Vec<(usize, i64)>,
    },
    Lift {
        gamma: u64,
        residual: Vec<String>,
    },
    Inconsistent {
        row: usize,
    },
    Halt {
        status: DecodeStatus,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeStats {
    /// Main steps `L`.
    pub steps: usize,
    /// Digits extracted, cumulative over main steps (`kappa_L`).
    pub inner_steps: usize,
    /// Residual divisions; at most `log_p(2M)` on valid inputs.
    pub lifts: usize,
    /// `gamma_1 + ... + gamma_kappa`; below `log_p(2M)` on valid inputs.
    pub valuation_total: u64,
    pub alpha: u32,
    pub root_path: Option<RootPath>,
    pub ledger: LedgerSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// The recovered vector; the zero vector unless `status` is success.
    pub x: SparseIntVector,
    pub status: DecodeStatus,
    pub reason: Option<String>,
    pub stats: DecodeStats,
    pub trace: Vec<TraceEvent>,
}

impl DecodeResult {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }
}

/// One decode's worth of context: the matrix, configuration and ledger.
pub struct Decoder<'m> {
    matrix: &'m MeasurementMatrix,
    config: DecodeConfig,
    ledger: OpLedger,
    root_path: std::cell::Cell<Option<RootPath>>,
    trace: RefCell<Vec<TraceEvent>>,
}

impl<'m> Decoder<'m> {
    pub fn new(matrix: &'m MeasurementMatrix, config: DecodeConfig) -> Self {
        Self {
            matrix,
            config,
            ledger: OpLedger::new(),
            root_path: std::cell::Cell::new(None),
            trace: RefCell::new(Vec::new()),
        }
    }

    pub fn ledger(&self) -> &OpLedger {
        &self.ledger
    }

    pub fn field(&self) -> Field<'_> {
        Field::with_ledger(self.matrix.modulus(), &self.ledger)
    }

    pub fn ints(&self) -> IntOps<'_> {
        IntOps::new(Some(&self.ledger))
    }

    fn log(&self, ev: impl FnOnce() -> TraceEvent) {
        if self.config.trace {
            self.trace.borrow_mut().push(ev());
        }
    }

    fn residue(&self, state: &mut RecoveryState) -> Vec<FieldElement> {
        if let Some(c) = &state.residue_cache {
            return c.clone();
        }
        let ints = self.ints();
        let p = self.matrix.modulus();
        let r: Vec<FieldElement> = state.residual.iter().map(|v| p.elem(ints.reduce_mod(v, p.value()))).collect();
        state.residue_cache = Some(r.clone());
        r
    }

    /// Strips the valuation and registers `y` with the peak tracker.
    pub fn start(&self, y: &Measurement) -> Result<Stripped, DecodeError> {
        if y.len() != self.matrix.rows() {
            return Err(DecodeError::LengthMismatch { expected: self.matrix.rows(), found: y.len() });
        }
        self.ledger.set_phase(Phase::Setup);
        let ints = self.ints();
        for v in y.values() {
            ints.touch(v);
        }
        let stripped = strip_counted(y, self.matrix.modulus(), &ints);
        self.log(|| TraceEvent::Strip { alpha: stripped.alpha });
        Ok(stripped)
    }

    /// Grows the support by the roots of the residual's minimal recurrence.
    /// Returns the newly added indices.
    pub fn main_step(&self, state: &mut RecoveryState) -> Result<Vec<usize>, Halt> {
        let rows = self.matrix.rows();
        let max_order = rows / 2;
        let field = self.field();
        self.ledger.set_phase(Phase::Recurrence);
        let seq = self.residue(state);
        let rec = berlekamp_massey(&seq, max_order, &field).expect("m >= 2");
        if rec.order() == 0 {
            return Err(Halt::new(DecodeStatus::NotRecoverable, "residual vanishes mod p"));
        }
        if rec.overflow() {
            return Err(Halt::new(
                DecodeStatus::SparsityExceeded,
                format!("recurrence order {} exceeds m/2 = {}", rec.order(), max_order),
            ));
        }
        // with 2 * order >= m the window cannot certify the recurrence, so a
        // failure below is most likely a sparsity violation
        let uncertified = 2 * rec.order() >= rows;
        let fail = |reason: String| {
            let status = if uncertified { DecodeStatus::SparsityExceeded } else { DecodeStatus::NotRecoverable };
            Halt::new(status, reason)
        };

        self.ledger.set_phase(Phase::RootFinding);
        let poly = rec.poly();
        let (roots, path) = find_roots(&poly, &self.config.roots, &field);
        self.root_path.set(Some(path));
        if !splits_completely(&poly, &roots) {
            return Err(fail(format!(
                "locator polynomial of degree {} has {} distinct nonzero roots",
                rec.order(),
                roots.len()
            )));
        }
        let columns = self.matrix.columns();
        let indices: Vec<usize> = roots.iter().map(|r| r.value() as usize).collect();
        if let Some(bad) = indices.iter().find(|&&j| j > columns) {
            return Err(fail(format!("root {bad} is not a column index (columns = {columns})")));
        }
        let new: Vec<usize> = indices.iter().copied().filter(|j| state.support.binary_search(j).is_err()).collect();
        if new.is_empty() {
            return Err(fail("main step found no new support index".into()));
        }
        state.support.extend(&new);
        state.support.sort_unstable();
        state.step += 1;
        self.log(|| TraceEvent::MainStep {
            step: state.step,
            residual_mod_p: seq.iter().map(|e| e.value()).collect(),
            recurrence: rec.coefficients().iter().map(|e| e.value()).collect(),
            roots: indices.iter().map(|&j| j as u64).collect(),
            new_indices: new.clone(),
            support: state.support.clone(),
        });
        if state.support.len() > max_order {
            return Err(Halt::new(
                DecodeStatus::SparsityExceeded,
                format!("support grew to {} > m/2 = {}", state.support.len(), max_order),
            ));
        }
        Ok(new)
    }

    /// One iteration of digit extraction over the current support.
    pub fn inner_procedure(&self, state: &mut RecoveryState) -> Result<InnerOutcome, Halt> {
        assert!(!state.support.is_empty(), "inner procedure needs a support");
        let field = self.field();
        let ints = self.ints();
        let p = self.matrix.modulus();
        let pb = p.as_bigint();

        self.ledger.set_phase(Phase::LinearSolve);
        let seq = self.residue(state);
        let solve = solve_coefficients_with(self.matrix, &state.support, &seq, &field, self.config.solver)
            .map_err(|e| Halt::new(DecodeStatus::NotRecoverable, format!("linear solve failed: {e}")))?;
        if !solve.consistent {
            let row = solve.first_inconsistent_row.unwrap_or_default();
            self.log(|| TraceEvent::Inconsistent { row });
            return Ok(InnerOutcome::Inconsistent);
        }

        state.inner_step += 1;
        let cap = self.config.digit_cap(p);
        if state.inner_step > cap {
            return Err(Halt::new(DecodeStatus::NotRecoverable, format!("digit cap of {cap} exceeded")));
        }
        let digits: Vec<(usize, SignedRep)> =
            state.support.iter().copied().zip(solve.coefficients.iter().map(|c| c.signed_rep())).collect();
        for &(j, d) in &digits {
            state.accumulator.push(j, d, state.exponent);
        }
        self.log(|| TraceEvent::Digits {
            inner_step: state.inner_step,
            exponent: state.exponent,
            digits: digits.iter().map(|&(j, d)| (j, d.0)).collect(),
        });

        // e / p, row by row, carrying a balanced remainder
        self.ledger.set_phase(Phase::ErrorVector);
        let digit_ints: Vec<(usize, BigInt)> =
            digits.iter().filter(|(_, d)| d.0 != 0).map(|&(j, d)| (j, BigInt::from(d))).collect();
        let mut quotient = Vec::with_capacity(state.residual.len());
        for (row, y) in state.residual.iter().enumerate() {
            let (mut q, mut r) = ints.div_rem_balanced(y, &pb);
            for (j, d) in &digit_ints {
                let term = ints.mul(d, &BigInt::from(self.matrix.entry(row, *j)));
                let t = ints.sub(&r, &term);
                let (dq, rr) = ints.div_rem_balanced(&t, &pb);
                q = ints.add(&q, &dq);
                r = rr;
            }
            if !r.is_zero() {
                return Err(Halt::new(
                    DecodeStatus::NotRecoverable,
                    format!("error vector not divisible by p at row {row} after a consistent solve"),
                ));
            }
            quotient.push(q);
        }
        if quotient.iter().all(Zero::is_zero) {
            return Ok(InnerOutcome::Finished);
        }

        self.ledger.set_phase(Phase::Valuation);
        let mut gamma = 1u64;
        while quotient.iter().all(|v| v.is_zero() || ints.is_divisible(v, &pb)) {
            for v in quotient.iter_mut().filter(|v| !v.is_zero()) {
                *v = ints.div_exact(v, &pb);
            }
            gamma += 1;
        }
        state.residual = quotient;
        state.residue_cache = None;
        state.exponent += gamma;
        state.lifts += 1;
        self.log(|| TraceEvent::Lift { gamma, residual: state.residual.iter().map(|v| v.to_string()).collect() });
        Ok(InnerOutcome::Lifted { gamma })
    }

    fn finish(
        &self,
        state: Option<&RecoveryState>,
        alpha: u32,
        x: SparseIntVector,
        halt: Option<Halt>,
    ) -> DecodeResult {
        if let Some(h) = &halt {
            self.log(|| TraceEvent::Halt { status: h.status, reason: h.reason.clone() });
        }
        let stats = DecodeStats {
            steps: state.map_or(0, |s| s.step),
            inner_steps: state.map_or(0, |s| s.inner_step),
            lifts: state.map_or(0, |s| s.lifts),
            valuation_total: state.map_or(0, |s| s.exponent),
            alpha,
            root_path: self.root_path.get(),
            ledger: self.ledger.snapshot(),
        };
        let (status, reason) = match halt {
            None => (DecodeStatus::Success, None),
            Some(h) => (h.status, Some(h.reason)),
        };
        DecodeResult { x, status, reason, stats, trace: self.trace.take() }
    }

    /// Runs the whole decode.
    pub fn run(self, y: &Measurement) -> Result<DecodeResult, DecodeError> {
        let columns = self.matrix.columns();
        let stripped = self.start(y)?;
        if stripped.is_zero {
            return Ok(self.finish(None, 0, SparseIntVector::zero(columns), None));
        }
        let alpha = stripped.alpha;
        let mut state = RecoveryState::new(&stripped);
        let mut need_main = true;
        loop {
            if need_main {
                if let Err(h) = self.main_step(&mut state) {
                    return Ok(self.finish(Some(&state), alpha, SparseIntVector::zero(columns), Some(h)));
                }
            }
            match self.inner_procedure(&mut state) {
                Ok(InnerOutcome::Finished) => break,
                Ok(InnerOutcome::Lifted { .. }) => need_main = false,
                Ok(InnerOutcome::Inconsistent) if need_main => {
                    let h = Halt::new(DecodeStatus::NotRecoverable, "solve inconsistent right after a main step");
                    return Ok(self.finish(Some(&state), alpha, SparseIntVector::zero(columns), Some(h)));
                }
                Ok(InnerOutcome::Inconsistent) => need_main = true,
                Err(h) => return Ok(self.finish(Some(&state), alpha, SparseIntVector::zero(columns), Some(h))),
            }
        }
        self.ledger.set_phase(Phase::Reconstruction);
        let x = reconstruct_counted(&state.accumulator, self.matrix.modulus(), columns, &self.ints());
        Ok(self.finish(Some(&state), alpha, x, None))
    }
}

/// Decodes `y` against `matrix` with a fresh ledger.
pub fn decode(matrix: &MeasurementMatrix, y: &Measurement, config: &DecodeConfig) -> Result<DecodeResult, DecodeError> {
    Decoder::new(matrix, config.clone()).run(y)
}
