//! Operation counting and magnitude tracking.
//!
//! Counting convention: one tick per field add, sub, mul, neg or inverse;
//! one tick per arbitrary-precision integer call (add, sub, mul, div/rem,
//! reduction mod p). The peak magnitude is the largest `|n|` seen among the
//! operands and results of integer calls.

use std::cell::{Cell, RefCell};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Which part of the decoder the ticks belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Setup,
    Recurrence,
    RootFinding,
    LinearSolve,
    ErrorVector,
    Valuation,
    Reconstruction,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::Setup,
        Phase::Recurrence,
        Phase::RootFinding,
        Phase::LinearSolve,
        Phase::ErrorVector,
        Phase::Valuation,
        Phase::Reconstruction,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCount {
    pub field_ops: u64,
    pub ring_ops: u64,
}

/// Per-computation counters. Interior mutability keeps the counting
/// out of the algorithms' signatures; a ledger is not shared across threads.
#[derive(Debug)]
pub struct OpLedger {
    field_ops: Cell<u64>,
    ring_ops: Cell<u64>,
    peak: RefCell<BigUint>,
    phase: Cell<Phase>,
    phases: RefCell<[PhaseCount; 7]>,
}

impl Default for OpLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl OpLedger {
    pub fn new() -> Self {
        Self {
            field_ops: Cell::new(0),
            ring_ops: Cell::new(0),
            peak: RefCell::new(BigUint::zero()),
            phase: Cell::new(Phase::Setup),
            phases: RefCell::new([PhaseCount::default(); 7]),
        }
    }

    /// Switches the active phase and returns the previous one.
    pub fn set_phase(&self, phase: Phase) -> Phase {
        self.phase.replace(phase)
    }

    pub fn phase(&self) -> Phase {
        self.phase.get()
    }

    #[inline]
    pub fn tick_field(&self, n: u64) {
        self.field_ops.set(self.field_ops.get() + n);
        self.phases.borrow_mut()[self.phase.get().index()].field_ops += n;
    }

    #[inline]
    pub fn tick_ring(&self, n: u64) {
        self.ring_ops.set(self.ring_ops.get() + n);
        self.phases.borrow_mut()[self.phase.get().index()].ring_ops += n;
    }

    pub fn observe(&self, n: &BigInt) {
        let mag = n.magnitude();
        let mut peak = self.peak.borrow_mut();
        if mag > &*peak {
            *peak = mag.clone();
        }
    }

    pub fn field_ops(&self) -> u64 {
        self.field_ops.get()
    }

    pub fn ring_ops(&self) -> u64 {
        self.ring_ops.get()
    }

    pub fn peak_magnitude(&self) -> BigUint {
        self.peak.borrow().clone()
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        let phases = self.phases.borrow();
        LedgerSnapshot {
            field_ops: self.field_ops(),
            ring_ops: self.ring_ops(),
            peak_magnitude: self.peak_magnitude(),
            phases: Phase::ALL.iter().map(|&ph| (ph, phases[ph.index()])).collect(),
        }
    }
}

/// Frozen copy of a ledger, suitable for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub field_ops: u64,
    pub ring_ops: u64,
    pub peak_magnitude: BigUint,
    pub phases: Vec<(Phase, PhaseCount)>,
}

impl LedgerSnapshot {
    pub fn phase(&self, phase: Phase) -> PhaseCount {
        self.phases.iter().find(|(ph, _)| *ph == phase).map(|(_, c)| *c).unwrap_or_default()
    }
}

/// Instrumented integer arithmetic.
#[derive(Clone, Copy, Default)]
pub struct IntOps<'a> {
    ledger: Option<&'a OpLedger>,
}

impl<'a> IntOps<'a> {
    pub fn new(ledger: Option<&'a OpLedger>) -> Self {
        Self { ledger }
    }

    #[inline]
    fn record(&self, operands: &[&BigInt], result: &BigInt) {
        if let Some(l) = self.ledger {
            l.tick_ring(1);
            for o in operands {
                l.observe(o);
            }
            l.observe(result);
        }
    }

    /// Registers an input value (e.g. a measurement) with the peak tracker.
    pub fn touch(&self, n: &BigInt) {
        if let Some(l) = self.ledger {
            l.observe(n);
        }
    }

    pub fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let r = a + b;
        self.record(&[a, b], &r);
        r
    }

    pub fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let r = a - b;
        self.record(&[a, b], &r);
        r
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let r = a * b;
        self.record(&[a, b], &r);
        r
    }

    /// Floor division with remainder in `[0, d)` for positive `d`.
    pub fn div_mod_floor(&self, a: &BigInt, d: &BigInt) -> (BigInt, BigInt) {
        let (q, r) = a.div_mod_floor(d);
        self.record(&[a, d], &q);
        (q, r)
    }

    /// Division by an odd `p` with remainder in `[-(p-1)/2, (p-1)/2]`.
    pub fn div_rem_balanced(&self, a: &BigInt, p: &BigInt) -> (BigInt, BigInt) {
        let (mut q, mut r) = a.div_mod_floor(p);
        let twice: BigInt = &r << 1;
        if &twice > p {
            r -= p;
            q += 1;
        }
        self.record(&[a, p], &q);
        (q, r)
    }

    /// `a / d` for a divisor known to be exact.
    pub fn div_exact(&self, a: &BigInt, d: &BigInt) -> BigInt {
        let r = a / d;
        debug_assert!((&r * d) == *a, "inexact division");
        self.record(&[a, d], &r);
        r
    }

    pub fn is_divisible(&self, a: &BigInt, d: &BigInt) -> bool {
        let r = a % d;
        self.record(&[a, d], &r);
        r.is_zero()
    }

    pub fn reduce_mod(&self, a: &BigInt, p: u64) -> u64 {
        let pb = BigInt::from(p);
        let r = a.mod_floor(&pb);
        self.record(&[a], &r);
        r.to_u64().expect("residue fits in u64")
    }
}

/// Which root-finding route a decode took; it fixes the root term of the
/// field-op normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootPath {
    /// Horner evaluation at every nonzero residue: `m * p` per decode.
    Exhaustive,
    /// Randomized equal-degree splitting: `m^2 * sqrt(p)`.
    Split,
}

#[derive(Debug, Clone)]
pub struct BoundParams {
    pub rows: usize,
    pub p: u64,
    /// `M = max |x_j|`; values below 1 are treated as 1.
    pub magnitude: BigInt,
    pub sparsity: usize,
    pub root_path: RootPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `max(1, log_p(2M))`
    pub log_term: f64,
    pub field_normalizer: f64,
    pub ring_normalizer: f64,
    pub field_ratio: f64,
    pub ring_ratio: f64,
    pub constant: f64,
    pub field_exceeded: bool,
    pub ring_exceeded: bool,
    pub root_path: RootPath,
}

pub const DEFAULT_RATIO_CONSTANT: f64 = 64.0;

/// `log_p(n)` for an arbitrary-precision `n >= 1`.
pub fn log_base(n: &BigInt, p: u64) -> f64 {
    if n.sign() != Sign::Plus {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    // keep 60 significant bits, account for the rest in the exponent
    let shift = bits.saturating_sub(60);
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    (top.ln() + shift as f64 * std::f64::consts::LN_2) / (p as f64).ln()
}

/// Normalized operation counts for a completed decode.
///
/// Field ops are divided by `m^3 * max(1, log_p 2M)` plus the root term of
/// the route taken; ring ops by `m^2 * max(1, log_p 2M)`.
pub fn check_bounds(ledger: &LedgerSnapshot, params: &BoundParams, constant: f64) -> BoundReport {
    let m = params.rows as f64;
    let p = params.p as f64;
    let two_m: BigInt = params.magnitude.abs().max(BigInt::from(1)) * 2;
    let log_term = log_base(&two_m, params.p).max(1.0);
    let root_term = match params.root_path {
        RootPath::Exhaustive => m * p,
        RootPath::Split => m * m * p.sqrt(),
    };
    let field_normalizer = m.powi(3) * log_term + root_term;
    let ring_normalizer = m * m * log_term;
    let field_ratio = ledger.field_ops as f64 / field_normalizer;
    let ring_ratio = ledger.ring_ops as f64 / ring_normalizer;
    BoundReport {
        log_term,
        field_normalizer,
        ring_normalizer,
        field_ratio,
        ring_ratio,
        constant,
        field_exceeded: field_ratio > constant,
        ring_exceeded: ring_ratio > constant,
        root_path: params.root_path,
    }
}

/// Bound on every integer touched during a decode:
/// `max{M p, max_l |y_l| + m * phi}` where `phi = p^(1 - 1/m)`, or the actual
/// largest matrix entry if some column exceeded that.
pub fn magnitude_bound(
    magnitude: &BigInt,
    max_measurement: &BigInt,
    rows: usize,
    p: u64,
    max_abs_entry: u64,
) -> BigInt {
    let phi = (p as f64).powf(1.0 - 1.0 / rows as f64).max(max_abs_entry as f64);
    let slack = BigInt::from((rows as f64 * phi).floor() as u128);
    let a = magnitude.abs() * BigInt::from(p);
    let b = max_measurement.abs() + slack;
    a.max(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_split_the_totals() {
        let l = OpLedger::new();
        l.set_phase(Phase::Recurrence);
        l.tick_field(5);
        l.set_phase(Phase::ErrorVector);
        l.tick_field(2);
        l.tick_ring(3);
        let s = l.snapshot();
        assert_eq!(s.field_ops, 7);
        assert_eq!(s.ring_ops, 3);
        assert_eq!(s.phase(Phase::Recurrence).field_ops, 5);
        assert_eq!(s.phase(Phase::ErrorVector), PhaseCount { field_ops: 2, ring_ops: 3 });
    }

    #[test]
    fn int_ops_track_peak() {
        let l = OpLedger::new();
        let z = IntOps::new(Some(&l));
        let a = BigInt::from(-300);
        let b = BigInt::from(7);
        let c = z.mul(&a, &b);
        assert_eq!(c, BigInt::from(-2100));
        let (q, r) = z.div_rem_balanced(&BigInt::from(12), &b);
        assert_eq!((q, r), (BigInt::from(2), BigInt::from(-2)));
        let (q, r) = z.div_rem_balanced(&BigInt::from(-11), &b);
        assert_eq!((q, r), (BigInt::from(-2), BigInt::from(3)));
        assert_eq!(l.peak_magnitude(), BigUint::from(2100u32));
        assert_eq!(l.ring_ops(), 3);
    }

    #[test]
    fn log_base_matches_f64_for_small_values() {
        assert!((log_base(&BigInt::from(49), 7) - 2.0).abs() < 1e-12);
        let big = BigInt::from(10).pow(200);
        assert!((log_base(&big, 10) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn zero_vector_ratios_are_tiny() {
        let l = OpLedger::new();
        l.tick_ring(4);
        let params =
            BoundParams { rows: 4, p: 7, magnitude: BigInt::from(0), sparsity: 0, root_path: RootPath::Exhaustive };
        let r = check_bounds(&l.snapshot(), &params, DEFAULT_RATIO_CONSTANT);
        assert_eq!(r.log_term, 1.0);
        assert!(r.ring_ratio < 1.0 && r.field_ratio == 0.0);
        assert!(!r.field_exceeded && !r.ring_exceeded);
    }

    #[test]
    fn magnitude_bound_takes_larger_branch() {
        // p = 7, m = 4: 7^(3/4) = 4.30..., m * phi = 17.2
        let b = magnitude_bound(&BigInt::from(3), &BigInt::from(9), 4, 7, 3);
        assert_eq!(b, BigInt::from(26));
        let b = magnitude_bound(&BigInt::from(10), &BigInt::from(9), 4, 7, 3);
        assert_eq!(b, BigInt::from(70));
    }
}
