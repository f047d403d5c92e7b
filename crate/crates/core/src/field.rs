//! Prime-field arithmetic and the bridge between `F_p` and the integers.
//!
//! Residues are stored canonically in `[0, p)`. The signed representative in
//! `[-(p-1)/2, (p-1)/2]` is only produced when a value crosses back into `Z`.
//!
//! Two flavours of arithmetic are offered. [`FieldElement`] implements the
//! usual operator traits plus `checked_*` variants that report a modulus
//! mismatch instead of panicking. [`Field`] wraps a modulus together with an
//! optional [`OpLedger`] and is what the decoding algorithms use, so every
//! operation they perform is counted.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::OpLedger;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("modulus must be an odd prime, got {0}")]
    EvenModulus(u64),
    #[error("modulus {0} exceeds the supported range (p < 2^64)")]
    TooLarge(String),
    #[error("operands belong to different fields (p = {left} and p = {right})")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
}

/// An odd prime `p < 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldModulus {
    p: u64,
}

impl FieldModulus {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p.to_string()));
        }
        if p == 2 {
            return Err(FieldError::EvenModulus(p));
        }
        Ok(Self { p })
    }

    /// Accepts an arbitrary-precision candidate; anything `>= 2^64` is rejected.
    pub fn from_bigint(p: &BigInt) -> Result<Self, FieldError> {
        match p.to_u64() {
            Some(v) => Self::new(v),
            None if p.is_negative() || p.is_zero() => Err(FieldError::NotPrime(p.to_string())),
            None => Err(FieldError::TooLarge(p.to_string())),
        }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.p
    }

    /// `(p - 1) / 2`, the largest magnitude of a signed representative.
    #[inline]
    pub fn half(&self) -> u64 {
        (self.p - 1) / 2
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement { value: v % self.p, p: self.p }
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, p: self.p }
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        FieldElement { value: 1, p: self.p }
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        let r = (n as i128).rem_euclid(self.p as i128) as u64;
        FieldElement { value: r, p: self.p }
    }

    /// Canonical residue of an arbitrary integer.
    pub fn reduce(&self, n: &BigInt) -> FieldElement {
        let pb = BigInt::from(self.p);
        let mut r = n % &pb;
        if r.is_negative() {
            r += &pb;
        }
        FieldElement { value: r.to_u64().expect("residue below p"), p: self.p }
    }

    pub fn as_biguint(&self) -> BigUint {
        BigUint::from(self.p)
    }

    pub fn as_bigint(&self) -> BigInt {
        BigInt::from(self.p)
    }
}

impl TryFrom<u64> for FieldModulus {
    type Error = FieldError;
    fn try_from(p: u64) -> Result<Self, Self::Error> {
        Self::new(p)
    }
}

impl From<FieldModulus> for u64 {
    fn from(m: FieldModulus) -> u64 {
        m.p
    }
}

impl fmt::Display for FieldModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// A residue class modulo `p`, kept in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    p: u64,
}

/// The integer in `[-(p-1)/2, (p-1)/2]` congruent to a residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedRep(pub i64);

impl SignedRep {
    #[inline]
    pub fn value(self) -> i64 {
        self.0
    }
}

impl From<SignedRep> for BigInt {
    fn from(s: SignedRep) -> BigInt {
        BigInt::from(s.0)
    }
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Zero of the same field.
    #[inline]
    pub fn zero_like(self) -> Self {
        Self { value: 0, p: self.p }
    }

    pub fn signed_rep(self) -> SignedRep {
        let half = (self.p - 1) / 2;
        if self.value > half {
            SignedRep(-((self.p - self.value) as i64))
        } else {
            SignedRep(self.value as i64)
        }
    }

    fn same_field(self, rhs: Self) -> Result<(), FieldError> {
        if self.p == rhs.p {
            Ok(())
        } else {
            Err(FieldError::ModulusMismatch { left: self.p, right: rhs.p })
        }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(rhs)?;
        Ok(Self { value: add_mod(self.value, rhs.value, self.p), p: self.p })
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(rhs)?;
        Ok(Self { value: sub_mod(self.value, rhs.value, self.p), p: self.p })
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(rhs)?;
        Ok(Self { value: mul_mod(self.value, rhs.value, self.p), p: self.p })
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        if self.value == 0 {
            return Err(FieldError::DivisionByZero(self.p));
        }
        Ok(Self { value: inv_mod(self.value, self.p), p: self.p })
    }

    pub fn pow(self, e: u64) -> Self {
        Self { value: pow_mod(self.value, e, self.p), p: self.p }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! impl_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: Self) -> Self {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

impl_op!(Add, add, checked_add);
impl_op!(Sub, sub, checked_sub);
impl_op!(Mul, mul, checked_mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        Self { value: sub_mod(0, self.value, self.p), p: self.p }
    }
}

/// Arithmetic context: a modulus plus an optional op ledger.
///
/// Every method ticks the field-op counter once (adds, muls and inverses are
/// weighted equally). `pow` ticks once per multiplication it performs.
#[derive(Clone, Copy)]
pub struct Field<'a> {
    modulus: FieldModulus,
    ledger: Option<&'a OpLedger>,
}

impl<'a> Field<'a> {
    pub fn new(modulus: FieldModulus) -> Self {
        Self { modulus, ledger: None }
    }

    pub fn with_ledger(modulus: FieldModulus, ledger: &'a OpLedger) -> Self {
        Self { modulus, ledger: Some(ledger) }
    }

    #[inline]
    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.modulus.p
    }

    #[inline]
    pub fn ledger(&self) -> Option<&'a OpLedger> {
        self.ledger
    }

    #[inline]
    fn tick(&self, n: u64) {
        if let Some(l) = self.ledger {
            l.tick_field(n);
        }
    }

    #[inline]
    fn check(&self, a: FieldElement) {
        debug_assert_eq!(a.p, self.modulus.p, "element from a different field");
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        self.modulus.zero()
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        self.modulus.one()
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FieldElement {
        self.modulus.elem(v)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        self.tick(1);
        FieldElement { value: add_mod(a.value, b.value, self.modulus.p), p: self.modulus.p }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        self.tick(1);
        FieldElement { value: sub_mod(a.value, b.value, self.modulus.p), p: self.modulus.p }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        self.tick(1);
        FieldElement { value: mul_mod(a.value, b.value, self.modulus.p), p: self.modulus.p }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.check(a);
        self.tick(1);
        -a
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a);
        self.tick(1);
        a.inv()
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        self.check(a);
        let p = self.modulus.p;
        let mut base = a.value;
        let mut acc = 1 % p;
        let mut muls = 0;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, base, p);
                muls += 1;
            }
            e >>= 1;
            if e > 0 {
                base = mul_mod(base, base, p);
                muls += 1;
            }
        }
        self.tick(muls);
        FieldElement { value: acc, p }
    }
}

#[inline]
fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= p {
        s.wrapping_sub(p)
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a.wrapping_sub(b).wrapping_add(p)
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // extended Euclid on i128 to stay clear of overflow near 2^64
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f7() -> FieldModulus {
        FieldModulus::new(7).unwrap()
    }

    #[test]
    fn basic_ops_mod_7() {
        let p = f7();
        assert_eq!((p.elem(3) + p.elem(5)).value(), 1);
        assert_eq!((p.elem(3) * p.elem(5)).value(), 1);
        for x in 0..7 {
            assert!((p.zero() * p.elem(x)).is_zero());
        }
        assert_eq!((-p.elem(3)).value(), 4);
        assert_eq!((p.elem(2) - p.elem(5)).value(), 4);
    }

    #[test]
    fn inverses_mod_7() {
        let p = f7();
        assert_eq!(p.elem(1).inv().unwrap().value(), 1);
        assert_eq!(p.elem(3).inv().unwrap().value(), 5);
        assert_eq!(p.zero().inv(), Err(FieldError::DivisionByZero(7)));
    }

    #[test]
    fn powers_mod_7() {
        let p = f7();
        assert_eq!(p.elem(2).pow(3).value(), 1);
        assert_eq!(p.elem(5).pow(0).value(), 1);
        assert_eq!(p.elem(3).pow(6).value(), 1);
        let field = Field::new(p);
        assert_eq!(field.pow(p.elem(2), 3).value(), 1);
        assert_eq!(field.pow(p.elem(5), 0).value(), 1);
    }

    #[test]
    fn signed_reps_mod_7() {
        let p = f7();
        assert_eq!(p.elem(5).signed_rep(), SignedRep(-2));
        assert_eq!(p.elem(3).signed_rep(), SignedRep(3));
        assert_eq!(p.elem(0).signed_rep(), SignedRep(0));
    }

    #[test]
    fn reduce_mod_7() {
        let p = f7();
        assert_eq!(p.reduce(&BigInt::from(-9)).value(), 5);
        assert_eq!(p.reduce(&BigInt::from(343)).value(), 0);
        assert_eq!(p.reduce(&BigInt::from(10)).value(), 3);
        let huge = BigInt::from(7).pow(40) * BigInt::from(-1) + BigInt::from(2);
        assert_eq!(p.reduce(&huge).value(), 2);
    }

    #[test]
    fn modulus_validation() {
        assert!(matches!(FieldModulus::new(4), Err(FieldError::NotPrime(_))));
        assert!(matches!(FieldModulus::new(2), Err(FieldError::EvenModulus(2))));
        assert!(matches!(FieldModulus::new(9), Err(FieldError::NotPrime(_))));
        assert!(matches!(FieldModulus::new(1), Err(FieldError::NotPrime(_))));
        assert!(FieldModulus::new(65537).is_ok());
        assert!(FieldModulus::new(18446744073709551557).is_ok());
        let big = BigInt::from(2).pow(64) + 13;
        assert!(matches!(FieldModulus::from_bigint(&big), Err(FieldError::TooLarge(_))));
    }

    #[test]
    fn mismatched_moduli_are_rejected() {
        let a = f7().elem(3);
        let b = FieldModulus::new(11).unwrap().elem(3);
        assert_eq!(a.checked_add(b), Err(FieldError::ModulusMismatch { left: 7, right: 11 }));
        assert!(a.checked_mul(b).is_err());
        assert!(a.checked_sub(b).is_err());
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), trial(n), "n = {n}");
        }
        // strong pseudoprimes to several small bases
        for n in [3215031751u64, 3825123056546413051, 341550071728321] {
            assert!(!is_prime_u64(n));
        }
    }

    #[test]
    fn fermat_exhaustive_small_primes() {
        for p in (3..=101u64).filter(|&p| is_prime_u64(p)) {
            let m = FieldModulus::new(p).unwrap();
            for a in 1..p {
                assert_eq!(m.elem(a).pow(p - 1).value(), 1, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn signed_rep_round_trip_exhaustive() {
        for p in [3u64, 5, 7, 101, 1009] {
            let m = FieldModulus::new(p).unwrap();
            for a in 0..p {
                let s = m.elem(a).signed_rep();
                assert!(s.0.unsigned_abs() <= m.half());
                assert_eq!(m.reduce(&BigInt::from(s.0)).value(), a);
            }
        }
    }

    #[test]
    fn ledger_counts_field_ops() {
        let ledger = OpLedger::new();
        let field = Field::with_ledger(f7(), &ledger);
        let a = field.add(field.elem(3), field.elem(5));
        let _ = field.mul(a, a);
        let _ = field.inv(a).unwrap();
        assert_eq!(ledger.field_ops(), 3);
    }

    const PRIMES: [u64; 5] = [3, 7, 101, 65537, 18446744073709551557];

    proptest! {
        #[test]
        fn field_axioms(pi in 0usize..PRIMES.len(), a: u64, b: u64, c: u64) {
            let m = FieldModulus::new(PRIMES[pi]).unwrap();
            let (a, b, c) = (m.elem(a), m.elem(b), m.elem(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + (-a), m.zero());
            prop_assert_eq!(a - b, a + (-b));
            if !a.is_zero() {
                prop_assert_eq!(a * a.inv().unwrap(), m.one());
            }
        }

        #[test]
        fn reduce_inverts_signed_rep(pi in 0usize..PRIMES.len(), a: u64) {
            let m = FieldModulus::new(PRIMES[pi]).unwrap();
            let e = m.elem(a);
            prop_assert_eq!(m.reduce(&BigInt::from(e.signed_rep())), e);
        }
    }
}
