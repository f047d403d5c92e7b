//! Minimal linear recurrences over `F_p` (classical Berlekamp-Massey).

use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::rootfind::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecurrenceError {
    #[error("cannot fit a recurrence to an empty sequence")]
    EmptySequence,
}

/// Characteristic polynomial `p_0 + p_1 t + ... + p_s t^s` (`p_s = 1`) of the
/// shortest linear recursion generating a sequence, stored low degree first.
///
/// It satisfies `sum_l p_l y_{a+l} = 0` for every shift `a` that fits inside
/// the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalRecurrence {
    coefficients: Vec<FieldElement>,
    /// Set when the order exceeds the caller's `max_order`; the window is
    /// then too short to certify the recurrence.
    overflow: bool,
}

impl MinimalRecurrence {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[FieldElement] {
        &self.coefficients
    }

    pub fn overflow(&self) -> bool {
        self.overflow
    }

    pub fn poly(&self) -> Poly {
        Poly::from_coeffs(self.coefficients.clone())
    }

    /// Wraps an arbitrary monic polynomial (low degree first).
    pub fn from_monic(coefficients: Vec<FieldElement>) -> Self {
        assert!(coefficients.last().map(|c| c.value() == 1).unwrap_or(false), "polynomial must be monic");
        Self { coefficients, overflow: false }
    }
}

/// Shortest LFSR of `seq`, returned as its characteristic polynomial.
///
/// `overflow` is flagged when the order exceeds `max_order` (the decoder
/// passes `floor(m/2)`).
pub fn berlekamp_massey(
    seq: &[FieldElement],
    max_order: usize,
    field: &Field,
) -> Result<MinimalRecurrence, RecurrenceError> {
    if seq.is_empty() {
        return Err(RecurrenceError::EmptySequence);
    }
    let zero = field.zero();
    // connection polynomial C(x) = 1 + c_1 x + ... + c_L x^L
    let mut c = vec![field.one()];
    let mut b = vec![field.one()];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last_disc = field.one();

    for n in 0..seq.len() {
        let mut d = seq[n];
        for i in 1..=len.min(c.len() - 1) {
            d = field.add(d, field.mul(c[i], seq[n - i]));
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = field.mul(d, field.inv(last_disc).expect("discrepancy is nonzero"));
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, zero);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = field.sub(c[i + shift], field.mul(coef, bi));
        }
        if 2 * len <= n {
            len = n + 1 - len;
            b = prev;
            last_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }

    c.resize(len + 1, zero);
    // reverse: p_l = c_{L-l}
    let coefficients: Vec<FieldElement> = c.into_iter().rev().collect();
    Ok(MinimalRecurrence { overflow: len > max_order, coefficients })
}

/// True iff every full-length shift of `seq` is annihilated.
pub fn recurrence_check(rec: &MinimalRecurrence, seq: &[FieldElement]) -> bool {
    annihilates(rec.coefficients(), seq)
}

pub(crate) fn annihilates(poly: &[FieldElement], seq: &[FieldElement]) -> bool {
    let s = poly.len() - 1;
    if seq.len() <= s {
        return true;
    }
    (0..seq.len() - s)
        .all(|a| poly.iter().zip(&seq[a..]).fold(poly[0].zero_like(), |acc, (&pl, &y)| acc + pl * y).is_zero())
}
