//! Measurement matrices with small signed entries, sparse integer vectors and
//! exact integer encoding.
//!
//! Column `j` (1-based, `1 <= j <= columns`) holds the signed representatives
//! of `k_j * j^i mod p` for rows `i = 0..m`. The multiplier `k_j` is the first
//! `k` in `1..p` for which every entry of the column is at most
//! `slack * p^(1 - 1/m)` in absolute value.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::field::{FieldElement, FieldModulus};

/// Above this many entries the matrix is regenerated on demand.
pub const DENSE_ENTRY_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("m <= p violated (m = {rows}, p = {p})")]
    TooManyRows { rows: usize, p: u64 },
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("column count {columns} outside 1..={max}")]
    BadColumnCount { columns: usize, max: u64 },
    #[error("slack must be a finite real >= 1, got {0}")]
    BadSlack(f64),
    #[error("index {index} outside 1..={columns}")]
    IndexOutOfRange { index: usize, columns: usize },
    #[error("vector length {found} does not match the matrix column count {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("support indices must be strictly increasing")]
    UnsortedSupport,
    #[error("coordinate at index {0} is zero")]
    ZeroCoordinate(usize),
    #[error("support has {support} indices but {coords} coordinates")]
    CoordCountMismatch { support: usize, coords: usize },
    #[error("multiplier {k} for column {column} outside 1..p")]
    BadMultiplier { column: usize, k: u64 },
    #[error("expected {expected} per-column values, found {found}")]
    ColumnDataMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixParams {
    pub modulus: FieldModulus,
    pub rows: usize,
    pub columns: usize,
    pub slack: f64,
}

impl MatrixParams {
    /// Column `p` (which is `0 mod p`) is never allowed: indices must be
    /// invertible field elements.
    pub fn new(modulus: FieldModulus, rows: usize, columns: usize, slack: f64) -> Result<Self, MatrixError> {
        let p = modulus.value();
        if rows < 2 {
            return Err(MatrixError::TooFewRows(rows));
        }
        if rows as u64 > p {
            return Err(MatrixError::TooManyRows { rows, p });
        }
        if columns == 0 || columns as u64 > p - 1 {
            return Err(MatrixError::BadColumnCount { columns, max: p - 1 });
        }
        if !(slack.is_finite() && slack >= 1.0) {
            return Err(MatrixError::BadSlack(slack));
        }
        Ok(Self { modulus, rows, columns, slack })
    }

    /// All `p - 1` nonzero columns, slack 1.
    pub fn full(modulus: FieldModulus, rows: usize) -> Result<Self, MatrixError> {
        Self::new(modulus, rows, (modulus.value() - 1) as usize, 1.0)
    }

    /// `slack * p^(1 - 1/m)`
    pub fn element_bound(&self) -> f64 {
        element_bound(self.modulus.value(), self.rows, self.slack)
    }
}

fn element_bound(p: u64, rows: usize, slack: f64) -> f64 {
    slack * (p as f64).powf(1.0 - 1.0 / rows as f64)
}

#[derive(Debug, Clone)]
enum EntryStore {
    Dense(Vec<i64>),
    OnDemand,
}

#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    params: MatrixParams,
    multipliers: Vec<u64>,
    bound_met: Vec<bool>,
    entries: EntryStore,
    max_abs_entry: u64,
}

/// Signed representative of `k * j^row mod p` for every row.
fn column_reps(p: FieldModulus, rows: usize, j: u64, k: u64) -> impl Iterator<Item = i64> {
    let step = p.elem(j);
    let mut cur = p.elem(k);
    (0..rows).map(move |_| {
        let v = cur.signed_rep().value();
        cur = cur * step;
        v
    })
}

/// Picks `k_j` for column `j`.
///
/// Returns the first `k` in increasing order whose column satisfies the bound
/// `slack * p^(1-1/m)`, or, if none does, the `k` minimising the column's
/// largest entry together with `false`.
pub fn choose_multiplier(p: FieldModulus, rows: usize, j: u64, slack: f64) -> (u64, bool) {
    choose_multiplier_with_bound(p, rows, j, element_bound(p.value(), rows, slack))
}

/// Same scan as [`choose_multiplier`] against an explicit real bound.
pub fn choose_multiplier_with_bound(p: FieldModulus, rows: usize, j: u64, bound: f64) -> (u64, bool) {
    let jj = p.elem(j);
    let mut best = (1u64, u64::MAX);
    for k in 1..p.value() {
        let mut cur = p.elem(k);
        let mut worst = 0u64;
        let mut ok = true;
        for _ in 0..rows {
            let a = cur.signed_rep().value().unsigned_abs();
            worst = worst.max(a);
            if a as f64 > bound {
                ok = false;
                if worst >= best.1 {
                    break;
                }
            }
            cur = cur * jj;
        }
        if ok {
            return (k, true);
        }
        if worst < best.1 {
            best = (k, worst);
        }
    }
    (best.0, false)
}

/// Builds every column with [`choose_multiplier`].
pub fn build_matrix(params: MatrixParams) -> MeasurementMatrix {
    let p = params.modulus;
    let pick = |j: usize| choose_multiplier(p, params.rows, j as u64, params.slack);
    #[cfg(feature = "parallel")]
    let picks: Vec<(u64, bool)> = {
        use rayon::prelude::*;
        (1..=params.columns).into_par_iter().map(pick).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let picks: Vec<(u64, bool)> = (1..=params.columns).map(pick).collect();
    let (multipliers, bound_met) = picks.into_iter().unzip();
    MeasurementMatrix::assemble(params, multipliers, bound_met)
}

impl MeasurementMatrix {
    /// Rebuilds a matrix from stored multipliers; entries are regenerated.
    pub fn from_multipliers(
        params: MatrixParams,
        multipliers: Vec<u64>,
        bound_met: Vec<bool>,
    ) -> Result<Self, MatrixError> {
        if multipliers.len() != params.columns {
            return Err(MatrixError::ColumnDataMismatch { expected: params.columns, found: multipliers.len() });
        }
        if bound_met.len() != params.columns {
            return Err(MatrixError::ColumnDataMismatch { expected: params.columns, found: bound_met.len() });
        }
        let p = params.modulus.value();
        if let Some((i, &k)) = multipliers.iter().enumerate().find(|(_, &k)| k == 0 || k >= p) {
            return Err(MatrixError::BadMultiplier { column: i + 1, k });
        }
        Ok(Self::assemble(params, multipliers, bound_met))
    }

    fn assemble(params: MatrixParams, multipliers: Vec<u64>, bound_met: Vec<bool>) -> Self {
        let (m, n, p) = (params.rows, params.columns, params.modulus);
        let mut max_abs_entry = 0;
        let entries = if m * n <= DENSE_ENTRY_LIMIT {
            let mut dense = vec![0i64; m * n];
            for (c, &k) in multipliers.iter().enumerate() {
                for (row, v) in column_reps(p, m, c as u64 + 1, k).enumerate() {
                    dense[row * n + c] = v;
                    max_abs_entry = max_abs_entry.max(v.unsigned_abs());
                }
            }
            EntryStore::Dense(dense)
        } else {
            for (c, &k) in multipliers.iter().enumerate() {
                for v in column_reps(p, m, c as u64 + 1, k) {
                    max_abs_entry = max_abs_entry.max(v.unsigned_abs());
                }
            }
            EntryStore::OnDemand
        };
        Self { params, multipliers, bound_met, entries, max_abs_entry }
    }

    pub fn params(&self) -> &MatrixParams {
        &self.params
    }

    pub fn modulus(&self) -> FieldModulus {
        self.params.modulus
    }

    pub fn rows(&self) -> usize {
        self.params.rows
    }

    pub fn columns(&self) -> usize {
        self.params.columns
    }

    pub fn multipliers(&self) -> &[u64] {
        &self.multipliers
    }

    /// `k_j` for the 1-based column `j`.
    pub fn multiplier(&self, column: usize) -> u64 {
        self.multipliers[column - 1]
    }

    pub fn bound_met(&self) -> &[bool] {
        &self.bound_met
    }

    pub fn bound_met_count(&self) -> usize {
        self.bound_met.iter().filter(|&&b| b).count()
    }

    pub fn all_bounds_met(&self) -> bool {
        self.bound_met.iter().all(|&b| b)
    }

    pub fn max_abs_entry(&self) -> u64 {
        self.max_abs_entry
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.entries, EntryStore::Dense(_))
    }

    /// Entry at 0-based `row` and 1-based `column`.
    pub fn entry(&self, row: usize, column: usize) -> i64 {
        debug_assert!(row < self.rows() && (1..=self.columns()).contains(&column));
        match &self.entries {
            EntryStore::Dense(d) => d[row * self.params.columns + column - 1],
            EntryStore::OnDemand => {
                let p = self.params.modulus;
                let v = p.elem(column as u64).pow(row as u64) * p.elem(self.multiplier(column));
                v.signed_rep().value()
            }
        }
    }

    /// `k_j * j^row` as a field element.
    pub fn residue(&self, row: usize, column: usize) -> FieldElement {
        self.params.modulus.from_i64(self.entry(row, column))
    }

    pub fn column(&self, column: usize) -> Vec<i64> {
        (0..self.rows()).map(|r| self.entry(r, column)).collect()
    }
}

/// A sparse vector in `Z^columns` with arbitrary-precision coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntVector {
    length: usize,
    support: Vec<usize>,
    coords: Vec<BigInt>,
}

impl SparseIntVector {
    pub fn new(length: usize, support: Vec<usize>, coords: Vec<BigInt>) -> Result<Self, MatrixError> {
        if support.len() != coords.len() {
            return Err(MatrixError::CoordCountMismatch { support: support.len(), coords: coords.len() });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MatrixError::UnsortedSupport);
        }
        if let Some(&bad) = support.iter().find(|&&j| j == 0 || j > length) {
            return Err(MatrixError::IndexOutOfRange { index: bad, columns: length });
        }
        if let Some(i) = coords.iter().position(|c| c.is_zero()) {
            return Err(MatrixError::ZeroCoordinate(support[i]));
        }
        Ok(Self { length, support, coords })
    }

    /// Builds from unordered `(index, value)` pairs, dropping zero values.
    pub fn from_pairs<I>(length: usize, pairs: I) -> Result<Self, MatrixError>
    where
        I: IntoIterator<Item = (usize, BigInt)>,
    {
        let mut pairs: Vec<_> = pairs.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        pairs.sort_by_key(|(j, _)| *j);
        let (support, coords) = pairs.into_iter().unzip();
        Self::new(length, support, coords)
    }

    pub fn zero(length: usize) -> Self {
        Self { length, support: Vec::new(), coords: Vec::new() }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn get(&self, index: usize) -> BigInt {
        match self.support.binary_search(&index) {
            Ok(i) => self.coords[i].clone(),
            Err(_) => BigInt::zero(),
        }
    }

    /// `max |x_j|`, zero for the zero vector.
    pub fn max_abs(&self) -> BigInt {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.support.iter().copied().zip(self.coords.iter())
    }

    /// Every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: &BigInt) -> Self {
        assert!(!factor.is_zero());
        Self {
            length: self.length,
            support: self.support.clone(),
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }
}

/// `y = Phi x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    values: Vec<BigInt>,
}

impl Measurement {
    pub fn new(values: Vec<BigInt>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn max_abs(&self) -> BigInt {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_default()
    }

    pub fn scaled(&self, factor: &BigInt) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Exact integer product `Phi x`.
///
/// Vectors with more than `m/2` nonzeros are encoded anyway; the decoder is
/// not guaranteed to recover them (see [`exceeds_sparsity`]).
pub fn encode(matrix: &MeasurementMatrix, x: &SparseIntVector) -> Result<Measurement, MatrixError> {
    if x.length() != matrix.columns() {
        return Err(MatrixError::LengthMismatch { expected: matrix.columns(), found: x.length() });
    }
    let values = (0..matrix.rows())
        .map(|row| x.iter().map(|(j, xj)| xj * matrix.entry(row, j)).fold(BigInt::zero(), |acc, t| acc + t))
        .collect();
    Ok(Measurement::new(values))
}

/// True when `x` has more nonzeros than the `floor(m/2)` the decoder supports.
pub fn exceeds_sparsity(matrix: &MeasurementMatrix, x: &SparseIntVector) -> bool {
    x.sparsity() > matrix.rows() / 2
}
