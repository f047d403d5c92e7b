//! Coefficients of a measurement sequence over a candidate support.
//!
//! The `s x s` block formed by the first `s` rows of `s` distinct columns is
//! a Vandermonde matrix with nonzero column scalings, hence invertible. It is
//! solved directly; the remaining `m - s` equations certify consistency.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::matrix::MeasurementMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinsolveError {
    #[error("support is empty")]
    EmptySupport,
    #[error("support of size {support} exceeds the {rows} available rows")]
    SupportTooLarge { support: usize, rows: usize },
    #[error("column {index} outside 1..={columns}")]
    ColumnOutOfRange { index: usize, columns: usize },
    #[error("sequence length {found} does not match the {expected} matrix rows")]
    LengthMismatch { expected: usize, found: usize },
    #[error("singular leading block for support {0:?} (duplicate indices?)")]
    Singular(Vec<usize>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Gaussian elimination on the leading block, `O(s^3)`.
    #[default]
    Gaussian,
    /// Transposed-Vandermonde inversion through the master polynomial, `O(s^2)`.
    TransposedVandermonde,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSolve {
    pub support: Vec<usize>,
    pub coefficients: Vec<FieldElement>,
    pub consistent: bool,
    /// First row (0-based) whose equation fails, if any.
    pub first_inconsistent_row: Option<usize>,
}

pub fn solve_coefficients(
    matrix: &MeasurementMatrix,
    support: &[usize],
    seq: &[FieldElement],
    field: &Field,
) -> Result<SupportSolve, LinsolveError> {
    solve_coefficients_with(matrix, support, seq, field, SolveMethod::Gaussian)
}

pub fn solve_coefficients_with(
    matrix: &MeasurementMatrix,
    support: &[usize],
    seq: &[FieldElement],
    field: &Field,
    method: SolveMethod,
) -> Result<SupportSolve, LinsolveError> {
    let s = support.len();
    let rows = matrix.rows();
    if s == 0 {
        return Err(LinsolveError::EmptySupport);
    }
    if s > rows {
        return Err(LinsolveError::SupportTooLarge { support: s, rows });
    }
    if seq.len() != rows {
        return Err(LinsolveError::LengthMismatch { expected: rows, found: seq.len() });
    }
    if let Some(&bad) = support.iter().find(|&&j| j == 0 || j > matrix.columns()) {
        return Err(LinsolveError::ColumnOutOfRange { index: bad, columns: matrix.columns() });
    }

    let coefficients = match method {
        SolveMethod::Gaussian => gaussian(matrix, support, seq, field)?,
        SolveMethod::TransposedVandermonde => transposed_vandermonde(matrix, support, seq, field)?,
    };

    let first_inconsistent_row = (s..rows).find(|&row| {
        let lhs = support
            .iter()
            .zip(&coefficients)
            .fold(field.zero(), |acc, (&j, &xi)| field.add(acc, field.mul(xi, matrix.residue(row, j))));
        lhs != seq[row]
    });
    Ok(SupportSolve {
        support: support.to_vec(),
        coefficients,
        consistent: first_inconsistent_row.is_none(),
        first_inconsistent_row,
    })
}

#[allow(clippy::needless_range_loop)]
fn gaussian(
    matrix: &MeasurementMatrix,
    support: &[usize],
    seq: &[FieldElement],
    field: &Field,
) -> Result<Vec<FieldElement>, LinsolveError> {
    let s = support.len();
    let mut a: Vec<Vec<FieldElement>> = (0..s)
        .map(|row| {
            let mut r: Vec<FieldElement> = support.iter().map(|&j| matrix.residue(row, j)).collect();
            r.push(seq[row]);
            r
        })
        .collect();

    for col in 0..s {
        let piv = (col..s).find(|&r| !a[r][col].is_zero()).ok_or_else(|| LinsolveError::Singular(support.to_vec()))?;
        a.swap(col, piv);
        let inv = field.inv(a[col][col]).expect("pivot is nonzero");
        for c in col..=s {
            a[col][c] = field.mul(a[col][c], inv);
        }
        for r in 0..s {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col];
            for c in col..=s {
                let t = field.mul(factor, a[col][c]);
                a[r][c] = field.sub(a[r][c], t);
            }
        }
    }
    Ok(a.into_iter().map(|r| r[s]).collect())
}

/// Solves `sum_j c_j z_j^l = y_l` (`l < s`) with `c_j = xi_j k_j`.
///
/// With `P(t) = prod (t - z_j)` and `q_j = P / (t - z_j)`, one has
/// `sum_l q_{j,l} y_l = c_j q_j(z_j)`.
fn transposed_vandermonde(
    matrix: &MeasurementMatrix,
    support: &[usize],
    seq: &[FieldElement],
    field: &Field,
) -> Result<Vec<FieldElement>, LinsolveError> {
    let s = support.len();
    let nodes: Vec<FieldElement> = support.iter().map(|&j| field.elem(j as u64)).collect();
    // master polynomial, low degree first
    let mut master = vec![field.one()];
    for &z in &nodes {
        let mut next = vec![field.zero(); master.len() + 1];
        for (i, &c) in master.iter().enumerate() {
            next[i + 1] = field.add(next[i + 1], c);
            next[i] = field.sub(next[i], field.mul(c, z));
        }
        master = next;
    }
    let mut out = Vec::with_capacity(s);
    for (idx, &z) in nodes.iter().enumerate() {
        // synthetic division of the master polynomial by (t - z)
        let mut q = vec![field.zero(); s];
        q[s - 1] = master[s];
        for i in (0..s - 1).rev() {
            q[i] = field.add(master[i + 1], field.mul(z, q[i + 1]));
        }
        let mut num = field.zero();
        let mut den = field.zero();
        let mut zp = field.one();
        for l in 0..s {
            num = field.add(num, field.mul(q[l], seq[l]));
            den = field.add(den, field.mul(q[l], zp));
            zp = field.mul(zp, z);
        }
        if den.is_zero() {
            return Err(LinsolveError::Singular(support.to_vec()));
        }
        let k = matrix.residue(0, support[idx]);
        let c = field.mul(num, field.inv(den).expect("nonzero"));
        out.push(field.mul(c, field.inv(k).expect("multiplier is invertible")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldModulus;
    use crate::matrix::{build_matrix, MatrixParams};
    use proptest::prelude::*;

    fn unit_matrix_p7() -> MeasurementMatrix {
        build_matrix(MatrixParams::new(FieldModulus::new(7).unwrap(), 4, 6, 100.0).unwrap())
    }

    fn seq(p: FieldModulus, v: &[u64]) -> Vec<FieldElement> {
        v.iter().map(|&x| p.elem(x)).collect()
    }

    fn vals(v: &[FieldElement]) -> Vec<u64> {
        v.iter().map(|e| e.value()).collect()
    }

    #[test]
    fn examples_p7() {
        let mx = unit_matrix_p7();
        let p = mx.modulus();
        let f = Field::new(p);
        for method in [SolveMethod::Gaussian, SolveMethod::TransposedVandermonde] {
            let r = solve_coefficients_with(&mx, &[2], &seq(p, &[3, 6, 5, 3]), &f, method).unwrap();
            assert_eq!(vals(&r.coefficients), vec![3]);
            assert!(r.consistent);

            let r = solve_coefficients_with(&mx, &[1, 2], &seq(p, &[2, 3, 5, 2]), &f, method).unwrap();
            assert_eq!(vals(&r.coefficients), vec![1, 1]);
            assert!(r.consistent);

            let r = solve_coefficients_with(&mx, &[1], &seq(p, &[3, 6, 5, 3]), &f, method).unwrap();
            assert_eq!(vals(&r.coefficients), vec![3]);
            assert!(!r.consistent);
            assert_eq!(r.first_inconsistent_row, Some(1));
        }
    }

    #[test]
    fn error_paths() {
        let mx = unit_matrix_p7();
        let p = mx.modulus();
        let f = Field::new(p);
        let y = seq(p, &[3, 6, 5, 3]);
        assert_eq!(solve_coefficients(&mx, &[], &y, &f), Err(LinsolveError::EmptySupport));
        assert!(matches!(solve_coefficients(&mx, &[7], &y, &f), Err(LinsolveError::ColumnOutOfRange { .. })));
        assert!(matches!(solve_coefficients(&mx, &[2, 2], &y, &f), Err(LinsolveError::Singular(_))));
        assert!(matches!(solve_coefficients(&mx, &[1], &y[..3], &f), Err(LinsolveError::LengthMismatch { .. })));
        assert!(matches!(
            solve_coefficients(&mx, &[1, 2, 3, 4, 5], &y, &f),
            Err(LinsolveError::SupportTooLarge { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn recovers_planted_coefficients(seed: u64, rows in 2usize..14) {
            use rand::{seq::index::sample, Rng, SeedableRng};
            let p = FieldModulus::new(101).unwrap();
            let mx = build_matrix(MatrixParams::full(p, rows).unwrap());
            let f = Field::new(p);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = rng.gen_range(1..=rows / 2);
            let mut support: Vec<usize> = sample(&mut rng, 100, s).into_iter().map(|c| c + 1).collect();
            support.sort();
            let xi: Vec<FieldElement> = (0..s).map(|_| p.elem(rng.gen_range(1..101))).collect();
            let y: Vec<FieldElement> = (0..rows)
                .map(|r| support.iter().zip(&xi).fold(p.zero(), |acc, (&j, &c)| acc + c * mx.residue(r, j)))
                .collect();
            let g = solve_coefficients(&mx, &support, &y, &f).unwrap();
            let v = solve_coefficients_with(&mx, &support, &y, &f, SolveMethod::TransposedVandermonde).unwrap();
            prop_assert!(g.consistent);
            prop_assert_eq!(&g.coefficients, &xi);
            prop_assert_eq!(g, v);
        }

        #[test]
        fn consistency_means_exact_reproduction(seed: u64) {
            use rand::{Rng, SeedableRng};
            let p = FieldModulus::new(13).unwrap();
            let mx = build_matrix(MatrixParams::full(p, 6).unwrap());
            let f = Field::new(p);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<FieldElement> = (0..6).map(|_| p.elem(rng.gen_range(0..13))).collect();
            let a = rng.gen_range(1..=12usize);
            let b = rng.gen_range(1..=12usize);
            let mut support = vec![a.min(b), a.max(b)];
            support.dedup();
            let r = solve_coefficients(&mx, &support, &y, &f).unwrap();
            let reproduced = (0..6).all(|row| {
                support.iter().zip(&r.coefficients).fold(p.zero(), |acc, (&j, &c)| acc + c * mx.residue(row, j)) == y[row]
            });
            prop_assert_eq!(r.consistent, reproduced);
        }
    }
}
