//! Exact recovery of sparse integer vectors from a few integer measurements.
//!
//! The measurement matrix has entries bounded by roughly `p^(1 - 1/m)`, yet
//! any `s <= m/2` sparse integer vector can be recovered exactly from its
//! `m` measurements. Decoding works `p`-adically: each digit is found over
//! `F_p` with a minimal recurrence, root finding and a small linear solve,
//! then the error is divided by `p` and the process repeats.
//!
//! ```
//! use num_bigint::BigInt;
//! use zrecover::{build_matrix, decode, encode, DecodeConfig, FieldModulus, MatrixParams, SparseIntVector};
//!
//! let p = FieldModulus::new(101).unwrap();
//! let matrix = build_matrix(MatrixParams::full(p, 6).unwrap());
//! let x = SparseIntVector::from_pairs(100, vec![(4, BigInt::from(-12345)), (77, BigInt::from(9))]).unwrap();
//! let y = encode(&matrix, &x).unwrap();
//! let r = decode(&matrix, &y, &DecodeConfig::default()).unwrap();
//! assert!(r.is_success());
//! assert_eq!(r.x, x);
//! ```

pub mod field;
pub mod formats;
pub mod linsolve;
pub mod matrix;
pub mod metrics;
pub mod recovery;
pub mod recurrence;
pub mod rootfind;
pub mod sweep;

pub use field::{Field, FieldElement, FieldError, FieldModulus};
pub use linsolve::{solve_coefficients, SolveMethod};
pub use matrix::{build_matrix, encode, MatrixParams, Measurement, MeasurementMatrix, SparseIntVector};
pub use metrics::{LedgerSnapshot, OpLedger};
pub use recovery::{decode, DecodeConfig, DecodeResult, DecodeStatus};
pub use recurrence::{berlekamp_massey, MinimalRecurrence};
pub use rootfind::{find_roots, Poly, RootStrategy};
