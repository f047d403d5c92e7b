//! JSON wire formats. Integers that may exceed a machine word travel as
//! decimal strings.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldModulus};
use crate::matrix::{MatrixError, MatrixParams, Measurement, MeasurementMatrix, SparseIntVector};
use crate::recovery::{DecodeResult, DecodeStatus};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid integer {0:?}")]
    BadInteger(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Matrix file: entries are regenerated from the multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub p: u64,
    pub m: usize,
    pub columns: usize,
    pub slack: f64,
    pub multipliers: Vec<u64>,
    pub bound_met: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorJson {
    pub length: usize,
    pub support: Vec<usize>,
    pub coords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementJson {
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResultJson {
    pub x: VectorJson,
    pub status: DecodeStatus,
    pub steps: usize,
    pub inner_steps: usize,
    pub field_ops: u64,
    pub ring_ops: u64,
    pub peak_magnitude: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation_total: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn parse_int(s: &str) -> Result<BigInt, FormatError> {
    BigInt::from_str(s.trim()).map_err(|_| FormatError::BadInteger(s.to_string()))
}

impl From<&MeasurementMatrix> for MatrixJson {
    fn from(m: &MeasurementMatrix) -> Self {
        let params = m.params();
        Self {
            p: params.modulus.value(),
            m: params.rows,
            columns: params.columns,
            slack: params.slack,
            multipliers: m.multipliers().to_vec(),
            bound_met: m.bound_met().to_vec(),
        }
    }
}

impl MatrixJson {
    pub fn into_matrix(self) -> Result<MeasurementMatrix, FormatError> {
        let modulus = FieldModulus::new(self.p)?;
        let params = MatrixParams::new(modulus, self.m, self.columns, self.slack)?;
        Ok(MeasurementMatrix::from_multipliers(params, self.multipliers, self.bound_met)?)
    }
}

impl From<&SparseIntVector> for VectorJson {
    fn from(v: &SparseIntVector) -> Self {
        Self {
            length: v.length(),
            support: v.support().to_vec(),
            coords: v.coords().iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl VectorJson {
    pub fn into_vector(self) -> Result<SparseIntVector, FormatError> {
        let coords = self.coords.iter().map(|c| parse_int(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(SparseIntVector::new(self.length, self.support, coords)?)
    }
}

impl From<&Measurement> for MeasurementJson {
    fn from(y: &Measurement) -> Self {
        Self { values: y.values().iter().map(|v| v.to_string()).collect() }
    }
}

impl MeasurementJson {
    pub fn into_measurement(self) -> Result<Measurement, FormatError> {
        let values = self.values.iter().map(|v| parse_int(v)).collect::<Result<Vec<_>, _>>()?;
        Ok(Measurement::new(values))
    }
}

impl From<&DecodeResult> for DecodeResultJson {
    fn from(r: &DecodeResult) -> Self {
        Self {
            x: VectorJson::from(&r.x),
            status: r.status,
            steps: r.stats.steps,
            inner_steps: r.stats.inner_steps,
            field_ops: r.stats.ledger.field_ops,
            ring_ops: r.stats.ledger.ring_ops,
            peak_magnitude: r.stats.ledger.peak_magnitude.to_string(),
            lifts: Some(r.stats.lifts),
            valuation_total: Some(r.stats.valuation_total),
            reason: r.reason.clone(),
        }
    }
}
