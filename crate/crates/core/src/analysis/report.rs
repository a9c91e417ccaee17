//! Machine-readable verifier records.

use serde::Serialize;
use serde_json::Value;

use super::Comparison;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub residual_or_margin: f64,
    pub pass: bool,
    pub tolerances: Value,
}

impl CheckRecord {
    /// A residual record passing when `value ≤ tol`.
    pub fn residual(check: &str, inputs: Value, c: Comparison, tol: f64) -> Self {
        Self {
            check: check.into(),
            inputs,
            lhs: c.lhs,
            rhs: c.rhs,
            residual_or_margin: c.value,
            pass: c.value <= tol,
            tolerances: serde_json::json!({ "max_residual": tol }),
        }
    }

    /// A margin record passing when `value ≥ -tol`.
    pub fn margin(check: &str, inputs: Value, c: Comparison, tol: f64) -> Self {
        Self {
            check: check.into(),
            inputs,
            lhs: c.lhs,
            rhs: c.rhs,
            residual_or_margin: c.value,
            pass: c.value >= -tol,
            tolerances: serde_json::json!({ "min_margin": -tol }),
        }
    }
}
