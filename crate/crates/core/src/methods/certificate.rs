use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::discretize::ResidualSummary;
use crate::stability::StabilityMethod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum BoundKind {
    /// Error bound from the maximum principle.
    #[serde(rename = "max-principle")]
    MaxPrinciple,
    /// No well-posedness constant available; the value is the residual only.
    #[serde(rename = "residual-only")]
    ResidualOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub value: f64,
    pub kind: BoundKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StabilityField {
    /// `null` when the sampling does not determine the trial space.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub method: StabilityMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Truth {
    /// Fine-grid interior sup of `u* - u`.
    pub sup_error: f64,
}

pub mod flags {
    pub const UNCONVERGED: &str = "solver-unconverged";
    pub const JITTER: &str = "jitter-used";
    pub const TARGET_MISSED: &str = "target-missed";
    pub const SVD_TRUNCATED: &str = "svd-truncated";
    pub const STABILITY_UNSUPPORTED: &str = "stability-unsupported";
    pub const MPS_SKIPPED: &str = "mps-skipped";
}

/// A-posteriori certificate for one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub method: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub oversampling_ratio: f64,
    pub coefficients: Vec<f64>,
    pub residual: ResidualSummary,
    pub bound: Bound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Truth>,
    pub flags: Vec<String>,
    /// Step certificates of composite methods.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Certificate>,
    /// Seconds since the Unix epoch; set by the command-line front end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Certificate {
    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

pub fn certificate_schema() -> schemars::Schema {
    schemars::schema_for!(Certificate)
}
