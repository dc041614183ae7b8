//! The structured closure report, serialized as JSON.

use serde::Serialize;

use crate::frames::PointClass;
use crate::invert::{Status, Verdict};
use crate::limits::GroupTag;
use crate::numverify::SemiboundEstimate;

pub const SCHEMA: &str = "closure-report/1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub crate_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartSummary {
    pub dim: usize,
    pub f: String,
    pub s: String,
    pub h: String,
    pub potential: String,
    pub window: Vec<String>,
    pub gamma: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub resolution: usize,
    pub singular_found: usize,
    pub sampled: usize,
    pub tangency_points: Vec<Vec<f64>>,
    pub nongeneric_points: Vec<Vec<f64>>,
    pub note: String,
}

/// Numerical confirmations attached to one verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NumericChecks {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semibound: Option<SemiboundEstimate>,
    /// `c_est >= c - tol` for the certified constant `c`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semibound_consistent: Option<bool>,
    /// `|p(i xi*)| <= tol` recomputed from the operator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_rechecked: Option<bool>,
    /// Bessel quadrature probes agree with the exponent table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bessel_probes_agree: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub csv: Vec<String>,
}

impl NumericChecks {
    pub fn all_passed(&self) -> bool {
        [
            self.semibound_consistent,
            self.witness_rechecked,
            self.bessel_probes_agree,
        ]
        .iter()
        .all(|c| c.unwrap_or(true))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub point: Vec<f64>,
    pub point_exact: Vec<String>,
    pub class: PointClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_operator: Option<String>,
    /// Affine operators rescaled to `[Z1, Z2] = 2 Z2`; the verdict uses this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_operator_normalized: Option<String>,
    pub verdict: Verdict,
    pub numeric: NumericChecks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConclusionKind {
    /// Every verdict left invertible, no non-generic points.
    Full,
    /// Some verdict not left invertible.
    Withheld,
    /// Inconclusive verdicts or non-generic points.
    Partial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conclusion {
    pub kind: ConclusionKind,
    pub statement: String,
    pub justification: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureReport {
    pub schema: &'static str,
    pub provenance: Provenance,
    pub chart: ChartSummary,
    pub operator: String,
    pub frame_operator: String,
    pub scan: ScanSummary,
    pub points: Vec<PointRecord>,
    pub hypotheses: Vec<String>,
    pub conclusion: Conclusion,
}

impl ClosureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn count(&self, status: Status) -> usize {
        self.points.iter().filter(|p| p.verdict.status == status).count()
    }

    /// A full conclusion is only drawn from an all-invertible, generic scan.
    pub fn is_sound(&self) -> bool {
        let all_left = self.points.iter().all(|p| p.verdict.status == Status::LeftInvertible);
        let generic = self.scan.nongeneric_points.is_empty();
        (self.conclusion.kind == ConclusionKind::Full) == (all_left && generic && !self.points.is_empty())
    }

    pub fn has_inconclusive(&self) -> bool {
        self.count(Status::Inconclusive) > 0 || !self.scan.nongeneric_points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichRow {
    pub epsilon: String,
    pub gamma_upper: String,
    pub limit_operator: String,
    pub expected: String,
    pub matches_expected: bool,
    pub verdict: Verdict,
    pub gamma_lower: String,
    pub lower_limit_operator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub schema: &'static str,
    pub provenance: Provenance,
    pub chart: ChartSummary,
    pub rows: Vec<SandwichRow>,
    pub statement: String,
}

impl SandwichReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}
