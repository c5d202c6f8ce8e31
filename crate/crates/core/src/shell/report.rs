//! Report files. Every claim carries a verdict; routes that do not apply
//! say why.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::numlab::OrderCheck;
use crate::symcore::ZeroVerdict;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub problem: String,
    pub seed: u64,
    pub ode: OdeSummary,
    pub forms: Forms,
    pub routes: Vec<RouteNote>,
    pub multipliers: Vec<MultiplierEntry>,
    pub lagrangians: Vec<LagrangianEntry>,
    pub noether: Vec<NoetherEntry>,
    pub ratios: Vec<RatioEntry>,
    pub rescaled: Vec<MultiplierEntry>,
    pub energy_audit: Vec<EnergyAudit>,
    pub linearization: Vec<MapEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericReport>,
    pub goldens: Vec<GoldenRow>,
    /// Every undecided zero test, with its context and witness.
    pub unknowns: Vec<String>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OdeSummary {
    #[serde(rename = "F")]
    pub rhs: String,
    pub parameters: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Forms {
    pub lienard: FormResult,
    pub jacobi: FormResult,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FormResult {
    pub applies: bool,
    /// Coefficients by name when the form applies.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub coefficients: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteNote {
    pub route: String,
    pub applied: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierEntry {
    pub label: String,
    pub expr: String,
    pub route: String,
    pub verified: ZeroVerdict,
    /// Earlier entry it equals up to a constant factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagrangianEntry {
    pub label: String,
    pub multiplier: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub display: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f3: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub el: Option<ZeroVerdict>,
    /// `E - M (xddot - F)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization: Option<ZeroVerdict>,
    /// `L_vv - M`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_roundtrip: Option<ZeroVerdict>,
    /// Set when no Lagrangian was built.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LagrangianEntry {
    pub fn built(&self) -> bool {
        self.expr.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralEntry {
    pub label: String,
    pub expr: String,
    pub origin: String,
    pub conserved: ZeroVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryEntry {
    pub label: String,
    pub tau: String,
    pub xi: String,
    pub gauge: String,
    pub residual: ZeroVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEntry {
    pub rate: String,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoetherEntry {
    pub lagrangian: String,
    pub degree: u32,
    pub dimension: usize,
    pub rates: Vec<RateEntry>,
    pub symmetries: Vec<SymmetryEntry>,
    pub integrals: Vec<IntegralEntry>,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioEntry {
    pub first: String,
    pub second: String,
    /// `None` when the ratio is a constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<IntegralEntry>,
}

/// The closed-form integral attached to an alpha root next to the energy
/// of the corresponding Lagrangian.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyAudit {
    pub alpha: String,
    pub literal: IntegralEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<IntegralEntry>,
    pub finding: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapEntry {
    pub label: String,
    pub t: String,
    pub x: String,
    pub target: String,
    pub verdict: String,
    pub expected: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericReport {
    pub params: BTreeMap<String, f64>,
    pub ic: [f64; 3],
    pub t_end: f64,
    pub h: f64,
    pub order_h: f64,
    /// Last sample of the trajectory at step `h`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_state: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub drift: Vec<DriftRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRow {
    pub label: String,
    pub conserved: ZeroVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoldenRow {
    pub kind: String,
    pub label: String,
    pub expr: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched: Option<String>,
    pub detail: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub schema: u32,
    pub seed: u64,
    pub problems: Vec<SummaryRow>,
    pub failing: Vec<String>,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    pub file: String,
    pub report: Option<String>,
    pub passed: bool,
    pub goldens: usize,
    pub goldens_matched: usize,
    pub failures: Vec<String>,
}
