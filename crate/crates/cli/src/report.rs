use serde::Serialize;

use pursuit_core::verify::CheckSummary;
use pursuit_core::{Decomposition, DeletionStep, Dictionary, StopReason};

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub position: usize,
    pub index: usize,
    pub scale: Option<i32>,
    pub translation: Option<i64>,
    pub coefficient: f64,
}

pub fn coefficient_table(state: &Decomposition, dict: &Dictionary) -> Vec<CoefficientRow> {
    let coeffs = state.coefficients().unwrap_or_default();
    state
        .selected()
        .iter()
        .zip(coeffs)
        .enumerate()
        .map(|(position, (&index, &coefficient))| {
            let meta = dict.atoms().get(index).and_then(|a| a.meta());
            CoefficientRow {
                position,
                index,
                scale: meta.map(|m| m.scale),
                translation: meta.map(|m| m.translation),
                coefficient,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ResidualNorms {
    pub signal: f64,
    pub forward_final: Option<f64>,
    pub backward_final: Option<f64>,
    /// Forward run stopped at the backward target, for comparison.
    pub forward_baseline: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub forward_ms: Option<f64>,
    pub backward_ms: Option<f64>,
    pub baseline_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub passed: bool,
    pub forward: Option<CheckSummary>,
    pub backward: Option<CheckSummary>,
    pub additivity_rel_error: Option<f64>,
    pub criterion_rel_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub config: serde_json::Value,
    pub dictionary_atoms: usize,
    pub forward_history: Vec<f64>,
    pub forward_stop: Option<StopReason>,
    pub deletion_trace: Vec<DeletionStep>,
    pub coefficients: Vec<CoefficientRow>,
    pub residual_norms: ResidualNorms,
    pub timing: Timing,
    pub verification: Option<Verification>,
}

/// Rounds to four significant digits for human-facing summaries.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
