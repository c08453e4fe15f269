//! Invariant measurements on a live decomposition.
//!
//! Each function returns the worst deviation it finds; callers compare it
//! against their tolerance.

use serde::Serialize;

use crate::decomposition::Decomposition;
use crate::error::Result;
use crate::linalg::{axpy, dot, norm};
use crate::oracle;

/// `max_{m,n} |⟨α_m, β_n⟩ − δ_mn|`
pub fn biorthogonality_error(state: &Decomposition) -> f64 {
    let mut worst = 0.0f64;
    for (m, a) in state.atoms().iter().enumerate() {
        for (n, b) in state.duals().iter().enumerate() {
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

/// `max_n |⟨α_n, r⟩|` for the stored residual.
pub fn residual_orthogonality_error(state: &Decomposition) -> f64 {
    state
        .atoms()
        .iter()
        .map(|a| dot(a, state.residual()).abs())
        .fold(0.0, f64::max)
}

/// `max_j ‖Σ_n α_n ⟨β_n, β_j⟩ − β_j‖ / ‖β_j‖`: every dual lies in the span
/// and is reproduced by its own expansion.
pub fn duality_consistency_error(state: &Decomposition) -> f64 {
    let mut worst = 0.0f64;
    for bj in state.duals() {
        let mut acc = vec![0.0; state.dim()];
        for (a, bn) in state.atoms().iter().zip(state.duals()) {
            axpy(dot(bn, bj), a, &mut acc);
        }
        axpy(-1.0, bj, &mut acc);
        worst = worst.max(norm(&acc) / norm(bj));
    }
    worst
}

/// `‖c − c_ls‖_∞ / ‖c_ls‖_∞` against the normal-equation solution on the
/// same atoms. Zero for an empty decomposition.
pub fn oracle_coefficient_error(state: &Decomposition, f: &[f64]) -> Result<f64> {
    let Some(c) = state.coefficients() else {
        return Ok(f64::INFINITY);
    };
    if c.is_empty() {
        return Ok(0.0);
    }
    let atoms: Vec<&[f64]> = state.atoms().iter().map(|a| a.as_slice()).collect();
    let reference = oracle::least_squares_projection(f, &atoms)?.coefficients;
    let scale = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let diff = c
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Tolerances for [`check_state`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub biorthogonality: f64,
    /// Relative to `‖f‖`.
    pub residual_orthogonality: f64,
    pub duality: f64,
    pub oracle_coefficients: f64,
}

impl Tolerances {
    /// Random well-conditioned instances.
    pub const RANDOM: Tolerances = Tolerances {
        biorthogonality: 1e-8,
        residual_orthogonality: 1e-8,
        duality: 1e-8,
        oracle_coefficients: 1e-8,
    };

    /// The 665-atom Mexican-hat chirp experiment.
    pub const MEXHAT: Tolerances = Tolerances {
        biorthogonality: 1e-6,
        residual_orthogonality: 1e-8,
        duality: 1e-8,
        oracle_coefficients: 1e-8,
    };
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StateCheck {
    pub atoms: usize,
    pub biorthogonality: f64,
    pub residual_orthogonality: f64,
    pub duality: f64,
    pub oracle_coefficients: f64,
}

impl StateCheck {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.biorthogonality <= tol.biorthogonality
            && self.residual_orthogonality <= tol.residual_orthogonality
            && self.duality <= tol.duality
            && self.oracle_coefficients <= tol.oracle_coefficients
    }
}

/// Measures every invariant; residual orthogonality is reported relative to
/// `‖f‖`.
pub fn check_state(state: &Decomposition, f: &[f64]) -> Result<StateCheck> {
    let fnorm = norm(f);
    let ro = residual_orthogonality_error(state);
    Ok(StateCheck {
        atoms: state.len(),
        biorthogonality: biorthogonality_error(state),
        residual_orthogonality: if fnorm > 0.0 { ro / fnorm } else { ro },
        duality: duality_consistency_error(state),
        oracle_coefficients: oracle_coefficient_error(state, f)?,
    })
}

/// Worst-case summary over a sequence of checks.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CheckSummary {
    pub states: usize,
    pub biorthogonality: f64,
    pub residual_orthogonality: f64,
    pub duality: f64,
    pub oracle_coefficients: f64,
}

impl CheckSummary {
    pub fn absorb(&mut self, c: &StateCheck) {
        self.states += 1;
        self.biorthogonality = self.biorthogonality.max(c.biorthogonality);
        self.residual_orthogonality = self.residual_orthogonality.max(c.residual_orthogonality);
        self.duality = self.duality.max(c.duality);
        self.oracle_coefficients = self.oracle_coefficients.max(c.oracle_coefficients);
    }

    pub fn passes(&self, tol: &Tolerances) -> bool {
        StateCheck {
            atoms: 0,
            biorthogonality: self.biorthogonality,
            residual_orthogonality: self.residual_orthogonality,
            duality: self.duality,
            oracle_coefficients: self.oracle_coefficients,
        }
        .passes(tol)
    }
}

/// Follows a backward run step by step and measures the residual identity
/// `‖f_V − f_reduced‖² = |c_j|²/‖β_j‖²`, additivity of the squared residual
/// increments, and monotonicity of the residual norm.
#[derive(Debug, Clone)]
pub struct BackwardAudit {
    f: Vec<f64>,
    start_rsq: f64,
    increments: f64,
    prev_approx: Vec<f64>,
    last_norm: f64,
    /// Worst `|‖f_V − f_reduced‖² − criterion| / criterion` over the steps.
    pub identity_rel: f64,
    /// `|‖f − f_final‖² − (‖f − f_V‖² + Σ ‖R_j‖²)|`, relative.
    pub additivity_rel: f64,
    pub monotone: bool,
    pub states: CheckSummary,
}

impl BackwardAudit {
    pub fn new(start: &Decomposition, f: &[f64]) -> Result<Self> {
        let approx = start.approximation()?;
        let rsq: f64 = f.iter().zip(&approx).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(Self {
            f: f.to_vec(),
            start_rsq: rsq,
            increments: 0.0,
            prev_approx: approx,
            last_norm: rsq.sqrt(),
            identity_rel: 0.0,
            additivity_rel: 0.0,
            monotone: true,
            states: CheckSummary::default(),
        })
    }

    pub fn observe(&mut self, state: &Decomposition, criterion_value: f64) -> Result<()> {
        let approx = state.approximation()?;
        let removed: f64 = self
            .prev_approx
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let floor = f64::EPSILON * dot(&self.f, &self.f);
        self.identity_rel = self
            .identity_rel
            .max((removed - criterion_value).abs() / criterion_value.max(floor));
        self.increments += criterion_value;

        let rsq: f64 = self
            .f
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let predicted = self.start_rsq + self.increments;
        self.additivity_rel = self
            .additivity_rel
            .max((rsq - predicted).abs() / predicted.max(floor));
        let n = rsq.sqrt();
        // Allow rounding-level wobble on zero-cost deletions.
        if n < self.last_norm * (1.0 - 1e-12) {
            self.monotone = false;
        }
        self.last_norm = n;
        self.prev_approx = approx;
        self.states.absorb(&check_state(state, &self.f)?);
        Ok(())
    }
}
