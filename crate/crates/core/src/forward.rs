//! Optimized orthogonal matching pursuit: at each step, add the atom whose
//! inclusion minimizes the norm of the new residual.
//!
//! With `γ_i` the component of `α_i` orthogonal to the current span `V_k`
//! and `r_k = f − P_{V_k} f`, the new residual norm after adding `α_i` is
//! `‖r_k‖² − ⟨α_i, r_k⟩² / ‖γ_i‖²`, so the chosen atom maximizes
//! `⟨α_i, r_k⟩² / ‖γ_i‖²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposition, DEFAULT_DEPENDENCE_EPS};
use crate::dictionary::Dictionary;
use crate::error::{PursuitError, Result};
use crate::linalg::{dot, norm_sq};
use crate::signal::Signal;

/// How selection scores are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// Running projections onto the normalized `ψ_j`, one dictionary pass per
    /// iteration.
    #[default]
    Incremental,
    /// Orthogonalize every candidate against the current basis each step.
    FromScratch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardConfig {
    pub max_atoms: usize,
    /// Stop once the residual norm is at or below this value.
    pub residual_tol: f64,
    pub dependence_eps: f64,
    #[serde(default)]
    pub scoring: Scoring,
}

impl ForwardConfig {
    pub fn with_max_atoms(max_atoms: usize) -> Self {
        Self {
            max_atoms,
            residual_tol: 0.0,
            dependence_eps: DEFAULT_DEPENDENCE_EPS,
            scoring: Scoring::Incremental,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_atoms == 0 {
            return Err(PursuitError::InvalidConfig(
                "max_atoms must be at least 1".into(),
            ));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(PursuitError::InvalidConfig(
                "residual_tol must be non-negative".into(),
            ));
        }
        if !(self.dependence_eps >= 0.0) {
            return Err(PursuitError::InvalidConfig(
                "dependence_eps must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Which condition ended a forward run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualTolerance,
    MaxAtoms,
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct ForwardRun {
    pub decomposition: Decomposition,
    /// Residual norm after each added atom.
    pub history: Vec<f64>,
    pub stop: StopReason,
}

/// Deterministic argmax: higher score wins, then lower index.
fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

fn argmax<I>(candidates: I) -> Option<(usize, f64)>
where
    I: ParallelIterator<Item = (usize, f64)>,
{
    candidates.reduce_with(better)
}

/// Picks the next atom by exhaustive orthogonalization of every unselected
/// candidate against the current basis.
///
/// Returns the dictionary index and its score `⟨α_i, r⟩² / ‖γ_i‖²`.
pub fn select_forward_atom(
    dict: &Dictionary,
    state: &Decomposition,
    residual: &[f64],
    dependence_eps: f64,
) -> Result<(usize, f64)> {
    select_excluding(dict, state, residual, dependence_eps, &[])
}

fn select_excluding(
    dict: &Dictionary,
    state: &Decomposition,
    residual: &[f64],
    dependence_eps: f64,
    excluded: &[bool],
) -> Result<(usize, f64)> {
    if residual.len() != dict.dim() || state.dim() != dict.dim() {
        return Err(PursuitError::DimensionMismatch {
            expected: dict.dim(),
            found: residual.len(),
        });
    }
    let mut taken = vec![false; dict.len()];
    for &i in state.selected() {
        taken[i] = true;
    }
    let candidates = (0..dict.len()).into_par_iter().filter_map(|i| {
        if taken[i] || excluded.get(i).copied().unwrap_or(false) {
            return None;
        }
        let atom = dict.atom(i).values();
        let gamma_sq = match state.orthogonalize_next(atom, dependence_eps) {
            Ok((_, g)) => g,
            Err(_) => return None,
        };
        let corr = dot(atom, residual);
        Some((i, corr * corr / gamma_sq))
    });
    argmax(candidates).ok_or(PursuitError::Exhausted)
}

/// Per-atom running quantities for incremental scoring.
struct ScoreTracker {
    /// `‖α_i‖²`
    atom_norm_sq: Vec<f64>,
    /// `Σ_j ⟨ψ_j/‖ψ_j‖, α_i⟩²`
    projected_sq: Vec<f64>,
}

impl ScoreTracker {
    fn new(dict: &Dictionary) -> Self {
        Self {
            atom_norm_sq: dict.atoms().iter().map(|a| norm_sq(a.values())).collect(),
            projected_sq: vec![0.0; dict.len()],
        }
    }

    /// Scores every admissible candidate; one pass over the dictionary.
    fn select(
        &self,
        dict: &Dictionary,
        residual: &[f64],
        dependence_eps: f64,
        excluded: &[bool],
    ) -> Option<(usize, f64)> {
        let candidates = (0..dict.len()).into_par_iter().filter_map(|i| {
            if excluded[i] {
                return None;
            }
            let gamma_sq = self.atom_norm_sq[i] - self.projected_sq[i];
            if !(gamma_sq >= dependence_eps * self.atom_norm_sq[i]) || gamma_sq <= 0.0 {
                return None;
            }
            let corr = dot(dict.atom(i).values(), residual);
            Some((i, corr * corr / gamma_sq))
        });
        argmax(candidates)
    }

    fn absorb(&mut self, dict: &Dictionary, psi: &[f64], psi_norm_sq: f64) {
        let inv = 1.0 / psi_norm_sq;
        self.projected_sq
            .par_iter_mut()
            .zip(dict.atoms().par_iter())
            .for_each(|(p, a)| {
                let d = dot(psi, a.values());
                *p += d * d * inv;
            });
    }
}

/// Runs the forward pursuit on `f` until the residual tolerance, the atom
/// budget, or dictionary exhaustion stops it.
pub fn oomp_run(f: &Signal, dict: &Dictionary, cfg: &ForwardConfig) -> Result<ForwardRun> {
    oomp_run_observed(f, dict, cfg, |_| {})
}

/// [`oomp_run`] calling `observe` with the state after every added atom.
pub fn oomp_run_observed<F>(
    f: &Signal,
    dict: &Dictionary,
    cfg: &ForwardConfig,
    mut observe: F,
) -> Result<ForwardRun>
where
    F: FnMut(&Decomposition),
{
    cfg.validate()?;
    if dict.is_empty() {
        return Err(PursuitError::InvalidDictionary(
            "dictionary is empty".into(),
        ));
    }
    if f.len() != dict.dim() {
        return Err(PursuitError::DimensionMismatch {
            expected: dict.dim(),
            found: f.len(),
        });
    }
    let samples = f.samples();
    let mut state = Decomposition::new(dict.dim());
    state.refresh_residual(samples)?;
    let mut history = Vec::new();
    let mut excluded = vec![false; dict.len()];
    let mut tracker = match cfg.scoring {
        Scoring::Incremental => Some(ScoreTracker::new(dict)),
        Scoring::FromScratch => None,
    };

    let stop = loop {
        // Tolerance is checked first so it wins when both limits fire together.
        if state.residual_norm() <= cfg.residual_tol {
            break StopReason::ResidualTolerance;
        }
        if state.len() >= cfg.max_atoms {
            break StopReason::MaxAtoms;
        }

        let picked = loop {
            let candidate = match &tracker {
                Some(t) => t.select(dict, state.residual(), cfg.dependence_eps, &excluded),
                None => select_excluding(
                    dict,
                    &state,
                    state.residual(),
                    cfg.dependence_eps,
                    &excluded,
                )
                .ok(),
            };
            let Some((i, _)) = candidate else { break None };
            let atom = dict.atom(i).values();
            match state.orthogonalize_next(atom, cfg.dependence_eps) {
                Ok((psi, nsq)) => break Some((i, psi, nsq)),
                // The running estimate of ‖γ_i‖² can lag the exact value.
                Err(PursuitError::DependentAtom { .. }) => excluded[i] = true,
                Err(e) => return Err(e),
            }
        };
        let Some((i, psi, nsq)) = picked else {
            break StopReason::Exhausted;
        };

        if let Some(t) = tracker.as_mut() {
            t.absorb(dict, &psi, nsq);
        }
        state.forward_update(i, dict.atom(i).values(), psi, nsq)?;
        excluded[i] = true;
        state.compute_coefficients(samples)?;
        history.push(state.refresh_residual(samples)?);
        observe(&state);
    };

    Ok(ForwardRun {
        decomposition: state,
        history,
        stop,
    })
}
