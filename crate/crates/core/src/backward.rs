//! Backward optimized orthogonal matching pursuit: shrink a decomposition one
//! coefficient at a time, keeping the orthogonal projection onto the reduced
//! span after every deletion.
//!
//! Removing position `j` changes the approximation by
//! `R_j = c_j β_j / ‖β_j‖²`, so the cheapest deletion minimizes
//! `|c_j|² / ‖β_j‖²`. The remaining coefficients are downdated with the
//! pre-deletion duals,
//!
//! ```text
//! c_n ← c_n − c_j ⟨β_n, β_j⟩ / ‖β_j‖²       n ≠ j
//! ```
//!
//! and only then are the duals downdated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{PursuitError, Result};
use crate::linalg::{dot, norm_sq, scaled};
use crate::signal::Signal;

/// Rule for choosing which coefficient to drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionCriterion {
    /// Smallest `|c_j|² / ‖β_j‖²`: the least residual growth.
    #[default]
    MinResidualIncrease,
    /// Smallest `|c_j|`, ignoring the duals.
    NaiveAbsCoeff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardConfig {
    pub target_count: Option<usize>,
    /// Never delete past this residual norm.
    pub error_budget: Option<f64>,
    #[serde(default)]
    pub criterion: DeletionCriterion,
}

impl BackwardConfig {
    pub fn to_count(target_count: usize) -> Self {
        Self {
            target_count: Some(target_count),
            error_budget: None,
            criterion: DeletionCriterion::MinResidualIncrease,
        }
    }

    pub fn within_budget(error_budget: f64) -> Self {
        Self {
            target_count: None,
            error_budget: Some(error_budget),
            criterion: DeletionCriterion::MinResidualIncrease,
        }
    }

    fn validate(&self, current: usize) -> Result<()> {
        match (self.target_count, self.error_budget) {
            (None, None) => Err(PursuitError::InvalidConfig(
                "set a target count, an error budget, or both".into(),
            )),
            (Some(t), _) if t > current => Err(PursuitError::Infeasible(format!(
                "target count {t} exceeds the {current} atoms in the decomposition"
            ))),
            (_, Some(b)) if !(b >= 0.0) => Err(PursuitError::InvalidConfig(
                "error budget must be non-negative".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionStep {
    /// Position in the selection before the deletion.
    pub position: usize,
    pub dictionary_index: usize,
    pub coefficient: f64,
    /// `|c_j|² / ‖β_j‖²`, the squared norm of the removed component.
    pub criterion_value: f64,
    pub residual_norm_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeletionTrace {
    pub steps: Vec<DeletionStep>,
}

impl DeletionTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn coefficients(state: &Decomposition) -> Result<&[f64]> {
    state
        .coefficients()
        .ok_or_else(|| PursuitError::InvalidConfig("decomposition has stale coefficients".into()))
}

/// `|c_j|² / ‖β_j‖²` for every position.
pub fn criterion_values(state: &Decomposition) -> Result<Vec<f64>> {
    let c = coefficients(state)?;
    Ok(c.par_iter()
        .zip(state.duals().par_iter())
        .map(|(cj, bj)| cj * cj / norm_sq(bj))
        .collect())
}

/// Position to delete under `criterion`, with its `|c_j|² / ‖β_j‖²` value.
/// Lowest position wins ties.
pub fn select_deletion_index(
    state: &Decomposition,
    criterion: DeletionCriterion,
) -> Result<(usize, f64)> {
    if state.is_empty() {
        return Err(PursuitError::EmptyDecomposition);
    }
    let values = criterion_values(state)?;
    let keys: Vec<f64> = match criterion {
        DeletionCriterion::MinResidualIncrease => values.clone(),
        DeletionCriterion::NaiveAbsCoeff => coefficients(state)?.iter().map(|c| c.abs()).collect(),
    };
    let mut best = 0;
    for (j, k) in keys.iter().enumerate().skip(1) {
        if *k < keys[best] {
            best = j;
        }
    }
    Ok((best, values[best]))
}

/// Coefficients of the projection onto the span without position `j`,
/// computed from the current (pre-deletion) duals. Entry `j` is dropped.
pub fn downdate_coefficients(state: &Decomposition, j: usize) -> Result<Vec<f64>> {
    if j >= state.len() {
        return Err(PursuitError::IndexOutOfRange {
            index: j,
            len: state.len(),
        });
    }
    let c = coefficients(state)?;
    let duals = state.duals();
    let bj = &duals[j];
    let scale = c[j] / norm_sq(bj);
    Ok(c.iter()
        .zip(duals)
        .enumerate()
        .filter(|&(n, _)| n != j)
        .map(|(_, (cn, bn))| cn - dot(bn, bj) * scale)
        .collect())
}

/// The change `R_j = c_j β_j / ‖β_j‖²` that deleting position `j` removes
/// from the approximation, with `‖R_j‖² = |c_j|² / ‖β_j‖²`.
pub fn deletion_residual(state: &Decomposition, j: usize) -> Result<(Vec<f64>, f64)> {
    if j >= state.len() {
        return Err(PursuitError::IndexOutOfRange {
            index: j,
            len: state.len(),
        });
    }
    let cj = coefficients(state)?[j];
    let bj = &state.duals()[j];
    let bnsq = norm_sq(bj);
    Ok((scaled(cj / bnsq, bj), cj * cj / bnsq))
}

/// Deletes position `j`: coefficient downdate with the old duals, then the
/// dual downdate.
pub fn delete_position(state: &mut Decomposition, j: usize) -> Result<()> {
    let c = downdate_coefficients(state, j)?;
    state.backward_downdate(j)?;
    state.set_coefficients(c)
}

/// Shrinks `state` until `target_count` atoms remain, or until the next
/// deletion would take the residual norm past `error_budget`.
///
/// The budget check is predictive, `‖r‖² + ‖R_j‖² > budget²`, so the run
/// never overshoots. If the budget stops the run before a requested
/// `target_count` the result is [`PursuitError::Infeasible`].
pub fn boomp_run(
    state: Decomposition,
    f: &Signal,
    cfg: &BackwardConfig,
) -> Result<(Decomposition, DeletionTrace)> {
    boomp_run_observed(state, f, cfg, |_, _| {})
}

/// [`boomp_run`] calling `observe` after every deletion.
pub fn boomp_run_observed<F>(
    mut state: Decomposition,
    f: &Signal,
    cfg: &BackwardConfig,
    mut observe: F,
) -> Result<(Decomposition, DeletionTrace)>
where
    F: FnMut(&Decomposition, &DeletionStep),
{
    cfg.validate(state.len())?;
    if f.len() != state.dim() {
        return Err(PursuitError::DimensionMismatch {
            expected: state.dim(),
            found: f.len(),
        });
    }
    coefficients(&state)?;
    let samples = f.samples();
    state.refresh_residual(samples)?;
    let mut trace = DeletionTrace::default();
    let target = cfg.target_count.unwrap_or(0);

    while state.len() > target {
        let (j, value) = select_deletion_index(&state, cfg.criterion)?;
        if let Some(budget) = cfg.error_budget {
            let current = state.residual_norm();
            let predicted = (current * current + value).sqrt();
            if predicted > budget {
                if cfg.target_count.is_some() {
                    return Err(PursuitError::Infeasible(format!(
                        "error budget {budget} reached with {} atoms, target was {target}",
                        state.len()
                    )));
                }
                break;
            }
        }
        let dictionary_index = state.selected()[j];
        let coefficient = coefficients(&state)?[j];
        delete_position(&mut state, j)?;
        let residual_norm_after = state.refresh_residual(samples)?;
        let step = DeletionStep {
            position: j,
            dictionary_index,
            coefficient,
            criterion_value: value,
            residual_norm_after,
        };
        observe(&state, &step);
        trace.steps.push(step);
    }
    Ok((state, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::DEFAULT_DEPENDENCE_EPS;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn build(atoms: &[&[f64]], f: &[f64]) -> Decomposition {
        let mut s = Decomposition::new(f.len());
        for (i, a) in atoms.iter().enumerate() {
            let (psi, nsq) = s.orthogonalize_next(a, DEFAULT_DEPENDENCE_EPS).unwrap();
            s.forward_update(i, a, psi, nsq).unwrap();
        }
        s.compute_coefficients(f).unwrap();
        s.refresh_residual(f).unwrap();
        s
    }

    fn skew_pair() -> Decomposition {
        build(&[&[1.0, 0.0], &[H, H]], &[2.0, 3.0])
    }

    fn orthonormal(c: &[f64]) -> Decomposition {
        let n = c.len();
        let atoms: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
            .collect();
        let refs: Vec<&[f64]> = atoms.iter().map(|a| a.as_slice()).collect();
        build(&refs, c)
    }

    #[test]
    fn skew_pair_criterion() {
        // c = (−1, 3√2), ‖β1‖² = 2, ‖β2‖² = 2 → (1/2, 9).
        let s = skew_pair();
        let v = criterion_values(&s).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-13 && (v[1] - 9.0).abs() < 1e-12);
        let (j, value) = select_deletion_index(&s, DeletionCriterion::MinResidualIncrease).unwrap();
        assert_eq!(j, 0);
        assert!((value - 0.5).abs() < 1e-13);
    }

    #[test]
    fn zero_coefficient_is_free() {
        let s = orthonormal(&[3.0, 0.0, -1.0]);
        let (j, value) = select_deletion_index(&s, DeletionCriterion::MinResidualIncrease).unwrap();
        assert_eq!((j, value), (1, 0.0));
        let c = downdate_coefficients(&s, 1).unwrap();
        assert_eq!(c, vec![3.0, -1.0]);
        let (r, rsq) = deletion_residual(&s, 1).unwrap();
        assert!(r.iter().all(|v| *v == 0.0) && rsq == 0.0);
    }

    #[test]
    fn orthonormal_reduces_to_smallest_coefficient() {
        let s = orthonormal(&[3.0, -0.5, 1.0, 2.0]);
        for crit in [
            DeletionCriterion::MinResidualIncrease,
            DeletionCriterion::NaiveAbsCoeff,
        ] {
            assert_eq!(select_deletion_index(&s, crit).unwrap().0, 1);
        }
        let c = downdate_coefficients(&s, 2).unwrap();
        assert_eq!(c, vec![3.0, -0.5, 2.0]);
    }

    #[test]
    fn skew_pair_downdate_gives_direct_projection() {
        let s = skew_pair();
        let c = downdate_coefficients(&s, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn skew_pair_deletion_residual() {
        let s = skew_pair();
        let (r, rsq) = deletion_residual(&s, 0).unwrap();
        assert!((r[0] + 0.5).abs() < 1e-13 && (r[1] - 0.5).abs() < 1e-13);
        assert!((rsq - 0.5).abs() < 1e-13);
    }

    #[test]
    fn single_atom_deletion_removes_whole_approximation() {
        let s = build(&[&[0.6, 0.8]], &[1.0, 2.0]);
        let (r, rsq) = deletion_residual(&s, 0).unwrap();
        let approx = s.approximation().unwrap();
        assert!(r.iter().zip(&approx).all(|(a, b)| (a - b).abs() < 1e-14));
        assert!((rsq - 2.2f64.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn errors_on_empty_and_out_of_range() {
        let s = Decomposition::new(2);
        assert!(matches!(
            select_deletion_index(&s, DeletionCriterion::MinResidualIncrease),
            Err(PursuitError::EmptyDecomposition)
        ));
        let s = skew_pair();
        assert!(matches!(
            downdate_coefficients(&s, 2),
            Err(PursuitError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            deletion_residual(&s, 5),
            Err(PursuitError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn target_equal_to_size_is_noop() {
        let s = skew_pair();
        let f = Signal::new(0.0, 1.0, vec![2.0, 3.0]).unwrap();
        let (out, trace) = boomp_run(s.clone(), &f, &BackwardConfig::to_count(2)).unwrap();
        assert!(trace.is_empty());
        assert_eq!(out.coefficients(), s.coefficients());
    }

    #[test]
    fn zero_budget_deletes_nothing() {
        let s = skew_pair();
        let f = Signal::new(0.0, 1.0, vec![2.0, 3.0]).unwrap();
        let (out, trace) = boomp_run(s, &f, &BackwardConfig::within_budget(0.0)).unwrap();
        assert!(trace.is_empty());
        assert_eq!(out.len(), 2);
        let cfg = BackwardConfig {
            target_count: Some(1),
            error_budget: Some(0.0),
            criterion: DeletionCriterion::MinResidualIncrease,
        };
        assert!(matches!(
            boomp_run(skew_pair(), &f, &cfg),
            Err(PursuitError::Infeasible(_))
        ));
    }

    #[test]
    fn budget_stops_before_overshoot() {
        let f = Signal::new(0.0, 1.0, vec![3.0, -0.5, 1.0, 2.0]).unwrap();
        let s = orthonormal(f.samples());
        // Deleting 0.5 then 1.0 gives residual √1.25 ≈ 1.118; 2.0 next would give √5.25.
        let (out, trace) = boomp_run(s, &f, &BackwardConfig::within_budget(2.0)).unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(out.len(), 2);
        assert!((out.residual_norm() - 1.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_target_above_size_and_missing_limits() {
        let f = Signal::new(0.0, 1.0, vec![2.0, 3.0]).unwrap();
        assert!(matches!(
            boomp_run(skew_pair(), &f, &BackwardConfig::to_count(3)),
            Err(PursuitError::Infeasible(_))
        ));
        let cfg = BackwardConfig {
            target_count: None,
            error_budget: None,
            criterion: DeletionCriterion::MinResidualIncrease,
        };
        assert!(boomp_run(skew_pair(), &f, &cfg).is_err());
    }

    #[test]
    fn shrink_to_zero_leaves_signal() {
        let f = Signal::new(0.0, 1.0, vec![2.0, 3.0]).unwrap();
        let (out, trace) = boomp_run(skew_pair(), &f, &BackwardConfig::to_count(0)).unwrap();
        assert!(out.is_empty());
        assert_eq!(trace.len(), 2);
        assert!((out.residual_norm() - 13f64.sqrt()).abs() < 1e-13);
        assert_eq!(trace.steps[0].position, 0);
        assert!((trace.steps[0].residual_norm_after - 0.5f64.sqrt()).abs() < 1e-13);
    }
}
