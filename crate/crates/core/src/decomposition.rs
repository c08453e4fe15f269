//! Live pursuit state and the recursive biorthogonalization kernels.
//!
//! A [`Decomposition`] keeps, for the selected atoms `α_1..α_N`, the dual
//! atoms `β_n` with `⟨α_m, β_n⟩ = δ_mn`, an orthogonal basis `ψ_j` of the
//! same span, the coefficients `c_n = ⟨β_n, f⟩` and the residual `f − Σ c_n α_n`.
//!
//! Forward growth updates the duals by
//!
//! ```text
//! β_{k+1} = ψ_{k+1} / ‖ψ_{k+1}‖²
//! β_n    ← β_n − β_{k+1} ⟨α_{k+1}, β_n⟩            n = 1..k
//! ```
//!
//! and removing atom `j` downdates them by
//!
//! ```text
//! β_n ← β_n − β_j ⟨β_j, β_n⟩ / ‖β_j‖²              n ≠ j
//! ```

use crate::dictionary::Dictionary;
use crate::error::{PursuitError, Result};
use crate::linalg::{axpy, dot, norm_sq, scaled};

/// Relative threshold below which an atom's orthogonal component counts as
/// zero.
pub const DEFAULT_DEPENDENCE_EPS: f64 = 1e-10;

/// One element `ψ_j` of the orthogonal basis with its cached squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoVector {
    pub values: Vec<f64>,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    dim: usize,
    selected: Vec<usize>,
    atoms: Vec<Vec<f64>>,
    duals: Vec<Vec<f64>>,
    ortho: Vec<OrthoVector>,
    coefficients: Option<Vec<f64>>,
    residual: Vec<f64>,
    residual_norm: f64,
}

/// Two passes of modified Gram-Schmidt of `atom` against `basis`.
fn orthogonalize(basis: &[OrthoVector], atom: &[f64]) -> (Vec<f64>, f64) {
    let mut psi = atom.to_vec();
    for _ in 0..2 {
        for q in basis {
            let proj = dot(&q.values, &psi) / q.norm_sq;
            axpy(-proj, &q.values, &mut psi);
        }
    }
    let nsq = norm_sq(&psi);
    (psi, nsq)
}

impl Decomposition {
    /// Empty decomposition for signals of length `dim`.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            selected: Vec::new(),
            atoms: Vec::new(),
            duals: Vec::new(),
            ortho: Vec::new(),
            coefficients: Some(Vec::new()),
            residual: vec![0.0; dim],
            residual_norm: 0.0,
        }
    }

    /// Rebuilds the state for a given ordered atom selection by replaying the
    /// forward updates, then computes coefficients and residual against `f`.
    ///
    /// Replaying is deterministic, so a selection recorded from a forward run
    /// reproduces that run's duals bit for bit.
    pub fn from_selection(
        dict: &Dictionary,
        indices: &[usize],
        f: &[f64],
        dependence_eps: f64,
    ) -> Result<Self> {
        if f.len() != dict.dim() {
            return Err(PursuitError::DimensionMismatch {
                expected: dict.dim(),
                found: f.len(),
            });
        }
        let mut state = Self::new(dict.dim());
        for &i in indices {
            if i >= dict.len() {
                return Err(PursuitError::IndexOutOfRange {
                    index: i,
                    len: dict.len(),
                });
            }
            let atom = dict.atom(i).values();
            let (psi, nsq) = state.orthogonalize_next(atom, dependence_eps)?;
            state.forward_update(i, atom, psi, nsq)?;
        }
        state.compute_coefficients(f)?;
        state.refresh_residual(f)?;
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of selected atoms `N`.
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Dictionary indices of the selected atoms, in selection order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Copies of the selected atom vectors `α_n`.
    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn duals(&self) -> &[Vec<f64>] {
        &self.duals
    }

    pub fn ortho_basis(&self) -> &[OrthoVector] {
        &self.ortho
    }

    /// `None` after a forward update or dual downdate until coefficients are
    /// recomputed.
    pub fn coefficients(&self) -> Option<&[f64]> {
        self.coefficients.as_deref()
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(PursuitError::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }

    fn check_position(&self, j: usize) -> Result<()> {
        if j >= self.len() {
            return Err(PursuitError::IndexOutOfRange {
                index: j,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Component of `atom` orthogonal to the current span, with its squared
    /// norm.
    ///
    /// Fails with [`PursuitError::DependentAtom`] when
    /// `‖ψ‖² < dependence_eps · ‖atom‖²`.
    pub fn orthogonalize_next(&self, atom: &[f64], dependence_eps: f64) -> Result<(Vec<f64>, f64)> {
        self.check_dim(atom.len())?;
        let (psi, nsq) = orthogonalize(&self.ortho, atom);
        let threshold = dependence_eps * norm_sq(atom);
        if !(nsq >= threshold) || nsq == 0.0 {
            return Err(PursuitError::DependentAtom {
                norm_sq: nsq,
                threshold,
            });
        }
        Ok((psi, nsq))
    }

    /// Appends dictionary atom `index` with orthogonal component `psi`
    /// (from [`orthogonalize_next`](Self::orthogonalize_next)) and updates
    /// every existing dual. Coefficients become stale.
    pub fn forward_update(
        &mut self,
        index: usize,
        atom: &[f64],
        psi: Vec<f64>,
        psi_norm_sq: f64,
    ) -> Result<()> {
        self.check_dim(atom.len())?;
        self.check_dim(psi.len())?;
        if !(psi_norm_sq > 0.0) {
            return Err(PursuitError::DependentAtom {
                norm_sq: psi_norm_sq,
                threshold: 0.0,
            });
        }
        let new_dual = scaled(1.0 / psi_norm_sq, &psi);
        for dual in &mut self.duals {
            let w = dot(atom, dual);
            axpy(-w, &new_dual, dual);
        }
        self.duals.push(new_dual);
        self.ortho.push(OrthoVector {
            values: psi,
            norm_sq: psi_norm_sq,
        });
        self.atoms.push(atom.to_vec());
        self.selected.push(index);
        self.coefficients = None;
        Ok(())
    }

    /// Removes the atom at selected position `j` and downdates the remaining
    /// duals so that they stay biorthogonal to the reduced set.
    ///
    /// The orthogonal basis is rebuilt from the retained atoms in their
    /// original order. Coefficients are left stale; see
    /// [`downdate_coefficients`](crate::backward::downdate_coefficients) for
    /// the matching coefficient update, which must use the duals from
    /// before this call.
    pub fn backward_downdate(&mut self, j: usize) -> Result<()> {
        self.check_position(j)?;
        let removed = self.duals.remove(j);
        let removed_nsq = norm_sq(&removed);
        for dual in &mut self.duals {
            let w = dot(&removed, dual) / removed_nsq;
            axpy(-w, &removed, dual);
        }
        self.selected.remove(j);
        self.atoms.remove(j);
        self.rebuild_ortho();
        self.coefficients = None;
        Ok(())
    }

    fn rebuild_ortho(&mut self) {
        let mut basis: Vec<OrthoVector> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let (values, norm_sq) = orthogonalize(&basis, atom);
            basis.push(OrthoVector { values, norm_sq });
        }
        self.ortho = basis;
    }

    /// `c_n = ⟨β_n, f⟩` for every selected atom; the result is also stored.
    pub fn compute_coefficients(&mut self, f: &[f64]) -> Result<&[f64]> {
        self.check_dim(f.len())?;
        let c = self.duals.iter().map(|b| dot(b, f)).collect();
        self.coefficients = Some(c);
        Ok(self.coefficients.as_deref().unwrap_or_default())
    }

    /// Installs coefficients computed elsewhere (e.g. by a recursive
    /// downdate).
    pub fn set_coefficients(&mut self, coefficients: Vec<f64>) -> Result<()> {
        if coefficients.len() != self.len() {
            return Err(PursuitError::DimensionMismatch {
                expected: self.len(),
                found: coefficients.len(),
            });
        }
        self.coefficients = Some(coefficients);
        Ok(())
    }

    fn require_coefficients(&self) -> Result<&[f64]> {
        self.coefficients.as_deref().ok_or_else(|| {
            PursuitError::InvalidConfig("coefficients are stale; recompute them first".into())
        })
    }

    /// `Σ c_n α_n` using the stored atom copies.
    pub fn approximation(&self) -> Result<Vec<f64>> {
        let c = self.require_coefficients()?;
        let mut out = vec![0.0; self.dim];
        for (cn, atom) in c.iter().zip(&self.atoms) {
            axpy(*cn, atom, &mut out);
        }
        Ok(out)
    }

    /// `Σ c_n α_n` with the atoms taken from `dict`.
    pub fn reconstruct(&self, dict: &Dictionary) -> Result<Vec<f64>> {
        let c = self.require_coefficients()?;
        if !self.is_empty() {
            self.check_dim(dict.dim())?;
        }
        let mut out = vec![0.0; self.dim];
        for (cn, &i) in c.iter().zip(&self.selected) {
            if i >= dict.len() {
                return Err(PursuitError::IndexOutOfRange {
                    index: i,
                    len: dict.len(),
                });
            }
            axpy(*cn, dict.atom(i).values(), &mut out);
        }
        Ok(out)
    }

    /// Recomputes `f − Σ c_n α_n` and its norm; returns the norm.
    pub fn refresh_residual(&mut self, f: &[f64]) -> Result<f64> {
        self.check_dim(f.len())?;
        let approx = self.approximation()?;
        self.residual = f.iter().zip(&approx).map(|(a, b)| a - b).collect();
        self.residual_norm = norm_sq(&self.residual).sqrt();
        Ok(self.residual_norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = DEFAULT_DEPENDENCE_EPS;
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn push(state: &mut Decomposition, index: usize, atom: &[f64]) {
        let (psi, nsq) = state.orthogonalize_next(atom, EPS).unwrap();
        state.forward_update(index, atom, psi, nsq).unwrap();
    }

    /// State for α1 = (1,0), α2 = (1,1)/√2.
    fn skew_pair() -> Decomposition {
        let mut s = Decomposition::new(2);
        push(&mut s, 0, &[1.0, 0.0]);
        push(&mut s, 1, &[H, H]);
        s
    }

    #[test]
    fn first_psi_is_the_atom() {
        let s = Decomposition::new(3);
        let a = [0.0, 0.6, 0.8];
        let (psi, nsq) = s.orthogonalize_next(&a, EPS).unwrap();
        assert_eq!(psi, a.to_vec());
        assert!((nsq - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_psi_for_skew_pair() {
        let mut s = Decomposition::new(2);
        push(&mut s, 0, &[1.0, 0.0]);
        let (psi, nsq) = s.orthogonalize_next(&[H, H], EPS).unwrap();
        assert!(close(&psi, &[0.0, H], 1e-15));
        assert!((nsq - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dependent_atom_is_rejected() {
        let mut s = Decomposition::new(2);
        push(&mut s, 0, &[1.0, 0.0]);
        let err = s.orthogonalize_next(&[1.0, 0.0], EPS).unwrap_err();
        assert!(matches!(err, PursuitError::DependentAtom { .. }));
        let err = s.orthogonalize_next(&[1.0, 0.0, 0.0], EPS).unwrap_err();
        assert!(matches!(err, PursuitError::DimensionMismatch { .. }));
    }

    #[test]
    fn orthonormal_duals_equal_atoms() {
        let mut s = Decomposition::new(3);
        push(&mut s, 0, &[1.0, 0.0, 0.0]);
        push(&mut s, 1, &[0.0, 0.0, 1.0]);
        assert_eq!(s.duals()[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(s.duals()[1], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn single_unit_atom_dual() {
        let mut s = Decomposition::new(2);
        push(&mut s, 4, &[0.6, 0.8]);
        assert!(close(&s.duals()[0], &[0.6, 0.8], 1e-15));
        assert_eq!(s.selected(), &[4]);
    }

    #[test]
    fn skew_pair_duals() {
        // Rows of the inverse of [[1, 1/√2], [0, 1/√2]]: β1 = (1,−1), β2 = (0,√2).
        let s = skew_pair();
        assert!(close(&s.duals()[0], &[1.0, -1.0], 1e-14));
        assert!(close(&s.duals()[1], &[0.0, 2f64.sqrt()], 1e-14));
    }

    #[test]
    fn skew_pair_coefficients_and_reconstruction() {
        let mut s = skew_pair();
        let f = [2.0, 3.0];
        let c = s.compute_coefficients(&f).unwrap().to_vec();
        assert!(close(&c, &[-1.0, 3.0 * 2f64.sqrt()], 1e-14));
        assert!(close(&s.approximation().unwrap(), &f, 1e-14));
        assert!(s.refresh_residual(&f).unwrap() < 1e-14);
    }

    #[test]
    fn downdate_skew_pair_to_first_atom() {
        let mut s = skew_pair();
        s.backward_downdate(1).unwrap();
        assert_eq!(s.len(), 1);
        assert!(close(&s.duals()[0], &[1.0, 0.0], 1e-14));
        assert_eq!(s.ortho_basis().len(), 1);
        assert!(s.coefficients().is_none());
    }

    #[test]
    fn downdate_orthonormal_keeps_duals() {
        let mut s = Decomposition::new(3);
        push(&mut s, 0, &[1.0, 0.0, 0.0]);
        push(&mut s, 1, &[0.0, 1.0, 0.0]);
        push(&mut s, 2, &[0.0, 0.0, 1.0]);
        s.backward_downdate(1).unwrap();
        assert_eq!(s.duals(), &[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_eq!(s.selected(), &[0, 2]);
    }

    #[test]
    fn downdate_last_atom_empties_state() {
        let mut s = Decomposition::new(2);
        push(&mut s, 0, &[1.0, 0.0]);
        s.backward_downdate(0).unwrap();
        assert!(s.is_empty());
        assert!(s.duals().is_empty() && s.ortho_basis().is_empty());
        assert!(matches!(
            s.backward_downdate(0),
            Err(PursuitError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn coefficients_of_orthogonal_signal_vanish() {
        let mut s = Decomposition::new(3);
        push(&mut s, 0, &[1.0, 0.0, 0.0]);
        push(&mut s, 1, &[0.0, H, H]);
        let c = s.compute_coefficients(&[0.0, 1.0, -1.0]).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(
            s.compute_coefficients(&[1.0]),
            Err(PursuitError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_reconstructs_to_zero() {
        let s = Decomposition::new(4);
        assert_eq!(s.approximation().unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn one_atom_reconstruction() {
        let mut s = Decomposition::new(2);
        push(&mut s, 0, &[1.0, 0.0]);
        s.set_coefficients(vec![2.0]).unwrap();
        assert_eq!(s.approximation().unwrap(), vec![2.0, 0.0]);
    }
}
