//! Brute-force least-squares reference.
//!
//! Solves the normal equations `G c = b` with `G_mn = ⟨α_m, α_n⟩` and
//! `b_n = ⟨α_n, f⟩` by Gaussian elimination with partial pivoting. Nothing
//! here touches the recursive dual machinery, so it can check it.

use crate::error::{PursuitError, Result};

/// Pivot ratio `|min pivot| / |max pivot|` below which the Gram matrix is
/// treated as singular.
pub const PIVOT_RATIO_CAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub coefficients: Vec<f64>,
    pub approximation: Vec<f64>,
    pub residual_norm: f64,
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Solves the dense system in place; `a` is row-major `n × n`.
fn solve_pivoted(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let mut p = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[p * n + col].abs() {
                p = r;
            }
        }
        if p != col {
            for k in 0..n {
                a.swap(col * n + k, p * n + k);
            }
            b.swap(col, p);
        }
        let pivot = a[col * n + col];
        max_pivot = max_pivot.max(pivot.abs());
        min_pivot = min_pivot.min(pivot.abs());
        if pivot == 0.0 || min_pivot < PIVOT_RATIO_CAP * max_pivot {
            return Err(PursuitError::IllConditioned {
                pivot_ratio: if max_pivot > 0.0 {
                    min_pivot / max_pivot
                } else {
                    0.0
                },
            });
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            if factor != 0.0 {
                for k in col..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Ok(x)
}

/// Orthogonal projection of `f` onto the span of `atoms`.
pub fn least_squares_projection(f: &[f64], atoms: &[&[f64]]) -> Result<OracleSolution> {
    let n = atoms.len();
    if let Some(a) = atoms.iter().find(|a| a.len() != f.len()) {
        return Err(PursuitError::DimensionMismatch {
            expected: f.len(),
            found: a.len(),
        });
    }
    let mut gram = vec![0.0; n * n];
    for r in 0..n {
        for c in r..n {
            let g = inner(atoms[r], atoms[c]);
            gram[r * n + c] = g;
            gram[c * n + r] = g;
        }
    }
    let rhs: Vec<f64> = atoms.iter().map(|a| inner(a, f)).collect();
    let coefficients = solve_pivoted(gram, rhs, n)?;
    let mut approximation = vec![0.0; f.len()];
    for (c, a) in coefficients.iter().zip(atoms) {
        for i in 0..f.len() {
            approximation[i] += c * a[i];
        }
    }
    let mut rsq = 0.0;
    for i in 0..f.len() {
        let d = f[i] - approximation[i];
        rsq += d * d;
    }
    Ok(OracleSolution {
        coefficients,
        approximation,
        residual_norm: rsq.sqrt(),
    })
}

/// Leave-one-out search: position whose removal leaves the smallest
/// least-squares residual, with that residual norm. Lowest position wins ties.
pub fn best_single_deletion(f: &[f64], atoms: &[&[f64]]) -> Result<(usize, f64)> {
    if atoms.is_empty() {
        return Err(PursuitError::EmptyDecomposition);
    }
    let mut best: Option<(usize, f64)> = None;
    for j in 0..atoms.len() {
        let subset: Vec<&[f64]> = atoms
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, a)| *a)
            .collect();
        let r = least_squares_projection(f, &subset)?.residual_norm;
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((j, r));
        }
    }
    Ok(best.expect("at least one atom"))
}

/// Residual norms after deleting each position in turn.
pub fn leave_one_out_residuals(f: &[f64], atoms: &[&[f64]]) -> Result<Vec<f64>> {
    (0..atoms.len())
        .map(|j| {
            let subset: Vec<&[f64]> = atoms
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, a)| *a)
                .collect();
            least_squares_projection(f, &subset).map(|s| s.residual_norm)
        })
        .collect()
}
