use serde::{Deserialize, Serialize};

use crate::error::{PursuitError, Result};
use crate::linalg;

/// Real-valued samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    grid_start: f64,
    grid_step: f64,
    samples: Vec<f64>,
}

impl Signal {
    pub fn new(grid_start: f64, grid_step: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(PursuitError::InvalidSignal("no samples".into()));
        }
        if !(grid_step > 0.0) || !grid_step.is_finite() || !grid_start.is_finite() {
            return Err(PursuitError::InvalidSignal(format!(
                "grid step must be positive and finite, got {grid_step}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(PursuitError::InvalidSignal(format!(
                "sample {i} is not finite"
            )));
        }
        Ok(Self {
            grid_start,
            grid_step,
            samples,
        })
    }

    pub fn grid_start(&self) -> f64 {
        self.grid_start
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.grid_start + i as f64 * self.grid_step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.samples)
    }

    /// A signal on the same grid with different samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.len() {
            return Err(PursuitError::DimensionMismatch {
                expected: self.len(),
                found: samples.len(),
            });
        }
        Signal::new(self.grid_start, self.grid_step, samples)
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_bad_grid() {
        assert!(Signal::new(0.0, 0.1, vec![]).is_err());
        assert!(Signal::new(0.0, 0.0, vec![1.0]).is_err());
        assert!(Signal::new(0.0, -1.0, vec![1.0]).is_err());
        assert!(Signal::new(0.0, 0.1, vec![1.0, f64::NAN]).is_err());
        assert!(Signal::new(0.0, 0.1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn grid_times() {
        let s = Signal::new(1.0, 0.5, vec![0.0; 3]).unwrap();
        assert_eq!(s.times(), vec![1.0, 1.5, 2.0]);
    }
}
