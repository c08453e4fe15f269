//! Mexican-hat wavelet dictionaries and linear chirp test signals.

use serde::{Deserialize, Serialize};

use crate::dictionary::{AtomMeta, Dictionary};
use crate::error::{PursuitError, Result};
use crate::signal::Signal;

/// Slack for index arithmetic on decimal grid values such as `4 · 16 / 0.2`.
const INDEX_SLACK: f64 = 1e-9;

/// `(2/√3) π^{-1/4} (1 − t²) e^{−t²/2}`
pub fn mexican_hat(t: f64) -> f64 {
    let amp = 2.0 / 3f64.sqrt() * std::f64::consts::PI.powf(-0.25);
    let t2 = t * t;
    amp * (1.0 - t2) * (-0.5 * t2).exp()
}

/// Number of points `start, start + step, …` not exceeding `end`.
fn grid_len(start: f64, step: f64, end: f64) -> usize {
    ((end - start) / step + INDEX_SLACK).floor() as usize + 1
}

/// Parameters of a dyadic Mexican-hat dictionary
/// `α_{m,n}(t) = 2^{m/2} α(2^m t − step · n)`.
///
/// For each scale, `n` covers every translation whose center
/// `step · n / 2^m` lies in `interval`, widened by `margin_indices` on both
/// sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MexHatSpec {
    pub scales: Vec<i32>,
    pub translation_step: f64,
    pub interval: (f64, f64),
    pub grid_step: f64,
    pub margin_indices: i64,
}

impl MexHatSpec {
    /// Scales 0..=4, translation step 0.2, interval [0, 4] sampled every
    /// 0.01, four extra translations per side: 665 atoms on 401 samples.
    pub fn reference() -> Self {
        Self {
            scales: (0..=4).collect(),
            translation_step: 0.2,
            interval: (0.0, 4.0),
            grid_step: 0.01,
            margin_indices: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(PursuitError::EmptySpec("no scales"));
        }
        let (lo, hi) = self.interval;
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(PursuitError::InvalidConfig(
                "grid step must be positive".into(),
            ));
        }
        if !(self.translation_step > 0.0) || !self.translation_step.is_finite() {
            return Err(PursuitError::InvalidConfig(
                "translation step must be positive".into(),
            ));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(PursuitError::InvalidConfig(format!(
                "interval [{lo}, {hi}] is degenerate"
            )));
        }
        if self.margin_indices < 0 {
            return Err(PursuitError::InvalidConfig(
                "margin must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let (lo, hi) = self.interval;
        (0..grid_len(lo, self.grid_step, hi))
            .map(|i| lo + i as f64 * self.grid_step)
            .collect()
    }

    /// Inclusive translation index range for scale `m`.
    pub fn translation_range(&self, m: i32) -> (i64, i64) {
        let dilation = 2f64.powi(m);
        let (lo, hi) = self.interval;
        let first = (lo * dilation / self.translation_step - INDEX_SLACK).ceil() as i64;
        let last = (hi * dilation / self.translation_step + INDEX_SLACK).floor() as i64;
        (first - self.margin_indices, last + self.margin_indices)
    }

    pub fn atom_count(&self) -> usize {
        self.scales
            .iter()
            .map(|&m| {
                let (a, b) = self.translation_range(m);
                (b - a + 1).max(0) as usize
            })
            .sum()
    }
}

/// Samples and normalizes every `α_{m,n}`, ordered by scale then translation.
pub fn build_mexhat_dictionary(spec: &MexHatSpec) -> Result<Dictionary> {
    spec.validate()?;
    let times = spec.times();
    let mut columns = Vec::with_capacity(spec.atom_count());
    let mut meta = Vec::with_capacity(spec.atom_count());
    for &m in &spec.scales {
        let dilation = 2f64.powi(m);
        let amplitude = 2f64.powf(m as f64 / 2.0);
        let (first, last) = spec.translation_range(m);
        for n in first..=last {
            let shift = spec.translation_step * n as f64;
            columns.push(
                times
                    .iter()
                    .map(|&t| amplitude * mexican_hat(t * dilation - shift))
                    .collect::<Vec<f64>>(),
            );
            meta.push(AtomMeta {
                scale: m,
                translation: n,
            });
        }
    }
    let provenance = serde_json::json!({
        "family": "mexican_hat",
        "spec": spec,
        "samples": times.len(),
        "atoms": columns.len(),
    });
    Dictionary::from_columns(columns, Some(meta), provenance)
}

/// Linear chirp `cos(2π (f0 t + (f1 − f0) t² / (2 t1)))`: instantaneous
/// frequency `f0` at `t = 0` rising to `f1` at `t = t1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpSpec {
    pub f0: f64,
    pub t1: f64,
    pub f1: f64,
    /// `(start, step, end)`
    pub grid: (f64, f64, f64),
}

impl ChirpSpec {
    /// `t = 0:0.01:4`, 0 Hz at t = 0, 2 Hz at t = 1.
    pub fn reference() -> Self {
        Self {
            f0: 0.0,
            t1: 1.0,
            f1: 2.0,
            grid: (0.0, 0.01, 4.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (start, step, end) = self.grid;
        if !(self.t1 > 0.0) {
            return Err(PursuitError::InvalidConfig("t1 must be positive".into()));
        }
        if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
            return Err(PursuitError::InvalidConfig(format!(
                "grid {start}:{step}:{end} is malformed"
            )));
        }
        Ok(())
    }

    pub fn phase(&self, t: f64) -> f64 {
        2.0 * std::f64::consts::PI * (self.f0 * t + (self.f1 - self.f0) * t * t / (2.0 * self.t1))
    }
}

pub fn chirp(spec: &ChirpSpec) -> Result<Signal> {
    spec.validate()?;
    let (start, step, end) = spec.grid;
    let samples = (0..grid_len(start, step, end))
        .map(|i| spec.phase(start + i as f64 * step).cos())
        .collect();
    Signal::new(start, step, samples)
}
