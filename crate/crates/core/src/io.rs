//! File formats: signal CSV, dictionary CSV with JSON sidecar, and the
//! decomposition artifact.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so reading
//! a file back yields the same `f64` bits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decomposition::Decomposition;
use crate::dictionary::{Atom, AtomMeta, Dictionary};
use crate::error::{PursuitError, Result};
use crate::signal::Signal;

/// Largest deviation between a CSV time column and a uniform grid, relative
/// to the grid step.
const GRID_TOLERANCE: f64 = 1e-6;

fn csv_err(e: csv::Error) -> PursuitError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => PursuitError::Io(io),
        other => PursuitError::Format(format!("{other:?}")),
    }
}

fn parse(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| PursuitError::Format(format!("{what}: cannot parse {field:?} as a number")))
}

fn uniform_grid(times: &[f64]) -> Result<(f64, f64)> {
    let start = times[0];
    if times.len() == 1 {
        return Ok((start, 1.0));
    }
    let step = (times[times.len() - 1] - start) / (times.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(PursuitError::Format(
            "time column must be increasing".into(),
        ));
    }
    for (i, t) in times.iter().enumerate() {
        if ((start + i as f64 * step) - t).abs() > GRID_TOLERANCE * step {
            return Err(PursuitError::Format(format!(
                "time column is not uniform at row {}",
                i + 1
            )));
        }
    }
    Ok((start, step))
}

/// Writes `t,value` rows.
pub fn write_signal_csv(path: &Path, signal: &Signal) -> Result<()> {
    write_series_csv(path, &["t", "value"], &[&signal.times(), signal.samples()])
}

pub fn read_signal_csv(path: &Path) -> Result<Signal> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || headers[0].trim() != "t" || headers[1].trim() != "value" {
        return Err(PursuitError::Format(format!(
            "{}: expected header `t,value`",
            path.display()
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        times.push(parse(&rec[0], "t")?);
        values.push(parse(&rec[1], "value")?);
    }
    if times.is_empty() {
        return Err(PursuitError::InvalidSignal(format!(
            "{} has no samples",
            path.display()
        )));
    }
    let (start, step) = uniform_grid(&times)?;
    Signal::new(start, step, values)
}

/// Writes equal-length columns under `header`.
pub fn write_series_csv(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    if let Some(c) = columns.iter().find(|c| c.len() != rows) {
        return Err(PursuitError::DimensionMismatch {
            expected: rows,
            found: c.len(),
        });
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(columns.len());
    for i in 0..rows {
        row.clear();
        row.extend(columns.iter().map(|c| c[i].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON sidecar written next to a dictionary CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DictionarySidecar {
    pub atoms: usize,
    pub samples: usize,
    pub fingerprint: String,
    pub provenance: serde_json::Value,
    pub meta: Option<Vec<AtomMeta>>,
}

/// `dict.csv` → `dict.json`
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// One atom per column after the leading time column; provenance in the
/// sidecar.
pub fn write_dictionary(csv_path: &Path, dict: &Dictionary, times: &[f64]) -> Result<()> {
    if times.len() != dict.dim() {
        return Err(PursuitError::DimensionMismatch {
            expected: dict.dim(),
            found: times.len(),
        });
    }
    let mut header = vec!["t".to_string()];
    header.extend((0..dict.len()).map(|i| format!("atom_{i}")));
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err)?;
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(dict.len() + 1);
    for (k, t) in times.iter().enumerate() {
        row.clear();
        row.push(t.to_string());
        row.extend(dict.atoms().iter().map(|a| a.values()[k].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;

    let meta: Option<Vec<AtomMeta>> = dict.atoms().iter().map(Atom::meta).collect();
    let sidecar = DictionarySidecar {
        atoms: dict.len(),
        samples: dict.dim(),
        fingerprint: dict.fingerprint(),
        provenance: dict.provenance().clone(),
        meta,
    };
    write_json(&sidecar_path(csv_path), &sidecar)
}

/// Reads a dictionary CSV and, when present, its sidecar. Returns the
/// dictionary and its time column.
pub fn read_dictionary(csv_path: &Path) -> Result<(Dictionary, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(csv_path).map_err(csv_err)?;
    let width = rdr.headers().map_err(csv_err)?.len();
    if width < 2 {
        return Err(PursuitError::Format(format!(
            "{}: need a time column and at least one atom",
            csv_path.display()
        )));
    }
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); width - 1];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != width {
            return Err(PursuitError::Format("ragged dictionary row".into()));
        }
        times.push(parse(&rec[0], "t")?);
        for (col, field) in columns.iter_mut().zip(rec.iter().skip(1)) {
            col.push(parse(field, "atom")?);
        }
    }
    if times.is_empty() {
        return Err(PursuitError::InvalidDictionary("no samples".into()));
    }

    let side = sidecar_path(csv_path);
    let (meta, provenance) = if side.exists() {
        let s: DictionarySidecar = read_json(&side)?;
        if s.atoms != columns.len() || s.samples != times.len() {
            return Err(PursuitError::Format(format!(
                "{} describes {}×{} but the CSV holds {}×{}",
                side.display(),
                s.samples,
                s.atoms,
                times.len(),
                columns.len()
            )));
        }
        (s.meta, s.provenance)
    } else {
        (
            None,
            serde_json::json!({ "source": csv_path.display().to_string() }),
        )
    };
    if let Some(m) = &meta {
        if m.len() != columns.len() {
            return Err(PursuitError::Format(
                "sidecar metadata length mismatch".into(),
            ));
        }
    }
    let atoms = columns
        .into_iter()
        .enumerate()
        .map(|(i, c)| Atom::from_stored(c, meta.as_ref().map(|m| m[i])))
        .collect::<Result<Vec<_>>>()?;
    Ok((Dictionary::new(atoms, provenance)?, times))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| PursuitError::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| PursuitError::Format(format!("{}: {e}", path.display())))
}

/// SHA-256 of a signal's grid and samples, hex encoded.
pub fn signal_fingerprint(signal: &Signal) -> String {
    let mut h = Sha256::new();
    h.update(signal.grid_start().to_le_bytes());
    h.update(signal.grid_step().to_le_bytes());
    for v in signal.samples() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// A decomposition stored by its selection. Duals are recomputed on load by
/// replaying the forward updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionArtifact {
    pub selected: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub dependence_eps: f64,
    pub dictionary_fingerprint: String,
    pub signal_fingerprint: String,
    /// Hash over both fingerprints, the selection and the dependence threshold.
    pub config_hash: String,
}

fn config_hash(dict_fp: &str, signal_fp: &str, selected: &[usize], eps: f64) -> String {
    let mut h = Sha256::new();
    h.update(dict_fp.as_bytes());
    h.update(signal_fp.as_bytes());
    for i in selected {
        h.update((*i as u64).to_le_bytes());
    }
    h.update(eps.to_le_bytes());
    hex::encode(h.finalize())
}

impl DecompositionArtifact {
    pub fn capture(
        state: &Decomposition,
        dict: &Dictionary,
        signal: &Signal,
        dependence_eps: f64,
    ) -> Result<Self> {
        let coefficients = state
            .coefficients()
            .ok_or_else(|| PursuitError::InvalidConfig("stale coefficients".into()))?
            .to_vec();
        let dictionary_fingerprint = dict.fingerprint();
        let signal_fingerprint = signal_fingerprint(signal);
        let config_hash = config_hash(
            &dictionary_fingerprint,
            &signal_fingerprint,
            state.selected(),
            dependence_eps,
        );
        Ok(Self {
            selected: state.selected().to_vec(),
            coefficients,
            residual_norm: state.residual_norm(),
            dependence_eps,
            dictionary_fingerprint,
            signal_fingerprint,
            config_hash,
        })
    }

    /// Rebuilds the decomposition, refusing a dictionary or signal other than
    /// the one it was captured against.
    pub fn restore(&self, dict: &Dictionary, signal: &Signal) -> Result<Decomposition> {
        if dict.fingerprint() != self.dictionary_fingerprint {
            return Err(PursuitError::ArtifactMismatch("dictionary differs".into()));
        }
        if signal_fingerprint(signal) != self.signal_fingerprint {
            return Err(PursuitError::ArtifactMismatch("signal differs".into()));
        }
        let expected = config_hash(
            &self.dictionary_fingerprint,
            &self.signal_fingerprint,
            &self.selected,
            self.dependence_eps,
        );
        if expected != self.config_hash {
            return Err(PursuitError::ArtifactMismatch("config hash differs".into()));
        }
        let state = Decomposition::from_selection(
            dict,
            &self.selected,
            signal.samples(),
            self.dependence_eps,
        )?;
        let c = state.coefficients().unwrap_or_default();
        let drift = c
            .iter()
            .zip(&self.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = self
            .coefficients
            .iter()
            .map(|v| v.abs())
            .fold(1.0, f64::max);
        if c.len() != self.coefficients.len() || drift > 1e-9 * scale {
            return Err(PursuitError::ArtifactMismatch(format!(
                "recomputed coefficients drift by {drift:e}"
            )));
        }
        Ok(state)
    }
}
