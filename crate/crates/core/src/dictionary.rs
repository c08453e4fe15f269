use serde::{Deserialize, Serialize};

use crate::error::{PursuitError, Result};
use crate::linalg;

/// Generation metadata for wavelet atoms: scale index `m` and translation
/// index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomMeta {
    pub scale: i32,
    pub translation: i64,
}

/// A unit-norm dictionary element.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    values: Vec<f64>,
    meta: Option<AtomMeta>,
}

impl Atom {
    /// Normalizes `values` to unit Euclidean norm.
    pub fn normalized(values: Vec<f64>, meta: Option<AtomMeta>) -> Result<Self> {
        let n = linalg::norm(&values);
        if !n.is_finite() {
            return Err(PursuitError::InvalidDictionary(
                "atom has non-finite entries".into(),
            ));
        }
        if n == 0.0 {
            return Err(PursuitError::InvalidDictionary("atom has zero norm".into()));
        }
        let values = values.into_iter().map(|v| v / n).collect();
        Ok(Self { values, meta })
    }

    /// Keeps `values` untouched when already unit norm within `1e-12`,
    /// otherwise normalizes. Reloading a written dictionary then reproduces
    /// its atoms bit for bit.
    pub fn from_stored(values: Vec<f64>, meta: Option<AtomMeta>) -> Result<Self> {
        let n = linalg::norm(&values);
        if (n - 1.0).abs() <= 1e-12 {
            Ok(Self { values, meta })
        } else {
            Self::normalized(values, meta)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> Option<AtomMeta> {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// An ordered, possibly redundant set of unit-norm atoms of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Vec<Atom>,
    provenance: serde_json::Value,
}

impl Dictionary {
    pub fn new(atoms: Vec<Atom>, provenance: serde_json::Value) -> Result<Self> {
        if let Some(first) = atoms.first() {
            let dim = first.len();
            if dim == 0 {
                return Err(PursuitError::InvalidDictionary("atoms are empty".into()));
            }
            if let Some(bad) = atoms.iter().find(|a| a.len() != dim) {
                return Err(PursuitError::DimensionMismatch {
                    expected: dim,
                    found: bad.len(),
                });
            }
        }
        Ok(Self { atoms, provenance })
    }

    /// Builds a dictionary from raw (unnormalized) columns.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        meta: Option<Vec<AtomMeta>>,
        provenance: serde_json::Value,
    ) -> Result<Self> {
        if let Some(m) = &meta {
            if m.len() != columns.len() {
                return Err(PursuitError::DimensionMismatch {
                    expected: columns.len(),
                    found: m.len(),
                });
            }
        }
        let atoms = columns
            .into_iter()
            .enumerate()
            .map(|(i, c)| Atom::normalized(c, meta.as_ref().map(|m| m[i])))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms, provenance)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Length of every atom; zero for an empty dictionary.
    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, Atom::len)
    }

    pub fn provenance(&self) -> &serde_json::Value {
        &self.provenance
    }

    /// SHA-256 over the atom samples, hex encoded.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        h.update((self.dim() as u64).to_le_bytes());
        for a in &self.atoms {
            for v in &a.values {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
