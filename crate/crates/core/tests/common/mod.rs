#![allow(dead_code)]

use pursuit_core::{Decomposition, Dictionary, Signal, DEFAULT_DEPENDENCE_EPS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_dictionary(rng: &mut impl Rng, atoms: usize, dim: usize) -> Dictionary {
    let cols = (0..atoms).map(|_| random_vec(rng, dim)).collect();
    Dictionary::from_columns(cols, None, serde_json::Value::Null).unwrap()
}

pub fn signal(samples: Vec<f64>) -> Signal {
    Signal::new(0.0, 1.0, samples).unwrap()
}

/// Decomposition over every atom of `dict`, in dictionary order.
pub fn full_decomposition(dict: &Dictionary, f: &[f64]) -> Decomposition {
    let idx: Vec<usize> = (0..dict.len()).collect();
    Decomposition::from_selection(dict, &idx, f, DEFAULT_DEPENDENCE_EPS).unwrap()
}

pub fn atom_refs(state: &Decomposition) -> Vec<&[f64]> {
    state.atoms().iter().map(|a| a.as_slice()).collect()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `‖a − b‖_∞ / ‖b‖_∞`
pub fn rel_vec_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let d = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}
