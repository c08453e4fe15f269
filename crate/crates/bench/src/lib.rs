//! Fixtures shared by the benchmarks.

use pursuit_core::dictgen::{build_mexhat_dictionary, chirp, ChirpSpec, MexHatSpec};
use pursuit_core::{Dictionary, Signal};

/// The 665-atom Mexican-hat dictionary and the 401-sample chirp.
pub fn reference_inputs() -> (Dictionary, Signal) {
    let dict = build_mexhat_dictionary(&MexHatSpec::reference()).expect("reference dictionary");
    let f = chirp(&ChirpSpec::reference()).expect("reference chirp");
    (dict, f)
}
