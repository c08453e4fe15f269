//! Sparse approximation over redundant dictionaries with optimized orthogonal
//! matching pursuit (forward) and its backward counterpart for shrinking an
//! existing atomic decomposition.
//!
//! Both directions share one piece of state, [`Decomposition`], which keeps
//! the dual atoms `β_n` biorthogonal to the selected atoms `α_n`. Coefficients
//! are then plain inner products `c_n = ⟨β_n, f⟩` and `Σ c_n α_n` is the
//! orthogonal projection of `f` onto the selected span.
//!
//! ```
//! use pursuit_core::{
//!     backward::{boomp_run, BackwardConfig},
//!     dictgen::{build_mexhat_dictionary, chirp, ChirpSpec, MexHatSpec},
//!     forward::{oomp_run, ForwardConfig},
//! };
//!
//! let dict = build_mexhat_dictionary(&MexHatSpec::reference()).unwrap();
//! let f = chirp(&ChirpSpec::reference()).unwrap();
//! let run = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(20)).unwrap();
//! let (shrunk, trace) = boomp_run(run.decomposition, &f, &BackwardConfig::to_count(12)).unwrap();
//! assert_eq!(shrunk.len(), 12);
//! assert_eq!(trace.len(), 8);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backward;
pub mod decomposition;
pub mod dictgen;
pub mod dictionary;
pub mod error;
pub mod forward;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod signal;
pub mod verify;

pub use backward::{BackwardConfig, DeletionCriterion, DeletionStep, DeletionTrace};
pub use decomposition::{Decomposition, OrthoVector, DEFAULT_DEPENDENCE_EPS};
pub use dictgen::{ChirpSpec, MexHatSpec};
pub use dictionary::{Atom, AtomMeta, Dictionary};
pub use error::{PursuitError, Result};
pub use forward::{ForwardConfig, ForwardRun, Scoring, StopReason};
pub use oracle::OracleSolution;
pub use signal::Signal;
