//! End-to-end acceptance checks. Each test prints one `[PASS]` or `[FAIL]`
//! line before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report.

mod common;

use std::time::Instant;

use common::*;
use pursuit_core::backward::{
    boomp_run, boomp_run_observed, deletion_residual, select_deletion_index, BackwardConfig,
    DeletionCriterion,
};
use pursuit_core::dictgen::{build_mexhat_dictionary, chirp, ChirpSpec, MexHatSpec};
use pursuit_core::forward::{oomp_run, oomp_run_observed, ForwardConfig};
use pursuit_core::linalg::norm_sq;
use pursuit_core::oracle;
use pursuit_core::verify::{check_state, BackwardAudit, CheckSummary, Tolerances};
use pursuit_core::{Decomposition, Dictionary, Signal};
use rand::Rng;

const REL_TOL: f64 = 0.10;
const FORWARD_60: f64 = 0.0544;
const BACKWARD_34: f64 = 1.18;
const FORWARD_34: f64 = 1.77;
const RUNTIME_LIMIT_S: f64 = 5.0;
const RANDOM_INSTANCES: u64 = 120;

fn report(id: u32, ok: bool, detail: String) {
    println!(
        "[{}] criterion {id}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn reference() -> (Dictionary, Signal) {
    let dict = build_mexhat_dictionary(&MexHatSpec::reference()).unwrap();
    let f = chirp(&ChirpSpec::reference()).unwrap();
    (dict, f)
}

fn within(value: f64, target: f64) -> bool {
    (value - target).abs() <= REL_TOL * target
}

/// Coefficient mismatch against a fresh least-squares solve on the retained
/// atoms, `‖c − c_ls‖_∞ / ‖c_ls‖_∞`.
fn oracle_mismatch(state: &Decomposition, f: &[f64]) -> f64 {
    let sol = oracle::least_squares_projection(f, &atom_refs(state)).unwrap();
    rel_vec_diff(state.coefficients().unwrap(), &sol.coefficients)
}

/// Random forward run followed by a backward run to a random target.
fn random_pipeline(seed: u64) -> (Vec<f64>, Decomposition, usize) {
    let mut r = rng(seed);
    let atoms = r.random_range(2..=50);
    let dim = r.random_range(atoms.max(10)..=200);
    let dict = random_dictionary(&mut r, atoms, dim);
    let f = random_vec(&mut r, dim);
    let start = r.random_range(2..=atoms);
    let run = oomp_run(
        &signal(f.clone()),
        &dict,
        &ForwardConfig::with_max_atoms(start),
    )
    .unwrap();
    let target = r.random_range(0..run.decomposition.len());
    (f, run.decomposition, target)
}

#[test]
fn criterion_1_forward_60_residual() {
    let (dict, f) = reference();
    let t0 = Instant::now();
    let run = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(60)).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let r = run.decomposition.residual_norm();
    let ok = run.decomposition.len() == 60 && within(r, FORWARD_60) && elapsed < RUNTIME_LIMIT_S;
    report(
        1,
        ok,
        format!("forward-60 residual {r:.6} vs {FORWARD_60} ±10%, {elapsed:.3} s (limit {RUNTIME_LIMIT_S} s)"),
    );
    assert!(ok);
}

#[test]
fn criterion_2_backward_34_residual() {
    let (dict, f) = reference();
    let run = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(60)).unwrap();
    let (shrunk, trace) = boomp_run(run.decomposition, &f, &BackwardConfig::to_count(34)).unwrap();
    let r = shrunk.residual_norm();
    let ok = shrunk.len() == 34 && trace.len() == 26 && within(r, BACKWARD_34);
    report(
        2,
        ok,
        format!("backward 60->34 residual {r:.6} vs {BACKWARD_34} ±10%"),
    );
    assert!(ok);
}

#[test]
fn criterion_3_forward_34_baseline() {
    let (dict, f) = reference();
    let fwd34 = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(34)).unwrap();
    let run = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(60)).unwrap();
    let (shrunk, _) = boomp_run(run.decomposition, &f, &BackwardConfig::to_count(34)).unwrap();
    let base = fwd34.decomposition.residual_norm();
    let back = shrunk.residual_norm();
    let ok = within(base, FORWARD_34) && back < base;
    report(
        3,
        ok,
        format!("forward-34 residual {base:.6} vs {FORWARD_34} ±10%; backward-34 {back:.6} < forward-34"),
    );
    assert!(ok);
}

#[test]
fn criterion_4_dictionary_size() {
    let spec = MexHatSpec::reference();
    let dict = build_mexhat_dictionary(&spec).unwrap();
    let ok = dict.len() == 665 && spec.atom_count() == 665 && dict.dim() == 401;
    report(
        4,
        ok,
        format!("{} atoms of {} samples", dict.len(), dict.dim()),
    );
    assert!(ok);
}

#[test]
fn criterion_5_downdated_coefficients_match_oracle() {
    let mut worst: f64 = 0.0;
    let mut steps = 0usize;
    for seed in 0..RANDOM_INSTANCES {
        let (f, state, target) = random_pipeline(seed);
        let sig = signal(f.clone());
        boomp_run_observed(state, &sig, &BackwardConfig::to_count(target), |s, _| {
            if !s.is_empty() {
                worst = worst.max(oracle_mismatch(s, &f));
            }
            steps += 1;
        })
        .unwrap();
    }
    let random_worst = worst;

    let (dict, f) = reference();
    let run = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(60)).unwrap();
    let mut ref_worst: f64 = 0.0;
    let mut ref_steps = 0usize;
    boomp_run_observed(
        run.decomposition,
        &f,
        &BackwardConfig::to_count(34),
        |s, _| {
            ref_worst = ref_worst.max(oracle_mismatch(s, f.samples()));
            ref_steps += 1;
        },
    )
    .unwrap();

    let ok = random_worst <= 1e-8 && ref_worst <= 1e-8 && ref_steps == 26;
    report(
        5,
        ok,
        format!(
            "{RANDOM_INSTANCES} random runs ({steps} deletions) worst {random_worst:.2e}; chirp run ({ref_steps} deletions) worst {ref_worst:.2e}; tol 1e-8"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_deletion_choice_matches_oracle() {
    let mut disagreements = 0usize;
    let mut worst_identity: f64 = 0.0;
    for seed in 0..RANDOM_INSTANCES {
        let mut r = rng(10_000 + seed);
        let atoms = r.random_range(1..=8);
        let dim = atoms + r.random_range(0..=8);
        let dict = random_dictionary(&mut r, atoms, dim);
        let f = random_vec(&mut r, dim);
        let state = full_decomposition(&dict, &f);

        let (j, value) =
            select_deletion_index(&state, DeletionCriterion::MinResidualIncrease).unwrap();
        let refs = atom_refs(&state);
        let (oj, _) = oracle::best_single_deletion(&f, &refs).unwrap();
        if j != oj {
            // Only a numerical near-tie may split the two.
            let loo = oracle::leave_one_out_residuals(&f, &refs).unwrap();
            let full_sq = norm_sq(state.residual());
            let gap = ((loo[j].powi(2) - full_sq) - (loo[oj].powi(2) - full_sq)).abs();
            if gap > 1e-10 * norm_sq(&f) {
                disagreements += 1;
            }
        }
        for k in 0..atoms {
            let (rk, rsq) = deletion_residual(&state, k).unwrap();
            let measured = norm_sq(&rk);
            let floor = f64::EPSILON * norm_sq(&f);
            worst_identity = worst_identity.max((measured - rsq).abs() / rsq.max(floor));
        }
        assert!(value >= 0.0);
    }
    let ok = disagreements == 0 && worst_identity <= 1e-10;
    report(
        6,
        ok,
        format!(
            "{RANDOM_INSTANCES} instances, {disagreements} argmin disagreements; worst ‖R_j‖² identity {worst_identity:.2e} (tol 1e-10)"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_invariants_every_step() {
    let mut random = CheckSummary::default();
    for seed in 0..RANDOM_INSTANCES {
        let mut r = rng(20_000 + seed);
        let atoms = r.random_range(2..=50);
        let dim = r.random_range(atoms.max(10)..=200);
        let dict = random_dictionary(&mut r, atoms, dim);
        let f = signal(random_vec(&mut r, dim));
        let run = oomp_run_observed(&f, &dict, &ForwardConfig::with_max_atoms(atoms), |s| {
            random.absorb(&check_state(s, f.samples()).unwrap());
        })
        .unwrap();
        boomp_run_observed(
            run.decomposition,
            &f,
            &BackwardConfig::to_count(0),
            |s, _| {
                random.absorb(&check_state(s, f.samples()).unwrap());
            },
        )
        .unwrap();
    }

    let (dict, f) = reference();
    let mut chirp_run = CheckSummary::default();
    let run = oomp_run_observed(&f, &dict, &ForwardConfig::with_max_atoms(60), |s| {
        chirp_run.absorb(&check_state(s, f.samples()).unwrap());
    })
    .unwrap();
    boomp_run_observed(
        run.decomposition,
        &f,
        &BackwardConfig::to_count(34),
        |s, _| {
            chirp_run.absorb(&check_state(s, f.samples()).unwrap());
        },
    )
    .unwrap();

    let ok = random.passes(&Tolerances::RANDOM) && chirp_run.passes(&Tolerances::MEXHAT);
    report(
        7,
        ok,
        format!(
            "random: {} states, biorth {:.2e}, resid-orth {:.2e} (tol 1e-8); chirp: {} states, biorth {:.2e} (tol 1e-6), resid-orth {:.2e} (tol 1e-8)",
            random.states,
            random.biorthogonality,
            random.residual_orthogonality,
            chirp_run.states,
            chirp_run.biorthogonality,
            chirp_run.residual_orthogonality,
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_additivity() {
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for seed in 0..RANDOM_INSTANCES {
        let (f, state, target) = random_pipeline(30_000 + seed);
        let mut audit = BackwardAudit::new(&state, &f).unwrap();
        boomp_run_observed(
            state,
            &signal(f.clone()),
            &BackwardConfig::to_count(target),
            |s, st| {
                audit.observe(s, st.criterion_value).unwrap();
            },
        )
        .unwrap();
        worst = worst.max(audit.additivity_rel);
        monotone &= audit.monotone;
    }

    let (dict, f) = reference();
    let run = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(60)).unwrap();
    let mut audit = BackwardAudit::new(&run.decomposition, f.samples()).unwrap();
    let (shrunk, trace) = boomp_run_observed(
        run.decomposition.clone(),
        &f,
        &BackwardConfig::to_count(34),
        |s, st| {
            audit.observe(s, st.criterion_value).unwrap();
        },
    )
    .unwrap();
    // Direct form: ‖f − f_final‖² vs ‖f − f_V‖² + Σ criterion values.
    let start_sq = run.decomposition.residual_norm().powi(2);
    let sum: f64 = trace.steps.iter().map(|s| s.criterion_value).sum();
    let direct = rel_diff(shrunk.residual_norm().powi(2), start_sq + sum);

    let ok = worst <= 1e-8
        && audit.additivity_rel <= 1e-8
        && direct <= 1e-8
        && monotone
        && audit.monotone;
    report(
        8,
        ok,
        format!(
            "random worst {worst:.2e}; chirp {:.2e} (direct {direct:.2e}); tol 1e-8",
            audit.additivity_rel
        ),
    );
    assert!(ok);
}
