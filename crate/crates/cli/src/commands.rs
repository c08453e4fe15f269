use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pursuit_core::backward::{boomp_run_observed, BackwardConfig, DeletionCriterion};
use pursuit_core::dictgen::{build_mexhat_dictionary, chirp, ChirpSpec, MexHatSpec};
use pursuit_core::forward::{oomp_run_observed, ForwardConfig, ForwardRun, Scoring};
use pursuit_core::io::{self, DecompositionArtifact};
use pursuit_core::verify::{self, BackwardAudit, CheckSummary, Tolerances};
use pursuit_core::{Decomposition, DeletionTrace, Dictionary, PursuitError, Signal};

use crate::report::{coefficient_table, sig4, ResidualNorms, RunReport, Timing, Verification};
use crate::{
    CliError, CriterionArg, DecomposeArgs, GenDictArgs, GenSignalArgs, ReproduceArgs, ShrinkArgs,
};

type CliResult<T> = Result<T, CliError>;

/// Relative tolerances for the per-deletion residual identity and for the
/// additivity of squared residual increments.
const IDENTITY_TOL: f64 = 1e-10;
const ADDITIVITY_TOL: f64 = 1e-8;

fn parse_f64(s: &str, flag: &str) -> CliResult<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{flag}: {s:?} is not a number")))
}

fn parse_list(s: &str, flag: &str, n: usize) -> CliResult<Vec<f64>> {
    let v = s
        .split(',')
        .map(|p| parse_f64(p, flag))
        .collect::<CliResult<Vec<_>>>()?;
    if v.len() != n {
        return Err(CliError::Usage(format!(
            "--{flag} expects {n} comma-separated values, got {}",
            v.len()
        )));
    }
    Ok(v)
}

pub fn parse_scales(s: &str) -> CliResult<Vec<i32>> {
    let bad = || CliError::Usage(format!("--scales: cannot parse {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: i32 = a.trim().parse().map_err(|_| bad())?;
        let b: i32 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Core {
        stage: "output",
        source: e.into(),
    })
}

fn out_path(dir: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        dir.join(file)
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn gen_dict(a: &GenDictArgs) -> CliResult<()> {
    let interval = parse_list(&a.interval, "interval", 2)?;
    let spec = MexHatSpec {
        scales: parse_scales(&a.scales)?,
        translation_step: a.step,
        interval: (interval[0], interval[1]),
        grid_step: a.grid,
        margin_indices: a.margin,
    };
    let dict = build_mexhat_dictionary(&spec).map_err(CliError::at("dictionary generation"))?;
    ensure_dir(&a.out.output_dir)?;
    let path = out_path(&a.out.output_dir, &a.output);
    io::write_dictionary(&path, &dict, &spec.times())
        .map_err(CliError::at("writing dictionary"))?;
    println!(
        "{} atoms × {} samples → {}",
        dict.len(),
        dict.dim(),
        path.display()
    );
    Ok(())
}

pub fn gen_signal(a: &GenSignalArgs) -> CliResult<()> {
    let c = parse_list(&a.chirp, "chirp", 3)?;
    let g = parse_list(&a.grid, "grid", 3)?;
    let spec = ChirpSpec {
        f0: c[0],
        t1: c[1],
        f1: c[2],
        grid: (g[0], g[1], g[2]),
    };
    let signal = chirp(&spec).map_err(CliError::at("signal generation"))?;
    ensure_dir(&a.out.output_dir)?;
    let path = out_path(&a.out.output_dir, &a.output);
    io::write_signal_csv(&path, &signal).map_err(CliError::at("writing signal"))?;
    println!("{} samples → {}", signal.len(), path.display());
    Ok(())
}

fn load_inputs(signal: &Path, dict: &Path) -> CliResult<(Signal, Dictionary)> {
    let f = io::read_signal_csv(signal).map_err(CliError::at("reading signal"))?;
    let (d, _) = io::read_dictionary(dict).map_err(CliError::at("reading dictionary"))?;
    if d.dim() != f.len() {
        return Err(CliError::Core {
            stage: "loading inputs",
            source: PursuitError::DimensionMismatch {
                expected: d.dim(),
                found: f.len(),
            },
        });
    }
    Ok((f, d))
}

struct ForwardOutcome {
    run: ForwardRun,
    checks: Option<CheckSummary>,
    elapsed_ms: f64,
}

fn run_forward(
    f: &Signal,
    dict: &Dictionary,
    cfg: &ForwardConfig,
    verify: bool,
) -> CliResult<ForwardOutcome> {
    let start = Instant::now();
    let mut checks = CheckSummary::default();
    let mut failure = None;
    let run = oomp_run_observed(f, dict, cfg, |s| {
        if verify {
            match verify::check_state(s, f.samples()) {
                Ok(c) => checks.absorb(&c),
                Err(e) => failure = Some(e),
            }
        }
    })
    .map_err(CliError::at("forward pursuit"))?;
    if let Some(e) = failure {
        return Err(CliError::Core {
            stage: "forward verification",
            source: e,
        });
    }
    Ok(ForwardOutcome {
        run,
        checks: verify.then_some(checks),
        elapsed_ms: ms(start),
    })
}

struct BackwardOutcome {
    state: Decomposition,
    trace: DeletionTrace,
    audit: Option<BackwardAudit>,
    elapsed_ms: f64,
}

fn run_backward(
    state: Decomposition,
    f: &Signal,
    cfg: &BackwardConfig,
    verify: bool,
) -> CliResult<BackwardOutcome> {
    let start = Instant::now();
    let mut audit = if verify {
        Some(
            BackwardAudit::new(&state, f.samples())
                .map_err(CliError::at("backward verification"))?,
        )
    } else {
        None
    };
    let mut failure = None;
    let (state, trace) = boomp_run_observed(state, f, cfg, |s, step| {
        if let Some(a) = audit.as_mut() {
            if let Err(e) = a.observe(s, step.criterion_value) {
                failure = Some(e);
            }
        }
    })
    .map_err(CliError::at("backward pursuit"))?;
    if let Some(e) = failure {
        return Err(CliError::Core {
            stage: "backward verification",
            source: e,
        });
    }
    Ok(BackwardOutcome {
        state,
        trace,
        audit,
        elapsed_ms: ms(start),
    })
}

fn verification(
    forward: Option<CheckSummary>,
    audit: Option<&BackwardAudit>,
    tol: &Tolerances,
) -> Verification {
    let mut passed = forward.is_none_or(|c| c.passes(tol));
    if let Some(a) = audit {
        passed &= a.states.states == 0 || a.states.passes(tol);
        passed &= a.identity_rel <= IDENTITY_TOL;
        passed &= a.additivity_rel <= ADDITIVITY_TOL;
        passed &= a.monotone;
    }
    Verification {
        passed,
        forward,
        backward: audit.map(|a| a.states),
        additivity_rel_error: audit.map(|a| a.additivity_rel),
        criterion_rel_error: audit.map(|a| a.identity_rel),
    }
}

fn print_verification(v: &Verification) {
    let line = |name: &str, c: &CheckSummary| {
        println!(
            "  {name:<8} {:>3} states  biorth {:.1e}  resid-orth {:.1e}  duality {:.1e}  oracle {:.1e}",
            c.states, c.biorthogonality, c.residual_orthogonality, c.duality, c.oracle_coefficients
        );
    };
    if let Some(c) = &v.forward {
        line("forward", c);
    }
    if let Some(c) = &v.backward {
        line("backward", c);
    }
    if let (Some(a), Some(i)) = (v.additivity_rel_error, v.criterion_rel_error) {
        println!("  additivity {a:.1e}  residual identity {i:.1e}");
    }
    println!("verify: {}", if v.passed { "PASS" } else { "FAIL" });
}

fn write_coefficients(path: &Path, state: &Decomposition, dict: &Dictionary) -> CliResult<()> {
    let mut s = String::from("position,index,scale,translation,coefficient\n");
    for row in coefficient_table(state, dict) {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            row.position,
            row.index,
            opt(row.scale.map(|v| v.to_string())),
            opt(row.translation.map(|v| v.to_string())),
            row.coefficient
        );
    }
    std::fs::write(path, s).map_err(|e| CliError::Core {
        stage: "writing coefficients",
        source: e.into(),
    })
}

fn write_series(path: &Path, f: &Signal, state: &Decomposition) -> CliResult<()> {
    let approx = state
        .approximation()
        .map_err(CliError::at("approximation"))?;
    let diff: Vec<f64> = f
        .samples()
        .iter()
        .zip(&approx)
        .map(|(a, b)| (a - b).abs())
        .collect();
    io::write_series_csv(
        path,
        &["t", "signal", "approximation", "abs_difference"],
        &[&f.times(), f.samples(), &approx, &diff],
    )
    .map_err(CliError::at("writing series"))
}

fn write_trace(path: &Path, trace: &DeletionTrace) -> CliResult<()> {
    let mut s = String::from(
        "step,position,dictionary_index,coefficient,criterion_value,residual_norm_after\n",
    );
    for (k, st) in trace.steps.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            k + 1,
            st.position,
            st.dictionary_index,
            st.coefficient,
            st.criterion_value,
            st.residual_norm_after
        );
    }
    std::fs::write(path, s).map_err(|e| CliError::Core {
        stage: "writing trace",
        source: e.into(),
    })
}

fn write_report(path: &Path, report: &RunReport) -> CliResult<()> {
    io::write_json(path, report).map_err(CliError::at("writing report"))
}

fn write_artifact(
    path: &Path,
    state: &Decomposition,
    dict: &Dictionary,
    f: &Signal,
    eps: f64,
) -> CliResult<()> {
    let art =
        DecompositionArtifact::capture(state, dict, f, eps).map_err(CliError::at("artifact"))?;
    io::write_json(path, &art).map_err(CliError::at("writing artifact"))
}

fn fail_if(v: &Option<Verification>) -> CliResult<()> {
    match v {
        Some(v) if !v.passed => Err(CliError::Verification(
            "one or more invariants exceeded tolerance".into(),
        )),
        _ => Ok(()),
    }
}

pub fn decompose(a: &DecomposeArgs) -> CliResult<()> {
    let (f, dict) = load_inputs(&a.signal, &a.dict)?;
    let cfg = ForwardConfig {
        max_atoms: a.max_atoms,
        residual_tol: a.tol,
        dependence_eps: a.dependence_eps,
        scoring: if a.from_scratch {
            Scoring::FromScratch
        } else {
            Scoring::Incremental
        },
    };
    let fw = run_forward(&f, &dict, &cfg, a.verify)?;
    let state = &fw.run.decomposition;
    let ver = a
        .verify
        .then(|| verification(fw.checks, None, &Tolerances::MEXHAT));

    let dir = &a.out.output_dir;
    ensure_dir(dir)?;
    let report = RunReport {
        command: "decompose",
        config: serde_json::json!({
            "signal": a.signal,
            "dictionary": a.dict,
            "forward": cfg,
        }),
        dictionary_atoms: dict.len(),
        forward_history: fw.run.history.clone(),
        forward_stop: Some(fw.run.stop),
        deletion_trace: vec![],
        coefficients: coefficient_table(state, &dict),
        residual_norms: ResidualNorms {
            signal: f.norm(),
            forward_final: Some(state.residual_norm()),
            ..Default::default()
        },
        timing: Timing {
            forward_ms: Some(fw.elapsed_ms),
            ..Default::default()
        },
        verification: ver.clone(),
    };
    write_report(&dir.join("decompose_report.json"), &report)?;
    write_coefficients(&dir.join("decompose_coefficients.csv"), state, &dict)?;
    write_series(&dir.join("decompose_series.csv"), &f, state)?;
    write_artifact(
        &dir.join("decomposition.json"),
        state,
        &dict,
        &f,
        cfg.dependence_eps,
    )?;

    println!(
        "forward: {} atoms, residual norm {} (stop: {:?})",
        state.len(),
        sig4(state.residual_norm()),
        fw.run.stop
    );
    if let Some(v) = &ver {
        print_verification(v);
    }
    fail_if(&ver)
}

pub fn shrink(a: &ShrinkArgs) -> CliResult<()> {
    let (f, dict) = load_inputs(&a.signal, &a.dict)?;
    let art: DecompositionArtifact =
        io::read_json(&a.artifact).map_err(CliError::at("reading artifact"))?;
    let state = art
        .restore(&dict, &f)
        .map_err(CliError::at("restoring artifact"))?;
    if a.target_count.is_none() && a.error_budget.is_none() {
        return Err(CliError::Usage(
            "give --target-count, --error-budget, or both".into(),
        ));
    }
    let cfg = BackwardConfig {
        target_count: a.target_count,
        error_budget: a.error_budget,
        criterion: match a.criterion {
            CriterionArg::MinResidual => DeletionCriterion::MinResidualIncrease,
            CriterionArg::NaiveAbsCoeff => DeletionCriterion::NaiveAbsCoeff,
        },
    };
    let start_norm = state.residual_norm();
    let bw = run_backward(state, &f, &cfg, a.verify)?;
    let ver = a
        .verify
        .then(|| verification(None, bw.audit.as_ref(), &Tolerances::MEXHAT));

    let dir = &a.out.output_dir;
    ensure_dir(dir)?;
    let report = RunReport {
        command: "shrink",
        config: serde_json::json!({
            "artifact": a.artifact,
            "signal": a.signal,
            "dictionary": a.dict,
            "backward": cfg,
        }),
        dictionary_atoms: dict.len(),
        forward_history: vec![],
        forward_stop: None,
        deletion_trace: bw.trace.steps.clone(),
        coefficients: coefficient_table(&bw.state, &dict),
        residual_norms: ResidualNorms {
            signal: f.norm(),
            forward_final: Some(start_norm),
            backward_final: Some(bw.state.residual_norm()),
            ..Default::default()
        },
        timing: Timing {
            backward_ms: Some(bw.elapsed_ms),
            ..Default::default()
        },
        verification: ver.clone(),
    };
    write_report(&dir.join("shrink_report.json"), &report)?;
    write_trace(&dir.join("shrink_trace.csv"), &bw.trace)?;
    write_coefficients(&dir.join("shrink_coefficients.csv"), &bw.state, &dict)?;
    write_series(&dir.join("shrink_series.csv"), &f, &bw.state)?;
    write_artifact(
        &dir.join("shrunk_decomposition.json"),
        &bw.state,
        &dict,
        &f,
        art.dependence_eps,
    )?;

    println!(
        "backward: {} → {} atoms, residual norm {} → {}",
        bw.state.len() + bw.trace.len(),
        bw.state.len(),
        sig4(start_norm),
        sig4(bw.state.residual_norm())
    );
    if let Some(v) = &ver {
        print_verification(v);
    }
    fail_if(&ver)
}

pub fn reproduce(a: &ReproduceArgs) -> CliResult<()> {
    let dspec = MexHatSpec::reference();
    let cspec = ChirpSpec::reference();
    let dict = build_mexhat_dictionary(&dspec).map_err(CliError::at("dictionary generation"))?;
    let f = chirp(&cspec).map_err(CliError::at("signal generation"))?;
    println!(
        "dictionary: {} atoms, signal: {} samples",
        dict.len(),
        f.len()
    );

    let fcfg = ForwardConfig::with_max_atoms(a.max_atoms);
    let fw = run_forward(&f, &dict, &fcfg, a.verify)?;
    let forward_norm = fw.run.decomposition.residual_norm();
    let forward_len = fw.run.decomposition.len();
    println!(
        "forward  {forward_len:>3} atoms: residual norm {}",
        sig4(forward_norm)
    );

    let bcfg = BackwardConfig::to_count(a.target_count);
    let bw = run_backward(fw.run.decomposition.clone(), &f, &bcfg, a.verify)?;
    println!(
        "backward {:>3} atoms: residual norm {}",
        bw.state.len(),
        sig4(bw.state.residual_norm())
    );

    let base_start = Instant::now();
    let base = run_forward(
        &f,
        &dict,
        &ForwardConfig::with_max_atoms(a.target_count),
        false,
    )?;
    let base_ms = ms(base_start);
    println!(
        "forward  {:>3} atoms: residual norm {}",
        base.run.decomposition.len(),
        sig4(base.run.decomposition.residual_norm())
    );

    let ver = a
        .verify
        .then(|| verification(fw.checks, bw.audit.as_ref(), &Tolerances::MEXHAT));
    if let Some(v) = &ver {
        print_verification(v);
    }

    if let Some(dir) = &a.output_dir {
        ensure_dir(dir)?;
        let report = RunReport {
            command: "reproduce",
            config: serde_json::json!({
                "dictionary": dspec,
                "signal": cspec,
                "forward": fcfg,
                "backward": bcfg,
            }),
            dictionary_atoms: dict.len(),
            forward_history: fw.run.history.clone(),
            forward_stop: Some(fw.run.stop),
            deletion_trace: bw.trace.steps.clone(),
            coefficients: coefficient_table(&bw.state, &dict),
            residual_norms: ResidualNorms {
                signal: f.norm(),
                forward_final: Some(forward_norm),
                backward_final: Some(bw.state.residual_norm()),
                forward_baseline: Some(base.run.decomposition.residual_norm()),
            },
            timing: Timing {
                forward_ms: Some(fw.elapsed_ms),
                backward_ms: Some(bw.elapsed_ms),
                baseline_ms: Some(base_ms),
            },
            verification: ver.clone(),
        };
        write_report(&dir.join("reproduce_report.json"), &report)?;
        write_trace(&dir.join("reproduce_trace.csv"), &bw.trace)?;
        write_series(&dir.join("backward_series.csv"), &f, &bw.state)?;
        write_series(
            &dir.join("baseline_series.csv"),
            &f,
            &base.run.decomposition,
        )?;
        write_series(&dir.join("forward_series.csv"), &f, &fw.run.decomposition)?;
    }
    fail_if(&ver)
}
