use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rio_core::cavity::{
    self, computational_block, fidelity_sweep, ideal_cnot_on_atoms, physical_cnot_unitary,
    physical_hadamard_unitary, CavitySchedule, StaggeredSchedule, COMPUTATIONAL_INDICES,
};
use rio_core::circuit::GateConst;
use rio_core::linalg::{operator_phase_align, Matrix, StateVector};
use rio_core::protocol::{run_protocol, verify_decompositions, x_bits, BranchBits, DiagonalPhases};
use rio_core::sampling::{haar_state, random_phases};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const PROTOCOL_TOLERANCE: f64 = 1e-10;
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;
pub const GATE_TOLERANCE: f64 = 1e-9;
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;
pub const ZERO_OFFSET_TOLERANCE: f64 = 1e-10;
pub const NORM_TOLERANCE: f64 = 1e-12;
pub const REFERENCE_OFFSET: f64 = 0.01;
pub const REFERENCE_FIDELITY: f64 = 0.998;
pub const REFERENCE_SLACK: f64 = 0.005;

/// Result of one subcommand, ready to be rendered in either format.
pub struct Output {
    pub json: Value,
    pub csv_header: &'static [&'static str],
    pub csv_rows: Vec<Vec<String>>,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    /// Set when a verification failed.
    pub failure: Option<String>,
}

fn core(e: rio_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn matrix_json(m: &Matrix<f64>) -> Value {
    let n = m.dim();
    let rows: Vec<Vec<[f64; 2]>> = (0..n)
        .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct ProtocolCase {
    x: u32,
    x_bits: String,
    sample: usize,
    b1: u8,
    b2: u8,
    a1: u8,
    a2: u8,
    bob_probability: f64,
    alice_probability: f64,
    residual: f64,
}

pub fn verify_protocol(cfg: &RunConfig) -> Result<Output, CliError> {
    let tol = cfg.tolerance_or(PROTOCOL_TOLERANCE);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = Vec::with_capacity(384 * cfg.samples);
    for x in 1..=24 {
        for sample in 0..cfg.samples {
            let xi: StateVector<f64> = haar_state(&mut rng, &[2, 2]);
            let t: DiagonalPhases<f64> = random_phases(&mut rng);
            for bits in BranchBits::all() {
                let tr = run_protocol(x, &t, &xi, Some(bits), cfg.seed).map_err(core)?;
                cases.push(ProtocolCase {
                    x,
                    x_bits: tr.x_bits,
                    sample,
                    b1: bits.b1,
                    b2: bits.b2,
                    a1: bits.a1,
                    a2: bits.a2,
                    bob_probability: tr.bob_probability,
                    alice_probability: tr.alice_probability,
                    residual: tr.residual,
                });
            }
        }
    }
    let max_residual = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    let first = cases.iter().find(|c| c.residual.is_nan() || c.residual >= tol);
    let failure = first.map(|c| {
        format!(
            "x = {} ({}), branch b1b2a1a2 = {}{}{}{}, sample {}: residual {:e} >= {:e}",
            c.x, c.x_bits, c.b1, c.b2, c.a1, c.a2, c.sample, c.residual, tol
        )
    });
    let first_json = first.map(|c| json!({"x": c.x, "x_bits": c.x_bits, "b1": c.b1, "b2": c.b2, "a1": c.a1, "a2": c.a2, "sample": c.sample, "residual": c.residual}));
    let summary = vec![format!(
        "{} cases, max residual {:e}, tolerance {:e}",
        cases.len(),
        max_residual,
        tol
    )];
    let csv_rows = cases
        .iter()
        .map(|c| {
            vec![
                c.x.to_string(),
                c.x_bits.clone(),
                c.sample.to_string(),
                c.b1.to_string(),
                c.b2.to_string(),
                c.a1.to_string(),
                c.a2.to_string(),
                num(c.bob_probability),
                num(c.alice_probability),
                num(c.residual),
            ]
        })
        .collect();
    let json = json!({
        "command": "verify-protocol",
        "config": cfg,
        "tolerance": tol,
        "case_count": cases.len(),
        "max_residual": max_residual,
        "pass": failure.is_none(),
        "first_failure": first_json,
        "cases": cases,
    });
    Ok(Output {
        json,
        csv_header: &[
            "x", "x_bits", "sample", "b1", "b2", "a1", "a2", "bob_probability", "alice_probability", "residual",
        ],
        csv_rows,
        summary,
        failure,
    })
}

pub fn verify_decompositions_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let tol = cfg.tolerance_or(DECOMPOSITION_TOLERANCE);
    let audit = verify_decompositions::<f64>();
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut mismatched = Vec::new();
    for a in &audit {
        let ok = a.exact_match && a.max_deviation <= tol;
        if !ok {
            mismatched.push(a.x);
        }
        let perm = a.permutation.labels().join(" ");
        let mut row = json!({
            "x": a.x,
            "x_bits": x_bits(a.x),
            "permutation": a.permutation.labels(),
            "published": a.published.to_string(),
            "published_length": a.published.len(),
            "match": ok,
            "max_deviation": a.max_deviation,
            "synthesized": a.synthesized.to_string(),
            "synthesized_length": a.synthesized.len(),
        });
        if cfg.verbose {
            row["product"] = matrix_json(&a.product);
            row["expected"] = matrix_json(&a.expected);
        }
        rows.push(row);
        csv_rows.push(vec![
            a.x.to_string(),
            x_bits(a.x),
            perm,
            a.published.to_string(),
            a.published.len().to_string(),
            ok.to_string(),
            num(a.max_deviation),
            a.synthesized.to_string(),
            a.synthesized.len().to_string(),
        ]);
    }
    let failure = (!mismatched.is_empty())
        .then(|| format!("published sequences disagree with R2(x) for x in {mismatched:?}"));
    let summary = vec![format!(
        "{}/{} published sequences match",
        audit.len() - mismatched.len(),
        audit.len()
    )];
    let json = json!({
        "command": "verify-decompositions",
        "tolerance": tol,
        "pass": failure.is_none(),
        "mismatched": mismatched,
        "rows": rows,
    });
    Ok(Output {
        json,
        csv_header: &[
            "x",
            "x_bits",
            "permutation",
            "published",
            "published_length",
            "match",
            "max_deviation",
            "synthesized",
            "synthesized_length",
        ],
        csv_rows,
        summary,
        failure,
    })
}

#[derive(Serialize)]
struct GateRow {
    gate: &'static str,
    schedule: &'static str,
    offset_fraction: f64,
    residual: f64,
    leakage: Option<f64>,
    checked: bool,
    pass: bool,
}

fn cnot_leakage(u: &rio_core::UnitaryMatrix64) -> f64 {
    COMPUTATIONAL_INDICES
        .iter()
        .map(|&col| {
            (0..u.dim())
                .filter(|r| !COMPUTATIONAL_INDICES.contains(r))
                .map(|r| u[(r, col)].norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn physical_gates(cfg: &RunConfig) -> Result<Output, CliError> {
    let tol = cfg.tolerance_or(GATE_TOLERANCE);
    let params = cfg.params();
    let ideal_block = computational_block(&ideal_cnot_on_atoms::<f64>());

    let cnot = physical_cnot_unitary::<f64>(&params, CavitySchedule::Ideal).map_err(core)?;
    let (_, cnot_res) = operator_phase_align(&ideal_block, &computational_block(&cnot)).map_err(core)?;
    let cnot_leak = cnot_leakage(&cnot);

    let schedule = CavitySchedule::Staggered(StaggeredSchedule::new(cfg.offset, 1).map_err(core)?);
    let staggered = physical_cnot_unitary::<f64>(&params, schedule).map_err(core)?;
    let (_, stag_res) = operator_phase_align(&ideal_block, &computational_block(&staggered)).map_err(core)?;

    let h = physical_hadamard_unitary::<f64>(&params).map_err(core)?;
    let (_, h_res) = operator_phase_align(GateConst::H.matrix::<f64>().matrix(), h.matrix()).map_err(core)?;

    let rows = vec![
        GateRow {
            gate: "cnot",
            schedule: "ideal",
            offset_fraction: 0.0,
            residual: cnot_res,
            leakage: Some(cnot_leak),
            checked: true,
            pass: cnot_res < tol && cnot_leak < LEAKAGE_TOLERANCE,
        },
        GateRow {
            gate: "hadamard",
            schedule: "ideal",
            offset_fraction: 0.0,
            residual: h_res,
            leakage: None,
            checked: true,
            pass: h_res < tol,
        },
        GateRow {
            gate: "cnot",
            schedule: "staggered",
            offset_fraction: cfg.offset,
            residual: stag_res,
            leakage: Some(cnot_leakage(&staggered)),
            checked: false,
            pass: true,
        },
    ];
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} residual {:e}", r.gate, r.residual))
        .collect();
    let failure = (!failed.is_empty()).then(|| failed.join("; "));
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "{} ({}, offset {}): residual {:e}{}",
                r.gate,
                r.schedule,
                r.offset_fraction,
                r.residual,
                r.leakage.map(|l| format!(", |i> leakage {l:e}")).unwrap_or_default()
            )
        })
        .collect();
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                r.gate.to_string(),
                r.schedule.to_string(),
                num(r.offset_fraction),
                num(r.residual),
                opt(r.leakage),
                r.checked.to_string(),
                r.pass.to_string(),
            ]
        })
        .collect();
    let mut json = json!({
        "command": "physical-gates",
        "config": cfg,
        "tolerance": tol,
        "leakage_tolerance": LEAKAGE_TOLERANCE,
        "lambda": params.lambda(),
        "pass": failure.is_none(),
        "gates": rows,
    });
    if cfg.verbose {
        json["matrices"] = json!({
            "cnot": matrix_json(cnot.matrix()),
            "cnot_staggered": matrix_json(staggered.matrix()),
            "hadamard": matrix_json(h.matrix()),
        });
    }
    Ok(Output {
        json,
        csv_header: &["gate", "schedule", "offset_fraction", "residual", "leakage", "checked", "pass"],
        csv_rows,
        summary,
        failure,
    })
}

pub fn fidelity_sweep_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let tol = cfg.tolerance_or(ZERO_OFFSET_TOLERANCE);
    let rows = fidelity_sweep(cfg.offset, cfg.step, cfg.phase, &cfg.params()).map_err(core)?;
    let n = rows.len() as f64;
    let min = rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.fidelity).fold(f64::NEG_INFINITY, f64::max);
    let mean = rows.iter().map(|r| r.fidelity).sum::<f64>() / n;

    let mut problems = Vec::new();
    for r in &rows {
        let norm = r.y_gg.powi(2) + r.y_ge.powi(2) + r.y_eg.powi(2) + r.y_ee.powi(2);
        if (norm - 1.0).abs() > NORM_TOLERANCE || !(0.0..=1.0).contains(&r.fidelity) {
            problems.push(format!("row {:?} violates the row invariants", [r.y_gg, r.y_ge, r.y_eg]));
        }
        if cfg.offset == 0.0 && (r.fidelity - 1.0).abs() > tol {
            problems.push(format!("fidelity {} at zero offset", r.fidelity));
        }
    }
    let failure = problems.into_iter().next();

    let reference = (cfg.offset == REFERENCE_OFFSET).then(|| {
        json!({
            "offset_fraction": REFERENCE_OFFSET,
            "fidelity": REFERENCE_FIDELITY,
            "slack": REFERENCE_SLACK,
            "difference": max - REFERENCE_FIDELITY,
            "within": (max - REFERENCE_FIDELITY).abs() <= REFERENCE_SLACK,
        })
    });
    let mut summary = vec![format!(
        "{} states at offset {}: min {min:.10}, max {max:.10}, mean {mean:.10}",
        rows.len(),
        cfg.offset
    )];
    if cfg.offset == REFERENCE_OFFSET {
        summary.push(format!(
            "max fidelity {max:.10} vs reference {REFERENCE_FIDELITY} (+/- {REFERENCE_SLACK})"
        ));
    }
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                num(r.y_gg),
                num(r.y_ge),
                num(r.y_eg),
                num(r.y_ee),
                num(r.offset_fraction),
                num(r.fidelity),
            ]
        })
        .collect();
    let json = json!({
        "command": "fidelity-sweep",
        "config": cfg,
        "row_count": rows.len(),
        "min_fidelity": min,
        "max_fidelity": max,
        "mean_fidelity": mean,
        "reference": reference,
        "pass": failure.is_none(),
        "rows": rows,
    });
    Ok(Output {
        json,
        csv_header: &["y_gg", "y_ge", "y_eg", "y_ee", "offset_fraction", "fidelity"],
        csv_rows,
        summary,
        failure,
    })
}

pub fn timing_report_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let report = cavity::timing_report(&cfg.params());
    let quantities = [
        ("cnot_cavity_time", report.cnot_cavity_time),
        ("jc_time", report.jc_time),
        ("pulse_time", report.pulse_time),
        ("photon_lifetime", report.photon_lifetime),
        ("effective_decay_time", report.effective_decay_time),
        ("radiative_time", report.radiative_time),
        ("total_protocol_time", report.total_protocol_time),
    ];
    let mut csv_rows: Vec<Vec<String>> = quantities
        .iter()
        .map(|(k, v)| vec![k.to_string(), num(*v), String::new(), String::new(), String::new()])
        .collect();
    for c in &report.checks {
        csv_rows.push(vec![
            c.name.clone(),
            num(c.duration),
            num(c.bound),
            num(c.ratio),
            c.pass.to_string(),
        ]);
    }
    let mut summary: Vec<String> = quantities.iter().map(|(k, v)| format!("{k}: {v:.4e} s")).collect();
    summary.extend(report.checks.iter().map(|c| {
        format!(
            "{}: ratio {:.3e} ({})",
            c.name,
            c.ratio,
            if c.pass { "pass" } else { "FAIL" }
        )
    }));
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("feasibility checks failed: {}", failed.join(", ")));
    let json = json!({
        "command": "timing-report",
        "config": cfg,
        "feasibility_ratio": cavity::FEASIBILITY_RATIO,
        "pass": failure.is_none(),
        "report": report,
    });
    Ok(Output {
        json,
        csv_header: &["item", "value", "bound", "ratio", "pass"],
        csv_rows,
        summary,
        failure,
    })
}
