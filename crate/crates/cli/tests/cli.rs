use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rio")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn schema(name: &str) -> Value {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "schemas", &format!("{name}.schema.json")]
        .iter()
        .collect();
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(name)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn every_report_matches_its_schema() {
    for (cmd, extra) in [
        ("verify-protocol", vec!["--samples", "1"]),
        ("verify-decompositions", vec!["--verbose"]),
        ("verify-decompositions", vec![]),
        ("physical-gates", vec!["--verbose"]),
        ("fidelity-sweep", vec!["--step", "0.25"]),
        ("fidelity-sweep", vec!["--step", "0.25", "--offset", "0"]),
        ("timing-report", vec![]),
    ] {
        let mut args = vec![cmd];
        args.extend(extra);
        let out = rio(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_valid(cmd, &json_of(&out));
    }
}

#[test]
fn protocol_campaign_default_size() {
    let out = rio(&["verify-protocol"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["case_count"], 384 * 50);
    assert_eq!(doc["cases"].as_array().unwrap().len(), 384 * 50);
    assert!(doc["max_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["first_failure"], Value::Null);
}

#[test]
fn protocol_reports_are_byte_identical() {
    for format in ["json", "csv"] {
        let args = ["verify-protocol", "--samples", "1", "--seed", "7", "--format", format];
        let a = rio(&args);
        let b = rio(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
    let other = rio(&["verify-protocol", "--samples", "1", "--seed", "8"]);
    let first = rio(&["verify-protocol", "--samples", "1", "--seed", "7"]);
    assert_ne!(other.stdout, first.stdout);
}

#[test]
fn zero_tolerance_is_rejected() {
    let out = rio(&["verify-protocol", "--samples", "1", "--tolerance", "0"]);
    assert_ne!(out.status.code(), Some(0));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tiny_tolerance_fails_verification() {
    let out = rio(&["verify-protocol", "--samples", "1", "--tolerance", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json_of(&out);
    assert_eq!(doc["pass"], false);
    assert!(doc["first_failure"]["x"].is_u64());
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));
}

#[test]
fn decomposition_report() {
    let out = rio(&["verify-decompositions", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,x_bits,permutation,published,published_length,match,max_deviation,synthesized,synthesized_length"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 24);
    assert!(rows[9].starts_with("10,01010,01 10 11 00,"));
    assert!(rows.iter().all(|r| r.contains(",true,")));
}

#[test]
fn physical_gates_independent_of_dispersive_ratio() {
    let mut residuals = Vec::new();
    for ratio in ["10", "50"] {
        let out = rio(&["physical-gates", "--delta-over-g", ratio]);
        assert_eq!(out.status.code(), Some(0));
        let doc = json_of(&out);
        assert!(doc.get("matrices").is_none());
        let ideal: Vec<f64> = doc["gates"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|g| g["schedule"] == "ideal")
            .map(|g| g["residual"].as_f64().unwrap())
            .collect();
        assert!(ideal.iter().all(|&r| r < 1e-9));
        residuals.push(ideal);
    }
    for (a, b) in residuals[0].iter().zip(&residuals[1]) {
        assert!((a - b).abs() < 1e-12);
    }
    let verbose = json_of(&rio(&["physical-gates", "--verbose"]));
    assert_eq!(verbose["matrices"]["cnot"].as_array().unwrap().len(), 9);
    assert_eq!(verbose["matrices"]["hadamard"].as_array().unwrap().len(), 2);
}

fn lattice_count(n: i64) -> usize {
    let mut count = 0;
    for i in 1..=n {
        for j in 1..=n {
            let rest = n * n - i * i - j * j;
            if rest >= 1 {
                count += (rest as f64).sqrt().floor() as usize;
            }
        }
    }
    count
}

#[test]
fn sweep_csv_shape() {
    let out = rio(&["fidelity-sweep", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "y_gg,y_ge,y_eg,y_ee,offset_fraction,fidelity");
    assert_eq!(lines.count(), lattice_count(10));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max"));
}

#[test]
fn sweep_at_zero_offset_is_perfect() {
    let doc = json_of(&rio(&["fidelity-sweep", "--offset", "0"]));
    assert_eq!(doc["reference"], Value::Null);
    for row in doc["rows"].as_array().unwrap() {
        assert!((row["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sweep_compares_with_reference() {
    let doc = json_of(&rio(&["fidelity-sweep"]));
    assert_eq!(doc["row_count"], lattice_count(10));
    let max = doc["max_fidelity"].as_f64().unwrap();
    assert!((0.995..=1.0).contains(&max));
    assert_eq!(doc["reference"]["fidelity"], 0.998);
    assert_eq!(doc["reference"]["within"], true);
}

#[test]
fn timing_report_defaults() {
    let out = rio(&["timing-report"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json_of(&out)["report"];
    let within = |k: &str, lo: f64, hi: f64| {
        let v = r[k].as_f64().unwrap();
        assert!((lo..=hi).contains(&v), "{k} = {v}");
    };
    within("cnot_cavity_time", 1.9e-4, 2.2e-4);
    within("jc_time", 1.9e-5, 2.2e-5);
    within("photon_lifetime", 3.0e-4, 3.3e-4);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(rio(&["timing-report", "--q-factor", "1e5"]).status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# campaign\nseed = 11\nsamples = 1\ng-khz = 30\n").unwrap();
    let path = cfg.to_str().unwrap();
    let doc = json_of(&rio(&["timing-report", "--config", path]));
    assert_eq!(doc["config"]["seed"], 11);
    assert_eq!(doc["config"]["g_khz"], 30.0);
    let doc = json_of(&rio(&["timing-report", "--config", path, "--g-khz", "24", "--seed", "3"]));
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["config"]["g_khz"], 24.0);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(rio(&["timing-report", "--config", path]).status.code(), Some(2));
    let missing = dir.path().join("absent.conf");
    assert_eq!(
        rio(&["timing-report", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn out_path_receives_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gates.json");
    let out = rio(&["physical-gates", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_valid("physical-gates", &doc);
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        vec!["fidelity-sweep", "--step", "0.3"],
        vec!["fidelity-sweep", "--offset", "0.9"],
        vec!["verify-protocol", "--samples", "0"],
        vec!["timing-report", "--q-factor", "-4"],
        vec!["timing-report", "--format", "xml"],
        vec!["no-such-command"],
        vec![],
    ] {
        assert_eq!(rio(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn weak_dispersion_warns() {
    let out = rio(&["physical-gates", "--delta-over-g", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}
