use std::fs;
use std::path::Path;
use std::process::Command;

use qfi_cli::config::ProtocolConfig;
use qfi_cli::output::COLUMNS;
use qfi_cli::{runner, CliError};
use serde_json::json;

fn qfi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qfi"))
}

fn write_config(dir: &Path, doc: &serde_json::Value) -> std::path::PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    p
}

/// Header comment, column row and data rows of a CSV file.
fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (comment, cols, rows)
}

fn col(cols: &[String], name: &str) -> usize {
    cols.iter().position(|c| c == name).unwrap()
}

fn equilibrium(out: &Path) -> serde_json::Value {
    json!({
        "protocol": "equilibrium",
        "model": {"h": 0.5},
        "subsystem": {"sizes": [2, 3]},
        "betas": [1.0, null],
        "chain_length": 6,
        "oracle": true,
        "measure": {"alphas": [[0.5, 0.7]]},
        "output": out
    })
}

#[test]
fn equilibrium_run_matches_the_oracle_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq");
    let cfg = ProtocolConfig::from_value(equilibrium(&out)).unwrap();
    let files = runner::run(&cfg).unwrap();
    assert!(files.iter().any(|f| f.ends_with("simulation.csv")));
    assert!(files.iter().any(|f| f.ends_with("oracle_wydi.csv")));
    let (comment, cols, sim) = read_csv(&out.join("simulation.csv"));
    let (_, cols_o, ora) = read_csv(&out.join("oracle.csv"));
    assert!(comment.starts_with('#'));
    assert_eq!(cols, COLUMNS);
    assert_eq!(cols_o, cols);
    assert_eq!(sim.len(), 4);
    assert_eq!(ora.len(), 4);
    for (s, o) in sim.iter().zip(&ora) {
        assert_eq!(s[col(&cols, "source")], "simulation");
        assert_eq!(o[col(&cols, "source")], "oracle");
        assert_eq!(s[col(&cols, "config_hash")], cfg.hash());
        assert_eq!(s[col(&cols, "version")], qfi_cli::VERSION);
        for name in ["variance", "I_half", "I_third"] {
            let (a, b): (f64, f64) = (s[col(&cols, name)].parse().unwrap(), o[col(&cols, name)].parse().unwrap());
            assert!((a - b).abs() < 1e-8, "{name}: {a} vs {b}");
        }
        let (a, b): (f64, f64) = (s[col(&cols, "qfi_over4")].parse().unwrap(), o[col(&cols, "qfi_over4")].parse().unwrap());
        assert!((a - b).abs() < 1e-4 * b.max(1e-12), "qfi {a} vs {b}");
    }
    assert_eq!(sim[2][col(&cols, "beta")], "inf");
    let (_, wcols, wrows) = read_csv(&out.join("oracle_wydi.csv"));
    assert_eq!(wrows.len(), 4);
    assert_eq!(wrows[0][col(&wcols, "alpha_im")], "0.7");
}

#[test]
fn runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let doc = json!({
            "protocol": "single_kick",
            "model": {"h": 0.5},
            "subsystem": {"half_width": 3},
            "times": [1.0, 2.0],
            "kick": {"kind": "spin_flip"},
            "output": out
        });
        runner::run(&ProtocolConfig::from_value(doc).unwrap()).unwrap();
        texts.push((fs::read(out.join("simulation.csv")).unwrap(), fs::read(out.join("semiclassical.csv")).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn kick_protocols_emit_simulation_and_prediction() {
    let dir = tempfile::tempdir().unwrap();
    for (protocol, kick) in [
        ("single_kick", json!({"kind": "majorana_odd"})),
        ("kick_periodic", json!({"kind": "spin_flip", "period": 2.0})),
        ("kick_grid", json!({"kind": "majorana_odd", "spacing": 6})),
    ] {
        let out = dir.path().join(protocol);
        let doc = json!({
            "protocol": protocol,
            "model": {"h": 0.5},
            "subsystem": {"half_width": 3},
            "times": [1.5, 3.0, 4.5],
            "kick": kick,
            "output": out
        });
        runner::run(&ProtocolConfig::from_value(doc).unwrap()).unwrap();
        let (_, cols, sim) = read_csv(&out.join("simulation.csv"));
        let (_, _, pred) = read_csv(&out.join("semiclassical.csv"));
        assert_eq!(sim.len(), 3, "{protocol}");
        assert_eq!(pred.len(), 3, "{protocol}");
        for r in &sim {
            assert_eq!(r[col(&cols, "subsystem_left")], "-3");
            assert_eq!(r[col(&cols, "subsystem_right")], "3");
            let chi: f64 = r[col(&cols, "chi")].parse().unwrap();
            let (lo, up): (f64, f64) = (r[col(&cols, "lower")].parse().unwrap(), r[col(&cols, "upper")].parse().unwrap());
            let f4: f64 = r[col(&cols, "qfi_over4")].parse().unwrap();
            assert!(chi.is_finite() && lo <= f4 + 1e-6 && f4 <= up + 1e-6, "{protocol}: {lo} {f4} {up}");
        }
        for r in &pred {
            assert!(r[col(&cols, "qfi_over4")].is_empty());
            assert!(r[col(&cols, "chi")].parse::<f64>().unwrap().is_finite());
        }
        assert!(out.join("run.log").exists());
    }
}

#[test]
fn sigma_x_kick_has_no_prediction_and_logs_why() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sx");
    let doc = json!({
        "protocol": "single_kick",
        "model": {"h": 0.5},
        "subsystem": {"half_width": 2},
        "times": [1.0],
        "kick": {"kind": "sigma_x"},
        "output": out
    });
    runner::run(&ProtocolConfig::from_value(doc).unwrap()).unwrap();
    assert!(!out.join("semiclassical.csv").exists());
    assert!(fs::read_to_string(out.join("run.log")).unwrap().contains("no domain walls"));
}

#[test]
fn quench_and_one_particle_protocols() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let doc = json!({
        "protocol": "global_quench",
        "model": {"h": 0.4},
        "quench": {"h0": 0.0},
        "subsystem": {"sizes": [4, 6]},
        "times": [1.0, 3.0],
        "output": out
    });
    runner::run(&ProtocolConfig::from_value(doc).unwrap()).unwrap();
    let (_, cols, sim) = read_csv(&out.join("simulation.csv"));
    let (_, _, pred) = read_csv(&out.join("semiclassical.csv"));
    assert_eq!(sim.len(), 4);
    for (s, p) in sim.iter().zip(&pred) {
        let (a, b): (f64, f64) = (s[col(&cols, "chi")].parse().unwrap(), p[col(&cols, "chi")].parse().unwrap());
        assert!((a - b).abs() < 0.05, "{a} vs {b}");
    }

    let out = dir.path().join("b");
    let doc = json!({
        "protocol": "beyond_sc",
        "model": {"h": 0.5},
        "subsystem": {"half_width": 10},
        "times": [5.0, 20.0, 40.0],
        "output": out
    });
    runner::run(&ProtocolConfig::from_value(doc).unwrap()).unwrap();
    let (_, cols, exact) = read_csv(&out.join("beyond_sc.csv"));
    let (_, _, sc) = read_csv(&out.join("semiclassical.csv"));
    assert_eq!(exact.len(), 3);
    // r/t = 2 is outside the velocity support: both curves vanish there
    let x: f64 = exact[0][col(&cols, "chi")].parse().unwrap();
    let y: f64 = sc[0][col(&cols, "chi")].parse().unwrap();
    assert!((x - y).abs() < 1e-6);
}

#[test]
fn sweep_merges_runs_with_an_axis_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let doc = json!({
        "protocol": "beyond_sc",
        "model": {"h": 0.5},
        "subsystem": {"half_width": 10},
        "times": [20.0],
        "output": out
    });
    runner::sweep(&doc, "r", &["5".into(), "10".into(), "15".into()]).unwrap();
    let (_, cols, rows) = read_csv(&out.join("beyond_sc.csv"));
    assert_eq!(rows.len(), 3);
    let axis: Vec<&str> = rows.iter().map(|r| r[col(&cols, "axis_value")].as_str()).collect();
    assert_eq!(axis, ["5", "10", "15"]);
    assert!(rows.iter().all(|r| r[col(&cols, "axis")] == "r"));
    assert_eq!(rows[1][col(&cols, "subsystem_right")], "10");
    let hashes: std::collections::HashSet<&str> = rows.iter().map(|r| r[col(&cols, "config_hash")].as_str()).collect();
    assert_eq!(hashes.len(), 3);

    let err = runner::sweep(&doc, "r", &[]).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_keys_and_bad_fields_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = "{\n  \"protocol\": \"equilibrium\",\n  \"model\": {\"h\": 0.5},\n  \"colour\": 3\n}";
    match ProtocolConfig::from_json(text) {
        Err(CliError::Config(msg)) => assert!(msg.contains("line 4") && msg.contains("colour"), "{msg}"),
        other => panic!("expected a config error, got {other:?}"),
    }
    let mut doc = equilibrium(&dir.path().join("x"));
    doc["subsystem"]["sizes"] = json!([9]);
    match ProtocolConfig::from_value(doc) {
        Err(CliError::Config(msg)) => assert!(msg.contains("subsystem.sizes"), "{msg}"),
        other => panic!("expected a config error, got {other:?}"),
    }
    let doc = json!({
        "protocol": "single_kick", "model": {"h": 0.5}, "subsystem": {"half_width": 3},
        "times": [2.0, 1.0], "kick": {"kind": "spin_flip"}, "output": "x"
    });
    assert!(matches!(ProtocolConfig::from_value(doc), Err(CliError::Config(m)) if m.contains("times")));
}

#[test]
fn numerical_failures_exit_with_three() {
    let e = CliError::Numerical(qfi_core::Error::PredictionUndefined);
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn binary_exit_codes_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"protocol\": \"equilibrium\", \"nope\": 1}").unwrap();
    let o = qfi().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));

    let cfg = write_config(dir.path(), &equilibrium(&dir.path().join("bin")));
    let o = qfi().env("QFI_THREADS", "1").args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulation.csv"));

    let o = qfi().args(["sweep", cfg.to_str().unwrap(), "--axis", "h", "--values", ""]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = qfi().args(["validate", "--quick"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("max |Δ I_α|") && text.contains("max relative Δ F/4"), "{text}");
}
