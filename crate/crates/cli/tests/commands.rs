use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slocc-mbqc"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_to_file(args: &[&str], out: &Path) -> Vec<u8> {
    let o = bin().args(args).arg("--out").arg(out).output().expect("binary runs");
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).expect("output written")
}

#[test]
fn every_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = [
        ("fig-corrlength", "fig1.toml"),
        ("fig-walk", "fig3.toml"),
        ("percolation", "bundo_lattice.toml"),
        ("run-protocol", "nun.toml"),
        ("run-protocol", "bub.toml"),
        ("run-protocol", "bundo.toml"),
        ("run-protocol", "entangle.toml"),
    ]
    .iter()
    .map(|(cmd, cfg)| vec![cmd.to_string(), "--config".into(), configs().join(cfg).display().to_string()])
    .chain([
        vec!["verify".to_string(), "--filter".into(), "walk".into()],
        vec!["classify".into(), "1".into(), "0.2".into(), "0".into(), "0.5".into()],
    ])
    .collect();
    for (i, args) in cases.iter().enumerate() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = run_to_file(&args, &dir.path().join(format!("a{i}")));
        let b = run_to_file(&args, &dir.path().join(format!("b{i}")));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?} is not reproducible");
    }
}

#[test]
fn seed_flag_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("nun.toml");
    let cfg = cfg.to_str().unwrap();
    let a = run_to_file(&["run-protocol", "--config", cfg, "--seed", "1"], &dir.path().join("a"));
    let b = run_to_file(&["run-protocol", "--config", cfg, "--seed", "2"], &dir.path().join("b"));
    assert_ne!(a, b);
}

#[test]
fn csv_has_version_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig3.toml");
    let text = String::from_utf8(run_to_file(&["fig-walk", "--config", cfg.to_str().unwrap()], &dir.path().join("w.csv"))).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# slocc-mbqc "));
    assert_eq!(lines.next().unwrap(), "lambda,k,p_k,cumulative");
    assert_eq!(lines.count(), 200 * 10);
}

#[test]
fn verify_passes_and_filters() {
    let o = run(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&["verify", "--filter", "strategy1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS strategy1.")));
}

#[test]
fn unknown_field_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "experiment = \"walk\"\n\n[walk]\nn = 4\nlambda_grid = 3\n").unwrap();
    let o = run(&["fig-walk", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn mismatched_experiment_is_config_error() {
    let cfg = configs().join("fig3.toml");
    let o = run(&["percolation", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reports_n_type() {
    let o = run(&["classify", "0.8", "0.8", "0.3", "-0.3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_type"], true);
    assert!(v["n_canon"]["theta"].as_f64().is_some());
    assert_eq!(run(&["classify", "1", "2", "3"]).status.code(), Some(2));
}

#[test]
fn protocol_summaries() {
    let last = |cfg: &str| -> serde_json::Value {
        let o = run(&["run-protocol", "--config", configs().join(cfg).to_str().unwrap()]);
        assert!(o.status.success());
        let text = String::from_utf8(o.stdout).unwrap();
        serde_json::from_str::<serde_json::Value>(text.lines().last().unwrap()).unwrap()["summary"].clone()
    };
    let s = last("nun_cluster.toml");
    assert_eq!(s["success"], true);
    assert_eq!(s["sites_used"], 4);
    assert!(s["fidelity"].as_f64().unwrap() > 1.0 - 1e-8);
    assert!(last("nun.toml")["fidelity"].as_f64().unwrap() > 1.0 - 1e-8);
    assert!(last("entangle.toml")["cz_equivalence_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn exhausted_nun_runs_restart_or_continue() {
    let dir = tempfile::tempdir().unwrap();
    let lines = |policy: &str, seed: &str| -> Vec<serde_json::Value> {
        let cfg = dir.path().join(format!("{policy}.toml"));
        std::fs::write(
            &cfg,
            format!("experiment = \"protocol\"\n[protocol]\nkind = \"nun\"\nsites = 5\ntarget = [0.7, -1.2, 2.2]\non_exhausted = \"{policy}\"\nattempts = 40\n"),
        )
        .unwrap();
        let o = run(&["run-protocol", "--config", cfg.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    };
    for seed in ["1", "2", "3"] {
        let stop = lines("stop", seed);
        let cont = lines("continue", seed);
        let fresh = lines("fresh", seed);
        for s in [&cont, &fresh] {
            let summary = &s.last().unwrap()["summary"];
            assert_eq!(summary["success"], true);
            assert!(summary["fidelity"].as_f64().unwrap() > 1.0 - 1e-8);
        }
        let done = &stop.last().unwrap()["summary"];
        assert_eq!(done["attempts"], 1);
        for (a, b) in stop[..stop.len() - 1].iter().zip(&cont) {
            assert_eq!(a["outcome"], b["outcome"]);
            assert_eq!(a["site"], b["site"]);
        }
    }
}
