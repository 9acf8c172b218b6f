use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use qmeas_core::GriddedDistribution;

fn qmeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmeas")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_distribution(path: &Path) -> GriddedDistribution {
    GriddedDistribution::read_csv(BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

#[test]
fn classify_ideal() {
    let out = qmeas(&["classify", "--a", "1", "--b", "1", "--c", "0", "--d", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("class: TypeO") && text.contains("delta: 1\n"), "{text}");

    let out = qmeas(&["classify", "--a", "0", "--b", "1", "--c", "-1", "--d", "1", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["tag"], "TypeA");
}

#[test]
fn exit_codes() {
    let out = qmeas(&["classify", "--a", "1", "--b", "2", "--c", "3", "--d", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("determinant"));
    assert_eq!(qmeas(&["classify", "--a", "one"]).status.code(), Some(64));
    assert_eq!(qmeas(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(qmeas(&["--help"]).status.code(), Some(0));
}

#[test]
fn trajectory_on_the_heisenberg_limit() {
    let out = qmeas(&["trajectory", "--a", "1", "--b", "1", "--delta", "1", "--n", "50"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("w,eps_tilde,eta_tilde,hur_lhs,our_lhs,circle_lhs"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| (r[3] - 1.0).abs() <= 1e-12));
    assert_eq!(rows[0][0], 0.01);
    assert_eq!(rows[49][0], 100.0);
}

#[test]
fn fig1_batch_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(qmeas(&["trajectory", "--fig1", "--out", d]).status.success());
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 11);
    assert!(names.contains(&"fig1_a0.01.csv".to_string()) && names.contains(&"fig1_a0.99.csv".to_string()));

    let first = std::fs::read(dir.path().join("fig1_a0.3.csv")).unwrap();
    assert!(qmeas(&["trajectory", "--fig1", "--out", d]).status.success());
    assert_eq!(std::fs::read(dir.path().join("fig1_a0.3.csv")).unwrap(), first);
    assert_eq!(stdout(&qmeas(&["report", "--a", "0.4"])), stdout(&qmeas(&["report", "--a", "0.4"])));
}

#[test]
fn simulate_writes_parseable_densities() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out =
        qmeas(&["simulate", "--a", "0.8", "--b", "1.2", "--c", "0.1", "--d", "1", "--grid-points", "1024", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["obj_f", "probe_F", "obj_g", "probe_G", "out_F", "out_g"] {
        let dist = read_distribution(&dir.path().join(format!("{name}.csv")));
        assert!((dist.mass() - 1.0).abs() < 1e-6, "{name}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report, serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap());
    let eps = report["distribution_epsilon_star"].as_f64().unwrap();
    assert!((eps - report["epsilon_star"].as_f64().unwrap()).abs() < 1e-6);
}

#[test]
fn simulate_degenerate_gains_copy_inputs() {
    for (coeffs, pairs) in [
        (["--a", "0", "--b", "1", "--c", "-1", "--d", "1"], [("obj_f", "out_F"), ("probe_G", "out_g")]),
        (["--a", "1", "--b", "0", "--c", "0", "--d", "1"], [("probe_F", "out_F"), ("obj_g", "out_g")]),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let mut args =
            vec!["simulate", "--grid-points", "256", "--sigma-Q", "0.5", "--out", dir.path().to_str().unwrap()];
        args.extend(coeffs);
        let out = qmeas(&args);
        assert!(out.status.success());
        let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(json["limit_resolved"].as_bool().unwrap());
        for (input, output) in pairs {
            let read = |n: &str| std::fs::read(dir.path().join(format!("{n}.csv"))).unwrap();
            assert_eq!(read(input), read(output), "{input} vs {output}");
        }
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# ideal meter\na = 1\nb = 1\nd = 1\nc = 0\nseed = 3\n").unwrap();
    let out = qmeas(&["classify", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&out).contains("class: TypeO"));
    let out = qmeas(&["classify", "--config", cfg.to_str().unwrap(), "--a", "0", "--c", "-1"]);
    assert!(stdout(&out).contains("class: TypeA"));

    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(qmeas(&["classify", "--config", cfg.to_str().unwrap()]).status.code(), Some(64));
    assert_eq!(qmeas(&["classify", "--config", "/nonexistent/run.cfg"]).status.code(), Some(74));
}

#[test]
fn oracle_writes_state_and_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmeas(&["oracle", "--grid-points", "256", "--mean-P", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["l1_position"].as_f64().unwrap() < 1e-2);
    let bytes = std::fs::read(dir.path().join("joint.qmo")).unwrap();
    assert_eq!(&bytes[..4], b"QMO1");
    assert!((read_distribution(&dir.path().join("oracle_F.csv")).mass() - 1.0).abs() < 1e-6);
}

#[test]
fn verify_passes_and_notices_a_flipped_kernel() {
    let out = qmeas(&["verify", "--level", "quick", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["passed"], true);

    let out = qmeas(&["verify", "--level", "quick", "--inject-kernel-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed:"));
}
