use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn peakon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peakon")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn single_peak_has_constant_momentum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = peakon(&["simulate", "--q", "0.5", "--p", "1.2", "--t-end", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("trajectory.csv"));
    assert!(rows.len() > 1);
    for r in &rows {
        assert_eq!(r[2], 1.2);
        assert!((r[1] - (0.5 + 0.6 * r[0])).abs() <= 1e-12);
    }
}

#[test]
fn manifest_hashes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = peakon(&["simulate", "--q", "-1,1", "--p", "1,1", "--t-end", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let m = json(&out.join("manifest.json"));
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["trajectory.csv", "ledger.csv"]);
    for e in outputs {
        let bytes = fs::read(out.join(e["path"].as_str().unwrap())).unwrap();
        assert_eq!(e["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert_eq!(m["schema_version"], 1);
    assert!(m["tail_bound"].is_null());
}

#[test]
fn both_solvers_record_route_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = peakon(&["simulate", "--q", "-1,0.5,2", "--p", "1,0.7,0.4", "--t-end", "8", "--solver", "both", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let d = json(&out.join("manifest.json"))["results"]["route_max_discrepancy"].as_f64().unwrap();
    assert!(d <= 1e-5, "{d}");
}

#[test]
fn factorization_solver_tracks_the_ode() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("ode"), dir.path().join("fact"));
    let common = ["--q", "1,-1", "--p", "1,1", "--sector", "plus", "--t-end", "10"];
    assert_eq!(code(&peakon(&[&["simulate"][..], &common, &["--out", a.to_str().unwrap()]].concat())), 0);
    assert_eq!(code(&peakon(&[&["simulate"][..], &common, &["--solver", "factorization", "--out", b.to_str().unwrap()]].concat())), 0);
    let (x, y) = (csv_rows(&a.join("trajectory.csv")), csv_rows(&b.join("trajectory.csv")));
    let (x, y) = (x.last().unwrap(), y.last().unwrap());
    assert_eq!(x[0], 10.0);
    assert_eq!(y[0], 10.0);
    for j in 1..5 {
        assert!((x[j] - y[j]).abs() <= 1e-6, "column {j}: {} vs {}", x[j], y[j]);
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "n": 4, "seed": 7, "sector": {"tag": "minus"},
            "initial": {"random": {"p_min": 0.2, "p_max": 2.0, "gap_min": 0.5, "gap_max": 2.0}},
            "t_end": 4.0, "output_dir": "unused"}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = peakon(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(out.join("trajectory.csv")).unwrap(), fs::read(out.join("ledger.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"schema_version": 1, "initial": {"explicit": {"q": [-1.0, 1.0], "p": [1.0, 1.0]}}, "t_end": 50.0}"#).unwrap();
    let out = dir.path().join("run");
    let o = peakon(&["simulate", "--config", cfg.to_str().unwrap(), "--t-end", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&out.join("trajectory.csv")).last().unwrap()[0], 2.0);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = peakon(&["simulate", "--n", "3", "--q", "0,1", "--p", "1,1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("q:"));

    let cfg = dir.path().join("v2.json");
    fs::write(&cfg, r#"{"schema_version": 2}"#).unwrap();
    assert_eq!(code(&peakon(&["simulate", "--config", cfg.to_str().unwrap()])), 2);

    assert_eq!(code(&peakon(&["simulate", "--geometric", "1,0.5,1", "--n", "3"])), 2);
    assert_eq!(code(&peakon(&["simulate", "--config", dir.path().join("nope.json").to_str().unwrap()])), 2);
}

#[test]
fn numerical_failure_exits_three_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    // a step budget of one cannot reach t_end
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "initial": {"explicit": {"q": [-1.0, 1.0], "p": [1.0, 1.0]}},
            "t_end": 50.0, "integrator": {"max_steps": 1}}"#,
    )
    .unwrap();
    let o = peakon(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("failure.json"))["status"], "numerical_failure");
}

#[test]
fn spectrum_of_two_peaks() {
    let o = peakon(&["spectrum", "--q", "-1,1", "--p", "1,1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let l: Vec<f64> = v["lambdas"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((l[0] - 0.6839397).abs() < 1e-7 && (l[1] - 0.3160603).abs() < 1e-7);
    assert!(v["phi_first_row"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() > 0.0));
}

#[test]
fn spectrum_with_equal_momenta_and_huge_gap() {
    // λ₁ − λ₂ = e^{−20}, well above the 1e−12·λ₁ simplicity floor
    let o = peakon(&["spectrum", "--q", "0,40", "--p", "1,1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let l: Vec<f64> = v["lambdas"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(l[0] - l[1] > 1e-12 * l[0]);
    // e^{−30} is below it and is reported, not reordered
    let o = peakon(&["spectrum", "--q", "0,60", "--p", "1,1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_single_suite() {
    let o = peakon(&["verify", "--suite", "mybe"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"][0]["id"], 10);

    let o = peakon(&["verify", "--suite", "sorting", "--n", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&peakon(&["verify", "--suite", "nope"])), 2);
}

#[test]
fn wavefield_of_single_peak_is_traveling_wave() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let c = 0.35;
    assert_eq!(code(&peakon(&["simulate", "--q", "0", "--p", "0.7", "--t-end", "20", "--out", run.to_str().unwrap()])), 0);
    let wf = dir.path().join("wf");
    let o = peakon(&[
        "wavefield",
        "--trajectory",
        run.join("trajectory.csv").to_str().unwrap(),
        "--times",
        "0,10,20",
        "--x-min",
        "-5",
        "--x-max",
        "15",
        "--count",
        "81",
        "--out",
        wf.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&wf.join("wavefield.csv"));
    assert_eq!(rows.len(), 3 * 81);
    for r in rows {
        let (t, x, u) = (r[0], r[1], r[2]);
        assert!((u - c * (-(x - c * t).abs()).exp()).abs() <= 1e-10, "t={t} x={x}");
    }
}

#[test]
fn wavefield_without_input_exits_two() {
    assert_eq!(code(&peakon(&["wavefield"])), 2);
    assert_eq!(code(&peakon(&["wavefield", "--trajectory", "/nonexistent/trajectory.csv"])), 2);
}

#[test]
fn asymptotics_with_swapped_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("as");
    let o = peakon(&[
        "asymptotics", "--q", "-1,1", "--p", "1,1", "--sector", "plus", "--perm", "2,1", "--t-end", "50", "--max-step", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json(&out.join("manifest.json"))["results"];
    let e1 = (-1.0f64).exp();
    // index 1 sits behind index 2, so it takes the smaller eigenvalue
    let targets: Vec<f64> = r["p_targets"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((targets[0] - (1.0 - e1)).abs() < 1e-14 && (targets[1] - (1.0 + e1)).abs() < 1e-14);
    assert_eq!(r["converged"], true);
    assert!(r["relabeling_discrepancy"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn sweep_is_ordered_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_peakon"))
            .args(["sweep", "--geometric", "1,0.6,1", "--seed", "0", "--sector", "plus", "--ns", "4,2,3"])
            .args(["--t-end", "50", "--max-step", "1", "--out", out.to_str().unwrap()])
            .env("PEAKON_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("sweep.csv")).unwrap()
    };
    let one = run("one", "1");
    let many = run("many", "3");
    assert_eq!(one, many);
    let ns: Vec<&str> = one.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["4", "2", "3"]);
}
