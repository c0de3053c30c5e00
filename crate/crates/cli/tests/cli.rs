use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use surfgl::analysis::{read_sweep_csv, CSV_HEADER};
use surfgl::gl2d::read_raster;
use tempfile::TempDir;

fn surfgl(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfgl"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("SURFGL_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_1d_writes_profile_cost_and_summary() {
    let tmp = TempDir::new().unwrap();
    let o = surfgl(tmp.path(), &["solve-1d", "--b", "1.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("solve-1d");
    let s = json(&dir.join("summary.json"));
    let alpha = s["alpha_star"].as_f64().unwrap();
    let energy = s["energy"].as_f64().unwrap();
    assert!((alpha + 0.785_773_87).abs() < 5e-8, "{alpha}");
    assert!((energy + 0.007_607_192).abs() < 5e-9, "{energy}");
    assert!(s["el_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(s["config"]["n"], 30001);
    assert!(s["warning"].is_null());
    let profile = fs::read_to_string(dir.join("profile.csv")).unwrap();
    assert!(profile.starts_with("t,f\n"));
    assert_eq!(profile.lines().count(), 30002);
    let cost = fs::read_to_string(dir.join("cost.csv")).unwrap();
    let first = cost.lines().nth(1).unwrap();
    // F(0) = 0 exactly.
    assert_eq!(first.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn solve_1d_outside_the_regime() {
    let tmp = TempDir::new().unwrap();
    let o = surfgl(tmp.path(), &["solve-1d", "--b", "1.8", "--n", "6001"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("outside the surface regime"));
    let dir = tmp.path().join("solve-1d");
    let s = json(&dir.join("summary.json"));
    assert_eq!(s["trivial"], true);
    assert_eq!(s["in_regime"], false);
    assert!(s["warning"].as_str().unwrap().contains("trivial"));
    let profile = fs::read_to_string(dir.join("profile.csv")).unwrap();
    assert!(profile
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap().abs() < 1e-12));
    assert!(!dir.join("cost.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for t in [&a, &b] {
        assert_eq!(code(&surfgl(t.path(), &["solve-1d", "--b", "1.3", "--n", "6001"])), 0);
        assert_eq!(
            code(&surfgl(
                t.path(),
                &["solve-2d", "--eps", "0.12", "--resolution", "48", "--jobs", "1"]
            )),
            0
        );
    }
    for f in [
        "solve-1d/profile.csv",
        "solve-1d/cost.csv",
        "solve-1d/summary.json",
        "solve-2d/psi.csv",
        "solve-2d/psi.sglr",
        "solve-2d/history.csv",
        "solve-2d/summary.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn theta0_default_coarse_and_short_grids() {
    let tmp = TempDir::new().unwrap();
    let o = surfgl(tmp.path(), &["theta0"]);
    assert_eq!(code(&o), 0);
    let s = json(&tmp.path().join("theta0/theta0.json"));
    let fine_gap = s["gap"].as_f64().unwrap();
    assert!(fine_gap <= 1e-4);
    assert!((s["theta0"].as_f64().unwrap() - 0.590_106_127_8).abs() < 1e-8);
    assert!(s["warning"].is_null());

    let o = surfgl(tmp.path(), &["theta0", "--n", "201"]);
    assert_eq!(code(&o), 0);
    let s = json(&tmp.path().join("theta0/theta0.json"));
    assert!(s["gap"].as_f64().unwrap() > fine_gap);
    assert!(s["warning"].as_str().unwrap().contains("gap"));
    assert!(stderr(&o).contains("warning"));

    let o = surfgl(tmp.path(), &["theta0", "--t-max", "3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("precondition"));
}

#[test]
fn config_file_flags_and_output_root() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[solve_1d]\nb = 1.2\nn = 6001\n\n[theta0]\nn = 4001\n").unwrap();
    let out = tmp.path().join("env-root");
    let o = Command::new(env!("CARGO_BIN_EXE_surfgl"))
        .args(["--config", cfg.to_str().unwrap(), "solve-1d", "--n", "8001"])
        .env("SURFGL_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&out.join("solve-1d/summary.json"));
    assert_eq!(s["config"]["b"], 1.2);
    assert_eq!(s["config"]["n"], 8001);
    assert_eq!(s["config"]["t_max"], 15.0);

    fs::write(&cfg, "[solve_1d]\nb = 1.2\nbee = 3\n").unwrap();
    let o = surfgl(tmp.path(), &["--config", cfg.to_str().unwrap(), "solve-1d"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bee"), "{}", stderr(&o));

    fs::write(&cfg, "[solve_3d]\n").unwrap();
    assert_eq!(
        code(&surfgl(tmp.path(), &["--config", cfg.to_str().unwrap(), "theta0"])),
        2
    );
}

#[test]
fn solve_2d_outputs_and_failure_codes() {
    let tmp = TempDir::new().unwrap();
    let o = surfgl(tmp.path(), &["solve-2d", "--eps", "0.12", "--resolution", "64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("solve-2d");
    let s = json(&dir.join("summary.json"));
    assert_eq!(s["converged"], true);
    assert!(s["energy"].as_f64().unwrap() <= s["e_trial"].as_f64().unwrap());
    assert!(s["residual"].as_f64().unwrap() <= 1e-6);
    let (raster, psi) = read_raster(fs::File::open(dir.join("psi.sglr")).unwrap()).unwrap();
    assert_eq!((raster.nx, raster.ny), (64, 64));
    let csv = fs::read_to_string(dir.join("psi.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, s["active_cells"].as_u64().unwrap() as usize);
    assert!(psi.values.iter().any(|z| z.norm() > 0.1));
    let frozen = s["energy"].as_f64().unwrap();

    let o = surfgl(
        tmp.path(),
        &[
            "solve-2d",
            "--eps",
            "0.12",
            "--resolution",
            "64",
            "--field-mode",
            "alternating",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let alt = json(&dir.join("summary.json"))["energy"].as_f64().unwrap();
    assert!(alt <= frozen + 1e-12, "{alt} > {frozen}");

    let o = surfgl(
        tmp.path(),
        &["solve-2d", "--eps", "0.12", "--resolution", "64", "--max-iter", "3"],
    );
    assert_eq!(code(&o), 3);
    assert_eq!(json(&dir.join("summary.json"))["converged"], false);

    assert_eq!(
        code(&surfgl(tmp.path(), &["solve-2d", "--b", "1.8", "--eps", "0.12"])),
        2
    );
    assert_eq!(
        code(&surfgl(
            tmp.path(),
            &["solve-2d", "--eps", "0.12", "--resolution", "12"]
        )),
        2
    );
    assert_eq!(code(&surfgl(tmp.path(), &["solve-2d", "--domain", "hexagon"])), 2);
}

#[test]
fn sweep_on_both_domains() {
    let tmp = TempDir::new().unwrap();
    for domain in ["square", "L"] {
        let o = surfgl(
            tmp.path(),
            &["sweep", "--domain", domain, "--eps", "0.12,0.1", "--resolution", "64"],
        );
        // A coarse sweep may miss the enforced checks but must run through.
        assert!(matches!(code(&o), 0 | 4), "{domain}: {}", stderr(&o));
        let dir = tmp.path().join("sweep");
        let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        let records = read_sweep_csv(csv.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.converged && r.e_gl <= r.e_trial));
        let report = json(&dir.join("report.json"));
        assert_eq!(report["config"]["domain"], domain);
        assert_eq!(report["records"].as_array().unwrap().len(), 2);
        assert!(!report["checks"]["checks"].as_array().unwrap().is_empty());
        let rec = json(&dir.join("records/eps-0.1.json"));
        assert_eq!(rec["epsilon"], 0.1);
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert!(stdout.contains("criterion") && stdout.contains("E_gl"));
    }
}

#[test]
fn sweep_guards() {
    let tmp = TempDir::new().unwrap();
    let o = surfgl(tmp.path(), &["sweep", "--eps", "0.08,0.12", "--resolution", "64"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("decreasing"));
    assert_eq!(
        code(&surfgl(
            tmp.path(),
            &["sweep", "--b", "1.8", "--eps", "0.12", "--resolution", "64"]
        )),
        2
    );
    let o = surfgl(
        tmp.path(),
        &["sweep", "--eps", "0.12,0.1", "--resolution", "64", "--max-iter", "3"],
    );
    assert_eq!(code(&o), 3);
    assert!(
        read_sweep_csv(fs::read(tmp.path().join("sweep/sweep.csv")).unwrap().as_slice())
            .unwrap()
            .iter()
            .all(|r| !r.converged)
    );
    assert_eq!(code(&surfgl(tmp.path(), &["sweep", "--eps", "0.1,abc"])), 2);
}
