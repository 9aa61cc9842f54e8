//! Runs the `er3bp` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use er3bp::table::{read_rows, write_rows, Source};
use er3bp_core::geometry::{CollinearFrame, Point};
use serde_json::Value;
use tempfile::TempDir;

fn er3bp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_er3bp"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .env_remove("ER3BP_DEFAULT_TOL")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn assert_round_trip(path: &Path) {
    let text = read(path);
    let rows = read_rows(text.as_bytes()).unwrap();
    let mut again = Vec::new();
    write_rows(&mut again, &rows).unwrap();
    assert_eq!(text.as_bytes(), again.as_slice(), "{}", path.display());
}

#[test]
fn points_for_the_earth_moon_preset() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["points", "--preset", "earth-moon", "--json"]));
    let rows = v["points"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["residual"].as_f64().unwrap().abs() < 1e-13);
    }
    let text = er3bp(dir.path(), &["points"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("L3"));
}

#[test]
fn zero_mass_ratio_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let out = er3bp(dir.path(), &["points", "--mu", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equal_masses_are_symmetric() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["points", "--mu", "0.5", "--json"]));
    let p = &v["points"];
    assert!((p[0]["x"].as_f64().unwrap()).abs() < 1e-15);
    assert!((p[1]["gamma"].as_f64().unwrap() - p[2]["gamma"].as_f64().unwrap()).abs() < 1e-14);
    assert!((p[1]["x"].as_f64().unwrap() + p[2]["x"].as_f64().unwrap()).abs() < 1e-14);
}

#[test]
fn linear_frequencies_and_sweep() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["linear", "--e", "0", "--json"]));
    let s = &v["series"];
    assert_eq!(s["omega_y"].as_f64(), Some(2.33439));
    assert_eq!(s["omega_z"].as_f64(), Some(2.26883));
    assert_eq!(s["delta"].as_f64().unwrap(), s["omega_y"].as_f64().unwrap() - s["omega_z"].as_f64().unwrap());

    let out = er3bp(dir.path(), &["linear", "--sweep-e", "--e-steps", "21"]);
    assert!(out.status.success());
    let text = read(&dir.path().join("omega_sweep.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("e,Omega_y,Omega_z,delta"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    assert_eq!((rows[0][0], rows[20][0]), (0.0, 0.5));
    for w in rows.windows(2) {
        assert!(w[1][1] > w[0][1] && w[1][2] > w[0][2]);
    }
}

#[test]
fn resonant_amplitudes_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["orbit", "planar", "--resonance", "2:1", "--e", "0.0549", "--json"]));
    assert!((v["jy"].as_f64().unwrap() - 0.9287).abs() < 5e-4);
    assert_eq!(v["rates"][0].as_f64(), Some(2.0));
    let v = json_of(&er3bp(dir.path(), &["orbit", "vertical", "--resonance", "2:1", "--e", "0.2", "--json"]));
    assert!((v["jz"].as_f64().unwrap() - 0.9775).abs() < 5e-4);
    for name in ["orbit_vertical.csv", "orbit_vertical_xy.svg", "orbit_vertical_xz.svg", "orbit_vertical_yz.svg"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let rows = read_rows(read(&dir.path().join("orbit_vertical.csv")).as_bytes()).unwrap();
    assert!(rows.iter().all(|r| r.source == Some(Source::Analytic)));
    assert_round_trip(&dir.path().join("orbit_vertical.csv"));
}

#[test]
fn halo_above_threshold_defaults_to_north() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["orbit", "halo", "--energy", "0.32", "--json"]));
    let h = &v["halo"];
    assert_eq!(h["branch"], "North");
    assert!(h["energy"].as_f64().unwrap() > h["threshold_energy"].as_f64().unwrap());
    assert!(v["jz"].as_f64().unwrap() > 0.0);
    let below = er3bp(dir.path(), &["orbit", "halo", "--energy", "0.15"]);
    assert_eq!(below.status.code(), Some(2));
}

#[test]
fn refined_resonant_orbit_is_written() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["orbit", "planar", "--resonance", "2:1", "--refine", "--json"]));
    let r = &v["refinement"];
    assert_eq!(r["converged"], true);
    assert!(r["g_error"].as_f64().unwrap() <= 1e-10 && r["f_error"].as_f64().unwrap() <= 1e-10);
    assert!(r["closure"].as_f64().unwrap() <= 1e-8);
    let report: Value = serde_json::from_str(&read(&dir.path().join("refinement.json"))).unwrap();
    assert!(report["history"].as_array().unwrap().len() >= 2);
    let refined = dir.path().join("orbit_planar_refined.csv");
    let rows = read_rows(read(&refined).as_bytes()).unwrap();
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert!((last.f - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    for k in 0..6 {
        assert!((first.state[k] - last.state[k]).abs() < 1e-8);
    }
    assert_round_trip(&refined);
    assert!(read(&dir.path().join("orbit_planar_xy.svg")).matches("<polyline").count() == 2);
}

#[test]
fn refinement_failure_exits_with_status_three_and_keeps_diagnostics() {
    let dir = TempDir::new().unwrap();
    let out = er3bp(dir.path(), &["orbit", "planar", "--resonance", "2:1", "--refine", "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_str(&read(&dir.path().join("refinement.json"))).unwrap();
    assert_eq!(report["converged"], false);
    assert!(report["failure"].is_string());
}

#[test]
fn bifurcation_energies() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(dir.path(), &["bifurcation", "--json"]));
    let local = v["local"]["value"].as_f64().unwrap();
    assert!((local - 0.30698).abs() < 1e-5);
    let frame = CollinearFrame::new(Point::L1, 0.012150586).unwrap();
    let synodic = v["synodic"].as_f64().unwrap();
    assert!((synodic - (frame.energy_intercept() + frame.gamma * frame.gamma * local)).abs() < 1e-14);
    let v = json_of(&er3bp(dir.path(), &["bifurcation", "--e", "0", "--json"]));
    assert!((v["local"]["value"].as_f64().unwrap() - 0.30688).abs() < 1e-5);
    assert_eq!(v["local"]["e2_coefficient"].as_f64().map(|c| c > 0.0), Some(true));
}

#[test]
fn integrating_the_refined_orbit_closes_it() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&er3bp(
        dir.path(),
        &["integrate", "--state=-0.8030201977671995,0,0,0,-0.31669148805925185,0", "--span", "6.283185307179586", "--json"],
    ));
    let last: Vec<f64> = v["final_state"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((last[0] + 0.8030201977671995).abs() < 1e-8 && last[1].abs() < 1e-8 && (last[4] + 0.31669148805925185).abs() < 1e-8);
    assert!(v["hamiltonian_drift"].as_f64().unwrap() <= 1e-9);
    assert_round_trip(&dir.path().join("trajectory.csv"));

    // Backward half of the symmetric orbit mirrors the forward half.
    let back = json_of(&er3bp(
        dir.path(),
        &["integrate", "--state=-0.8030201977671995,0,0,0,-0.31669148805925185,0", "--f-end=-3.141592653589793", "--json"],
    ));
    let fwd = json_of(&er3bp(
        dir.path(),
        &["integrate", "--state=-0.8030201977671995,0,0,0,-0.31669148805925185,0", "--f-end=3.141592653589793", "--json"],
    ));
    let b = &back["final_state"];
    let f = &fwd["final_state"];
    assert!((b[0].as_f64().unwrap() - f[0].as_f64().unwrap()).abs() < 1e-9);
    assert!((b[1].as_f64().unwrap() + f[1].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn circular_l1_is_an_equilibrium() {
    let dir = TempDir::new().unwrap();
    let x = CollinearFrame::new(Point::L1, 0.012150586).unwrap().synodic_x();
    let state = format!("--state={x},0,0,0,0,0");
    let v = json_of(&er3bp(dir.path(), &["integrate", "--e", "0", &state, "--span", "2", "--samples", "11", "--json"]));
    let last = v["final_state"].as_array().unwrap();
    assert!((last[0].as_f64().unwrap() - x).abs() < 1e-12);
    assert!(last[1].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["rows"], 11);
}

#[test]
fn collision_exits_with_status_four() {
    let dir = TempDir::new().unwrap();
    let out = er3bp(dir.path(), &["integrate", "--state=-0.9878494,0,0,0,0,0", "--span", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f = "));
}

#[test]
fn config_file_and_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"e": 0.2, "resonance": "2:1", "json": true}"#).unwrap();
    let v = json_of(&er3bp(dir.path(), &["--config", cfg.to_str().unwrap(), "orbit", "vertical"]));
    assert!((v["jz"].as_f64().unwrap() - 0.9775).abs() < 5e-4);

    let out = Command::new(env!("CARGO_BIN_EXE_er3bp"))
        .args(["--output-dir", dir.path().to_str().unwrap(), "points"])
        .env("ER3BP_DEFAULT_TOL", "loose")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&cfg, r#"{"no_such_flag": 1}"#).unwrap();
    let out = er3bp(dir.path(), &["--config", cfg.to_str().unwrap(), "points"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_json_round_trips_through_the_command_line() {
    let dir = TempDir::new().unwrap();
    let out = er3bp(dir.path(), &["model"]);
    assert!(out.status.success());
    let path = dir.path().join("model.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let a = json_of(&er3bp(dir.path(), &["bifurcation", "--json"]));
    let b = json_of(&er3bp(dir.path(), &["--model", path.to_str().unwrap(), "bifurcation", "--json"]));
    assert_eq!(a, b);
}
