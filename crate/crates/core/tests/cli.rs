mod common;

use std::process::{Command, Output};

use cascade_steering::dynamics::MomentState;
use cascade_steering::gaussian::Regime;
use cascade_steering::laser::{steady_moments, LaserParams};
use cascade_steering::output::{parse_records_csv, parse_trajectory_csv, BOUNDARY_HEADER, RECORD_HEADER};
use cascade_steering::sweep::{SweepRecord, Status};

use common::rel_diff;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade-steering"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn records(out: &Output) -> Vec<SweepRecord> {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    parse_records_csv(&stdout(out)).unwrap()
}

#[test]
fn steady_at_full_inversion_is_vacuum() {
    let recs = records(&bin(&["steady", "-A", "200", "-k", "3.85", "-e", "1"]));
    assert_eq!(recs.len(), 1);
    let m = recs[0].measures.unwrap();
    assert_eq!((m.covariance.alpha1, m.covariance.alpha2, m.covariance.beta), (1.0, 1.0, 0.0));
    assert_eq!((m.steering.g12, m.steering.g21, m.e2), (0.0, 0.0, 0.0));
    assert_eq!(m.steering.regime, Regime::NoWay);
}

#[test]
fn steady_derives_gain_from_atom_parameters() {
    let recs = records(&bin(&[
        "steady", "--rho", "22", "--epsilon", "43", "--gamma", "20", "-k", "3.85", "-e", "0.25",
    ]));
    assert!((recs[0].params.gain() - 203.39).abs() < 0.01);
}

#[test]
fn steady_reports_one_way_forward_at_low_gain() {
    let recs = records(&bin(&["steady", "-A", "50", "-k", "3.85", "-e", "0.5"]));
    let m = recs[0].measures.unwrap();
    assert_eq!(m.steering.regime, Regime::OneWayForward);
    assert!(m.steering.g12 > 0.0 && m.steering.g21 == 0.0 && m.e2 > 0.0);
}

#[test]
fn steady_json_uses_csv_field_names() {
    let out = bin(&["steady", "-A", "200", "-k", "3.85", "-e", "0.25", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let obj = v.as_object().unwrap();
    for key in RECORD_HEADER.split(',') {
        assert!(obj.contains_key(key), "missing {key}");
    }
    assert_eq!(obj["status"], "ok");
}

#[test]
fn exit_codes() {
    // κ + Aη = 0: no stationary state.
    let out = bin(&["steady", "-A", "50", "-k", "0", "-e", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    for args in [
        &["steady", "-A", "50", "-k", "3.85"][..],
        &["steady", "-A", "50", "-k", "3.85", "-e", "1.5"],
        &["steady", "-A", "50", "--rho", "22", "--epsilon", "43", "--gamma", "20", "-k", "1", "-e", "0"],
        &["steady", "-A", "50", "-k", "3.85", "-e", "0.5", "--bogus"],
        &["grid", "--x", "kappa:0.1:20", "--y", "gain:1:500:10", "--eta", "0.5"],
        &["dynamics", "-A", "200", "-k", "3.85", "-e", "0.25", "--dt", "1", "--tmax", "5"],
    ] {
        assert_eq!(bin(args).status.code(), Some(64), "{args:?}");
    }

    let out = bin(&["steady", "-A", "50", "-k", "3.85", "-e", "0.5", "-o", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(74));
}

#[test]
fn help_lists_every_flag() {
    let out = bin(&["sweep", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = stdout(&out);
    for flag in [
        "--gain", "--rho", "--epsilon", "--gamma", "--kappa", "--eta", "--output", "--format", "--eps-steer",
        "--config", "--param", "--from", "--to", "--steps", "--threads",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    let top = stdout(&bin(&["--help"]));
    for cmd in ["steady", "dynamics", "sweep", "grid", "boundary"] {
        assert!(top.contains(cmd));
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# low-gain settings\ngain = 50\nkappa = 3.85\neta = 0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = records(&bin(&["steady", "--config", cfg]));
    assert_eq!(from_file[0].params.gain(), 50.0);
    let overridden = records(&bin(&["steady", "--config", cfg, "-A", "2000"]));
    assert_eq!(overridden[0].params.gain(), 2000.0);
    assert_eq!(overridden[0].params.eta(), 0.5);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "gain 50\n").unwrap();
    assert_eq!(bin(&["steady", "--config", bad.to_str().unwrap()]).status.code(), Some(64));
    assert_eq!(bin(&["steady", "--config", "/nonexistent.conf"]).status.code(), Some(74));
}

#[test]
fn sweep_writes_file_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eta.csv");
    let out = bin(&[
        "sweep", "--param", "eta", "--from", "0", "--to", "1", "--steps", "101", "-A", "50", "-k", "3.85", "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some(RECORD_HEADER));
    let recs = parse_records_csv(&text).unwrap();
    assert_eq!(recs.len(), 101);
    assert!(recs.iter().all(|r| r.measures.unwrap().steering.regime != Regime::OneWayBackward));
}

#[test]
fn sweep_flags_points_without_stationary_state() {
    let out = bin(&["sweep", "--param", "kappa", "--from", "0", "--to", "1", "--steps", "3", "-A", "50", "-e", "0"]);
    let recs = records(&out);
    assert_eq!(recs[0].status(), Status::NoStationaryState);
    assert_eq!(recs[1].status(), Status::Ok);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 point"));
}

#[test]
fn grid_is_row_major() {
    let recs = records(&bin(&["grid", "--x", "kappa:0.1:20:4", "--y", "gain:1:500:3", "--eta", "0.5"]));
    assert_eq!(recs.len(), 12);
    assert_eq!((recs[1].params.kappa(), recs[1].params.gain()), (0.1 + 19.9 / 3.0, 1.0));
    assert_eq!((recs[4].params.kappa(), recs[4].params.gain()), (0.1, 250.5));
    assert!(recs.iter().all(|r| r.measures.unwrap().e2_minus_gmax >= -1e-10));
}

#[test]
fn dynamics_tail_matches_closed_form() {
    let out = bin(&[
        "dynamics", "-A", "200", "-k", "3.85", "-e", "0.25", "--dt", "0.0005", "--tmax", "5", "--stride", "100",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("converged"));
    let samples = parse_trajectory_csv(&stdout(&out)).unwrap();
    assert_eq!(samples[0], (0.0, MomentState::vacuum()));
    let (_, last) = samples.last().unwrap();
    let closed = steady_moments(&LaserParams::new(200.0, 3.85, 0.25).unwrap()).unwrap();
    // The derivative tolerance 1e-6 bounds the distance to the fixed point by ~1e-6/κ.
    assert!((last.n1 - closed.n1).abs() < 1e-5);
    assert!((last.n2 - closed.n2).abs() < 1e-5);
    assert!((last.m12.re - closed.m).abs() < 1e-5);
    assert!(rel_diff(last.n1, closed.n1) < 1e-6);
}

#[test]
fn dynamics_flags_instability_below_zero_inversion() {
    let out = bin(&["dynamics", "-A", "200", "-k", "3.85", "-e", "-0.2", "--dt", "0.0001", "--tmax", "1"]);
    let code = out.status.code().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(code == 1 || stderr.contains("not converged"), "code {code}: {stderr}");
}

#[test]
fn boundary_finds_vanishing_backward_steering() {
    let out = bin(&["boundary", "-A", "2000", "-k", "3.85"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(BOUNDARY_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[5], "found");
    let eta: f64 = row[4].parse().unwrap();
    assert!(eta > 0.9 && eta < 1.0);

    let out = bin(&["boundary", "-A", "50", "-k", "3.85"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().nth(1).unwrap().ends_with(",,not_found"));
    assert_eq!(bin(&["boundary", "-A", "50", "-k", "3.85", "-e", "0.5"]).status.code(), Some(64));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["grid", "--x", "eta:0.01:1:20", "--y", "gain:1:500:20", "-k", "3.85"];
    let first = bin(&args).stdout;
    assert_eq!(bin(&args).stdout, first);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "4"]);
    assert_eq!(bin(&threaded).stdout, first);
}
