//! End-to-end tests of the `nullgeo` binary: exit codes, data files,
//! manifests and plots.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nullgeo")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nullgeo_bin_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(scenario: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg_path = dir.join("scenario.cfg");
    std::fs::write(&cfg_path, config).unwrap();
    Command::new(bin())
        .arg(scenario)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env("NULLGEO_THREADS", "2")
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("out/manifest.txt")).unwrap()
}

#[test]
fn focusing_sweep_flat_margins_are_zero() {
    let dir = tmp("focusing");
    let out = run(
        "focusing-sweep",
        "point = 0,0,0,0\ntangent = 1,1,0,0\nradii = 1,2,3,4,5,6,7,8,9,10\n",
        &dir,
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS: focusing_bound"), "{stdout}");
    let csv = std::fs::read_to_string(dir.join("out/focusing.csv")).unwrap();
    assert!(csv.starts_with("r,theta,focusing_margin"));
    for line in csv.lines().skip(1) {
        let margin: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(margin.abs() <= 1e-12, "flat margin {margin:e}");
    }
}

#[test]
fn splitting_verify_horizon_passes_with_small_b() {
    let dir = tmp("splitting");
    let out = run(
        "splitting-verify",
        "hypersurface = schwarzschild_horizon{M=1}\n",
        &dir,
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir);
    let b: f64 = m
        .lines()
        .find_map(|l| l.strip_prefix("metric.max_B_norm = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(b <= 1e-7, "max_B_norm = {b:e}");
    assert!(m.contains("assert.totally_geodesic = pass"));
}

#[test]
fn solve_with_nonspacelike_seed_exits_3() {
    let dir = tmp("nonspacelike");
    let out = run(
        "solve",
        "lo = -1,-1\nhi = 1,1\nshape = 9,9\ngraph = linear{a0=1.2}\n",
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not spacelike"), "{stderr}");
}

#[test]
fn unknown_scenario_exits_2() {
    let dir = tmp("badscenario");
    let out = run("warp-drive", "", &dir, &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("valid scenarios"), "{stderr}");
}

#[test]
fn unknown_key_exits_2_with_line_number() {
    let dir = tmp("badkey");
    let out = run("curvature", "point = 0,0,0,0\nwarp = 9\n", &dir, &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn plot_flag_emits_svg_and_checksums() {
    let dir = tmp("plot");
    let out = run(
        "cone",
        "point = 0,0,0,0\ntangent = 1,1,0,0\nspan = 5\nsamples = 20\nexpect_theta_times_tau = 2\n",
        &dir,
        &["--plot"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.join("out/cone_theta.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let m = manifest(&dir);
    assert!(m.contains("checksum.cone_theta.svg = "));
    assert!(m.contains("assert.cone_expansion_profile = pass"));
}

#[test]
fn failed_assertion_exits_1() {
    let dir = tmp("assertfail");
    // The flat cone has theta * tau = 2; demanding 3 must fail.
    let out = run(
        "cone",
        "point = 0,0,0,0\ntangent = 1,1,0,0\nspan = 5\nsamples = 10\nexpect_theta_times_tau = 3\n",
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL: cone_expansion_profile"), "{stdout}");
}

#[test]
fn maxprin_scenario_reports_violated_hypothesis() {
    let dir = tmp("maxprin");
    let out = run(
        "maxprin",
        "lo = -0.8,-0.8\nhi = 0.8,0.8\nshape = 17,17\nlower = linear{c=0}\nupper = cone{z0=1.5, t0=-1.5}\n",
        &dir,
        &[],
    );
    // The cone slice has positive expansion, so the hypotheses fail but
    // the theorem is not contradicted: exit 0 with the violation named.
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir);
    assert!(m.contains("metric.hypotheses_met = false"));
    assert!(m.contains("upper expansion"), "{m}");
    assert!(m.contains("assert.maximum_principle_consistent = pass"));
}
