use std::path::PathBuf;
use std::process::{Command, Output};

fn dpk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpk"))
        .args(args)
        .output()
        .expect("spawn dpk")
}

fn fixtures() -> String {
    let root: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", ".."].iter().collect();
    root.join("fixtures").to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn lifetime_matches_reference_inputs() {
    let out = dpk(&["lifetime", "--ezpl-ev", "0.856", "--dipole-debye", "0.96", "--n", "3.485"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let tau: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("tau_rad_s = "))
        .expect("tau line")
        .parse()
        .unwrap();
    assert!((tau - 2.83e-6).abs() < 0.1 * 2.83e-6, "tau {tau}");
}

#[test]
fn spin_levels_prints_odmr_lines() {
    let out = dpk(&["spin-levels", "--d-mhz", "439.3", "--e-mhz", "37.9"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("transition 0->1 4.01400e2"), "{text}");
    assert!(text.contains("transition 0->2 4.77200e2"), "{text}");
}

#[test]
fn usage_error_exits_2() {
    let out = dpk(&["lineshape", "--unknown-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_error_exits_1_with_stderr_only() {
    let out = dpk(&["lifetime", "--ezpl-ev", "-1", "--dipole-debye", "1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty(), "data stream must stay clean on errors");
    assert!(!out.stderr.is_empty());
}

#[test]
fn fixture_levels_reproduce_transition_levels() {
    let out = dpk(&["--fixtures", &fixtures(), "levels"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("entry Ci0 charge=0 formation_ev = 3.72000e0"), "{text}");
    assert!(text.contains("level (+/0) 3.20000e-1"), "{text}");
    assert!(text.contains("level (0/-) 9.70000e-1"), "{text}");
}

#[test]
fn fixture_lineshape_header_carries_hr_factor() {
    let out = dpk(&["--fixtures", &fixtures(), "lineshape", "--ezpl-ev", "0.856"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("# s_total = 2.88000e0"), "{text}");
    // diagnostics (S, Debye-Waller) go to stderr, not into the data stream
    assert!(!text.contains("Huang-Rhys"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Huang-Rhys"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["--fixtures", &fixtures(), "kinetics", "--power", "2.5"];
    let a = dpk(&args.iter().map(|s| &**s).collect::<Vec<_>>());
    let b = dpk(&args.iter().map(|s| &**s).collect::<Vec<_>>());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zfs_point_spin_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.txt");
    std::fs::write(&path, "# two spins 1 nm apart\n0 0 0 1\n0 0 10 1\n").unwrap();
    let out = dpk(&["zfs", "--points", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("e_mhz = 0.00000e0"), "{text}");
    // c_dd/r^3 at 1 nm ~ 52.04 MHz; D = -3 c/r^3
    assert!(text.contains("d_mhz = -1.56123e2"), "{text}");
}

#[test]
fn odmr_flags_forbidden_line() {
    let out = dpk(&["odmr", "--d-mhz", "439.3", "--e-mhz", "37.9"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let forbidden: Vec<&str> = text.lines().filter(|l| l.ends_with("forbidden")).collect();
    assert_eq!(forbidden.len(), 1);
    assert!(forbidden[0].starts_with("1 2 7.58000e1"), "{text}");
}

#[test]
fn ctl_diagram_three_columns() {
    let out = dpk(&["--fixtures", &fixtures(), "ctl-diagram", "--resolution-ev", "0.01"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# levels: (+/0) 0.320000, (0/-) 0.970000\n"), "{text}");
    for line in text.lines().skip(2) {
        assert_eq!(line.split_whitespace().count(), 3, "bad row '{line}'");
    }
}

#[test]
fn odmr_contrast_positive_on_default_rates() {
    let out = dpk(&[
        "--fixtures",
        &fixtures(),
        "odmr-contrast",
        "--pair",
        "t0-t+",
        "--drive",
        "1e6",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let c: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("contrast = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(c > 0.0);
    assert!(text.contains("assumed=true"), "assumed flags must be echoed: {text}");
}

#[test]
fn isotope_risk_enrichment_target() {
    let out = dpk(&["isotope", "--sites", "2", "--abundance", "0.005"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("risk = 9.97500e-3"));
}

#[test]
fn selection_dark_state_forbidden() {
    let out = dpk(&["selection", "--initial", "A1", "--final", "A2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("allowed = false"));

    let bright = dpk(&["selection", "--initial", "A1", "--final", "A1"]);
    let text = stdout(&bright);
    assert!(text.contains("allowed = true"));
    assert!(text.contains("polarizations = z"));
}
