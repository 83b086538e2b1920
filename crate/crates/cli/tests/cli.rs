use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cic(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cic"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn cic")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn xxz_scan_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = cic(
        &["xxz", "--min", "-2", "--max", "3", "--step", "0.01", "--out", "x.csv", "--svg", "x.svg", "--json", "x.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("critical point: delta=-0.99"), "{text}");
    assert!(text.contains("critical point: delta=1 "), "{text}");
    let csv = fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert!(csv.starts_with("delta,eg,xx,zz,cic,susceptibility\n"));
    assert_eq!(csv.lines().count(), 502);
    assert!(fs::read_to_string(dir.path().join("x.svg")).unwrap().contains("stroke-dasharray"));
    assert!(fs::read_to_string(dir.path().join("x.json")).unwrap().contains("critical_points"));
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = cic(&["xxz", "--min", "0", "--max", "1", "--step", "0.05"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("delta,"));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn kitaev_scan_has_phase_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = cic(
        &[
            "kitaev", "--line", "jx=jy=(1-jz)/2", "--min", "0.3", "--max", "0.7", "--step", "0.002", "--link", "z",
            "--tol", "1e-6", "--out", "k.csv", "--threads", "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("critical point: jz=0.5 "));
    let csv = fs::read_to_string(dir.path().join("k.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("jz,jx,jy,correlator,cic,susceptibility,phase"));
    assert!(lines.next().unwrap().ends_with(",B"));
    assert!(csv.trim_end().ends_with(",Az"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = cic(&["kitaev", "--min", "0.4", "--max", "0.6", "--step", "0.01", "--link", "y", "--out", name], dir.path());
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scan.conf"), "# xxz\nmin = -1.5\nmax = 1.5\nstep = 0.5\nout = conf.csv\n").unwrap();
    // step 0.5 violates the range/10 rule; the flag fixes it
    let bad = cic(&["xxz", "--config", "scan.conf"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    let good = cic(&["xxz", "--config", "scan.conf", "--step", "0.1"], dir.path());
    assert!(good.status.success(), "{}", String::from_utf8_lossy(&good.stderr));
    let csv = fs::read_to_string(dir.path().join("conf.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["xxz", "--min", "1", "--max", "1", "--step", "0.01"],
        &["xxz", "--step", "-0.1"],
        &["kitaev", "--link", "w"],
        &["kitaev", "--tol", "0.1"],
        &["kitaev", "--line", "jx=3"],
        &["state", "--file", "missing.json"],
        &["props", "--suite", "everything"],
        &["xxz", "--config", "nope.conf"],
        &["xxz", "--bogus"],
    ];
    for args in cases {
        let o = cic(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn state_command_reports_both_directions() {
    let dir = tempfile::tempdir().unwrap();
    let bell = r#"{"dim":4,"re":[[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,0.5]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
    fs::write(dir.path().join("bell.json"), bell).unwrap();
    let o = cic(&["state", "--file", "bell.json", "--direction", "both", "--json", "r.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("cic_forward = 1\n"), "{text}");
    assert!(text.contains("cic_backward = 1\n"), "{text}");
    assert!(text.contains("cic_exact = 1\n"), "{text}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
}

#[test]
fn non_hermitian_state_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"{"dim":4,"re":[[0.5,0.3,0,0],[0,0.5,0,0],[0,0,0,0],[0,0,0,0]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
    fs::write(dir.path().join("bad.json"), bad).unwrap();
    let o = cic(&["state", "--file", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn props_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cic(&["props", "--suite", "scan,xxz", "--seed", "11", "--json", "p.json"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
    assert!(dir.path().join("p.json").exists());
}
