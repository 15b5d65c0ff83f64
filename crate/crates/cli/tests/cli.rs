use std::process::Command;

fn h2nc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_h2nc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn converge_csv_smoke() {
    let o = h2nc(&["converge", "--element", "general:3", "--levels", "1..2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "level,ndof,L2,L2_order,H1,H1_order,H2,H2_order");
    assert_eq!(lines.len(), 3);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((first[0], first[3], first[5], first[7]), ("1", "0.0", "0.0", "0.0"));
}

#[test]
fn output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = h2nc(&[
            "converge", "--element", "p4e6", "--levels", "1,2", "--threads", "2", "--seed", "3",
            "--out", p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn markdown_mirrors_table_layout() {
    let o = h2nc(&["converge", "--element", "p3", "--levels", "1", "--format", "markdown"]);
    let s = stdout(&o);
    assert!(s.contains("P3+8P7"), "{s}");
    assert!(s.contains("| 1×1×1 |"), "{s}");
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "element = p4e6\nlevels = 1..3\nformat = markdown\n").unwrap();
    let o = h2nc(&["converge", "--config", cfg.to_str().unwrap(), "--levels", "1", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 2, "{s}");
    assert!(s.starts_with("level,ndof"));
}

#[test]
fn config_errors_name_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "# comment\nelement = p4e6\nthreads = many\n").unwrap();
    let o = h2nc(&["converge", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("threads"), "{err}");
}

#[test]
fn unknown_element_is_rejected() {
    let o = h2nc(&["converge", "--element", "p9"]);
    assert!(!o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().contains("p9"));
}

#[test]
fn verify_reports_and_writes_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let o = h2nc(&["verify", "--seed", "7", "--element", "p4e6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "verify exits 0 when nothing fails");
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("l=27"));
    assert!(report.contains("hypothesis jump residual"));
    let verdict = std::fs::read_to_string(out.with_extension("verdict")).unwrap();
    assert!(verdict.lines().any(|l| l == "dim_lemma.crossover pass"));
    assert!(verdict.lines().any(|l| l == "p5e7_moments.matrix_aa pass"));
    assert!(verdict.lines().all(|l| !l.ends_with(" fail")));
}

#[test]
fn exports() {
    let o = h2nc(&["export-mesh", "--levels", "1"]);
    let s = stdout(&o);
    assert_eq!(s.lines().next(), Some("8 6"));
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("k.mtx");
    let o = h2nc(&["export-matrix", "--element", "p3", "--levels", "2", "--out", m.to_str().unwrap()]);
    assert!(o.status.success());
    let k = std::fs::read_to_string(&m).unwrap();
    assert!(k.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
    assert!(dir.path().join("k.rhs.mtx").exists());
}
