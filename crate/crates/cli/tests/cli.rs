use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hdg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdg-stokes"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn convergence_csv_has_table_layout_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--experiment", "conv", "--k", "0", "--levels", "3", "--out", "a/conv.csv"];
    let out = hdg(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read_to_string(dir.path().join("a/conv.csv")).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "k,h,l2_u,order_l2_u,h1_u,order_h1_u,l2_p,order_l2_p");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0.3536,") && lines[1].ends_with(",--"));
    assert!(dir.path().join("a/conv_detail.csv").exists());
    let script = fs::read_to_string(dir.path().join("a/conv.gp")).unwrap();
    assert!(script.contains("'conv.csv'"));

    assert!(hdg(&args, dir.path()).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("a/conv.csv")).unwrap(), first);
}

#[test]
fn cr_equivalence_writes_default_file_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdg(&["--experiment", "cr-equiv", "--levels", "2"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("cr_equiv_k0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mesh,tau,midpoint_disc,pressure_disc"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert!(f[2].parse::<f64>().unwrap() <= 1e-8 && f[3].parse::<f64>().unwrap() <= 1e-8, "{row}");
    }
}

#[test]
fn mesh_file_replaces_structured_mesh() {
    let dir = tempfile::tempdir().unwrap();
    // Unit square split along the diagonal.
    fs::write(dir.path().join("sq.txt"), "4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n").unwrap();
    let out = hdg(
        &["--experiment", "infsup", "--mesh", "sq.txt", "--levels", "2", "--out", "is.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("is.csv")).unwrap();
    assert!(csv.starts_with("mesh,h,beta\nfile_r0,1.4142,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn bad_arguments_fail_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdg(&["--experiment", "conv", "--k", "3"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--k"));

    let out = hdg(&["--experiment", "conv", "--mesh", "missing.txt"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    fs::write(dir.path().join("bad.txt"), "3 1\n0 0\n1 0\n").unwrap();
    let out = hdg(&["--experiment", "conv", "--mesh", "bad.txt"], dir.path());
    assert!(!out.status.success());

    let out = hdg(&["--experiment", "conv", "--tau=-1"], dir.path());
    assert!(!out.status.success());
}
