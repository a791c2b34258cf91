use std::fs;
use std::process::Command;

fn csdr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csdr"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = csdr().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn point_defaults_to_csv_with_status_first() {
    let (code, out, _) = run(&["point"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("status,"));
    assert!(lines[1].starts_with("ok,"));
    assert!(!out.contains('\r'));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn point_column_selection() {
    let (code, out, _) = run(&["point", "--columns", "rates"]);
    assert_eq!(code, 0);
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("status,p_down,p_up"));
    assert!(!header.contains("g1_star"));
}

#[test]
fn sweep_rows_and_order() {
    let (code, out, _) = run(&[
        "sweep",
        "--var",
        "R_M3=0.1:0.3:3",
        "--var",
        "R_M2=0.5:0.9:5",
        "--columns",
        "charging",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1 + 15);
    assert!(lines[0].starts_with("status,R_M3,R_M2,p_pvh"));
    assert!(lines[1].starts_with("ok,0.1,0.5,"));
    assert!(lines[2].starts_with("ok,0.1,0.6,"));
    assert!(lines[6].starts_with("ok,0.2,0.5,"));
}

#[test]
fn unstable_points_have_empty_physics_columns() {
    let (code, out, _) = run(&[
        "sweep",
        "--var",
        "d_w=0.05:12:3",
        "--columns",
        "stability,powers",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].starts_with("unstable,0.05,"));
    let cells: Vec<&str> = rows[0].split(',').collect();
    assert!(cells[2..7].iter().all(|c| !c.is_empty()));
    assert!(cells[7..].iter().all(|c| c.is_empty()));
    assert!(rows[1].starts_with("ok,"));
    assert!(!out.contains("NaN") && !out.contains("nan"));
}

#[test]
fn csv_uses_nine_significant_digits() {
    let (_, out, _) = run(&["sweep", "--var", "d_w=1:2:2", "--columns", "powers"]);
    for row in out.lines().skip(1) {
        for cell in row.split(',').skip(1).filter(|c| !c.is_empty()) {
            let mantissa = cell.split('e').next().unwrap();
            let digits = mantissa
                .trim_start_matches('-')
                .trim_start_matches(['0', '.'])
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert!(digits <= 9, "{cell}");
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let (code, _, _) = run(&[
            "sweep",
            "--var",
            "R_M3=0.05:0.9:6",
            "--var",
            "R_M2=0.05:0.95:7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn json_output() {
    let (code, out, _) = run(&[
        "sweep",
        "--var",
        "d_w=1:3:3",
        "--columns",
        "powers",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("\"columns\""));
    assert!(out.contains("\"summary\""));
    assert!(out.contains("\"status\""));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "# test\nd_w = 3000 mm\nP_in = 150\n").unwrap();
    let (code, file_out, _) = run(&[
        "point",
        "--columns",
        "stability",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, set_out, _) = run(&["point", "--columns", "stability", "--set", "d_w=3"]);
    assert_eq!(file_out, set_out);
}

#[test]
fn summary_goes_to_stderr() {
    let (code, out, err) = run(&[
        "sweep",
        "--var",
        "R_M2=0.3:0.9:7",
        "--columns",
        "charging",
        "--summary",
    ]);
    assert_eq!(code, 0);
    assert!(err.contains("max p_chg"));
    assert!(!out.contains("max p_chg"));
}

#[test]
fn profile_and_spectrum() {
    let (code, out, _) = run(&["profile", "--samples", "50"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("status,z,w00,w\n"));
    assert!(out.lines().count() > 50);
    let (code, out, _) = run(&["spectrum", "--var", "phi=0:6.283185307179586:11"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("status,phi,t_er,r_er\n"));
    assert_eq!(out.lines().count(), 12);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["point", "--set", "R_M2=1.5"],
        vec!["point", "--set", "bogus=1"],
        vec!["point", "--config", "/nonexistent/file"],
        vec!["sweep", "--var", "d_w=2:1:3"],
        vec!["sweep", "--var", "d_w=1:2:1"],
        vec![
            "sweep",
            "--var",
            "d_w=1:2:3",
            "--var",
            "d5=0.09:0.1:2",
            "--var",
            "a_g=1e-3:2e-3:2",
        ],
        vec!["sweep", "--var", "d_w=1:2:3", "--columns", "bogus"],
        vec!["spectrum", "--var", "d_w=0:1:3"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn numeric_failures_exit_3() {
    let (code, _, err) = run(&["point", "--set", "d_eff=1e-8"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("did not converge"));

    let (code, out, _) = run(&[
        "sweep",
        "--var",
        "d_eff=1.1e-11:1e-8:2",
        "--columns",
        "powers",
    ]);
    assert_eq!(code, 3);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].starts_with("ok,"));
    assert!(rows[1].starts_with("numeric-failure,"));
}
