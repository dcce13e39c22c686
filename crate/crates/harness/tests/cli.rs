use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaugephase"))
}

#[test]
fn gen_solve_refine_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s);
    let ok = |c: &mut Command| {
        let out = c.output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    };
    ok(bin()
        .args([
            "gen", "--kind", "gaussian", "--m", "30", "--n", "4", "--seed", "3", "--out",
        ])
        .arg(p("inst")));
    ok(bin()
        .args(["solve", "--method", "pg", "--iters", "50", "--instance"])
        .arg(p("inst"))
        .arg("--out")
        .arg(p("solve")));
    let first = std::fs::read(p("solve/trajectory.csv")).unwrap();
    ok(bin()
        .args(["solve", "--method", "pg", "--iters", "50", "--instance"])
        .arg(p("inst"))
        .arg("--out")
        .arg(p("solve")));
    assert_eq!(first, std::fs::read(p("solve/trajectory.csv")).unwrap());
    let report = ok(bin()
        .args(["refine", "--init", "dual", "--instance"])
        .arg(p("inst"))
        .arg("--y")
        .arg(p("solve/y.csv"))
        .arg("--out")
        .arg(p("refine")));
    let err: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("recovery_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("align.txt");
    std::fs::write(&config, "# small study\nm=40\nn=4\nsizes=10,40\nseeds=2\n").unwrap();
    let out = bin()
        .arg("--config")
        .arg(&config)
        .args(["align", "--seeds", "3", "--out"])
        .arg(dir.path().join("a.csv"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().starts_with("40,1.0"));
}

#[test]
fn failures_are_single_machine_readable_lines() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--instance", "/nonexistent", "--out", "/tmp/x"],
        vec!["gen", "--kind", "nope", "--out", "/tmp/x"],
        vec!["align", "--sizes", "0", "--out"],
        vec!["curve", "--bogus"],
    ] {
        let out = bin()
            .args(&args)
            .arg(dir.path().join("o"))
            .output()
            .unwrap();
        assert!(!out.status.success());
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error kind="), "{err}");
    }
}
