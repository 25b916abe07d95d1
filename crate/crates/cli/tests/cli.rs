use std::fs;
use std::process::{Command, Output};

fn wsparse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsparse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn project_worked_example() {
    let o = wsparse(&[
        "project", "--mode", "exact", "--weights", "1,1.41421356,1.73205081", "--s", "3", "--signal", "9,9,10",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("0-indexed support: 0,1\n"), "{out}");
    assert!(out.contains("support: 1,2\n"));
    assert!(out.contains("error: 10\n"));
}

#[test]
fn project_surrogate_and_hard_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    fs::write(&path, "1\n9\n10\n").unwrap();
    let p = path.to_str().unwrap();
    let o = wsparse(&["project", "--mode", "surrogate", "--weights", "1,1.41421356,1.73205081", "--s", "3", "--signal", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // ratio order 1, 2, 0: atom 2 no longer fits after atom 1, atom 0 does
    assert!(stdout(&o).contains("0-indexed support: 0,1\n"), "{}", stdout(&o));
    let o = wsparse(&["project", "--mode", "exact", "--weights", "1,1.41421356,1.73205081", "--s", "3", "--signal", p]);
    assert!(stdout(&o).contains("0-indexed support: 2\n"), "{}", stdout(&o));
    let o = wsparse(&["project", "--mode", "hard", "--s", "1", "--signal", p]);
    assert!(stdout(&o).contains("0-indexed support: 2\n"));
}

#[test]
fn count_partitions_with_note() {
    let o = wsparse(&["count-partitions", "--weights", "sqrt", "--s", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "444793");
    assert!(stderr(&o).contains("444,794"));
    let o = wsparse(&["count-partitions", "--weights", "sqrt", "--s", "1000"]);
    assert_eq!(stdout(&o).trim(), "8635565795744155161506");
}

#[test]
fn usage_and_runtime_exit_codes() {
    assert_eq!(wsparse(&["project", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(wsparse(&[]).status.code(), Some(1));
    assert_eq!(wsparse(&["--help"]).status.code(), Some(0));
    assert_eq!(
        wsparse(&["project", "--weights", "1,2", "--s", "1", "--signal", "1,2,3"]).status.code(),
        Some(1)
    );
    // enumeration refuses N > 25
    assert_eq!(wsparse(&["rip-estimate", "--random", "8,30", "--seed", "1", "--s", "2"]).status.code(), Some(2));
    assert_eq!(wsparse(&["solve", "--random", "8,16", "--s", "2"]).status.code(), Some(1));
}

#[test]
fn rip_estimate_round_trips_the_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("a.csv");
    let m = mat.to_str().unwrap();
    let o = wsparse(&["rip-estimate", "--random", "6,10", "--seed", "4", "--weights", "sqrt", "--s", "5", "--write-matrix", m]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o2 = wsparse(&["rip-estimate", "--matrix", m, "--weights", "sqrt", "--s", "5"]);
    assert_eq!(stdout(&o), stdout(&o2));
}

#[test]
fn solve_from_files_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let y = dir.path().join("y.csv");
    let out = dir.path().join("trace.csv");
    fs::write(&a, "0.5,0,0\n0,0.5,0\n0,0,0.5\n").unwrap();
    fs::write(&y, "2\n0.5\n0\n").unwrap();
    for solver in ["ihwt", "iht", "cosamp", "omp"] {
        let o = wsparse(&[
            "solve", "--solver", solver, "--matrix", a.to_str().unwrap(), "--measurements", y.to_str().unwrap(),
            "--s", "1", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{solver}: {}", stderr(&o));
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("iteration,objective,residual_norm,support,x0,x1,x2\n"));
        let last = text.lines().last().unwrap();
        assert!(last.split(',').nth(3) == Some("0"), "{solver}: {last}");
    }
}

#[test]
fn experiment_csv_is_seed_deterministic_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(&cfg, "# tiny sweep\nn = 64\ntrials = 4\nm = 20..22\n").unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = wsparse(&[
            "experiment", "--protocol", "fig2", "--config", cfg.to_str().unwrap(), "--set", "s=5",
            "--seed", "7", "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
    assert!(a.contains("solver,sweep_param,sweep_value,metric,value,trials,seed\n"));
    assert_eq!(a.lines().filter(|l| l.contains(",recovery_probability,")).count(), 4 * 3);

    let svg = dir.path().join("a.svg");
    let o = wsparse(&["plot", "--input", dir.path().join("a.csv").to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 4);
}

#[test]
fn experiment_config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "trials = 3\ncolour = red\n").unwrap();
    let o = wsparse(&["experiment", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", "/dev/null"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}
