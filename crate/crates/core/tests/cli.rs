use std::process::Command;

use fracdiff::cli::SolutionFile;

fn fracdiff(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fracdiff")).args(args).output().unwrap()
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn converge_emits_rates_consistent_with_errors() {
    let out = fracdiff(&["converge", "--problem", "example1", "--beta", "1.6", "--M", "16", "--N", "64", "--J", "8", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,error,rate");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(','));
    let rows: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["16", "32", "64"]);
    for w in rows.windows(2) {
        let prev: f64 = w[0][1].parse().unwrap();
        let cur: f64 = w[1][1].parse().unwrap();
        let rate: f64 = w[1][2].parse().unwrap();
        assert!((rate - (prev / cur).log2()).abs() < 1e-12);
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["converge", "--problem", "example2", "--M", "6", "--N", "8", "--J", "2", "--levels", "1", "--axis", "time"];
    assert_eq!(fracdiff(&args).stdout, fracdiff(&args).stdout);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, "problem = example1\nbeta = 1.3\nM = 8\nN = 16\nJ = 2\nlevels = 3\naxis = space\n").unwrap();
    let res = fracdiff(&["converge", "--config", cfg.to_str().unwrap(), "--levels", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("16,"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "beta = 1.5\ncolour = blue\n").unwrap();
    let res = fracdiff(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("colour"));
}

#[test]
fn unknown_problem_lists_the_registry() {
    let res = fracdiff(&["solve", "--problem", "nosuch"]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("example1") && err.contains("zero2d"), "{err}");
}

#[test]
fn bad_flag_value_is_a_config_error() {
    assert_eq!(fracdiff(&["solve", "--M", "lots"]).status.code(), Some(2));
    assert_eq!(fracdiff(&["solve", "--precond", "jacobi"]).status.code(), Some(2));
}

#[test]
fn spectrum_above_dense_cap_exits_with_cap_code() {
    let res = fracdiff(&["spectrum", "--problem", "example1", "--M", "64", "--dense-cap", "10"]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn cholesky_above_cap_exits_with_cap_code() {
    let res = fracdiff(&["solve", "--problem", "example2", "--M", "20", "--N", "2", "--J", "1", "--solver", "cholesky", "--dense-cap", "100"]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn krylov_failure_exits_with_solver_code() {
    let res = fracdiff(&["solve", "--problem", "example1", "--M", "64", "--N", "4", "--J", "2", "--solver", "cg", "--max-iter", "2"]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("time step 1"));
}

#[test]
fn compare_flags_skipped_cholesky() {
    let res = fracdiff(&["compare", "--problem", "example1", "--M", "64", "--N", "4", "--J", "2", "--dense-cap", "16"]);
    assert_eq!(res.status.code(), Some(0));
    let text = stdout(&res);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,cpu_seconds,avg_iters");
    assert_eq!(lines[1], "cholesky-skipped,,");
    let methods: Vec<&str> = lines[2..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["cg", "pcg-strang", "pcg-tchan", "pcg-rchan"]);
}

#[test]
fn spectrum_with_zero_scale_is_all_ones() {
    // With the diffusion term removed the preconditioner equals the matrix.
    let res = fracdiff(&["spectrum", "--problem", "zero1d", "--M", "12", "--N", "4", "--J", "1", "--K", "1e-300"]);
    assert_eq!(res.status.code(), Some(0));
    let text = stdout(&res);
    let pre: Vec<f64> = text
        .lines()
        .filter(|l| l.ends_with(",preconditioned"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(pre.len(), 11);
    assert!(pre.iter().all(|v| (v - 1.0).abs() < 1e-12), "{pre:?}");
}

#[test]
fn solve_writes_a_readable_file_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let res = fracdiff(&["solve", "--problem", "zero2d", "--M", "5", "--N", "3", "--J", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let file = SolutionFile::read(&out).unwrap();
    assert_eq!(file.columns, ["t", "x", "y", "u"]);
    assert_eq!(file.rows.len(), 36);
    assert!(file.rows.iter().all(|r| r[3] == 0.0));
    let sigma = file.meta_f64("sigma").unwrap();
    assert!((0.5..=1.0).contains(&sigma));
    assert!(file.meta_f64("chat0_first").unwrap() > 0.0);
    assert!(file.meta_f64("chat0_rest").unwrap() > 0.0);
}
