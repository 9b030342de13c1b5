//! End-to-end tests of the binary: flag handling, file formats, exit codes,
//! and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kaczmarz"));
    // Keep tests hermetic against the ambient environment.
    cmd.env_remove("KACZMARZ_DEFAULT_SEED");
    cmd
}

fn work_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kaczmarz-cli-{}-{}", std::process::id(), name));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should run")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_identity(path: &Path, n: usize) {
    let mut text = format!("{n} {n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| if i == j { "1" } else { "0" }.into()).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn generate_diagonal_writes_the_expected_file() {
    let dir = work_dir("gen-diag");
    let out = dir.join("d.mat");
    let res = run(bin().args(["generate", "--kind", "diagonal", "--entries", "3,1", "--out"]).arg(&out));
    assert!(res.status.success(), "{}", stderr_of(&res));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("2 2\n"), "{text}");
    let mut lines = text.lines().skip(1);
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(row, vec![3.0, 0.0]);
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = work_dir("gen-det");
    let (a, b, c) = (dir.join("a.mat"), dir.join("b.mat"), dir.join("c.mat"));
    for (path, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let res = run(bin()
            .args(["generate", "--kind", "planted", "--n", "40", "--shift", "100", "--perturb", "0.01", "--seed", seed, "--out"])
            .arg(path));
        assert!(res.status.success(), "{}", stderr_of(&res));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn generated_consistent_system_round_trips() {
    let dir = work_dir("gen-consistent");
    let out = dir.join("sys.mat");
    let res = run(bin()
        .args(["generate", "--kind", "consistent", "--m", "50", "--n", "20", "--seed", "1", "--out"])
        .arg(&out));
    assert!(res.status.success(), "{}", stderr_of(&res));

    let a = kaczmarz::io::load_matrix(&out).unwrap();
    let x = kaczmarz::io::load_vector(&dir.join("sys.x")).unwrap();
    let b = kaczmarz::io::load_vector(&dir.join("sys.b")).unwrap();
    let res_norm = kaczmarz::linalg::residual_norm(&a, &b, &x);
    assert!(res_norm <= 1e-12, "re-read residual {res_norm}");
}

#[test]
fn solve_on_identity_reaches_zero_residual() {
    let dir = work_dir("solve-id");
    let mat = dir.join("id.mat");
    write_identity(&mat, 5);
    let x0 = dir.join("x0.vec");
    std::fs::write(&x0, "5\n1\n1\n1\n1\n1\n").unwrap();
    let trace = dir.join("trace.csv");
    let res = run(bin()
        .args(["solve", "--iters", "200", "--trace-every", "1", "--seed", "4", "--matrix"])
        .arg(&mat)
        .arg("--x0")
        .arg(&x0)
        .arg("--out")
        .arg(&trace));
    assert!(res.status.success(), "{}", stderr_of(&res));
    assert!(stderr_of(&res).contains("final residual 0.0000000000000000e0"));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iter,row,residual,error,rayleigh\n"));
}

#[test]
fn solve_rejects_mismatched_rhs_with_exit_2() {
    let dir = work_dir("solve-mismatch");
    let mat = dir.join("id.mat");
    write_identity(&mat, 4);
    let b = dir.join("b.vec");
    std::fs::write(&b, "2\n1\n1\n").unwrap();
    let res = run(bin().args(["solve", "--matrix"]).arg(&mat).arg("--b").arg(&b));
    assert_eq!(res.status.code(), Some(2));
    assert!(
        stderr_of(&res).contains("expected length 4"),
        "{}",
        stderr_of(&res)
    );
}

#[test]
fn missing_matrix_file_exits_3() {
    let res = run(bin().args(["solve", "--matrix", "/nonexistent/never.mat"]));
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn verify_passes_on_diagonal_and_flags_identity_axis() {
    let dir = work_dir("verify");
    let d = dir.join("d.mat");
    let res = run(bin().args(["generate", "--kind", "diagonal", "--entries", "3,1", "--out"]).arg(&d));
    assert!(res.status.success());

    let report = dir.join("report.csv");
    let res = run(bin()
        .args(["verify", "--theorem", "1", "--seed", "5", "--matrix"])
        .arg(&d)
        .arg("--out")
        .arg(&report));
    assert_eq!(res.status.code(), Some(0), "{}", stderr_of(&res));
    assert!(stderr_of(&res).contains("PASS"));

    let id = dir.join("id.mat");
    write_identity(&id, 3);
    let res = run(bin().args(["verify", "--theorem", "3", "--matrix"]).arg(&id));
    assert_eq!(res.status.code(), Some(5));
    assert!(stderr_of(&res).contains("row 1"), "{}", stderr_of(&res));
}

#[test]
fn verify_monte_carlo_mode_passes() {
    let dir = work_dir("verify-mc");
    let sys = dir.join("sys.mat");
    let res = run(bin()
        .args(["generate", "--kind", "consistent", "--m", "12", "--n", "5", "--seed", "3", "--out"])
        .arg(&sys));
    assert!(res.status.success());
    let res = run(bin()
        .args(["verify", "--theorem", "2", "--trials", "3000", "--iters", "25", "--seed", "9", "--matrix"])
        .arg(&sys));
    assert_eq!(res.status.code(), Some(0), "{}", stderr_of(&res));
}

#[test]
fn rayleigh_row_count_matches_the_cadence_contract() {
    let dir = work_dir("rayleigh");
    let p = dir.join("p.mat");
    let res = run(bin()
        .args(["generate", "--kind", "planted", "--n", "30", "--seed", "6", "--out"])
        .arg(&p));
    assert!(res.status.success(), "{}", stderr_of(&res));
    let csv = dir.join("r.csv");
    let res = run(bin()
        .args(["rayleigh", "--iters", "200", "--trace-every", "10", "--seed", "1", "--matrix"])
        .arg(&p)
        .arg("--out")
        .arg(&csv));
    assert!(res.status.success(), "{}", stderr_of(&res));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "iter,rayleigh,overlap");
    assert_eq!(rows.len() - 1, 1 + 200 / 10);
    // Quotients parse back and are finite.
    for row in &rows[1..] {
        let q: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(q.is_finite());
    }
}

#[test]
fn env_seed_matches_explicit_flag() {
    let dir = work_dir("env-seed");
    let (by_flag, by_env) = (dir.join("flag.mat"), dir.join("env.mat"));
    let res = run(bin()
        .args(["generate", "--kind", "planted", "--n", "20", "--seed", "42", "--out"])
        .arg(&by_flag));
    assert!(res.status.success());
    let res = run(bin()
        .env("KACZMARZ_DEFAULT_SEED", "42")
        .args(["generate", "--kind", "planted", "--n", "20", "--out"])
        .arg(&by_env));
    assert!(res.status.success());
    assert_eq!(std::fs::read(&by_flag).unwrap(), std::fs::read(&by_env).unwrap());

    let res = run(bin()
        .env("KACZMARZ_DEFAULT_SEED", "not-a-number")
        .args(["generate", "--kind", "planted", "--n", "20", "--out"])
        .arg(dir.join("bad.mat")));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_2() {
    let res = run(bin().args(["solve", "--definitely-not-a-flag"]));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn coefficient_columns_appear_when_tracked_and_round_trip() {
    let dir = work_dir("coef-trace");
    let sys = dir.join("sys.mat");
    let res = run(bin()
        .args(["generate", "--kind", "consistent", "--m", "8", "--n", "3", "--seed", "2", "--out"])
        .arg(&sys));
    assert!(res.status.success(), "{}", stderr_of(&res));

    let trace = dir.join("trace.csv");
    let res = run(bin()
        .args(["solve", "--track-coefficients", "--seed", "6", "--iters", "50", "--trace-every", "5", "--matrix"])
        .arg(&sys)
        .arg("--b")
        .arg(dir.join("sys.b"))
        .arg("--true-x")
        .arg(dir.join("sys.x"))
        .arg("--out")
        .arg(&trace));
    assert!(res.status.success(), "{}", stderr_of(&res));

    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("iter,row,residual,error,rayleigh,coef_1,coef_2,coef_3")
    );
    // Scalars are printed with 17 significant digits, so parsing and
    // reprinting reproduces each field byte for byte.
    for line in lines {
        for field in line.split(',').skip(2).filter(|f| !f.is_empty()) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), field);
        }
    }
}

#[test]
fn solve_tracks_the_predicted_rate_over_many_iterations() {
    let dir = work_dir("long-solve");
    let sys = dir.join("sys.mat");
    let res = run(bin()
        .args(["generate", "--kind", "consistent", "--m", "50", "--n", "20", "--seed", "12", "--out"])
        .arg(&sys));
    assert!(res.status.success(), "{}", stderr_of(&res));

    let res = run(bin()
        .args(["solve", "--seed", "8", "--iters", "100000", "--trace-every", "1000", "--matrix"])
        .arg(&sys)
        .arg("--b")
        .arg(dir.join("sys.b"))
        .arg("--true-x")
        .arg(dir.join("sys.x"))
        .arg("--out")
        .arg(dir.join("trace.csv")));
    assert!(res.status.success(), "{}", stderr_of(&res));
    let summary = stderr_of(&res);
    let error: f64 = summary
        .split("final error ")
        .nth(1)
        .expect("summary should report the error")
        .trim()
        .parse()
        .unwrap();
    assert!(error <= 1e-8, "final error {error} after 1e5 iterations");
}
