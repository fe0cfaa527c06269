use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hdgml(sub: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.with_extension("cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hdgml"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .env("HDGML_LOG", "warn")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn single_level_solve_takes_one_iteration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("one");
    let o = hdgml("solve", "[problem]\nkappa = 10\nfinest_n = 8\nlevels = 1\n", &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(&out, "summary.csv");
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("level,dofs,iter,seconds"));
    assert!(lines.next().unwrap().starts_with("1,416,1,"));
    assert!(lines.next().is_none());
}

#[test]
fn solve_writes_every_requested_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = "[problem]\nkappa = 10\np = 1\nfinest_n = 16\nlevels = 2\n[output]\nmatrix_market = true\nvector = true\nmesh_listing = true\n";
    let o = hdgml("solve", cfg, &out, &["--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = read(&out, "manifest.txt");
    assert!(manifest.starts_with("mode=solve\nconfig_sha256="));
    assert!(manifest.contains("seed=7\n"));
    for f in ["summary.csv", "residuals_2.csv", "residuals_2.svg", "matrix_2.mtx", "solution_2.csv", "mesh_2.txt"] {
        assert!(manifest.contains(&format!("file={f}\n")), "{f}");
        assert!(out.join(f).exists(), "{f}");
    }
    let sol = read(&out, "solution_2.csv");
    assert_eq!(sol.lines().next(), Some("index,re,im"));
    assert_eq!(sol.lines().count(), 1601);
    assert!(read(&out, "matrix_2.mtx").starts_with("%%MatrixMarket matrix coordinate complex"));
    let res = read(&out, "residuals_2.csv");
    let rel: Vec<f64> = res.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(*rel.last().unwrap() <= 1e-6);
    assert!(rel.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn reruns_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[problem]\nkappa = 12\np = 2\nfinest_n = 8\nlevels = 2\n";
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(hdgml("solve", cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(hdgml("solve", cfg, &b, &[]).status.code(), Some(0));
    assert_eq!(read(&a, "residuals_2.csv"), read(&b, "residuals_2.csv"));
    assert_eq!(read(&a, "manifest.txt"), read(&b, "manifest.txt"));
    // the seconds column is wall-clock time
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(read(&a, "summary.csv")), strip(read(&b, "summary.csv")));
}

#[test]
fn max_iter_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cap");
    let o = hdgml("solve", "[problem]\nkappa = 20\nfinest_n = 16\nlevels = 2\n[solver]\nmax_iter = 2\n", &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(read(&out, "manifest.txt").contains("status=max_iter"));
    assert!(read(&out, "summary.csv").contains(",2,"));
}

#[test]
fn malformed_configs_exit_one_with_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("[problem]\nkappa = 20\nfinest_n 16\n", "line 3"),
        ("[problem]\nkappa = 20\nfinest_n = 16\n[solver]\ntol = 2\n", "line 5"),
        ("[problem]\nkappa = -1\nfinest_n = 16\n", "line 2"),
        ("[problem]\nkappa = 20\nfinest_n = 12\nlevels = 4\n", "line 4"),
        ("mode = lfa-two-level\n", "line 1"),
        ("[problem]\nfinest_n = 8\n", "kappa"),
    ];
    for (k, (cfg, needle)) in cases.iter().enumerate() {
        let o = hdgml("solve", cfg, &tmp.path().join(format!("bad{k}")), &[]);
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{cfg}: {err}");
    }
    let o = hdgml("lfa", "[lfa]\nt = 0.1\n", &tmp.path().join("nomode"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = hdgml("solve", "[problem]\nkappa = 5\nfinest_n = 4\n", &tmp.path().join("threads"), &["--threads", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_hdgml")).arg("solve").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn two_level_sweep_converges_at_small_t() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lfa");
    let o = hdgml("lfa", "mode = lfa-two-level\n[lfa]\nt = 0.1\nsamples = 512\n", &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let curve = read(&out, "two_level_t0.1.csv");
    assert_eq!(curve.lines().next(), Some("theta,rho"));
    let rho: Vec<f64> = curve.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rho.len(), 512);
    assert!(rho.iter().copied().fold(0.0, f64::max) < 1.0);
    assert!(out.join("two_level.svg").exists());
}

#[test]
fn other_lfa_modes_write_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = [
        ("mode = lfa-three-level\n[lfa]\nt = 0.25\nsamples = 64\n", "three_level_t0.25.csv"),
        ("mode = lfa-smoother\n[lfa]\nt = 1\nsamples = 64\nomega = 0.6\n", "smoother_t1.csv"),
        ("mode = lfa-gmres-experiment\n[lfa]\nsamples = 32\n", "amplification.csv"),
    ];
    for (k, (cfg, file)) in runs.iter().enumerate() {
        let out = tmp.path().join(format!("m{k}"));
        let o = hdgml("lfa", cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(read(&out, "manifest.txt").contains(&format!("file={file}\n")));
        assert!(read(&out, "lfa_summary.csv").lines().count() == 2);
    }
    let o = hdgml("solve", "mode = lfa-smoother\n[lfa]\nt = 1\n", &tmp.path().join("wrong"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stability_check_records_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("stab");
    let o = hdgml("solve", "mode = stability-check\n[stability]\np = 1\ncoarse_n = 2, 4\ntrials = 5\n", &out, &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = read(&out, "stability.csv");
    assert_eq!(t.lines().count(), 3);
    for l in t.lines().skip(1) {
        let power: f64 = l.split(',').nth(4).unwrap().parse().unwrap();
        assert!(power > 0.0 && power <= 10.0);
    }
    assert!(read(&out, "manifest.txt").contains("seed=3"));
}
