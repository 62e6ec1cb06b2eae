//! End-to-end checks of the `ccd` binary: verbs, file outputs, exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ccd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccd"))
        .args(args)
        .output()
        .expect("spawn ccd")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_cubic_config(dir: &Path, out: &Path) -> String {
    write_config(
        dir,
        "cubic.toml",
        &format!(
            r#"
            variants = ["RCPG", "RCGD-1"]
            seeds = [0, 1]
            output_dir = "{}"
            jobs = 2

            [model]
            kind = "cubic_newton"
            n = 30
            m_reg = 1.0
            instance_seed = 3

            [model.spectrum]
            kind = "gap_largest"
            largest = 100.0
            "#,
            out.display()
        ),
    )
}

#[test]
fn bench_writes_traces_summary_and_plotdata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = small_cubic_config(tmp.path(), &out);
    let result = ccd(&["bench", "--config", &cfg]);
    assert!(
        result.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&result.stdout),
        String::from_utf8_lossy(&result.stderr)
    );
    // 2 variants x 2 seeds -> 4 traces plus summary and plot data.
    for name in [
        "trace_RCPG_0.csv",
        "trace_RCPG_1.csv",
        "trace_RCGD-1_0.csv",
        "trace_RCGD-1_1.csv",
        "summary.csv",
        "plotdata.csv",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5, "{summary}");
    assert!(summary.contains("grad_tolerance_met"), "{summary}");
    let trace = fs::read_to_string(out.join("trace_RCGD-1_0.csv")).unwrap();
    assert!(trace.starts_with("k,block,F,grad_norm,grad_fresh,d_norm,alpha,H,eta"));
}

#[test]
fn solve_runs_one_pair_and_flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("solve-out");
    let cfg = small_cubic_config(tmp.path(), &tmp.path().join("ignored"));
    let result = ccd(&[
        "solve",
        "--config",
        &cfg,
        "--variant",
        "RCGD-1",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("RCGD-1,1,"), "{stdout}");
    assert!(out.join("trace_RCGD-1_1.csv").exists());

    // Without narrowing flags, solve refuses a multi-run grid.
    let result = ccd(&["solve", "--config", &cfg]);
    assert!(!result.status.success());
}

#[test]
fn budget_exhaustion_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "tiny.toml",
        &format!(
            r#"
            variants = ["RCGD-2"]
            seeds = [0]
            output_dir = "{}"

            [model]
            kind = "cubic_newton"
            n = 30
            m_reg = 1.0

            [solver]
            max_iters = 5
            "#,
            out.display()
        ),
    );
    let result = ccd(&["bench", "--config", &cfg]);
    assert_eq!(result.status.code(), Some(2));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("max_iterations"), "{summary}");
}

#[test]
fn config_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        r#"
        variants = ["RCPG"]

        [model]
        kind = "cubic_newton"
        n = 30
        m_reg = 1.0
        "#,
    );
    let result = ccd(&["bench", "--config", &cfg]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("seeds required for random variants"), "{stderr}");

    let cfg = write_config(
        tmp.path(),
        "badvariant.toml",
        r#"
        variants = ["RXPG"]
        seeds = [0]

        [model]
        kind = "cubic_newton"
        n = 30
        m_reg = 1.0
        "#,
    );
    let result = ccd(&["bench", "--config", &cfg]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("variant"), "{stderr}");
}

#[test]
fn oracle_reports_global_value_and_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_cubic_config(tmp.path(), &tmp.path().join("unused"));
    let result = ccd(&["oracle", "--config", &cfg]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("F_star,"), "{stdout}");

    let eigen_cfg = write_config(
        tmp.path(),
        "eigen.toml",
        r#"
        variants = ["RCGD-2"]
        seeds = [0]

        [model]
        kind = "eigen"
        n = 40
        m_reg = 1.0
        lambda_min = -3.0
        "#,
    );
    let result = ccd(&["oracle", "--config", &eigen_cfg]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("lambda_min,-2.99"), "{stdout}");
}

#[test]
fn check_verb_passes_on_shipped_models() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, body) in [
        (
            "cubic.toml",
            r#"
            variants = ["RCGD-2"]
            seeds = [0]

            [model]
            kind = "cubic_newton"
            n = 25
            m_reg = 0.5
            "#
            .to_string(),
        ),
        (
            "mf.toml",
            r#"
            variants = ["CCGD-1"]

            [model]
            kind = "mf"
            m = 12
            n = 10
            r = 3
            lambda = 100.0
            "#
            .to_string(),
        ),
    ] {
        let cfg = write_config(tmp.path(), name, &body);
        let result = ccd(&["check", "--config", &cfg]);
        let stdout = String::from_utf8_lossy(&result.stdout);
        assert!(result.status.success(), "{name}: {stdout}");
        assert!(stdout.contains("PASS gradient_finite_difference"), "{stdout}");
        assert!(stdout.contains("PASS block_lipschitz_bound"), "{stdout}");
        assert!(!stdout.contains("FAIL"), "{stdout}");
    }
}

#[test]
fn matrix_market_eigen_mode_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    // Arrow matrix with smallest eigenvalue well below zero.
    let mut mtx = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    let n = 30;
    let mut entries = Vec::new();
    entries.push((1, 1, -4.0));
    for i in 2..=n {
        entries.push((i, i, 1.0 + (i as f64) * 0.1));
        entries.push((i, 1, 0.3));
    }
    mtx.push_str(&format!("{n} {n} {}\n", entries.len()));
    for (i, j, v) in &entries {
        mtx.push_str(&format!("{i} {j} {v}\n"));
    }
    let mtx_path = tmp.path().join("arrow.mtx");
    fs::write(&mtx_path, mtx).unwrap();

    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "eigen-mtx.toml",
        &format!(
            r#"
            variants = ["RCPG", "RCGD-2"]
            seeds = [1]
            output_dir = "{}"

            [model]
            kind = "eigen"
            m_reg = 1.0
            matrix_file = "{}"
            "#,
            out.display(),
            mtx_path.display()
        ),
    );
    // Reference spectrum from the dense oracle.
    let result = ccd(&["oracle", "--config", &cfg]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    let lambda_min: f64 = stdout
        .lines()
        .find(|l| l.starts_with("lambda_min,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(lambda_min < -4.0, "{lambda_min}");

    let result = ccd(&["bench", "--config", &cfg]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    // Both runs converge; the iterate norm encodes the eigenvalue estimate
    // lambda = -(M/2)||x||, checked against the oracle value.
    for path in ["trace_RCPG_1.csv", "trace_RCGD-2_1.csv"] {
        let trace = fs::read_to_string(out.join(path)).unwrap();
        let last_data_line = trace
            .lines().rfind(|l| !l.starts_with('#') && !l.starts_with('k'))
            .unwrap();
        let x_norm: f64 = last_data_line.split(',').nth(9).unwrap().parse().unwrap();
        let lambda_est = -0.5 * x_norm;
        assert!(
            (lambda_est - lambda_min).abs() <= 1e-2 * (1.0 + lambda_min.abs()),
            "{path}: {lambda_est} vs {lambda_min}"
        );
    }
}

#[test]
fn shipped_example_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for name in ["cubic_newton.toml", "eigen.toml", "mf.toml"] {
        let path = root.join("configs").join(name);
        let text = fs::read_to_string(&path).unwrap();
        let cfg: ccd_bench::config::ExperimentConfig = toml::from_str(&text).unwrap();
        cfg.validate().unwrap();
    }
}
