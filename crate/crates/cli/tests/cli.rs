use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use prethermal_cli::output::footer_records;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_prethermal"));
    c.env_remove("PRETHERMAL_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn footer(path: &Path, key: &str) -> String {
    let text = fs::read_to_string(path).unwrap();
    footer_records(&text)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("{key} missing in {}", path.display()))
        .1
}

fn footer_f64(path: &Path, key: &str) -> f64 {
    footer(path, key).parse().unwrap()
}

fn assert_same_files(a: &Path, b: &Path) {
    let mut names: Vec<_> = fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(
            fs::read(a.join(&n)).unwrap(),
            fs::read(b.join(&n)).unwrap(),
            "{n:?} differs"
        );
    }
}

#[test]
fn dynamics_defaults_hit_prethermal_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["dynamics", "--plots"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ground = dir.path().join("dynamics_ground.csv");
    let p = footer_f64(&ground, "plateau_p");
    let s = footer_f64(&ground, "plateau_sigmaR");
    assert!((p - 0.0089931).abs() < 1e-4 && (s - 0.0089931).abs() < 1e-4);
    assert!(footer_f64(&ground, "max_closed_form_deviation") < 1e-6);
    let mixed = dir.path().join("dynamics_mixed.csv");
    assert!((footer_f64(&mixed, "plateau_p") / footer_f64(&mixed, "prethermal_p") - 1.0).abs() < 1e-3);
    let text = fs::read_to_string(&ground).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 201);
    assert!(dir.path().join("dynamics_thermal.svg").exists());
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "xi-bound",
            "--samples",
            "20000",
            "--seed",
            "17",
            "--mode",
            "grid",
            "--plots",
        ],
        a.path(),
    );
    assert!(o.status.success());
    let manifest = a.path().join("manifest.toml");
    let o = run(&["xi-bound", "--config", manifest.to_str().unwrap()], b.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_same_files(a.path(), b.path());

    let (c, d) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = run(&["spectrum", "--kind", "nlevel", "--levels", "3", "--plots"], c.path());
    assert!(o.status.success());
    let manifest = c.path().join("manifest.toml");
    let o = run(
        &["spectrum", "--config", manifest.to_str().unwrap(), "--threads", "1"],
        d.path(),
    );
    assert!(o.status.success());
    assert_same_files(c.path(), d.path());
}

#[test]
fn grid_mode_has_sixty_bins_and_seed_matters() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["xi-bound", "--samples", "6000", "--mode", "grid"], dir.path())
        .status
        .success());
    let text = fs::read_to_string(dir.path().join("xi_samples.csv")).unwrap();
    let mut bins: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    bins.sort_unstable();
    bins.dedup();
    assert_eq!(bins.len(), 60);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("xi_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["bound_holds"], true);
    assert_eq!(summary["witnesses"].as_array().unwrap().len(), 2);

    let other = tempfile::tempdir().unwrap();
    assert!(run(
        &["xi-bound", "--samples", "6000", "--mode", "grid", "--seed", "99"],
        other.path()
    )
    .status
    .success());
    assert_ne!(text, fs::read_to_string(other.path().join("xi_samples.csv")).unwrap());
}

#[test]
fn fisher_sweep_reference_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "fisher-sweep",
            "--beta-min",
            "4",
            "--beta-max",
            "4",
            "--beta-points",
            "1",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("fisher_sweep.csv")).unwrap();
    let value = |method: &str| -> f64 {
        let line = text.lines().find(|l| l.ends_with(method)).unwrap();
        line.split(',').nth(3).unwrap().parse().unwrap()
    };
    assert!((value(",prethermal-ground-analytic") - 0.017663).abs() < 5e-7);
    assert!((value(",equilibrium-analytic") - 0.034088).abs() < 5e-7);
    assert!(footer_f64(&dir.path().join("fisher_sweep.csv"), "min_advantage_tqfi_ground") > 1e3);
}

#[test]
fn spectrum_reports_window_and_delta_scaling() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["spectrum"], dir.path()).status.success());
    let csv = dir.path().join("spectrum.csv");
    let ratio = footer_f64(&csv, "separation_ratio");
    assert!((ratio / 3.996e6 - 1.0).abs() < 1e-3);
    assert_eq!(footer(&csv, "ratio_consistent_with_1e6"), "true");
    let l4 = footer_f64(&csv, "numeric_lambda1");

    assert!(run(&["spectrum", "--delta", "1e-3"], dir.path()).status.success());
    let l3 = footer_f64(&csv, "numeric_lambda1");
    assert!((l3 / l4 / 100.0 - 1.0).abs() < 0.01, "{l3} {l4}");

    assert!(run(&["spectrum", "--kind", "qubit"], dir.path()).status.success());
    assert_eq!(footer(&csv, "window_nonempty"), "false");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[probe]\nbeta = 3.0\n[dynamics]\npoints = 11\ninitial = [\"ground\"]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = run(&["dynamics", "--config", cfg.to_str().unwrap(), "--points", "5"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("beta = 3.0"));
    assert!(manifest.contains("points = 5"));
    let rows = fs::read_to_string(out.join("dynamics_ground.csv")).unwrap();
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 6);
    assert!(!out.join("dynamics_mixed.csv").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["spectrum", "--kind", "qubit"])
        .env("PRETHERMAL_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn config_errors_exit_2_and_are_aggregated() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["dynamics", "--points", "0", "--beta", "-1", "--initial", "hot"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("  - ")).count(), 3, "{err}");

    let o = run(&["nlevel", "--levels", "2,26"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("729"));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[probe]\nbetta = 1.0\n").unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = run(
        &[
            "spectrum",
            "--config",
            dir.path().join("missing.toml").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    let manifest = dir.path().join("m");
    assert!(run(&["spectrum", "--kind", "qubit"], &manifest).status.success());
    let o = run(
        &["dynamics", "--config", manifest.join("manifest.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nlevel_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "nlevel",
            "--levels",
            "1,2",
            "--points",
            "8",
            "--beta-min",
            "3",
            "--beta-max",
            "5",
            "--beta-points",
            "3",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = dir.path().join("nlevel_qfi.csv");
    assert!((footer_f64(&q, "N1_equilibrium_qfi") - 0.017663).abs() < 5e-7);
    assert!(footer_f64(&q, "max_late_relative_error") < 0.01);
    let t = fs::read_to_string(dir.path().join("nlevel_tqfi.csv")).unwrap();
    // 3 betas x (2 levels x {fixed, exact} + N*).
    assert_eq!(t.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 5);
    assert_eq!(t.lines().filter(|l| l.ends_with(",nstar")).count(), 3);
}
