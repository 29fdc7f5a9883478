use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nhsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhsense")).args(args).env_remove("NHSENSE_OUT_DIR").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = nhsense(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Column name to values.
fn read_csv(path: &Path) -> BTreeMap<String, Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    let mut cols: BTreeMap<String, Vec<String>> = header.iter().map(|h| (h.clone(), Vec::new())).collect();
    for line in lines {
        for (h, v) in header.iter().zip(line.split(',')) {
            cols.get_mut(h).unwrap().push(v.to_string());
        }
    }
    cols
}

fn reals(col: &[String]) -> Vec<f64> {
    col.iter().map(|v| v.parse().unwrap()).collect()
}

fn manifest_value(path: &Path, key: &str) -> Option<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(|v| v.trim_matches('"').to_string()))
}

#[test]
fn hermitian_single_point_has_real_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["spectrum", "--g0", "0.1", "--delta0", "0.04", "--t", "0.3", "--out", out]);
    let csv = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(csv["t"].len(), 1);
    for col in ["e_plus_im", "e_minus_im", "de_im", "chi_im"] {
        assert_eq!(reals(&csv[col])[0].abs(), 0.0, "{col}");
    }
    assert!(dir.path().join("spectrum.manifest.toml").exists());
}

#[test]
fn time_grid_sets_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["spectrum", "--g0", "0.02", "--delta0", "0.04", "--gamma0", "0.2", "--t-grid", "0:2:2001", "--out", out]);
    let csv = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(csv["t"].len(), 2001);
    assert!(csv["status"].iter().all(|s| s == "ok" || s == "ep"));
}

#[test]
fn usage_errors_exit_with_two() {
    let missing = nhsense(&["spectrum", "--delta0", "0.04"]);
    assert_eq!(missing.status.code(), Some(2));
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.contains("g0") && err.contains("Usage"), "{err}");
    assert_eq!(nhsense(&["figure", "--id", "fig9"]).status.code(), Some(2));
    assert_eq!(nhsense(&["spectrum", "--g0", "abc"]).status.code(), Some(2));
    assert_eq!(nhsense(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(nhsense(&["evolve", "--g0", "0.01", "--kernel", "heun"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let r = nhsense(&["spectrum", "--g0", "0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let r = nhsense(&["spectrum", "--g0", "0.1", "--config", "/nonexistent/nhsense.toml"]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn fig6_files_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&["figure", "--id", "fig6", "--grid-scale", "0.05", "--out", out.to_str().unwrap()]);
    for f in ["fig6_nh.csv", "fig6_h.csv", "fig6_sp.csv", "fig6.manifest.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest = out.join("fig6.manifest.toml");
    let again = dir.path().join("again");
    let r = ok(&["replay", "--manifest", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&r.stdout);
    assert_eq!(text.matches("identical").count(), 3, "{text}");
    for f in ["fig6_nh.csv", "fig6_h.csv", "fig6_sp.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap());
    }
}

#[test]
fn tampered_output_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["spectrum", "--g0", "0.1", "--t-grid", "0:1:11", "--out", out]);
    let manifest = dir.path().join("spectrum.manifest.toml");
    let text = fs::read_to_string(&manifest).unwrap().replace("t-grid = \"0:1:11\"", "t-grid = \"0:1:12\"");
    fs::write(&manifest, text).unwrap();
    let r = nhsense(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stdout).contains("DIFFERS"));
}

#[test]
fn quarter_grid_scale_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["figure", "--id", "fig2a", "--grid-scale", "0.25", "--out", out]);
    let csv = read_csv(&dir.path().join("fig2a.csv"));
    assert_eq!(csv["lambda_g0"].len(), 501);
    assert_eq!(manifest_value(&dir.path().join("fig2a.manifest.toml"), "grid_scale").as_deref(), Some("0.25"));
}

#[test]
fn noise_figure_has_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["figure", "--id", "figB1", "--grid-scale", "0.1", "--out", out]);
    let m = dir.path().join("figB1.manifest.toml");
    let eta: f64 = manifest_value(&m, "crossover_eta").unwrap().parse().unwrap();
    assert!((0.04..0.06).contains(&eta), "{eta}");
    let a = read_csv(&dir.path().join("figB1a.csv"));
    assert_eq!(a["eta"].len(), 201);
    assert!(dir.path().join("figB1b.csv").exists());
}

#[test]
fn evolve_shows_inversion_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = ["evolve", "--g0", "0.01", "--delta0", "0.04", "--gamma0", "0.02", "--t-span", "0:4", "--out", out];
    ok(&base);
    let csv = read_csv(&dir.path().join("evolve.csv"));
    let p = reals(&csv["p_plus"]);
    assert_eq!(p[0], 0.0);
    assert!(p.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max) > 0.99);
    assert!(csv["guard"].iter().all(|g| g == "pass"));
    assert!(csv["status"].iter().any(|s| s == "ep"));

    let mut coarse = base.to_vec();
    coarse.extend(["--steps", "2000"]);
    ok(&coarse);
    let csv = read_csv(&dir.path().join("evolve.csv"));
    let dev: f64 = manifest_value(&dir.path().join("evolve.manifest.toml"), "guard_max_deviation").unwrap().parse().unwrap();
    let expect = if dev > 1e-6 { "fail" } else { "pass" };
    assert!(csv["guard"].iter().all(|g| g == expect));

    let mut too_coarse = base.to_vec();
    too_coarse.extend(["--steps", "100"]);
    assert_eq!(nhsense(&too_coarse).status.code(), Some(2));
}

#[test]
fn hermitian_master_run_keeps_purity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["evolve", "--kernel", "master", "--g0", "0.01", "--delta0", "0.04", "--gamma0", "0", "--samples", "41", "--out", out]);
    let csv = read_csv(&dir.path().join("evolve.csv"));
    for col in ["p_plus_raw", "p_plus_norm", "purity"] {
        assert!(csv.contains_key(col), "{col}");
    }
    assert!(reals(&csv["purity"]).iter().all(|p| (p - 1.0).abs() < 1e-8));
}

#[test]
fn flags_beat_config_beats_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "g0 = 0.5\ndelta0 = 0.04\nt = 0.5\n").unwrap();
    let out = dir.path().join("o");
    ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--g0", "0.1", "--out", out.to_str().unwrap()]);
    let m = out.join("spectrum.manifest.toml");
    assert_eq!(manifest_value(&m, "g0").as_deref(), Some("0.1"));
    assert_eq!(manifest_value(&m, "delta0").as_deref(), Some("0.04"));
    assert_eq!(manifest_value(&m, "gamma0").as_deref(), Some("0.0"));
    assert_eq!(reals(&read_csv(&out.join("spectrum.csv"))["t"]), vec![0.5]);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_nhsense"))
        .args(["spectrum", "--g0", "0.1"])
        .env("NHSENSE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(r.status.success());
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn sweep_noise_and_optimal_time_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "sweep", "--g0", "0.01", "--delta0", "0.04", "--gamma0", "0.02", "--kernel", "schrodinger", "--lambda-grid",
        "-0.1:0:3", "--t-grid", "0:1:3", "--out", out,
    ]);
    let csv = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(csv["t_pi"].len(), 9);
    let r = ok(&["replay", "--manifest", dir.path().join("sweep.manifest.toml").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&r.stdout).contains("identical sweep.csv"));

    ok(&["noise", "--p-plus", "0.3784", "--chi", "52.36", "--eta-grid", "0:0.1:11", "--mc-samples", "10000", "--out", out]);
    let csv = read_csv(&dir.path().join("noise.csv"));
    let dp = reals(&csv["dp_prime"]);
    assert_eq!(dp.len(), 11);
    assert!(dp.windows(2).all(|w| w[1] > w[0]));
    assert!(csv.contains_key("dp_prime_mc"));
    let r = ok(&["replay", "--manifest", dir.path().join("noise.manifest.toml").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&r.stdout).contains("identical noise.csv"));

    ok(&["optimal-time", "--g0", "0.02", "--delta0", "0.04", "--gamma0", "0.2", "--out", out]);
    let csv = read_csv(&dir.path().join("optimal_time.csv"));
    assert_eq!(csv["regime"], vec!["matched".to_string()]);
    let tau = reals(&csv["tau_pi"])[0];
    assert!((tau - 0.3457334).abs() < 1e-6, "{tau}");
}
