use std::path::Path;
use std::process::{Command, Output};

use cone_minkowski_cli::*;
use serde_json::Value;

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn file<'a>(bundle: &'a Bundle, name: &str) -> &'a str {
    let (_, bytes) = bundle.files.iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no {name}"));
    std::str::from_utf8(bytes).unwrap()
}

fn csv_column(text: &str, column: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == column).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn binary(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cone-minkowski"))
        .args(args)
        .current_dir(dir)
        .env_remove("CONE_MINKOWSKI_OUT")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sector_verify_is_exact() {
    let b = run_verify(&config(
        r#"{"cone": {"cap": {"alpha": 1.2}}, "profile": {"constant": {"R": 1.5}},
            "n_phi": 64, "n_s": 16, "n_b": 128}"#,
    ))
    .unwrap();
    assert!(b.passed(), "{:?}", b.failures().collect::<Vec<_>>());
    let bounded = |c: &&Check| c.threshold.is_finite() && c.threshold > 0.0 && !c.name.ends_with("_order");
    for c in b.checks.iter().filter(bounded) {
        assert!(c.value.abs() < 1e-10, "{}", c.line());
    }
    assert!(b.checks.iter().any(|c| c.name == "sector_umbilicity"));
}

#[test]
fn axisym_verify_table_has_every_level() {
    let b = run_verify(&config(
        r#"{"cone": {"cap": {"alpha": 1.2}}, "profile": {"axisym": {"R": 1.0, "eps": 0.1}},
            "n_phi": 64, "n_s": 16, "n_b": 128, "levels": 3, "suites": ["mink2"]}"#,
    ))
    .unwrap();
    assert!(b.passed());
    let csv = file(&b, "verify_levels.csv");
    let res = csv_column(csv, "mink2_residual");
    assert_eq!(res.len(), 3);
    assert!(res[2].abs() < 1e-6 && res[2].abs() < res[0].abs(), "{res:?}");
    assert_eq!(csv_column(csv, "n_s"), vec![4.0, 8.0, 16.0]);
    let json: Value = serde_json::from_str(file(&b, "verify.json")).unwrap();
    assert_eq!(json["mink2"].as_array().unwrap().len(), 3);
}

#[test]
fn strict_first_formula_rejects_tilted_rim() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"cone": {"cap": {"alpha": 1.2}}, "profile": {"linear_violation": {"R": 1.0, "eps": 0.1}},
            "n_phi": 64, "n_s": 16, "n_b": 128, "suites": ["mink1-strict"]}"#,
    );
    let out = binary(&["verify", "--config", &cfg, "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mink1_strict") && stderr.contains("orthogonality residual"), "{stderr}");
    assert!(dir.path().join("res/verify.json").exists());
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"cone": {"cap": {"alpha": 1.2}}, "resolution": 3}"#);
    let out = binary(&["verify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));
    let cfg = write_config(dir.path(), r#"{"cone": {"cap": {"alpha": 4.0}}}"#);
    assert_eq!(binary(&["verify", "--config", &cfg], dir.path()).status.code(), Some(2));
    let missing = binary(&["verify", "--config", "nope.json"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"cone": {"cap": {"alpha": 1.0}}, "profile": {"constant": {"R": 1.0}},
            "n_phi": 16, "n_s": 4, "n_b": 32, "levels": 1, "suites": ["mink1"], "out_dir": "from_config"}"#,
    );
    assert!(binary(&["verify", "--config", &cfg], dir.path()).status.success());
    assert!(dir.path().join("from_config/verify.json").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_cone-minkowski"))
        .args(["verify", "--config", &cfg])
        .current_dir(dir.path())
        .env("CONE_MINKOWSKI_OUT", "from_env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from_env/verify_levels.csv").exists());
    assert!(binary(&["verify", "--config", &cfg, "--out", "flag", "--threads", "2"], dir.path()).status.success());
    assert!(dir.path().join("flag/verify_convergence.svg").exists());
}

#[test]
fn empty_sweep_writes_header_only() {
    let b = run_sweep(&ExperimentConfig::default(), SweepAxis::Alpha).unwrap();
    assert!(b.passed() && b.checks.is_empty());
    let csv = file(&b, "sweep.csv");
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("alpha,mink2_lhs,mink2_rhs,"));
}

#[test]
fn correction_grows_with_amplitude() {
    let b = run_sweep(
        &config(
            r#"{"cone": {"cap": {"alpha": 2.0}}, "profile": {"bump": {"R": 1.0, "eps": 0.1, "k": 2}},
                "n_phi": 96, "n_s": 24, "n_b": 192, "sweep": {"eps": [0.0, 0.025, 0.05, 0.1]}}"#,
        ),
        SweepAxis::Eps,
    )
    .unwrap();
    let c = csv_column(file(&b, "sweep.csv"), "correction");
    assert!(c[0] < 1e-14, "{c:?}");
    assert!(c.windows(2).all(|w| w[1] > w[0]), "{c:?}");
    assert!(file(&b, "sweep.svg").contains("<polyline"));
}

#[test]
fn sign_condition_follows_convexity_across_alpha() {
    let b = run_sweep(
        &config(
            r#"{"cone": {"cap": {"alpha": 1.2}}, "profile": {"bump": {"R": 1.0, "eps": 0.1, "k": 2}},
                "n_phi": 96, "n_s": 24, "n_b": 192, "sweep": {"alpha": [1.2, 1.4, 1.7, 2.0]}}"#,
        ),
        SweepAxis::Alpha,
    )
    .unwrap();
    let json: Value = serde_json::from_str(file(&b, "sweep.json")).unwrap();
    let rows = json["rows"].as_array().unwrap();
    for r in rows {
        let convex = r["convex"].as_bool().unwrap();
        let sign = r["sign_condition"].as_f64().unwrap();
        assert_eq!(convex, r["value"].as_f64().unwrap() <= std::f64::consts::FRAC_PI_2);
        assert_eq!(convex, sign >= -1e-10, "{r}");
    }
}

#[test]
fn planar_cones_cannot_be_swept_or_meshed() {
    let c = config(r#"{"cone": {"wedge": {"angle": 1.0}}, "profile": {"bump": {"R": 1.0, "eps": 0.1, "k": 1}}}"#);
    assert!(matches!(run_sweep(&c, SweepAxis::Eps), Err(CliError::Config(_))));
    assert!(matches!(run_spectrum(&c), Err(CliError::Config(_))));
    let b = run_verify(&c).unwrap();
    assert!(b.passed());
    let planar = b.checks.iter().find(|c| c.name == "mink2_boundary_planar").unwrap();
    assert_eq!(planar.value, 0.0);
}

#[test]
fn hemisphere_spectrum_converges_to_two() {
    let b = run_spectrum(&config(
        r#"{"cone": {"cap": {"alpha": 1.5707963267948966}}, "profile": {"constant": {"R": 1.0}},
            "mesh_levels": [8, 16, 32]}"#,
    ))
    .unwrap();
    assert!(b.passed());
    let l = csv_column(file(&b, "spectrum.csv"), "lambda1");
    assert!(l.windows(2).all(|w| (w[1] - 2.0).abs() < (w[0] - 2.0).abs()));
    assert!((l[2] - 2.0).abs() < 0.02);
    let json: Value = serde_json::from_str(file(&b, "spectrum.json")).unwrap();
    assert!((json["domain"]["extrapolated"].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn stability_reports() {
    let sector = run_stability(&config(
        r#"{"cone": {"cap": {"alpha": 1.2}}, "profile": {"constant": {"R": 1.0}},
            "n_phi": 64, "n_s": 16, "n_b": 128, "mesh_levels": [6, 12, 24]}"#,
    ))
    .unwrap();
    assert!(sector.passed(), "{:?}", sector.failures().collect::<Vec<_>>());
    let json: Value = serde_json::from_str(file(&sector, "stability.json")).unwrap();
    assert_eq!(json["report"]["label"], "theorem-applicable");
    assert!(json["report"]["margin"].as_f64().unwrap().abs() < 1e-9);

    let bumped = run_stability(&config(
        r#"{"cone": {"cap": {"alpha": 1.2}}, "profile": {"bump": {"R": 1.0, "eps": 0.1, "k": 3}},
            "n_phi": 64, "n_s": 16, "n_b": 128, "mesh_levels": [6, 12, 24]}"#,
    ))
    .unwrap();
    let json: Value = serde_json::from_str(file(&bumped, "stability.json")).unwrap();
    assert_eq!(json["report"]["label"], "diagnostic");
    let interval = json["report"]["margin_interval"].as_array().unwrap();
    assert!(interval[0].as_f64().unwrap() <= interval[1].as_f64().unwrap());
}

#[test]
fn sweep_axis_parses() {
    assert_eq!("delta".parse::<SweepAxis>().unwrap(), SweepAxis::Delta);
    assert!("beta".parse::<SweepAxis>().is_err());
}
