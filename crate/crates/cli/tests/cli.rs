use std::path::Path;
use std::process::Command;

use instrument_autonomy_cli::{
    emit_plot_data, run, CliError, ExperimentConfig, ExperimentKind, Relation, StateSpec,
    VerificationReport, REPORT_FILE, THREADS_ENV,
};
use proptest::prelude::*;

const BIN: &str = env!("CARGO_BIN_EXE_instrument-autonomy");

fn quick(kind: ExperimentKind, json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json)
        .unwrap()
        .resolve(kind)
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(
        r.records()
            .map(|rec| rec.unwrap().iter().map(String::from).collect()),
    );
    rows
}

fn read_report(dir: &Path) -> VerificationReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join(REPORT_FILE)).unwrap()).unwrap()
}

#[test]
fn unknown_keys_are_rejected() {
    for json in [
        r#"{"kapa_o": 1.0}"#,
        r#"{"grid": {"h": 0.1, "width": 3}}"#,
        r#"{"state": {"fock": 2, "extra": 1}}"#,
    ] {
        assert!(
            matches!(ExperimentConfig::from_json(json), Err(CliError::Usage(_))),
            "{json}"
        );
    }
}

#[test]
fn state_specs_parse() {
    let c =
        ExperimentConfig::from_json(r#"{"state": {"coherent": {"re": 1.0, "im": -0.5}}}"#).unwrap();
    assert_eq!(c.state, Some(StateSpec::Coherent { re: 1.0, im: -0.5 }));
    let c = ExperimentConfig::from_json(r#"{"state": {"fock": 3}}"#).unwrap();
    assert_eq!(c.state, Some(StateSpec::Fock(3)));
}

#[test]
fn out_of_range_values_are_usage_errors() {
    for json in [
        r#"{"kappa_o": -1}"#,
        r#"{"dt": 0.1}"#,
        r#"{"subblock": 50}"#,
        r#"{"state": {"fock": 40}}"#,
        r#"{"quadrature_order": 0}"#,
        r#"{"experiment": "evolve-kod"}"#,
    ] {
        let c = ExperimentConfig::from_json(json).unwrap();
        let err = c.resolve(ExperimentKind::PhotodetectEnsemble).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "{json}: {err}");
    }
}

#[test]
fn density_file_state() {
    let dir = tempfile::tempdir().unwrap();
    let d = 4;
    // equal mixture of |0> and |1>
    let re: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j && i < 2 { 0.5 } else { 0.0 })
                .collect()
        })
        .collect();
    let im = vec![vec![0.0; d]; d];
    let path = dir.path().join("rho.json");
    std::fs::write(&path, serde_json::json!({"re": re, "im": im}).to_string()).unwrap();
    let rho = StateSpec::DensityFile(path.clone()).density(d).unwrap();
    assert!((rho.purity() - 0.5).abs() < 1e-14);
    assert!(matches!(
        StateSpec::DensityFile(path).density(5),
        Err(CliError::Usage(_))
    ));
}

#[test]
fn hash_ignores_output_path_only() {
    let base = quick(ExperimentKind::EvolveKod, "{}");
    let mut moved = base.clone();
    moved.output = Some("elsewhere".into());
    assert_eq!(base.hash(), moved.hash());
    let mut other = base.clone();
    other.seed = 1;
    assert_ne!(base.hash(), other.hash());
    let kod = quick(ExperimentKind::PovmConvergence, "{}");
    assert_ne!(base.hash(), kod.hash());
}

#[test]
fn zero_trajectories_leave_ensemble_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(BIN)
        .args(["photodetect-ensemble", "--threads", "2", "--out"])
        .arg(dir.path())
        .args(["--config"])
        .arg(write_config(dir.path(), r#"{"trajectories": 0}"#))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("photodetect.csv"));
    assert_eq!(
        rows[0],
        ["n", "kod", "born", "empirical", "ostensible_weighted"]
    );
    assert_eq!(rows.len(), 41);
    for r in &rows[1..] {
        assert!(!r[1].is_empty() && !r[2].is_empty());
        assert!(r[3].is_empty() && r[4].is_empty());
    }
    // Binomial(5, lambda) in the born column
    let born: f64 = rows[6][2].parse().unwrap();
    assert!((born - 0.5f64.powi(5)).abs() < 1e-4);
    let report = read_report(dir.path());
    assert!(report.pass);
    assert!(report.check("method_a_tv").is_none());
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn failing_check_sets_exit_status() {
    // a 2-point rule cannot normalise the Born density
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"trajectories": 0, "quadrature_order": 2, "cooling_samples": 2000, "plot_series": []}"#,
    );
    let out = Command::new(BIN)
        .args(["heterodyne-ensemble", "--out"])
        .arg(dir.path().join("o"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report = read_report(&dir.path().join("o"));
    assert!(!report.pass);
    assert!(!report.check("born_normalization").unwrap().pass);
}

#[test]
fn bad_input_exits_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"bogus": true}"#);
    let out = Command::new(BIN)
        .args(["evolve-kod", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let series = write_config(dir.path(), r#"{"plot_series": ["histogram-of-nothing"]}"#);
    let out = Command::new(BIN)
        .args(["povm-convergence", "--config"])
        .arg(&series)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(BIN)
        .args(["povm-convergence", "--out"])
        .arg(dir.path())
        .env(THREADS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threads_env_fallback_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["povm-convergence", "--out"])
        .arg(dir.path())
        .env(THREADS_ENV, "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = quick(ExperimentKind::PovmConvergence, r#"{"seed": 9}"#);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run(&cfg, a.path()).unwrap();
    let rb = run(&cfg, b.path()).unwrap();
    assert_eq!(ra, rb);
    for f in ra
        .outputs
        .iter()
        .map(|o| o.file.clone())
        .chain([REPORT_FILE.to_string()])
    {
        assert_eq!(
            std::fs::read(a.path().join(&f)).unwrap(),
            std::fs::read(b.path().join(&f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn outputs_are_lf_csv_with_recorded_digests() {
    let cfg = quick(
        ExperimentKind::VerifyIdentities,
        r#"{"identity_samples": 5}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path()).unwrap();
    assert!(report.pass, "{report:?}");
    assert_eq!(report.provenance.config_hash, cfg.hash());
    assert_eq!(report.provenance.version, env!("CARGO_PKG_VERSION"));
    for o in &report.outputs {
        let bytes = std::fs::read(dir.path().join(&o.file)).unwrap();
        assert!(!bytes.contains(&b'\r'));
        assert!(bytes.ends_with(b"\n"));
        assert_eq!(o.sha256, instrument_autonomy_cli::sha256_hex(&bytes));
    }
    let rows = csv_rows(&dir.path().join("identities.csv"));
    assert_eq!(rows.len() - 1, report.checks.len());
}

#[test]
fn plot_series_examples() {
    let cfg = quick(
        ExperimentKind::EvolveKod,
        r#"{"plot_series": ["lambda", "sigma"], "ode": {"steps": 200}}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    run(&cfg, dir.path()).unwrap();
    let lambda = csv_rows(&dir.path().join("plot_lambda.csv"));
    let sigma = csv_rows(&dir.path().join("plot_sigma.csv"));
    assert_eq!(lambda[0].len(), 2);
    let values: Vec<f64> = lambda[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values[0], 0.0);
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    // 1 - e^{-5}
    assert!((values.last().unwrap() - (1.0 - (-5.0f64).exp())).abs() < 1e-15);
    let t_end: f64 = lambda.last().unwrap()[0].parse().unwrap();
    assert_eq!(t_end, 5.0);
    for (a, b) in lambda[1..].iter().zip(&sigma[1..]) {
        assert_eq!(a, b);
    }
}

#[test]
fn unknown_series_is_a_spec_error() {
    let cfg = quick(ExperimentKind::PovmConvergence, r#"{"plot_series": []}"#);
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path()).unwrap();
    let err = emit_plot_data(&report, &cfg, &["wigner".into()], dir.path()).unwrap_err();
    assert!(matches!(err, CliError::Spec(_)));
    // a report from another config is refused too
    let other = quick(ExperimentKind::PovmConvergence, r#"{"seed": 4}"#);
    let err = emit_plot_data(&report, &other, &["lambda".into()], dir.path()).unwrap_err();
    assert!(matches!(err, CliError::Spec(_)));
}

#[test]
fn beta_cooling_series_tracks_bose_einstein() {
    let cfg = quick(
        ExperimentKind::HeterodyneEnsemble,
        r#"{"trajectories": 0, "plot_series": ["beta-cooling"]}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    run(&cfg, dir.path()).unwrap();
    let rows = csv_rows(&dir.path().join("plot_beta_cooling.csv"));
    for r in &rows[1..] {
        let (kt, b): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let bose = 1.0 / kt.exp_m1();
        assert!((b / bose - 1.0).abs() < 0.03, "{kt}: {b} vs {bose}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overall_pass_iff_every_check_passes(
        checks in proptest::collection::vec((0.0f64..2.0, 0.0f64..2.0, any::<bool>()), 0..12)
    ) {
        use instrument_autonomy_cli::{Check, Provenance};
        let checks: Vec<Check> = checks
            .iter()
            .enumerate()
            .map(|(i, (m, t, upper))| if *upper {
                Check::at_most(format!("c{i}"), *m, *t)
            } else {
                Check::at_least(format!("c{i}"), *m, *t)
            })
            .collect();
        let all = checks.iter().all(|c| match c.relation {
            Relation::AtMost => c.measured.unwrap() <= c.threshold,
            Relation::AtLeast => c.measured.unwrap() >= c.threshold,
        });
        let prov = Provenance { seed: 0, version: "x".into(), config_hash: "h".into() };
        prop_assert_eq!(VerificationReport::new("e".into(), checks, prov).pass, all);
    }

    #[test]
    fn distinct_configs_have_distinct_hashes(
        seed in any::<u64>(),
        traj in 0usize..100_000,
        kappa in 0.1f64..5.0,
        order in 1usize..64,
    ) {
        let mut a = ExperimentConfig::default().resolve(ExperimentKind::HeterodyneEnsemble).unwrap();
        a.seed = seed;
        a.trajectories = traj;
        a.kappa_o = kappa;
        a.quadrature_order = order;
        let mut b = a.clone();
        b.seed = seed.wrapping_add(1);
        prop_assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.trajectories = traj + 1;
        prop_assert_ne!(a.hash(), c.hash());
        let mut d = a.clone();
        d.quadrature_order = order + 1;
        prop_assert_ne!(a.hash(), d.hash());
        prop_assert_eq!(a.hash(), a.clone().hash());
    }
}

#[test]
fn failed_computation_is_reported_with_its_name() {
    // a 6-level space cannot hold the quadrature nodes of the groundstate integral
    let cfg = quick(
        ExperimentKind::VerifyIdentities,
        r#"{"identity_samples": 2, "trace_dim": 6, "dim": 12, "subblock": 6}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path()).unwrap();
    let c = report.check("groundstate_completeness").unwrap();
    assert!(!c.pass && c.measured.is_none());
    assert!(c
        .error
        .as_ref()
        .unwrap()
        .starts_with("groundstate_completeness:"));
    assert!(!report.pass);
}
