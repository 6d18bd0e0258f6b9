use cdnn_bench::config::{DgpSource, EstimatorKind, ExperimentConfig, MetricScope};
use cdnn_bench::metrics::{eps_ate, mean_sd, sqrt_pehe};
use cdnn_bench::report::read_report_csv;
use cdnn_bench::{run, BenchError};
use cdnn_core::data::{
    generate, write_csv, Baseline, CovariateLaw, DgpFamily, DgpSpec, Effect, OutcomeSurface,
    Propensity,
};
use proptest::prelude::*;

fn noiseless_affine() -> DgpSpec {
    DgpSpec {
        d: 3,
        covariate_law: CovariateLaw::StandardNormal,
        propensity: Propensity::LogisticLinear { weights: vec![0.5, -0.3, 0.0], bias: 0.0 },
        outcome: OutcomeSurface {
            baseline: Baseline::Affine { intercept: 1.0, coef: vec![0.5, -1.0, 2.0] },
            effect: Effect::Affine { intercept: 1.0, coef: vec![1.5, 0.0, -0.5] },
        },
        noise_sigma: 0.0,
        seed: 5,
    }
}

#[test]
fn lr2_on_noiseless_affine_process_is_exact() {
    let mut cfg = ExperimentConfig::new(DgpSource::Spec(noiseless_affine()), vec![EstimatorKind::OlsLr2]);
    cfg.n = Some(300);
    let report = run(&cfg).unwrap();
    let agg = report.aggregate(EstimatorKind::OlsLr2).unwrap();
    assert!(agg.sqrt_pehe.unwrap().mean <= 1e-6, "{agg:?}");
}

#[test]
fn runs_are_deterministic() {
    let mut cfg = ExperimentConfig::new(
        DgpSource::Family(DgpFamily::ConfoundHetero),
        vec![EstimatorKind::OlsLr1, EstimatorKind::Dml, EstimatorKind::CdnnFreezing],
    );
    cfg.n = Some(200);
    cfg.replications = 10;
    cfg.cdnn.hidden_units = 4;
    cfg.cdnn.ensemble_size = 1;
    cfg.cdnn.stage1.epochs = 10;
    cfg.cdnn.stage2.epochs = 10;
    let a = run(&cfg).unwrap();
    cfg.workers = 3;
    let b = run(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn reloaded_rows_reproduce_the_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(
        DgpSource::Family(DgpFamily::ConfoundLinear),
        vec![EstimatorKind::OlsLr1, EstimatorKind::OlsLr2, EstimatorKind::Dml],
    );
    cfg.n = Some(400);
    cfg.replications = 6;
    cfg.redraw_coefficients = true;
    let stem = dir.path().join("rep");
    run(&cfg).unwrap().emit(&stem).unwrap();
    let records = read_report_csv(&stem.with_extension("csv")).unwrap();
    for kind in &cfg.estimators {
        let rows: Vec<_> = records
            .iter()
            .filter(|r| r.kind == "replication" && r.estimator == kind.name())
            .collect();
        let agg = records
            .iter()
            .find(|r| r.kind == "aggregate" && r.estimator == kind.name())
            .unwrap();
        assert_eq!(rows.len(), 6);
        let pehe: Vec<f64> = rows.iter().map(|r| r.sqrt_pehe.unwrap()).collect();
        let ate: Vec<f64> = rows.iter().map(|r| r.eps_ate.unwrap()).collect();
        let n = pehe.len() as f64;
        let mean = pehe.iter().sum::<f64>() / n;
        let sd = (pehe.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((agg.sqrt_pehe.unwrap() - mean).abs() <= 1e-12);
        assert!((agg.sqrt_pehe_sd.unwrap() - sd).abs() <= 1e-12);
        let (ate_mean, ate_sd) = mean_sd(&ate);
        assert!((agg.eps_ate.unwrap() - ate_mean).abs() <= 1e-12);
        assert!((agg.eps_ate_sd.unwrap() - ate_sd).abs() <= 1e-12);
    }
}

#[test]
fn all_data_scope_scores_every_unit() {
    let mut cfg = ExperimentConfig::new(DgpSource::Family(DgpFamily::NullEffect), vec![EstimatorKind::OlsLr1]);
    cfg.n = Some(500);
    cfg.metrics_on = MetricScope::All;
    let all = run(&cfg).unwrap();
    cfg.metrics_on = MetricScope::Test;
    let test = run(&cfg).unwrap();
    assert_ne!(all.to_csv(), test.to_csv());
    assert!(all.to_markdown().contains("all units"));
}

#[test]
fn csv_without_ground_truth_is_a_failed_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&DgpFamily::NullEffect.spec(1), 200).unwrap();
    let path = dir.path().join("obs.csv");
    write_csv(&data, &path).unwrap();
    // strip the potential-outcome columns
    let text = std::fs::read_to_string(&path).unwrap();
    let stripped: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [&f[..2], &f[4..]].concat().join(",") + "\n"
        })
        .collect();
    std::fs::write(&path, stripped).unwrap();
    let cfg = ExperimentConfig::new(
        DgpSource::CsvGlob(path.display().to_string()),
        vec![EstimatorKind::OlsLr1],
    );
    let report = run(&cfg).unwrap();
    let row = report.rows_for(EstimatorKind::OlsLr1).next().unwrap();
    assert!(row.outcome.as_ref().unwrap_err().contains("metric unavailable"));
    assert_eq!(report.failure_count(), 1);
}

#[test]
fn invalid_configs_are_configuration_errors() {
    let bad = [
        r#"{"dgp": {"family": "null-effect"}, "n": 100, "estimators": []}"#,
        r#"{"dgp": {"family": "null-effect"}, "estimators": ["ols_lr1"]}"#,
        r#"{"dgp": {"family": "null-effect"}, "n": 100, "estimators": ["ols_lr1"], "replications": 0}"#,
        r#"{"dgp": {"family": "null-effect"}, "n": 100, "estimators": ["forest"]}"#,
        r#"{"dgp": {"family": "null-effect"}, "n": 100, "estimators": ["ols_lr1"],
            "split": {"scheme": "custom", "train": 0.5, "validation": 0.2, "test": 0.2}}"#,
    ];
    for text in bad {
        let err: BenchError = ExperimentConfig::from_json(text).unwrap_err();
        assert!(err.is_config(), "{text}: {err}");
    }
}

proptest! {
    #[test]
    fn pehe_is_symmetric_and_dominates_eps_ate(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..64)
    ) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let a = sqrt_pehe(&p, Some(&t)).unwrap();
        let b = sqrt_pehe(&t, Some(&p)).unwrap();
        prop_assert_eq!(a, b);
        let ate = eps_ate(&p, Some(&t)).unwrap();
        prop_assert!(a >= ate * (1.0 - 1e-12));
        prop_assert_eq!(sqrt_pehe(&p, Some(&p)).unwrap(), 0.0);
    }

    #[test]
    fn pehe_is_zero_only_for_identical_vectors(
        v in prop::collection::vec(-10.0f64..10.0, 1..32),
        i in any::<prop::sample::Index>(),
        bump in 1e-6f64..1.0,
    ) {
        let mut w = v.clone();
        let k = i.index(w.len());
        w[k] += bump;
        prop_assert!(sqrt_pehe(&v, Some(&w)).unwrap() > 0.0);
    }
}
