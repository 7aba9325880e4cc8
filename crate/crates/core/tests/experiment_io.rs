use qac_core::experiment::{emit_figure_data, read_bundle, run_experiment, ExperimentConfig, FIGURES};
use qac_core::QacError;

const EXACT: &str = r#"{
  "topology": {"rows": 3, "cols": 3},
  "code": "square414",
  "strategies": ["U", "C", "EP", "QAC-CT", "QAC-EM"],
  "alphas": [0.3, 0.6],
  "gamma_grid": [0.0, 0.3, 0.6],
  "chain_lengths": [3],
  "instances": 3,
  "seed": 5,
  "sampler": {"kind": "exact_gibbs", "beta": 1.5}
}"#;

fn path_of(text: &str) -> String {
    match ExperimentConfig::from_json(text) {
        Err(QacError::Validation { path, .. }) => path,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

fn with(key: &str, value: serde_json::Value) -> String {
    let mut doc: serde_json::Value = serde_json::from_str(EXACT).unwrap();
    doc[key] = value;
    doc.to_string()
}

#[test]
fn validation_errors_name_the_field() {
    assert_eq!(path_of(&with("strategies", serde_json::json!(["U", "QAC-MV"]))), "strategies[1]");
    assert_eq!(path_of(&with("alphas", serde_json::json!([0.5, 1.5]))), "alphas[1]");
    assert_eq!(path_of(&with("gamma_grid", serde_json::json!([-0.1]))), "gamma_grid[0]");
    assert_eq!(path_of(&with("chain_lengths", serde_json::json!([1]))), "chain_lengths[0]");
    assert_eq!(path_of(&with("instances", serde_json::json!(0))), "instances");
    assert!(path_of(&with("code", serde_json::json!("steane"))).starts_with("code"));
    let mut doc: serde_json::Value = serde_json::from_str(EXACT).unwrap();
    doc.as_object_mut().unwrap().remove("seed");
    assert_eq!(path_of(&doc.to_string()), "seed");
    assert_eq!(path_of(&with("bogus", serde_json::json!(1))), "bogus");
}

#[test]
fn nested_unknown_fields_are_rejected() {
    assert!(
        path_of(&with("topology", serde_json::json!({"rows": 2, "cols": 2, "faulty": [1]}))).starts_with("topology")
    );
    let sampler = serde_json::json!({"kind": "metropolis", "sweeps": 10, "temperature": 1.0});
    assert!(path_of(&with("sampler", sampler)).starts_with("sampler"));
}

#[test]
fn equalized_scale_rejects_large_square_alpha() {
    let mut doc: serde_json::Value = serde_json::from_str(EXACT).unwrap();
    doc["equalize_effective_scale"] = true.into();
    doc["alphas"] = serde_json::json!([0.5, 0.8]);
    assert_eq!(path_of(&doc.to_string()), "alphas[1]");
}

#[test]
fn exact_run_round_trips_through_disk() {
    let cfg = ExperimentConfig::from_json(EXACT).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bundle = run_experiment(&cfg, Some(dir.path())).unwrap();
    assert_eq!(read_bundle(dir.path()).unwrap().records.len(), bundle.records.len());
    for r in &bundle.records {
        assert!((0.0..=1.0).contains(&r.mean), "{r:?}");
        assert_eq!(r.per_instance.len(), 3);
    }
    // Exact samplers produce neither histograms nor tie counts.
    for id in FIGURES {
        match emit_figure_data(&bundle, id, dir.path()) {
            Ok(paths) => assert!(paths.iter().all(|p| p.exists())),
            Err(QacError::Reporting(_)) => assert!(id == "fig9" || id == "fig16", "{id}"),
            Err(e) => panic!("{id}: {e}"),
        }
    }
    let fig7 = std::fs::read_to_string(dir.path().join("fig7_alpha0.3.csv")).unwrap();
    assert!(fig7.starts_with("chain_length,alpha,gamma,strategy,mean,sem"));
    assert!(matches!(emit_figure_data(&bundle, "fig99", dir.path()), Err(QacError::Reporting(_))));
}

#[test]
fn encoded_strategies_dominate_under_exact_gibbs() {
    let cfg = ExperimentConfig::from_json(EXACT).unwrap();
    let bundle = run_experiment(&cfg, None).unwrap();
    for alpha in [0.3, 0.6] {
        let get =
            |name: &str| bundle.records.iter().find(|r| r.alpha == alpha && r.strategy.name() == name).unwrap().mean;
        assert!(get("EP") <= get("QAC-CT") + 1e-12);
        assert!(get("QAC-CT") <= get("QAC-EM") + 1e-12);
    }
}
