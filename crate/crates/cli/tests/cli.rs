//! Integration tests driving the `authattr` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_authattr")
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .collect()
}

#[test]
fn extract_fixture_corpus_counts_and_masks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("features.csv");
    run_ok(&[
        "extract",
        "--corpus",
        &path_str(&fixture("corpus")),
        "--out",
        &path_str(&out),
        "--no-dynamic",
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# authattr "), "artifact header present");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let fields = authattr_core::csvio::split_row(row);
        assert_eq!(fields.len(), 2 + 54 + 1);
        let mask = fields.last().unwrap();
        // the whole td block is masked under --no-dynamic
        assert_eq!(&mask[12..16], "0000");
    }
    // rerun is byte-identical
    let first = std::fs::read(&out).unwrap();
    run_ok(&[
        "extract",
        "--corpus",
        &path_str(&fixture("corpus")),
        "--out",
        &path_str(&out),
        "--no-dynamic",
    ]);
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn train_writes_model_and_honors_variant_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    run_ok(&[
        "train",
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&model),
        "--model",
        "rf",
        "--trees",
        "5",
    ]);
    let (loaded, _) = authattr_core::ensemble::load_model(&model).unwrap();
    assert_eq!(loaded.kind, authattr_core::ensemble::ModelKind::RandomForest);
    assert!(loaded.selected_features.is_none());
}

#[test]
fn train_shap_variant_with_full_top_k_selects_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    run_ok(&[
        "train",
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&model),
        "--model",
        "xgb-shap",
        "--top-k",
        "54",
        "--trees",
        "4",
    ]);
    let (loaded, _) = authattr_core::ensemble::load_model(&model).unwrap();
    assert_eq!(
        loaded.selected_features,
        Some((0..54).collect::<Vec<usize>>())
    );
}

#[test]
fn train_missing_csv_exits_2_without_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    let out = run(&[
        "train",
        "--features",
        &path_str(&tmp.path().join("nope.csv")),
        "--out",
        &path_str(&model),
        "--model",
        "rf",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!model.exists(), "no partial model file");
}

#[test]
fn unknown_variant_exits_1() {
    let out = run(&[
        "train",
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        "/tmp/never.json",
        "--model",
        "deep-net",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("xgb-shap"), "lists valid variants: {msg}");
}

#[test]
fn predict_memorizing_forest_recovers_training_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    let preds = tmp.path().join("preds.csv");
    run_ok(&[
        "train",
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&model),
        "--model",
        "rf",
        "--trees",
        "1",
        "--no-bootstrap",
        "--feature-subsample",
        "54",
        "--seed",
        "1",
    ]);
    run_ok(&[
        "predict",
        "--model",
        &path_str(&model),
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&preds),
    ]);
    let text = std::fs::read_to_string(&preds).unwrap();
    for row in data_rows(&text) {
        let fields = authattr_core::csvio::split_row(row);
        let author = fields[0].split('/').next().unwrap();
        assert_eq!(fields[1], author, "memorizing forest: {row}");
        assert_eq!(fields[2], "1.00000000e0");
    }
}

#[test]
fn predict_empty_input_yields_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    let golden = std::fs::read_to_string(fixture("golden_features.csv")).unwrap();
    let header_only: String = golden
        .lines()
        .take_while(|l| l.starts_with('#') || l.starts_with("sample_id"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&empty, header_only).unwrap();
    let preds = tmp.path().join("preds.csv");
    run_ok(&[
        "predict",
        "--model",
        &path_str(&fixture("golden_model.json")),
        "--features",
        &path_str(&empty),
        "--out",
        &path_str(&preds),
    ]);
    let text = std::fs::read_to_string(&preds).unwrap();
    assert_eq!(data_rows(&text).len(), 0);
    assert!(text.contains("sample_id,predicted_author,probability,probabilities"));
}

#[test]
fn predict_matches_golden_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let preds = tmp.path().join("preds.csv");
    run_ok(&[
        "predict",
        "--model",
        &path_str(&fixture("golden_model.json")),
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&preds),
    ]);
    let got = std::fs::read(&preds).unwrap();
    let want = std::fs::read(fixture("golden_predictions.csv")).unwrap();
    assert_eq!(got, want, "golden predictions drifted");
}

#[test]
fn explain_exact_agrees_with_tree_walk_on_reduced_model() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    run_ok(&[
        "train",
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&model),
        "--model",
        "xgb-shap",
        "--top-k",
        "8",
        "--trees",
        "6",
        "--seed",
        "3",
    ]);
    let run_explain = |exact: bool, out: &Path, imp: &Path| {
        let mut args = vec![
            "explain".to_string(),
            "--model".into(),
            path_str(&model),
            "--features".into(),
            path_str(&fixture("golden_features.csv")),
            "--out".into(),
            path_str(out),
            "--importance".into(),
            path_str(imp),
            "--background-size".into(),
            "4".into(),
            "--seed".into(),
            "9".into(),
        ];
        if exact {
            args.push("--exact".into());
        }
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        run_ok(&argv);
    };
    let (o1, i1) = (tmp.path().join("tree.jsonl"), tmp.path().join("imp1.csv"));
    let (o2, i2) = (tmp.path().join("exact.jsonl"), tmp.path().join("imp2.csv"));
    run_explain(false, &o1, &i1);
    run_explain(true, &o2, &i2);
    let parse = |path: &Path| -> Vec<Vec<(String, f64)>> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|line| {
                let v: serde_json::Value = serde_json::from_str(line).unwrap();
                v["attributions"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|a| {
                        (
                            a["feature_id"].as_str().unwrap().to_string(),
                            a["phi"].as_f64().unwrap(),
                        )
                    })
                    .collect()
            })
            .collect()
    };
    let tree = parse(&o1);
    let exact = parse(&o2);
    assert_eq!(tree.len(), 4);
    for (t_row, e_row) in tree.iter().zip(&exact) {
        for ((tf, tp), (ef, ep)) in t_row.iter().zip(e_row) {
            assert_eq!(tf, ef);
            assert!((tp - ep).abs() <= 1e-9, "{tf}: {tp} vs {ep}");
        }
    }
}

#[test]
fn explain_exact_refuses_full_width_model() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "explain",
        "--model",
        &path_str(&fixture("golden_model.json")),
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&tmp.path().join("e.jsonl")),
        "--importance",
        &path_str(&tmp.path().join("i.csv")),
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("20"), "refusal names the limit: {msg}");
}

#[test]
fn explain_constant_model_gives_zero_attributions() {
    use authattr_core::ensemble::*;
    let tmp = tempfile::tempdir().unwrap();
    let leaf_tree = DecisionTree {
        nodes: vec![TreeNode::Leaf {
            value: vec![0.5, 0.5],
        }],
        max_depth: 0,
    };
    let model = EnsembleModel {
        kind: ModelKind::RandomForest,
        trees: EnsembleTrees::Forest(vec![leaf_tree]),
        classes: vec!["ada".into(), "ben".into()],
        hyperparams: Hyperparams::random_forest(),
        feature_schema_version: authattr_core::SCHEMA_VERSION.to_string(),
        selected_features: None,
        imputation: vec![0.0; 54],
        n_features: 54,
    };
    let meta = ArtifactMeta {
        tool_version: authattr_core::TOOL_VERSION.to_string(),
        schema_version: authattr_core::SCHEMA_VERSION.to_string(),
        seed: 0,
        config_hash: "0".into(),
    };
    let model_path = tmp.path().join("constant.json");
    save_model(&model, &meta, &model_path).unwrap();
    let out = tmp.path().join("e.jsonl");
    run_ok(&[
        "explain",
        "--model",
        &path_str(&model_path),
        "--features",
        &path_str(&fixture("golden_features.csv")),
        "--out",
        &path_str(&out),
        "--importance",
        &path_str(&tmp.path().join("i.csv")),
    ]);
    for line in std::fs::read_to_string(&out).unwrap().lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for a in v["attributions"].as_array().unwrap() {
            assert_eq!(a["phi"].as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn evaluate_emits_requested_rows_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    run_ok(&[
        "gen-corpus",
        "--out",
        &path_str(&corpus),
        "--authors",
        "3",
        "--samples-per-author",
        "4",
        "--seed",
        "2",
    ]);
    let reports = tmp.path().join("reports");
    let args = [
        "evaluate",
        "--corpus",
        &path_str(&corpus),
        "--out-dir",
        &path_str(&reports),
        "--models",
        "rf",
        "--folds",
        "2",
        "--trees",
        "10",
        "--no-dynamic",
        "--seed",
        "4",
    ];
    run_ok(&args);
    let text = std::fs::read_to_string(reports.join("report.txt")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect();
    assert_eq!(rows.len(), 2, "header + one model row:\n{text}");
    assert!(rows[1].starts_with("Random Forest"));
    let first = std::fs::read(reports.join("report.csv")).unwrap();
    run_ok(&args);
    assert_eq!(first, std::fs::read(reports.join("report.csv")).unwrap());
}

#[test]
fn evaluate_all_models_emits_six_rows_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    run_ok(&[
        "gen-corpus",
        "--out",
        &path_str(&corpus),
        "--authors",
        "3",
        "--samples-per-author",
        "4",
        "--seed",
        "8",
    ]);
    let reports = tmp.path().join("reports");
    run_ok(&[
        "evaluate",
        "--corpus",
        &path_str(&corpus),
        "--out-dir",
        &path_str(&reports),
        "--models",
        "all",
        "--folds",
        "2",
        "--trees",
        "4",
        "--top-k",
        "10",
        "--no-dynamic",
        "--seed",
        "1",
    ]);
    let text = std::fs::read_to_string(reports.join("report.txt")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 6, "six variants:\n{text}");
    let expected_order = [
        "Random Forest ",
        "Random Forest with SHAP",
        "Gradient Boosting ",
        "Gradient Boosting with SHAP",
        "XGBoost ",
        "XGBoost with SHAP",
    ];
    for (row, prefix) in rows.iter().zip(expected_order) {
        assert!(row.starts_with(prefix), "row {row:?} != {prefix:?}");
    }
    // plot data twin: 6 models x 4 metrics
    let plot = std::fs::read_to_string(reports.join("report_plot.csv")).unwrap();
    assert_eq!(data_rows(&plot).len(), 24);
}

#[test]
fn extract_expanded_mode_emits_sparse_term_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("features.csv");
    let expanded = tmp.path().join("expanded.jsonl");
    run_ok(&[
        "extract",
        "--corpus",
        &path_str(&fixture("corpus")),
        "--out",
        &path_str(&out),
        "--no-dynamic",
        "--expanded-out",
        &path_str(&expanded),
    ]);
    let text = std::fs::read_to_string(&expanded).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "meta line + 4 samples");
    let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert!(v["term_frequencies"]["word_ngrams"]["1"]
        .as_object()
        .unwrap()
        .contains_key("int"));
    assert!(v["term_frequencies"]["node_types"]["translation-unit"].as_u64() == Some(1));
}

#[test]
fn gen_corpus_writes_layout_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    run_ok(&[
        "gen-corpus",
        "--out",
        &path_str(&corpus),
        "--authors",
        "5",
        "--samples-per-author",
        "3",
        "--seed",
        "1",
    ]);
    let manifest_text = std::fs::read_to_string(corpus.join("manifest.csv")).unwrap();
    assert!(manifest_text.starts_with("# authattr "));
    let manifest = authattr_core::corpus::CorpusManifest::from_csv(&manifest_text).unwrap();
    assert_eq!(manifest.entries.len(), 15);
    assert_eq!(manifest.by_author().len(), 5);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("run.conf");
    std::fs::write(
        &conf,
        format!(
            "features = {}\nmodel = gb\ntrees = 3\nseed = 5\n",
            path_str(&fixture("golden_features.csv"))
        ),
    )
    .unwrap();
    let model = tmp.path().join("m.json");
    // model comes from config (gb); --trees overrides config
    run_ok(&[
        "train",
        "--config",
        &path_str(&conf),
        "--out",
        &path_str(&model),
        "--trees",
        "2",
    ]);
    let (loaded, meta) = authattr_core::ensemble::load_model(&model).unwrap();
    assert_eq!(
        loaded.kind,
        authattr_core::ensemble::ModelKind::GradientBoosting
    );
    assert_eq!(loaded.hyperparams.n_trees, 2);
    assert_eq!(meta.seed, 5);
}

#[test]
fn schema_dump_has_54_entries() {
    let tmp = tempfile::tempdir().unwrap();
    let schema = tmp.path().join("schema.json");
    run_ok(&[
        "extract",
        "--corpus",
        &path_str(&fixture("corpus")),
        "--out",
        &path_str(&tmp.path().join("f.csv")),
        "--no-dynamic",
        "--schema-out",
        &path_str(&schema),
    ]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&schema).unwrap()).unwrap();
    assert_eq!(v["features"].as_array().unwrap().len(), 54);
    assert!(v["meta"].as_str().unwrap().starts_with("authattr "));
}

#[test]
fn artifact_headers_record_version_schema_seed_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("features.csv");
    run_ok(&[
        "extract",
        "--corpus",
        &path_str(&fixture("corpus")),
        "--out",
        &path_str(&out),
        "--no-dynamic",
        "--seed",
        "17",
    ]);
    let first_line = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(first_line.starts_with("# authattr 0.1.0 schema=authattr-features-v1 seed=17 config="));
}
