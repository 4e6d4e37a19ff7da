//! Classification metrics, cross-validated model comparison, and report
//! rendering.
//!
//! Six model variants are compared: the three ensemble families each with
//! and without SHAP-guided feature selection. Metrics default to macro
//! (unweighted class mean) averaging; micro averaging is available behind
//! [`Averaging::Micro`]. Zero-denominator classes score 0 and are flagged.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ensemble::{
    train_model, EnsembleModel, Hyperparams, ModelError, ModelKind, TrainMatrix,
};
use crate::explain::{shap_feature_selection, ExplainError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("label vectors differ in length: {truth} vs {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("label {0:?} is not among the model classes")]
    UnknownLabel(String),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("cross-validation needs at least 2 folds, got {0}")]
    BadFolds(usize),
    #[error("author {author} has {have} samples, fewer than {need} folds")]
    InsufficientSamples {
        author: String,
        have: usize,
        need: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
}

/// K×K counts; rows are true classes, columns predicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn at(&self, true_class: usize, pred_class: usize) -> u64 {
        self.counts[true_class * self.k() + pred_class]
    }

    pub fn add(&mut self, true_class: usize, pred_class: usize) {
        let k = self.k();
        self.counts[true_class * k + pred_class] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.at(i, i)).sum()
    }

    /// Build from paired index vectors (already validated).
    pub fn from_indices(classes: Vec<String>, truth: &[usize], pred: &[usize]) -> Self {
        let mut cm = ConfusionMatrix::zeros(classes);
        for (&t, &p) in truth.iter().zip(pred) {
            cm.add(t, p);
        }
        cm
    }
}

/// Tally string-labeled predictions against the class list.
pub fn confusion(
    classes: &[String],
    truth: &[String],
    pred: &[String],
) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::EmptyMatrix);
    }
    let index_of = |label: &String| {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| EvalError::UnknownLabel(label.clone()))
    };
    let mut cm = ConfusionMatrix::zeros(classes.to_vec());
    for (t, p) in truth.iter().zip(pred) {
        cm.add(index_of(t)?, index_of(p)?);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    Macro,
    Micro,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class: String,
    /// Percentages.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when a zero denominator forced a metric to 0.
    pub zero_denominator: bool,
}

/// Aggregate metrics, all as percentages in [0, 100].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub model_name: String,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub n_samples: u64,
    pub averaging: Averaging,
}

/// Macro-averaged metrics.
pub fn metrics(cm: &ConfusionMatrix, model_name: &str) -> Result<MetricsReport, EvalError> {
    metrics_with(cm, model_name, Averaging::Macro)
}

pub fn metrics_with(
    cm: &ConfusionMatrix,
    model_name: &str,
    averaging: Averaging,
) -> Result<MetricsReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let k = cm.k();
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let tp = cm.at(c, c) as f64;
        let fp: f64 = (0..k).filter(|&t| t != c).map(|t| cm.at(t, c) as f64).sum();
        let fn_: f64 = (0..k).filter(|&p| p != c).map(|p| cm.at(c, p) as f64).sum();
        let mut zero = false;
        let precision = if tp + fp == 0.0 {
            zero = true;
            0.0
        } else {
            tp / (tp + fp)
        };
        let recall = if tp + fn_ == 0.0 {
            zero = true;
            0.0
        } else {
            tp / (tp + fn_)
        };
        let f1 = if precision + recall == 0.0 {
            zero = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            class: cm.classes[c].clone(),
            precision: 100.0 * precision,
            recall: 100.0 * recall,
            f1: 100.0 * f1,
            zero_denominator: zero,
        });
    }
    let accuracy = 100.0 * cm.trace() as f64 / total as f64;
    let (macro_precision, macro_recall, macro_f1) = match averaging {
        Averaging::Macro => {
            let mean = |f: fn(&ClassMetrics) -> f64| {
                per_class.iter().map(f).sum::<f64>() / k as f64
            };
            (
                mean(|m| m.precision),
                mean(|m| m.recall),
                mean(|m| m.f1),
            )
        }
        // single-label multiclass: micro P = micro R = micro F1 = accuracy
        Averaging::Micro => (accuracy, accuracy, accuracy),
    };
    Ok(MetricsReport {
        model_name: model_name.to_string(),
        accuracy,
        macro_precision,
        macro_recall,
        macro_f1,
        per_class,
        n_samples: total,
        averaging,
    })
}

// ---------------------------------------------------------------------------
// the six variants
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Rf,
    RfShap,
    Gb,
    GbShap,
    Xgb,
    XgbShap,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Rf,
        Variant::RfShap,
        Variant::Gb,
        Variant::GbShap,
        Variant::Xgb,
        Variant::XgbShap,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Rf => "Random Forest",
            Variant::RfShap => "Random Forest with SHAP",
            Variant::Gb => "Gradient Boosting",
            Variant::GbShap => "Gradient Boosting with SHAP",
            Variant::Xgb => "XGBoost",
            Variant::XgbShap => "XGBoost with SHAP",
        }
    }

    pub fn flag_name(self) -> &'static str {
        match self {
            Variant::Rf => "rf",
            Variant::RfShap => "rf-shap",
            Variant::Gb => "gb",
            Variant::GbShap => "gb-shap",
            Variant::Xgb => "xgb",
            Variant::XgbShap => "xgb-shap",
        }
    }

    pub fn parse(text: &str) -> Option<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.flag_name() == text)
    }

    pub fn uses_selection(self) -> bool {
        matches!(self, Variant::RfShap | Variant::GbShap | Variant::XgbShap)
    }

    pub fn model_kind(self) -> ModelKind {
        match self {
            Variant::Rf | Variant::RfShap => ModelKind::RandomForest,
            Variant::Gb | Variant::GbShap => ModelKind::GradientBoosting,
            Variant::Xgb | Variant::XgbShap => ModelKind::RegularizedBoosting,
        }
    }

    pub fn default_hyperparams(self) -> Hyperparams {
        match self.model_kind() {
            ModelKind::RandomForest => Hyperparams::random_forest(),
            _ => Hyperparams::boosting(),
        }
    }
}

/// One trainable configuration.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub variant: Variant,
    pub hyperparams: Hyperparams,
    /// Features retained by the `*-shap` variants.
    pub top_k: usize,
}

impl ModelSpec {
    pub fn new(variant: Variant) -> Self {
        ModelSpec {
            variant,
            hyperparams: variant.default_hyperparams(),
            top_k: 30,
        }
    }
}

/// Train one variant on the matrix.
pub fn train_variant(matrix: &TrainMatrix, spec: &ModelSpec) -> Result<EnsembleModel, EvalError> {
    let model = if spec.variant.uses_selection() {
        shap_feature_selection(
            matrix,
            &spec.hyperparams,
            spec.variant.model_kind(),
            spec.top_k.min(matrix.n_features),
        )?
    } else {
        train_model(matrix, &spec.hyperparams, spec.variant.model_kind(), None)?
    };
    Ok(model)
}

/// Predicted class indices for a batch of raw rows (mask-aware).
pub fn predict_indices(model: &EnsembleModel, matrix: &TrainMatrix, rows: &[usize]) -> Vec<usize> {
    rows.iter()
        .map(|&i| {
            let lo = i * matrix.n_features;
            let hi = lo + matrix.n_features;
            let x = model.impute_row(&matrix.rows[lo..hi], &matrix.mask[lo..hi]);
            crate::ensemble::argmax(&model.probabilities(&x))
        })
        .collect()
}

/// Deterministic stratified fold assignment: per class, shuffled indices
/// dealt round-robin. Returns fold id per row.
pub fn stratified_folds(matrix: &TrainMatrix, folds: usize, seed: u64) -> Vec<usize> {
    let mut by_class: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &label) in matrix.labels.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; matrix.n_rows()];
    for (_, mut indices) in by_class {
        indices.shuffle(&mut rng);
        for (pos, idx) in indices.into_iter().enumerate() {
            assignment[idx] = pos % folds;
        }
    }
    assignment
}

/// Stratified k-fold comparison. Per variant, held-out confusions from all
/// folds are summed (micro-aggregation across folds) and scored once.
pub fn cross_validate(
    matrix: &TrainMatrix,
    specs: &[ModelSpec],
    folds: usize,
    seed: u64,
) -> Result<Vec<MetricsReport>, EvalError> {
    if folds < 2 {
        return Err(EvalError::BadFolds(folds));
    }
    let mut class_counts = vec![0usize; matrix.classes.len()];
    for &l in &matrix.labels {
        class_counts[l] += 1;
    }
    for (c, &count) in class_counts.iter().enumerate() {
        if count < folds {
            return Err(EvalError::InsufficientSamples {
                author: matrix.classes[c].clone(),
                have: count,
                need: folds,
            });
        }
    }
    let assignment = stratified_folds(matrix, folds, seed);
    let mut reports = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut cm = ConfusionMatrix::zeros(matrix.classes.clone());
        for fold in 0..folds {
            let train_idx: Vec<usize> =
                (0..matrix.n_rows()).filter(|&i| assignment[i] != fold).collect();
            let test_idx: Vec<usize> =
                (0..matrix.n_rows()).filter(|&i| assignment[i] == fold).collect();
            let mut fold_spec = spec.clone();
            fold_spec.hyperparams.seed = spec
                .hyperparams
                .seed
                .wrapping_add((fold as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let model = train_variant(&matrix.subset(&train_idx), &fold_spec)?;
            let pred = predict_indices(&model, matrix, &test_idx);
            for (&i, &p) in test_idx.iter().zip(&pred) {
                cm.add(matrix.labels[i], p);
            }
        }
        reports.push(metrics(&cm, spec.variant.display_name())?);
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

/// Fixed-width comparison table: Model, Accuracy, Precision, Recall, F1.
pub fn render_report(reports: &[MetricsReport]) -> String {
    let name_w = reports
        .iter()
        .map(|r| r.model_name.len())
        .chain(std::iter::once("Model".len()))
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "{:<name_w$}  {:>12}  {:>13}  {:>10}  {:>12}\n",
        "Model", "Accuracy (%)", "Precision (%)", "Recall (%)", "F1-score (%)"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<name_w$}  {:>12.1}  {:>13.1}  {:>10.1}  {:>12.1}\n",
            r.model_name, r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1
        ));
    }
    out
}

/// CSV twin of the text table, values at the table's 1-decimal precision.
pub fn report_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("model,accuracy,precision,recall,f1\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.1},{:.1},{:.1},{:.1}\n",
            crate::csvio::escape_field(&r.model_name),
            r.accuracy,
            r.macro_precision,
            r.macro_recall,
            r.macro_f1
        ));
    }
    out
}

/// Long-form (model, metric, value) triples for external plotting.
pub fn report_plot_data(reports: &[MetricsReport]) -> String {
    let mut out = String::from("model,metric,value\n");
    for r in reports {
        for (metric, value) in [
            ("accuracy", r.accuracy),
            ("precision", r.macro_precision),
            ("recall", r.macro_recall),
            ("f1", r.macro_f1),
        ] {
            out.push_str(&format!(
                "{},{metric},{value:.1}\n",
                crate::csvio::escape_field(&r.model_name)
            ));
        }
    }
    out
}

/// Parse a [`report_csv`] file back into (name, accuracy, precision,
/// recall, f1) tuples.
pub fn parse_report_csv(text: &str) -> Vec<(String, f64, f64, f64, f64)> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let f = crate::csvio::split_row(line);
            (
                f[0].clone(),
                f[1].parse().unwrap_or(f64::NAN),
                f[2].parse().unwrap_or(f64::NAN),
                f[3].parse().unwrap_or(f64::NAN),
                f[4].parse().unwrap_or(f64::NAN),
            )
        })
        .collect()
}
