//! Tree-ensemble classifiers: random forest, softmax gradient boosting, and
//! its regularized second-order variant.
//!
//! All three share the CART learner in [`tree`]. Boosted models keep one
//! regression tree per class per round; forests keep class-frequency
//! leaves. The per-class pre-softmax output is the *margin*; explanations
//! attribute margins because they are additive over trees.

mod boost;
mod forest;
mod tree;

pub use boost::{train_gradient_boosting, training_log_loss};
pub use forest::train_random_forest;
pub use tree::{fit_tree, FitTarget, TreeParams};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureRow, FeatureVector, FEATURE_COUNT};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training data contains a single class; need at least 2")]
    SingleClass,
    #[error("feature schema mismatch: model built for {model}, this build expects {current}")]
    SchemaMismatch { model: String, current: String },
    #[error("vector has {got} features but the model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("model file rejected: {0}")]
    Invalid(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty training matrix")]
    EmptyMatrix,
}

/// Training hyperparameters; one record covers all three families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// None = grow until pure.
    pub max_depth: Option<u32>,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub subsample: f64,
    /// Candidate features per split; None = all (forest default √m).
    pub feature_subsample: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Hyperparams {
    pub fn random_forest() -> Self {
        Hyperparams {
            n_trees: 300,
            max_depth: None,
            learning_rate: 1.0,
            lambda: 0.0,
            gamma: 0.0,
            subsample: 1.0,
            feature_subsample: None,
            min_samples_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }

    pub fn boosting() -> Self {
        Hyperparams {
            n_trees: 200,
            max_depth: Some(4),
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            subsample: 0.8,
            feature_subsample: None,
            min_samples_leaf: 1,
            bootstrap: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    RandomForest,
    GradientBoosting,
    RegularizedBoosting,
}

/// One fitted tree; splits route `x[feature] < threshold` to the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub max_depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

impl DecisionTree {
    pub fn leaf_for(&self, x: &[f64]) -> &[f64] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn uses_feature(&self, feature: usize) -> bool {
        self.nodes
            .iter()
            .any(|n| matches!(n, TreeNode::Split { feature: f, .. } if *f == feature))
    }

    /// Split feature of every internal node, in node order.
    pub fn split_features(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .collect()
    }
}

/// Trees of a trained model. Boosted models store `rounds × classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnsembleTrees {
    Forest(Vec<DecisionTree>),
    Boosted(Vec<Vec<DecisionTree>>),
}

impl EnsembleTrees {
    pub fn count(&self) -> usize {
        match self {
            EnsembleTrees::Forest(ts) => ts.len(),
            EnsembleTrees::Boosted(rounds) => rounds.iter().map(Vec::len).sum(),
        }
    }
}

/// Dense numeric training data. `rows` is row-major `n × n_features`;
/// masked cells are absent measurements awaiting imputation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMatrix {
    pub n_features: usize,
    pub rows: Vec<f64>,
    pub mask: Vec<bool>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
}

impl TrainMatrix {
    pub fn n_rows(&self) -> usize {
        if self.n_features == 0 {
            0
        } else {
            self.rows.len() / self.n_features
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Build from parsed feature CSV rows; classes are the sorted distinct
    /// author ids.
    pub fn from_feature_rows(feature_rows: &[FeatureRow]) -> Result<Self, ModelError> {
        if feature_rows.is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        let mut classes: Vec<String> = feature_rows.iter().map(|r| r.author_id.clone()).collect();
        classes.sort_unstable();
        classes.dedup();
        let mut rows = Vec::with_capacity(feature_rows.len() * FEATURE_COUNT);
        let mut mask = Vec::with_capacity(feature_rows.len() * FEATURE_COUNT);
        let mut labels = Vec::with_capacity(feature_rows.len());
        for r in feature_rows {
            rows.extend_from_slice(&r.vector.values);
            mask.extend_from_slice(&r.vector.mask);
            labels.push(classes.iter().position(|c| *c == r.author_id).unwrap());
        }
        Ok(TrainMatrix {
            n_features: FEATURE_COUNT,
            rows,
            mask,
            labels,
            classes,
        })
    }

    /// Restrict to a subset of row indices (used by splits and folds).
    pub fn subset(&self, indices: &[usize]) -> TrainMatrix {
        let mut rows = Vec::with_capacity(indices.len() * self.n_features);
        let mut mask = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            rows.extend_from_slice(self.row(i));
            mask.extend_from_slice(&self.mask[i * self.n_features..(i + 1) * self.n_features]);
            labels.push(self.labels[i]);
        }
        TrainMatrix {
            n_features: self.n_features,
            rows,
            mask,
            labels,
            classes: self.classes.clone(),
        }
    }
}

/// Replace masked cells with per-feature training medians (0 for fully
/// masked features). Returns the filled matrix and the medians, which the
/// model stores and re-applies at prediction time.
pub fn impute(matrix: &TrainMatrix) -> (TrainMatrix, Vec<f64>) {
    let n = matrix.n_rows();
    let m = matrix.n_features;
    let mut medians = vec![0.0; m];
    for f in 0..m {
        let mut present: Vec<f64> = (0..n)
            .filter(|&i| matrix.mask[i * m + f])
            .map(|i| matrix.rows[i * m + f])
            .collect();
        if present.is_empty() {
            medians[f] = 0.0;
            continue;
        }
        present.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mid = present.len() / 2;
        medians[f] = if present.len() % 2 == 1 {
            present[mid]
        } else {
            (present[mid - 1] + present[mid]) / 2.0
        };
    }
    let mut filled = matrix.clone();
    for i in 0..n {
        for f in 0..m {
            if !filled.mask[i * m + f] {
                filled.rows[i * m + f] = medians[f];
            }
        }
    }
    (filled, medians)
}

/// A trained ensemble plus everything needed to reproduce predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub kind: ModelKind,
    pub trees: EnsembleTrees,
    pub classes: Vec<String>,
    pub hyperparams: Hyperparams,
    pub feature_schema_version: String,
    pub selected_features: Option<Vec<usize>>,
    /// Per-feature training medians, re-applied to masked inputs.
    pub imputation: Vec<f64>,
    pub n_features: usize,
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub probabilities: Vec<f64>,
    pub class_index: usize,
    pub author_id: String,
}

pub(crate) fn softmax(margins: &[f64]) -> Vec<f64> {
    let max = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = margins.iter().map(|m| (m - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

impl EnsembleModel {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Fill masked slots with the stored medians.
    pub fn impute_row(&self, values: &[f64], mask: &[bool]) -> Vec<f64> {
        values
            .iter()
            .zip(mask)
            .enumerate()
            .map(|(f, (v, present))| if *present { *v } else { self.imputation[f] })
            .collect()
    }

    /// Per-class margins of an already-imputed row. Forest: mean leaf
    /// distribution; boosting: per-class tree sums.
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        let k = self.n_classes();
        match &self.trees {
            EnsembleTrees::Forest(trees) => {
                let mut acc = vec![0.0; k];
                for t in trees {
                    let leaf = t.leaf_for(x);
                    for (a, l) in acc.iter_mut().zip(leaf) {
                        *a += l;
                    }
                }
                let nt = trees.len() as f64;
                acc.iter_mut().for_each(|a| *a /= nt);
                acc
            }
            EnsembleTrees::Boosted(rounds) => {
                let mut acc = vec![0.0; k];
                for round in rounds {
                    for (c, t) in round.iter().enumerate() {
                        acc[c] += t.leaf_for(x)[0];
                    }
                }
                acc
            }
        }
    }

    /// Margin of one class.
    pub fn margin(&self, x: &[f64], class_index: usize) -> f64 {
        self.margins(x)[class_index]
    }

    /// Probability vector of an already-imputed row; sums to 1.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ModelKind::RandomForest => self.margins(x),
            _ => softmax(&self.margins(x)),
        }
    }

    /// Full prediction path for a canonical feature vector: schema check,
    /// imputation, probabilities, argmax (ties to the earlier class).
    pub fn predict(&self, fv: &FeatureVector) -> Result<Prediction, ModelError> {
        if self.feature_schema_version != crate::SCHEMA_VERSION {
            return Err(ModelError::SchemaMismatch {
                model: self.feature_schema_version.clone(),
                current: crate::SCHEMA_VERSION.to_string(),
            });
        }
        if self.n_features != FEATURE_COUNT {
            return Err(ModelError::DimensionMismatch {
                got: FEATURE_COUNT,
                expected: self.n_features,
            });
        }
        let x = self.impute_row(&fv.values, &fv.mask);
        let probabilities = self.probabilities(&x);
        let class_index = argmax(&probabilities);
        Ok(Prediction {
            author_id: self.classes[class_index].clone(),
            class_index,
            probabilities,
        })
    }

    /// Active feature indices: the selected subset if any, else all.
    pub fn active_features(&self) -> Vec<usize> {
        match &self.selected_features {
            Some(sel) => sel.clone(),
            None => (0..self.n_features).collect(),
        }
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Train the requested family. `selected_features` restricts split
/// candidates; trees still index the full-width feature space.
pub fn train_model(
    matrix: &TrainMatrix,
    hyperparams: &Hyperparams,
    kind: ModelKind,
    selected_features: Option<Vec<usize>>,
) -> Result<EnsembleModel, ModelError> {
    match kind {
        ModelKind::RandomForest => train_random_forest(matrix, hyperparams, selected_features),
        ModelKind::GradientBoosting => {
            train_gradient_boosting(matrix, hyperparams, false, selected_features)
        }
        ModelKind::RegularizedBoosting => {
            train_gradient_boosting(matrix, hyperparams, true, selected_features)
        }
    }
}

pub(crate) fn validate_training_input(matrix: &TrainMatrix) -> Result<(), ModelError> {
    if matrix.n_rows() == 0 {
        return Err(ModelError::EmptyMatrix);
    }
    let distinct: std::collections::BTreeSet<usize> = matrix.labels.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(ModelError::SingleClass);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

/// Header block recorded at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub tool_version: String,
    pub schema_version: String,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    meta: ArtifactMeta,
    model: EnsembleModel,
}

/// Serialize to JSON. The metadata object leads the file, standing in for
/// the header comment a text artifact would carry.
pub fn save_model(
    model: &EnsembleModel,
    meta: &ArtifactMeta,
    path: &Path,
) -> Result<(), ModelError> {
    let file = ModelFile {
        meta: meta.clone(),
        model: model.clone(),
    };
    let json = serde_json::to_string(&file).map_err(|e| ModelError::Malformed(e.to_string()))?;
    std::fs::write(path, json).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load and validate. Rejects schema mismatches, empty tree lists, and
/// out-of-range split indices, so a corrupted file never half-loads.
pub fn load_model(path: &Path) -> Result<(EnsembleModel, ArtifactMeta), ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let model = file.model;
    if model.feature_schema_version != crate::SCHEMA_VERSION {
        return Err(ModelError::SchemaMismatch {
            model: model.feature_schema_version,
            current: crate::SCHEMA_VERSION.to_string(),
        });
    }
    if model.trees.count() == 0 {
        return Err(ModelError::Invalid("empty trees list".to_string()));
    }
    if model.classes.is_empty() {
        return Err(ModelError::Invalid("no classes".to_string()));
    }
    if model.imputation.len() != model.n_features {
        return Err(ModelError::Invalid("imputation width mismatch".to_string()));
    }
    let check_tree = |t: &DecisionTree| -> Result<(), ModelError> {
        for node in &t.nodes {
            match node {
                TreeNode::Split {
                    feature, threshold, left, right,
                } => {
                    if *feature >= model.n_features {
                        return Err(ModelError::Invalid(format!(
                            "split feature {feature} out of range"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(ModelError::Invalid("non-finite threshold".to_string()));
                    }
                    if *left >= t.nodes.len() || *right >= t.nodes.len() {
                        return Err(ModelError::Invalid("child index out of range".to_string()));
                    }
                }
                TreeNode::Leaf { value } => {
                    if value.is_empty() || value.iter().any(|v| !v.is_finite()) {
                        return Err(ModelError::Invalid("bad leaf value".to_string()));
                    }
                }
            }
        }
        Ok(())
    };
    match &model.trees {
        EnsembleTrees::Forest(ts) => {
            for t in ts {
                check_tree(t)?;
            }
        }
        EnsembleTrees::Boosted(rounds) => {
            for round in rounds {
                if round.len() != model.classes.len() {
                    return Err(ModelError::Invalid(
                        "boosted round width != class count".to_string(),
                    ));
                }
                for t in round {
                    check_tree(t)?;
                }
            }
        }
    }
    Ok((model, file.meta))
}
