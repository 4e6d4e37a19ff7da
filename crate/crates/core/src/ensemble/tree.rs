//! CART fitting: greedy binary trees for both ensemble families.
//!
//! Classification mode (random forest) scores splits by Gini impurity
//! decrease; boosting mode scores by the second-order gain
//! `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ` with leaf
//! weight `−G/(H+λ)`. Thresholds are midpoints between adjacent distinct
//! sorted values, which makes trees invariant to per-feature shifts. A node
//! splits only when the best gain is strictly positive, both children hold
//! at least `min_samples_leaf` rows, and the depth limit allows it; ties
//! break toward the lowest feature index, then the lowest threshold.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{DecisionTree, TreeNode};

/// Division guard for the boosting leaf weight when λ and the Hessian sum
/// are both effectively zero.
const HESSIAN_FLOOR: f64 = 1e-12;

pub struct TreeParams {
    pub max_depth: Option<u32>,
    pub min_samples_leaf: usize,
    /// Candidate features drawn per split; None = all allowed features.
    pub feature_subsample: Option<usize>,
}

pub enum FitTarget<'a> {
    Classification {
        labels: &'a [usize],
        n_classes: usize,
    },
    Regression {
        gradients: &'a [f64],
        hessians: &'a [f64],
        lambda: f64,
        gamma: f64,
        learning_rate: f64,
    },
}

struct Fit<'a> {
    data: &'a [f64],
    n_features: usize,
    target: FitTarget<'a>,
    params: &'a TreeParams,
    allowed: &'a [usize],
    nodes: Vec<TreeNode>,
    max_depth_seen: u32,
}

/// Fit one tree on the rows in `rows` (indices into `data`, which is
/// row-major `n × n_features`). `allowed` restricts split candidates (used
/// by feature selection); sampling inside draws from `rng`.
pub fn fit_tree(
    data: &[f64],
    n_features: usize,
    rows: &[usize],
    target: FitTarget<'_>,
    params: &TreeParams,
    allowed: &[usize],
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    let mut fit = Fit {
        data,
        n_features,
        target,
        params,
        allowed,
        nodes: Vec::new(),
        max_depth_seen: 0,
    };
    let mut rows = rows.to_vec();
    fit.build(&mut rows, 0, rng);
    DecisionTree {
        nodes: fit.nodes,
        max_depth: fit.max_depth_seen,
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> Fit<'a> {
    fn value(&self, row: usize, feature: usize) -> f64 {
        self.data[row * self.n_features + feature]
    }

    fn leaf_value(&self, rows: &[usize]) -> Vec<f64> {
        match &self.target {
            FitTarget::Classification { labels, n_classes } => {
                let mut counts = vec![0.0; *n_classes];
                for &r in rows {
                    counts[labels[r]] += 1.0;
                }
                let n = rows.len() as f64;
                for c in counts.iter_mut() {
                    *c /= n;
                }
                counts
            }
            FitTarget::Regression {
                gradients,
                hessians,
                lambda,
                learning_rate,
                ..
            } => {
                let g: f64 = rows.iter().map(|&r| gradients[r]).sum();
                let h: f64 = rows.iter().map(|&r| hessians[r]).sum();
                let denom = (h + lambda).max(HESSIAN_FLOOR);
                vec![-learning_rate * g / denom]
            }
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match &self.target {
            FitTarget::Classification { labels, .. } => {
                let first = labels[rows[0]];
                rows.iter().all(|&r| labels[r] == first)
            }
            FitTarget::Regression { gradients, .. } => {
                let first = gradients[rows[0]];
                rows.iter().all(|&r| gradients[r] == first) && rows.len() == 1
            }
        }
    }

    fn build(&mut self, rows: &mut [usize], depth: u32, rng: &mut ChaCha8Rng) -> usize {
        self.max_depth_seen = self.max_depth_seen.max(depth);
        let depth_ok = self.params.max_depth.map_or(true, |d| depth < d);
        let can_split = depth_ok
            && rows.len() >= 2 * self.params.min_samples_leaf.max(1)
            && !self.is_pure(rows);
        let choice = if can_split {
            self.best_split(rows, rng)
        } else {
            None
        };
        let Some(choice) = choice else {
            let value = self.leaf_value(rows);
            self.nodes.push(TreeNode::Leaf { value });
            return self.nodes.len() - 1;
        };
        let mid = partition(rows, |r| {
            self.data[r * self.n_features + choice.feature] < choice.threshold
        });
        // placeholder; children indices patched after recursion
        let node_idx = self.nodes.len();
        self.nodes.push(TreeNode::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: 0,
            right: 0,
        });
        let (left_rows, right_rows) = rows.split_at_mut(mid);
        let left = self.build(left_rows, depth + 1, rng);
        let right = self.build(right_rows, depth + 1, rng);
        if let TreeNode::Split {
            left: l, right: r, ..
        } = &mut self.nodes[node_idx]
        {
            *l = left;
            *r = right;
        }
        node_idx
    }

    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        match self.params.feature_subsample {
            Some(k) if k < self.allowed.len() => {
                let mut picked: Vec<usize> = self
                    .allowed
                    .choose_multiple(rng, k)
                    .copied()
                    .collect();
                picked.sort_unstable();
                picked
            }
            _ => self.allowed.to_vec(),
        }
    }

    fn best_split(&self, rows: &[usize], rng: &mut ChaCha8Rng) -> Option<SplitChoice> {
        let candidates = self.candidate_features(rng);
        let mut best: Option<SplitChoice> = None;
        for &feature in &candidates {
            let found = match &self.target {
                FitTarget::Classification { labels, n_classes } => {
                    self.best_split_gini(rows, feature, labels, *n_classes)
                }
                FitTarget::Regression {
                    gradients,
                    hessians,
                    lambda,
                    gamma,
                    ..
                } => self.best_split_second_order(rows, feature, gradients, hessians, *lambda, *gamma),
            };
            if let Some(c) = found {
                // strict > keeps the earlier (lower feature, lower threshold)
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        best.filter(|b| b.gain > 0.0)
    }

    fn sorted_by_feature(&self, rows: &[usize], feature: usize) -> Vec<usize> {
        let mut sorted = rows.to_vec();
        sorted.sort_by(|&a, &b| {
            self.value(a, feature)
                .partial_cmp(&self.value(b, feature))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        sorted
    }

    fn best_split_gini(
        &self,
        rows: &[usize],
        feature: usize,
        labels: &[usize],
        n_classes: usize,
    ) -> Option<SplitChoice> {
        let sorted = self.sorted_by_feature(rows, feature);
        let n = sorted.len() as f64;
        let mut total = vec![0.0f64; n_classes];
        for &r in &sorted {
            total[labels[r]] += 1.0;
        }
        let gini = |counts: &[f64], m: f64| -> f64 {
            if m == 0.0 {
                return 0.0;
            }
            1.0 - counts.iter().map(|c| (c / m) * (c / m)).sum::<f64>()
        };
        let parent = gini(&total, n);
        let mut left = vec![0.0f64; n_classes];
        let mut best: Option<SplitChoice> = None;
        let min_leaf = self.params.min_samples_leaf.max(1);
        for i in 0..sorted.len() - 1 {
            left[labels[sorted[i]]] += 1.0;
            let v_here = self.value(sorted[i], feature);
            let v_next = self.value(sorted[i + 1], feature);
            if v_here == v_next {
                continue;
            }
            let n_left = (i + 1) as f64;
            let n_right = n - n_left;
            if (i + 1) < min_leaf || (sorted.len() - i - 1) < min_leaf {
                continue;
            }
            let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let gain =
                parent - (n_left / n) * gini(&left, n_left) - (n_right / n) * gini(&right, n_right);
            let threshold = midpoint(v_here, v_next);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn best_split_second_order(
        &self,
        rows: &[usize],
        feature: usize,
        gradients: &[f64],
        hessians: &[f64],
        lambda: f64,
        gamma: f64,
    ) -> Option<SplitChoice> {
        let sorted = self.sorted_by_feature(rows, feature);
        let g_total: f64 = sorted.iter().map(|&r| gradients[r]).sum();
        let h_total: f64 = sorted.iter().map(|&r| hessians[r]).sum();
        let score = |g: f64, h: f64| g * g / (h + lambda).max(HESSIAN_FLOOR);
        let parent_score = score(g_total, h_total);
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        let mut best: Option<SplitChoice> = None;
        let min_leaf = self.params.min_samples_leaf.max(1);
        for i in 0..sorted.len() - 1 {
            g_left += gradients[sorted[i]];
            h_left += hessians[sorted[i]];
            let v_here = self.value(sorted[i], feature);
            let v_next = self.value(sorted[i + 1], feature);
            if v_here == v_next {
                continue;
            }
            if (i + 1) < min_leaf || (sorted.len() - i - 1) < min_leaf {
                continue;
            }
            let gain = 0.5
                * (score(g_left, h_left) + score(g_total - g_left, h_total - h_left)
                    - parent_score)
                - gamma;
            let threshold = midpoint(v_here, v_next);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
        best
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

/// In-place stable partition; returns the boundary index.
fn partition(rows: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let mut left: Vec<usize> = Vec::with_capacity(rows.len());
    let mut right: Vec<usize> = Vec::new();
    for &r in rows.iter() {
        if pred(r) {
            left.push(r);
        } else {
            right.push(r);
        }
    }
    let mid = left.len();
    rows[..mid].copy_from_slice(&left);
    rows[mid..].copy_from_slice(&right);
    mid
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    fn params(max_depth: Option<u32>) -> TreeParams {
        TreeParams {
            max_depth,
            min_samples_leaf: 1,
            feature_subsample: None,
        }
    }

    #[test]
    fn pure_node_is_single_leaf() {
        let data = [0.0, 1.0, 2.0, 3.0];
        let labels = [1usize, 1, 1, 1];
        let tree = fit_tree(
            &data,
            1,
            &[0, 1, 2, 3],
            FitTarget::Classification {
                labels: &labels,
                n_classes: 2,
            },
            &params(None),
            &[0],
            &mut rng(),
        );
        assert_eq!(tree.nodes.len(), 1);
        assert!(matches!(&tree.nodes[0], TreeNode::Leaf { value } if value[1] == 1.0));
    }

    #[test]
    fn two_point_split_at_midpoint() {
        // exhaustive-split oracle: candidate thresholds are midpoints of
        // adjacent distinct values; here only 0.5, and its Gini gain is 0.5
        let data = [0.0, 1.0];
        let labels = [0usize, 1];
        let tree = fit_tree(
            &data,
            1,
            &[0, 1],
            FitTarget::Classification {
                labels: &labels,
                n_classes: 2,
            },
            &params(None),
            &[0],
            &mut rng(),
        );
        match &tree.nodes[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(tree.leaf_for(&[0.0]), &[1.0, 0.0]);
        assert_eq!(tree.leaf_for(&[1.0]), &[0.0, 1.0]);
    }

    #[test]
    fn split_choice_matches_exhaustive_oracle() {
        // 1-D data with a clear best boundary; brute-force every midpoint
        let values = [0.1, 0.2, 0.35, 0.8, 0.9, 1.1];
        let labels = [0usize, 0, 0, 1, 1, 1];
        let gini = |side: &[usize]| {
            let n = side.len() as f64;
            let ones = side.iter().filter(|&&r| labels[r] == 1).count() as f64;
            let p1 = ones / n;
            let p0 = 1.0 - p1;
            1.0 - p0 * p0 - p1 * p1
        };
        let mut best_gain = f64::MIN;
        let mut best_thr = f64::NAN;
        for i in 0..values.len() - 1 {
            if values[i] == values[i + 1] {
                continue;
            }
            let thr = (values[i] + values[i + 1]) / 2.0;
            let left: Vec<usize> = (0..6).filter(|&r| values[r] < thr).collect();
            let right: Vec<usize> = (0..6).filter(|&r| values[r] >= thr).collect();
            let n = 6.0;
            let parent = gini(&(0..6).collect::<Vec<_>>());
            let gain = parent
                - (left.len() as f64 / n) * gini(&left)
                - (right.len() as f64 / n) * gini(&right);
            if gain > best_gain {
                best_gain = gain;
                best_thr = thr;
            }
        }
        let tree = fit_tree(
            &values,
            1,
            &[0, 1, 2, 3, 4, 5],
            FitTarget::Classification {
                labels: &labels,
                n_classes: 2,
            },
            &params(Some(1)),
            &[0],
            &mut rng(),
        );
        match &tree.nodes[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, best_thr),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn huge_lambda_shrinks_leaf_weights_to_zero() {
        let data = [0.0, 1.0, 2.0, 3.0];
        let g = [1.0, -2.0, 0.5, 1.5];
        let h = [1.0, 1.0, 1.0, 1.0];
        let tree = fit_tree(
            &data,
            1,
            &[0, 1, 2, 3],
            FitTarget::Regression {
                gradients: &g,
                hessians: &h,
                lambda: 1e12,
                gamma: 0.0,
                learning_rate: 1.0,
            },
            &params(Some(3)),
            &[0],
            &mut rng(),
        );
        for node in &tree.nodes {
            if let TreeNode::Leaf { value } = node {
                assert!(value[0].abs() < 1e-9, "leaf weight {} not shrunk", value[0]);
            }
        }
    }

    #[test]
    fn gamma_blocks_marginal_splits() {
        let data = [0.0, 1.0];
        let g = [0.1, -0.1];
        let h = [1.0, 1.0];
        let tree = fit_tree(
            &data,
            1,
            &[0, 1],
            FitTarget::Regression {
                gradients: &g,
                hessians: &h,
                lambda: 0.0,
                gamma: 100.0,
                learning_rate: 1.0,
            },
            &params(None),
            &[0],
            &mut rng(),
        );
        assert_eq!(tree.nodes.len(), 1, "gain − γ ≤ 0 must stay a leaf");
    }

    #[test]
    fn depth_limit_respected() {
        let data: Vec<f64> = (0..16).map(f64::from).collect();
        let labels: Vec<usize> = (0..16).map(|i| (i % 2) as usize).collect();
        let rows: Vec<usize> = (0..16).collect();
        let tree = fit_tree(
            &data,
            1,
            &rows,
            FitTarget::Classification {
                labels: &labels,
                n_classes: 2,
            },
            &params(Some(2)),
            &[0],
            &mut rng(),
        );
        assert!(tree.max_depth <= 2);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let data = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let labels = [0usize, 0, 0, 0, 0, 1];
        let p = TreeParams {
            max_depth: None,
            min_samples_leaf: 2,
            feature_subsample: None,
        };
        let tree = fit_tree(
            &data,
            1,
            &[0, 1, 2, 3, 4, 5],
            FitTarget::Classification {
                labels: &labels,
                n_classes: 2,
            },
            &p,
            &[0],
            &mut rng(),
        );
        // every split must leave ≥2 rows per side; count rows per leaf
        fn leaf_sizes(tree: &DecisionTree, node: usize, rows: Vec<f64>, out: &mut Vec<usize>) {
            match &tree.nodes[node] {
                TreeNode::Leaf { .. } => out.push(rows.len()),
                TreeNode::Split {
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let (l, r): (Vec<f64>, Vec<f64>) =
                        rows.into_iter().partition(|v| v < threshold);
                    leaf_sizes(tree, *left, l, out);
                    leaf_sizes(tree, *right, r, out);
                }
            }
        }
        let mut sizes = Vec::new();
        leaf_sizes(&tree, 0, data.to_vec(), &mut sizes);
        assert!(sizes.iter().all(|&s| s >= 2), "{sizes:?}");
    }

    #[test]
    fn tie_breaks_to_lowest_feature() {
        // two identical separating features; the split must use feature 0
        let data = [
            0.0, 0.0, //
            1.0, 1.0, //
        ];
        let labels = [0usize, 1];
        let tree = fit_tree(
            &data,
            2,
            &[0, 1],
            FitTarget::Classification {
                labels: &labels,
                n_classes: 2,
            },
            &params(None),
            &[0, 1],
            &mut rng(),
        );
        match &tree.nodes[0] {
            TreeNode::Split { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected split, got {other:?}"),
        }
    }
}
