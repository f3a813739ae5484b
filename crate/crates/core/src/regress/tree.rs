use rand::{seq::index, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LabeledSet, RegressError, TreeParams};
use crate::features::{FeatureVector, N_FEATURES};

/// Node SSE (bpm^2) at or below which a node is treated as pure.
const PURE_SSE: f64 = 1e-12;
/// Relative margin a candidate split must beat the incumbent by.
const TIE_TOL: f64 = 1e-12;

/// Tree node. `value` is the mean target of the training rows that reached
/// the node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        value: f64,
    },
}

/// Binary regression tree stored as a node array, root at index 0; children
/// always follow their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeArray", into = "NodeArray")]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeArray {
    nodes: Vec<Node>,
}

impl From<RegressionTree> for NodeArray {
    fn from(t: RegressionTree) -> Self {
        NodeArray { nodes: t.nodes }
    }
}

impl TryFrom<NodeArray> for RegressionTree {
    type Error = RegressError;

    fn try_from(raw: NodeArray) -> Result<Self, RegressError> {
        let bad = |m: String| Err(RegressError::InvalidModel(m));
        if raw.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let n = raw.nodes.len();
        for (i, node) in raw.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { value } if !value.is_finite() => {
                    return bad(format!("node {i}: non-finite value"))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    value,
                } => {
                    if feature >= N_FEATURES {
                        return bad(format!("node {i}: feature {feature} out of range"));
                    }
                    if !(threshold.is_finite() && value.is_finite()) {
                        return bad(format!("node {i}: non-finite threshold or value"));
                    }
                    if left <= i || right <= i || left >= n || right >= n {
                        return bad(format!("node {i}: children must follow the node"));
                    }
                }
            }
        }
        Ok(RegressionTree { nodes: raw.nodes })
    }
}

/// A chosen split: feature index, threshold and resulting children SSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub sse: f64,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RegressError> {
        serde_json::from_str(text).map_err(|e| RegressError::InvalidModel(e.to_string()))
    }
}

pub fn predict_tree(tree: &RegressionTree, x: &FeatureVector) -> f64 {
    tree.predict(x)
}

/// Fits a tree on all rows of `data`.
pub fn fit_tree(data: &LabeledSet, params: &TreeParams, seed: u64) -> Result<RegressionTree, RegressError> {
    let idx: Vec<usize> = (0..data.len()).collect();
    fit_tree_on(data, &idx, params, seed)
}

/// Fits a tree on the rows named by `indices` (repeats allowed, as in a
/// bootstrap resample). `seed` only matters when `n_candidate_splits`
/// limits the thresholds examined per feature.
pub fn fit_tree_on(
    data: &LabeledSet,
    indices: &[usize],
    params: &TreeParams,
    seed: u64,
) -> Result<RegressionTree, RegressError> {
    params.validate()?;
    if indices.is_empty() {
        return Err(RegressError::EmptyData);
    }
    let mut b = Builder {
        data,
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
        pairs: Vec::with_capacity(indices.len()),
    };
    let mut idx = indices.to_vec();
    b.grow(&mut idx, 0);
    Ok(RegressionTree { nodes: b.nodes })
}

struct Builder<'a> {
    data: &'a LabeledSet,
    params: &'a TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    pairs: Vec<(f64, f64)>,
}

impl Builder<'_> {
    fn y(&self, i: usize) -> f64 {
        self.data.rows()[i].bpm
    }

    fn x(&self, i: usize, f: usize) -> f64 {
        self.data.rows()[i].features[f]
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.y(i)).sum::<f64>() / n as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });

        if depth >= self.params.max_depth || n < 2 * self.params.min_samples_leaf {
            return id;
        }
        let Some(split) = self.best_split(idx, mean) else {
            return id;
        };
        let (l, r) = partition(idx, |i| self.x(i, split.feature) <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            value: mean,
        };
        id
    }

    /// Lowest-SSE split; ties keep the earliest (feature, threshold).
    fn best_split(&mut self, idx: &[usize], mean: f64) -> Option<Split> {
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let parent_sse: f64 = idx.iter().map(|&i| (self.y(i) - mean).powi(2)).sum();
        if parent_sse <= PURE_SSE {
            return None;
        }
        let tol = TIE_TOL * parent_sse;
        let mut best: Option<Split> = None;
        let mut positions = Vec::with_capacity(n);
        for f in 0..N_FEATURES {
            let mut pairs = std::mem::take(&mut self.pairs);
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.x(i, f), self.y(i) - mean)));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

            positions.clear();
            positions.extend(
                (min_leaf..=n - min_leaf).filter(|&k| k > 0 && k < n && pairs[k - 1].0 < pairs[k].0),
            );
            if let Some(limit) = self.params.n_candidate_splits {
                if positions.len() > limit {
                    let mut keep: Vec<usize> = index::sample(&mut self.rng, positions.len(), limit)
                        .into_iter()
                        .collect();
                    keep.sort_unstable();
                    let chosen: Vec<usize> = keep.into_iter().map(|j| positions[j]).collect();
                    positions.clear();
                    positions.extend(chosen);
                }
            }

            let total: f64 = pairs.iter().map(|p| p.1).sum();
            let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
            let (mut s, mut q, mut k_done) = (0.0, 0.0, 0);
            for &k in &positions {
                while k_done < k {
                    s += pairs[k_done].1;
                    q += pairs[k_done].1 * pairs[k_done].1;
                    k_done += 1;
                }
                let left = (q - s * s / k as f64).max(0.0);
                let rs = total - s;
                let right = (total_sq - q - rs * rs / (n - k) as f64).max(0.0);
                let sse = left + right;
                if best.is_none_or(|b| sse < b.sse - tol) {
                    let (lo, hi) = (pairs[k - 1].0, pairs[k].0);
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Split {
                        feature: f,
                        threshold,
                        sse,
                    });
                }
            }
            self.pairs = pairs;
        }
        best.filter(|b| b.sse < parent_sse - tol)
    }
}

/// Stable in-place partition.
fn partition(idx: &mut [usize], pred: impl Fn(usize) -> bool) -> (&mut [usize], &mut [usize]) {
    let (yes, no): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| pred(i));
    let k = yes.len();
    idx[..k].copy_from_slice(&yes);
    idx[k..].copy_from_slice(&no);
    idx.split_at_mut(k)
}
