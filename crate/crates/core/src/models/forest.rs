//! Random forest of Gini-impurity decision trees over sparse vectors.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    argmax, canonical_order, from_versioned_json, read_file, to_versioned_json, validate_dataset,
    with_threads, write_file, Example, Prediction,
};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::textproc::SparseVector;

const KIND: &str = "random-forest";
pub const FOREST_FORMAT_VERSION: u32 = 1;

/// How many candidate features each split examines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    Sqrt,
    Log2,
    Fraction(f64),
    All,
}

impl FeatureSubset {
    fn count(self, dim: usize) -> usize {
        let d = dim as f64;
        let k = match self {
            FeatureSubset::Sqrt => d.sqrt().ceil(),
            FeatureSubset::Log2 => d.log2().ceil(),
            FeatureSubset::Fraction(f) => (d * f).ceil(),
            FeatureSubset::All => d,
        };
        (k as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeatureSubset,
    /// Draw a bootstrap sample per tree; off trains every tree on the full
    /// set (only the feature sampling varies).
    pub bootstrap: bool,
    pub seed: u64,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 200,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeatureSubset::Sqrt,
            bootstrap: true,
            seed: 0,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// (class position, count) pairs, non-empty.
    Leaf { counts: Vec<(u32, u32)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + go(nodes, *left as usize).max(go(nodes, *right as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }

    fn leaf(&self, vector: &SparseVector) -> &[(u32, u32)] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if vector.get(*feature) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Majority class position of the leaf reached; ties to the lowest.
    pub fn vote(&self, vector: &SparseVector) -> usize {
        let counts = self.leaf(vector);
        let mut best = counts[0];
        for &c in &counts[1..] {
            if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                best = c;
            }
        }
        best.0 as usize
    }

    fn check(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Invalid("tree has no nodes".into()));
        }
        for node in &self.nodes {
            match node {
                TreeNode::Split { left, right, .. } => {
                    if *left as usize >= self.nodes.len() || *right as usize >= self.nodes.len() {
                        return Err(Error::Invalid("split child out of range".into()));
                    }
                }
                TreeNode::Leaf { counts } => {
                    if counts.is_empty() {
                        return Err(Error::Invalid("empty leaf histogram".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    dim: usize,
    class_ids: Vec<usize>,
    trees: Vec<Tree>,
    config: ForestConfig,
}

struct Builder<'a> {
    data: &'a [Example],
    /// Class position of each example.
    positions: Vec<u32>,
    n_classes: usize,
    config: &'a ForestConfig,
    candidates: usize,
}

struct BestSplit {
    feature: u32,
    threshold: f64,
    impurity: f64,
}

fn gini_sum(sq_sum: f64, n: f64) -> f64 {
    // n * gini = n - sum(c^2) / n
    n - sq_sum / n
}

impl Builder<'_> {
    fn histogram(&self, samples: &[usize]) -> Vec<u32> {
        let mut h = vec![0u32; self.n_classes];
        for &s in samples {
            h[self.positions[s] as usize] += 1;
        }
        h
    }

    fn leaf(hist: &[u32]) -> TreeNode {
        TreeNode::Leaf {
            counts: hist
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i as u32, c))
                .collect(),
        }
    }

    fn best_split_on(&self, samples: &[usize], feature: u32, parent: &[u32]) -> Option<BestSplit> {
        let min_leaf = self.config.min_samples_leaf.max(1);
        let mut vals: Vec<(f64, u32)> = samples
            .iter()
            .map(|&s| (self.data[s].0.get(feature), self.positions[s]))
            .collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if vals[0].0 == vals[vals.len() - 1].0 {
            return None;
        }
        let n = vals.len();
        let mut left = vec![0u32; self.n_classes];
        let mut right = parent.to_vec();
        let mut left_sq = 0.0f64;
        let mut right_sq: f64 = right.iter().map(|&c| (c as f64) * (c as f64)).sum();
        let mut best: Option<BestSplit> = None;
        for k in 0..n - 1 {
            let c = vals[k].1 as usize;
            left_sq += 2.0 * left[c] as f64 + 1.0;
            left[c] += 1;
            right_sq -= 2.0 * right[c] as f64 - 1.0;
            right[c] -= 1;
            let n_left = k + 1;
            let n_right = n - n_left;
            if vals[k].0 == vals[k + 1].0 || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let impurity = gini_sum(left_sq, n_left as f64) + gini_sum(right_sq, n_right as f64);
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(BestSplit {
                    feature,
                    threshold: vals[k].0 + (vals[k + 1].0 - vals[k].0) / 2.0,
                    impurity,
                });
            }
        }
        best
    }

    fn find_split(&self, samples: &[usize], parent: &[u32], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let mut active: Vec<u32> = samples
            .iter()
            .flat_map(|&s| self.data[s].0.entries().iter().map(|&(i, _)| i))
            .collect();
        active.sort_unstable();
        active.dedup();
        active.shuffle(rng);

        let mut best: Option<BestSplit> = None;
        for (tried, &f) in active.iter().enumerate() {
            if tried >= self.candidates && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split_on(samples, f, parent) {
                let better = best
                    .as_ref()
                    .is_none_or(|b| s.impurity < b.impurity || (s.impurity == b.impurity && s.feature < b.feature));
                if better {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn grow(&self, samples: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes: Vec<TreeNode> = Vec::new();
        // (node slot, samples, depth)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        nodes.push(TreeNode::Leaf { counts: Vec::new() });
        stack.push((0, samples, 0));
        while let Some((slot, samples, depth)) = stack.pop() {
            let hist = self.histogram(&samples);
            let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
            let too_small = samples.len() < 2 * self.config.min_samples_leaf.max(1);
            let split = if pure || depth_capped || too_small {
                None
            } else {
                self.find_split(&samples, &hist, rng)
            };
            match split {
                None => nodes[slot] = Builder::leaf(&hist),
                Some(s) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = samples
                        .into_iter()
                        .partition(|&i| self.data[i].0.get(s.feature) <= s.threshold);
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf { counts: Vec::new() });
                    let right = nodes.len();
                    nodes.push(TreeNode::Leaf { counts: Vec::new() });
                    nodes[slot] = TreeNode::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: left as u32,
                        right: right as u32,
                    };
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        Tree { nodes }
    }
}

pub fn train_rf(data: &[Example], config: &ForestConfig) -> Result<RandomForestModel> {
    let (dim, class_ids) = validate_dataset(data)?;
    if config.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    if let FeatureSubset::Fraction(f) = config.features_per_split {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Config("feature fraction must be in (0, 1]".into()));
        }
    }
    let order = canonical_order(data);
    let positions = data
        .iter()
        .map(|(_, l)| class_ids.binary_search(l).expect("label collected") as u32)
        .collect();
    let builder = Builder {
        data,
        positions,
        n_classes: class_ids.len(),
        config,
        candidates: config.features_per_split.count(dim),
    };
    let trees = with_threads(config.threads, || {
        (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(config.seed, t as u64);
                let samples: Vec<usize> = if config.bootstrap {
                    (0..order.len())
                        .map(|_| order[rng.gen_range(0..order.len())])
                        .collect()
                } else {
                    order.clone()
                };
                builder.grow(samples, &mut rng)
            })
            .collect()
    });
    Ok(RandomForestModel {
        dim,
        class_ids,
        trees,
        config: ForestConfig {
            threads: None,
            ..config.clone()
        },
    })
}

impl RandomForestModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Builds a forest from explicit trees; leaf class positions index
    /// `class_ids`.
    pub fn from_parts(dim: usize, class_ids: Vec<usize>, trees: Vec<Tree>) -> Result<Self> {
        let model = RandomForestModel {
            dim,
            class_ids,
            trees,
            config: ForestConfig::default(),
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Invalid("forest has no trees".into()));
        }
        if self.class_ids.is_empty() || self.class_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("class ids must be non-empty and increasing".into()));
        }
        for t in &self.trees {
            t.check()?;
            for n in &t.nodes {
                if let TreeNode::Leaf { counts } = n {
                    if counts.iter().any(|(c, _)| *c as usize >= self.class_ids.len()) {
                        return Err(Error::Invalid("leaf class out of range".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Vote fractions per class in class order; they sum to 1.
    pub fn vote_fractions(&self, vector: &SparseVector) -> Vec<f64> {
        let mut votes = vec![0usize; self.class_ids.len()];
        for t in &self.trees {
            votes[t.vote(vector)] += 1;
        }
        let n = self.trees.len() as f64;
        votes.into_iter().map(|v| v as f64 / n).collect()
    }

    /// Plurality vote; ties go to the lowest class id.
    pub fn predict(&self, vector: &SparseVector) -> Result<Prediction> {
        if vector.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.dim(),
            });
        }
        let fractions = self.vote_fractions(vector);
        let best = argmax(fractions.iter().copied()).expect("forest has classes");
        Ok(Prediction {
            label: self.class_ids[best],
            scores: self.class_ids.iter().copied().zip(fractions).collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        to_versioned_json(KIND, FOREST_FORMAT_VERSION, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: RandomForestModel = from_versioned_json(KIND, FOREST_FORMAT_VERSION, text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RandomForestModel::from_json(&read_file(path)?)
    }
}
