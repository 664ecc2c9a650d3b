//! Classical classifiers over sparse feature vectors and the boundary for
//! predictions produced elsewhere.
//!
//! Both trainers sort the training set into a canonical order before any
//! seeded shuffling or bootstrapping, so a fitted model depends only on the
//! multiset of examples, the config and the seed. Per-class and per-tree
//! random streams are derived from the master seed, which makes the result
//! independent of the number of worker threads.

mod forest;
mod predictions;
mod svm;

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::SparseVector;

pub use forest::{train_rf, FeatureSubset, ForestConfig, RandomForestModel, Tree, TreeNode};
pub use predictions::{import_predictions, LabelSpace, PredictionRow, PredictionSet, Task};
pub use svm::{train_svm, train_svm_logged, LinearSvmModel, SvmConfig, SvmTrainLog};

/// A training example: feature vector and class id.
pub type Example = (SparseVector, usize);

/// Output of either classifier for one vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    /// Per-class decision values (SVM) or vote fractions (forest), in the
    /// model's class order.
    pub scores: Vec<(usize, f64)>,
}

impl Prediction {
    /// Winner's score minus the runner-up's for the SVM; the winning vote
    /// fraction for the forest.
    pub fn confidence(&self, kind: ModelKind) -> f64 {
        let top = self
            .scores
            .iter()
            .find(|(c, _)| *c == self.label)
            .map_or(0.0, |s| s.1);
        match kind {
            ModelKind::Forest => top,
            ModelKind::Svm => {
                let runner_up = self
                    .scores
                    .iter()
                    .filter(|(c, _)| *c != self.label)
                    .map(|s| s.1)
                    .fold(f64::NEG_INFINITY, f64::max);
                if runner_up.is_finite() {
                    top - runner_up
                } else {
                    top
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    #[serde(alias = "rf")]
    Forest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Classifier {
    Svm(LinearSvmModel),
    Forest(RandomForestModel),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Svm(_) => ModelKind::Svm,
            Classifier::Forest(_) => ModelKind::Forest,
        }
    }

    pub fn predict(&self, vector: &SparseVector) -> Result<Prediction> {
        match self {
            Classifier::Svm(m) => m.predict(vector),
            Classifier::Forest(m) => m.predict(vector),
        }
    }

    pub fn class_ids(&self) -> &[usize] {
        match self {
            Classifier::Svm(m) => m.class_ids(),
            Classifier::Forest(m) => m.class_ids(),
        }
    }
}

/// Index of the maximum; ties resolve to the lowest position. Positions are
/// in ascending class-id order, so this is also the lowest class id.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

fn cmp_vectors(a: &SparseVector, b: &SparseVector) -> Ordering {
    let ka = a.entries().iter().map(|&(i, v)| (i, v.to_bits()));
    let kb = b.entries().iter().map(|&(i, v)| (i, v.to_bits()));
    ka.cmp(kb)
}

/// Indices of `data` sorted by (label, vector contents).
pub(crate) fn canonical_order(data: &[Example]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        data[a]
            .1
            .cmp(&data[b].1)
            .then_with(|| cmp_vectors(&data[a].0, &data[b].0))
    });
    order
}

/// Checks the dataset is non-empty with consistent dimensionality; returns
/// the dimension and the sorted distinct labels.
pub(crate) fn validate_dataset(data: &[Example]) -> Result<(usize, Vec<usize>)> {
    let first = data
        .first()
        .ok_or_else(|| Error::Training("empty dataset".into()))?;
    let dim = first.0.dim();
    for (v, _) in data {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.dim(),
            });
        }
    }
    let mut labels: Vec<usize> = data.iter().map(|(_, l)| *l).collect();
    labels.sort_unstable();
    labels.dedup();
    Ok((dim, labels))
}

/// Runs `f` on a dedicated pool when a thread count is given, otherwise on
/// rayon's global pool.
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    kind: String,
    format_version: u32,
    #[serde(flatten)]
    body: T,
}

pub(crate) fn to_versioned_json<T: Serialize>(kind: &str, version: u32, body: &T) -> Result<String> {
    Ok(serde_json::to_string(&Envelope {
        kind: kind.to_string(),
        format_version: version,
        body,
    })?)
}

pub(crate) fn from_versioned_json<T: for<'de> Deserialize<'de>>(
    kind: &'static str,
    version: u32,
    text: &str,
) -> Result<T> {
    #[derive(Deserialize)]
    struct Header {
        kind: Option<String>,
        format_version: Option<u32>,
    }
    let header: Header = serde_json::from_str(text).map_err(|e| Error::Format {
        what: "model file",
        message: e.to_string(),
    })?;
    let found = header.kind.unwrap_or_default();
    if found != kind {
        return Err(Error::WrongMagic {
            expected: kind,
            found,
        });
    }
    match header.format_version {
        Some(v) if v == version => {}
        Some(v) => {
            return Err(Error::VersionMismatch {
                found: v,
                supported: version,
            })
        }
        None => {
            return Err(Error::Format {
                what: "model file",
                message: "missing format_version".into(),
            })
        }
    }
    let env: Envelope<T> = serde_json::from_str(text).map_err(|e| Error::Format {
        what: "model file",
        message: e.to_string(),
    })?;
    Ok(env.body)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
