//! One-vs-rest linear SVM trained with the Pegasos schedule.
//!
//! Each binary problem minimizes
//! `lambda/2 * |w|^2 + mean(max(0, 1 - y (w.x + b)))` by SGD with step
//! `1 / (lambda * t)`. The bias is the weight of a constant feature and is
//! regularized with the rest of `w`. After each step the iterate is
//! projected onto the ball of radius `1/sqrt(lambda)`.

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    argmax, canonical_order, from_versioned_json, read_file, to_versioned_json, validate_dataset,
    with_threads, write_file, Example, Prediction,
};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::textproc::SparseVector;

const KIND: &str = "linear-svm";
pub const SVM_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub epochs: usize,
    pub lambda: f64,
    pub seed: u64,
    pub allow_single_class: bool,
    /// Worker threads; `None` uses the global pool. Not persisted.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            epochs: 10,
            lambda: 1e-4,
            seed: 0,
            allow_single_class: false,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    dim: usize,
    class_ids: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    config: SvmConfig,
}

/// Regularized hinge objective after each epoch, one series per class.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SvmTrainLog {
    pub objectives: Vec<(usize, Vec<f64>)>,
}

struct BinaryProblem<'a> {
    data: &'a [Example],
    order: &'a [usize],
    positive: usize,
}

impl BinaryProblem<'_> {
    fn target(&self, i: usize) -> f64 {
        if self.data[i].1 == self.positive {
            1.0
        } else {
            -1.0
        }
    }

    fn objective(&self, w: &[f64], b: f64, lambda: f64) -> f64 {
        let hinge: f64 = self
            .order
            .iter()
            .map(|&i| (1.0 - self.target(i) * (self.data[i].0.dot(w) + b)).max(0.0))
            .sum();
        let sq = w.iter().map(|x| x * x).sum::<f64>() + b * b;
        0.5 * lambda * sq + hinge / self.order.len() as f64
    }
}

/// Scaled weight vector: the effective weights are `scale * (v, vb)`.
struct ScaledWeights {
    v: Vec<f64>,
    vb: f64,
    scale: f64,
    /// `|v|^2 + vb^2`, maintained incrementally.
    sq_norm: f64,
}

impl ScaledWeights {
    fn new(dim: usize) -> Self {
        ScaledWeights {
            v: vec![0.0; dim],
            vb: 0.0,
            scale: 1.0,
            sq_norm: 0.0,
        }
    }

    fn reset(&mut self) {
        self.v.iter_mut().for_each(|x| *x = 0.0);
        self.vb = 0.0;
        self.scale = 1.0;
        self.sq_norm = 0.0;
    }

    fn fold_scale(&mut self) {
        let s = self.scale;
        self.v.iter_mut().for_each(|x| *x *= s);
        self.vb *= s;
        self.sq_norm = self.v.iter().map(|x| x * x).sum::<f64>() + self.vb * self.vb;
        self.scale = 1.0;
    }

    fn effective(mut self) -> (Vec<f64>, f64) {
        self.fold_scale();
        (self.v, self.vb)
    }
}

fn pegasos(problem: &BinaryProblem<'_>, config: &SvmConfig, log: bool) -> (Vec<f64>, f64, Vec<f64>) {
    let dim = problem.data[problem.order[0]].0.dim();
    let lambda = config.lambda;
    let radius_sq = 1.0 / lambda;
    let mut rng = stream_rng(config.seed, problem.positive as u64);
    let mut w = ScaledWeights::new(dim);
    let mut order = problem.order.to_vec();
    let mut objectives = Vec::new();
    let mut t: u64 = 0;
    let mut best: Option<(Vec<f64>, f64, f64)> = None;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = &problem.data[i].0;
            let y = problem.target(i);
            let raw = x.dot(&w.v) + w.vb;
            let margin = y * w.scale * raw;

            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                w.reset();
            } else {
                w.scale *= shrink;
            }
            if margin < 1.0 {
                let coef = eta * y / w.scale;
                // |v + c(x, 1)|^2 = |v|^2 + 2c(v.x + vb) + c^2(|x|^2 + 1)
                let raw_now = if shrink <= 0.0 { 0.0 } else { raw };
                w.sq_norm += 2.0 * coef * raw_now + coef * coef * (x.squared_norm() + 1.0);
                for &(j, val) in x.entries() {
                    w.v[j as usize] += coef * val;
                }
                w.vb += coef;
            }
            let eff_sq = w.scale * w.scale * w.sq_norm;
            if eff_sq > radius_sq {
                w.scale *= (radius_sq / eff_sq).sqrt();
            }
            if w.scale < 1e-9 {
                w.fold_scale();
            }
        }
        // keep the best end-of-epoch iterate so the returned objective
        // never increases from one epoch to the next
        let s = w.scale;
        let eff: Vec<f64> = w.v.iter().map(|x| x * s).collect();
        let eff_b = w.vb * s;
        let obj = problem.objective(&eff, eff_b, lambda);
        if best.as_ref().is_none_or(|b| obj <= b.2) {
            best = Some((eff, eff_b, obj));
        }
        if log {
            objectives.push(best.as_ref().map_or(obj, |b| b.2));
        }
    }
    match best {
        Some((weights, bias, _)) => (weights, bias, objectives),
        None => {
            let (weights, bias) = w.effective();
            (weights, bias, objectives)
        }
    }
}

pub fn train_svm(data: &[Example], config: &SvmConfig) -> Result<LinearSvmModel> {
    train_impl(data, config, false).map(|(m, _)| m)
}

/// Like [`train_svm`], also recording the objective after every epoch.
pub fn train_svm_logged(data: &[Example], config: &SvmConfig) -> Result<(LinearSvmModel, SvmTrainLog)> {
    train_impl(data, config, true)
}

fn train_impl(data: &[Example], config: &SvmConfig, log: bool) -> Result<(LinearSvmModel, SvmTrainLog)> {
    let (dim, class_ids) = validate_dataset(data)?;
    if class_ids.len() < 2 && !config.allow_single_class {
        return Err(Error::Training(
            "need at least two distinct labels (single-class mode is off)".into(),
        ));
    }
    if config.lambda.is_nan() || config.lambda <= 0.0 {
        return Err(Error::Config("lambda must be positive".into()));
    }
    let order = canonical_order(data);
    let fitted: Vec<(Vec<f64>, f64, Vec<f64>)> = with_threads(config.threads, || {
        class_ids
            .par_iter()
            .map(|&c| {
                let problem = BinaryProblem {
                    data,
                    order: &order,
                    positive: c,
                };
                if config.epochs == 0 {
                    (vec![0.0; dim], 0.0, Vec::new())
                } else {
                    pegasos(&problem, config, log)
                }
            })
            .collect()
    });
    let mut weights = Vec::with_capacity(fitted.len());
    let mut biases = Vec::with_capacity(fitted.len());
    let mut log_out = SvmTrainLog::default();
    for (&c, (w, b, obj)) in class_ids.iter().zip(fitted) {
        weights.push(w);
        biases.push(b);
        if log {
            log_out.objectives.push((c, obj));
        }
    }
    let model = LinearSvmModel {
        dim,
        class_ids,
        weights,
        biases,
        config: SvmConfig {
            threads: None,
            ..config.clone()
        },
    };
    Ok((model, log_out))
}

impl LinearSvmModel {
    /// Builds a model from explicit parameters. Classes must be strictly
    /// increasing and every weight vector must have length `dim`.
    pub fn from_parts(
        dim: usize,
        class_ids: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
    ) -> Result<Self> {
        let model = LinearSvmModel {
            dim,
            class_ids,
            weights,
            biases,
            config: SvmConfig::default(),
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        if self.class_ids.is_empty() {
            return Err(Error::Invalid("model has no classes".into()));
        }
        if self.class_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("class ids must be strictly increasing".into()));
        }
        if self.weights.len() != self.class_ids.len() || self.biases.len() != self.class_ids.len() {
            return Err(Error::Invalid("one (weights, bias) pair per class required".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| w.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: w.len(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    pub fn weights(&self, class_position: usize) -> (&[f64], f64) {
        (&self.weights[class_position], self.biases[class_position])
    }

    pub fn config(&self) -> &SvmConfig {
        &self.config
    }

    /// Decision values `w.x + b` per class.
    pub fn decision_values(&self, vector: &SparseVector) -> Result<Vec<f64>> {
        if vector.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.dim(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| vector.dot(w) + b)
            .collect())
    }

    /// Highest decision value wins; ties go to the lowest class id.
    pub fn predict(&self, vector: &SparseVector) -> Result<Prediction> {
        let values = self.decision_values(vector)?;
        let best = argmax(values.iter().copied()).expect("model has classes");
        Ok(Prediction {
            label: self.class_ids[best],
            scores: self.class_ids.iter().copied().zip(values).collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        to_versioned_json(KIND, SVM_FORMAT_VERSION, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: LinearSvmModel = from_versioned_json(KIND, SVM_FORMAT_VERSION, text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        LinearSvmModel::from_json(&read_file(path)?)
    }
}
