//! Text-to-label pipelines: cleaning, TF-IDF and a classifier bundled into
//! one persisted artifact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{oversample, CuratedRecord};
use crate::error::{Error, Result};
use crate::models::{
    from_versioned_json, train_rf, train_svm_logged, Classifier, Example, ForestConfig, ModelKind,
    Prediction, SvmConfig, Task,
};
use crate::textproc::{clean_text, fit_tfidf, TfidfConfig, TfidfModel};

const KIND: &str = "pipeline";
pub const PIPELINE_FORMAT_VERSION: u32 = 1;

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Class-imbalance regime for training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Normal,
    Oversample,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub tfidf: TfidfConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub task: Task,
    pub sampling: Sampling,
    pub seed: u64,
    pub tfidf: TfidfModel,
    pub classifier: Classifier,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub examples: usize,
    pub training_examples: usize,
    pub vocabulary_size: usize,
    pub class_counts: BTreeMap<usize, usize>,
    pub training_class_counts: BTreeMap<usize, usize>,
    /// Per-class SVM objective after each epoch.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub svm_objectives: Vec<(usize, Vec<f64>)>,
}

pub struct TrainOutcome {
    pub pipeline: TrainedPipeline,
    pub log: TrainLog,
    /// The rebalanced training records when sampling is `Oversample`.
    pub oversampled: Option<Vec<CuratedRecord>>,
}

pub fn task_label(task: Task, record: &CuratedRecord) -> usize {
    match task {
        Task::Case => record.record.case_id.index(),
        Task::DocType => record.doctype.index(),
    }
}

fn class_counts(labels: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

/// Trains a pipeline on curated records. TF-IDF is fitted on the original
/// records; oversampling only affects the classifier's training set.
pub fn train_pipeline(
    records: &[CuratedRecord],
    task: Task,
    kind: ModelKind,
    sampling: Sampling,
    config: &TrainConfig,
    seed: u64,
    threads: Option<usize>,
) -> Result<TrainOutcome> {
    if records.is_empty() {
        return Err(Error::Training("no training records".into()));
    }
    let texts: Vec<String> = records
        .iter()
        .map(|r| clean_text(&r.record.description).into_string())
        .collect();
    let tfidf = fit_tfidf(&texts, &config.tfidf)?;

    let labeled: Vec<(usize, usize)> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (i, task_label(task, r)))
        .collect();
    let training: Vec<(usize, usize)> = match sampling {
        Sampling::Normal => labeled.clone(),
        Sampling::Oversample => oversample(&labeled, seed),
    };
    let data: Vec<Example> = training
        .iter()
        .map(|&(i, l)| (tfidf.transform(&texts[i]), l))
        .collect();

    let mut log = TrainLog {
        examples: records.len(),
        training_examples: data.len(),
        vocabulary_size: tfidf.dim(),
        class_counts: class_counts(labeled.iter().map(|p| p.1)),
        training_class_counts: class_counts(training.iter().map(|p| p.1)),
        svm_objectives: Vec::new(),
    };
    let classifier = match kind {
        ModelKind::Svm => {
            let c = SvmConfig {
                seed,
                threads,
                ..config.svm.clone()
            };
            let (model, svm_log) = train_svm_logged(&data, &c)?;
            log.svm_objectives = svm_log.objectives;
            Classifier::Svm(model)
        }
        ModelKind::Forest => {
            let c = ForestConfig {
                seed,
                threads,
                ..config.forest.clone()
            };
            Classifier::Forest(train_rf(&data, &c)?)
        }
    };
    let oversampled = (sampling == Sampling::Oversample).then(|| {
        training
            .iter()
            .map(|&(i, _)| CuratedRecord {
                seed: Some(seed),
                ..records[i].clone()
            })
            .collect()
    });
    Ok(TrainOutcome {
        pipeline: TrainedPipeline {
            task,
            sampling,
            seed,
            tfidf,
            classifier,
        },
        log,
        oversampled,
    })
}

impl TrainedPipeline {
    /// Cleans, vectorizes and classifies one text.
    pub fn predict_text(&self, text: &str) -> Result<Prediction> {
        let clean = clean_text(text);
        self.classifier.predict(&self.tfidf.transform(clean.as_str()))
    }

    pub fn to_json(&self) -> Result<String> {
        crate::models::to_versioned_json(KIND, PIPELINE_FORMAT_VERSION, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: TrainedPipeline = from_versioned_json(KIND, PIPELINE_FORMAT_VERSION, text)?;
        let dim = match &p.classifier {
            Classifier::Svm(m) => m.dim(),
            Classifier::Forest(m) => m.dim(),
        };
        if dim != p.tfidf.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.tfidf.dim(),
                actual: dim,
            });
        }
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainedPipeline::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationRecord, CaseId, DocType, Status};

    fn rec(text: &str, case: usize, doctype: DocType) -> CuratedRecord {
        CuratedRecord::new(
            AnnotationRecord {
                description: text.into(),
                case_id: CaseId::new(case).unwrap(),
                doc_type_raw: doctype.name().into(),
                status: Status::Accepted,
                service_id: "s".into(),
                author_id: "a".into(),
                comments: None,
            },
            doctype,
        )
    }

    fn corpus() -> Vec<CuratedRecord> {
        let mut v = Vec::new();
        for i in 0..6 {
            v.push(rec(&format!("we sell your personal data to partners {i}"), 3, DocType::PrivacyPolicy));
            v.push(rec(&format!("you waive your right to a class action {i}"), 8, DocType::TermsOfService));
        }
        v.push(rec("cookies track you across sites", 3, DocType::CookiePolicy));
        v
    }

    #[test]
    fn trains_and_round_trips() {
        let config = TrainConfig {
            tfidf: TfidfConfig {
                min_df: 1,
                ..TfidfConfig::default()
            },
            ..TrainConfig::default()
        };
        let out = train_pipeline(&corpus(), Task::Case, ModelKind::Svm, Sampling::Normal, &config, 1, None).unwrap();
        assert!(out.oversampled.is_none());
        let p = out.pipeline;
        assert_eq!(p.predict_text("we sell personal data").unwrap().label, 3);
        assert_eq!(p.predict_text("class action waiver right").unwrap().label, 8);
        let back = TrainedPipeline::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn oversampling_balances_doctypes() {
        let config = TrainConfig {
            tfidf: TfidfConfig {
                min_df: 1,
                ..TfidfConfig::default()
            },
            forest: ForestConfig {
                n_trees: 5,
                ..ForestConfig::default()
            },
            ..TrainConfig::default()
        };
        let out = train_pipeline(&corpus(), Task::DocType, ModelKind::Forest, Sampling::Oversample, &config, 9, None).unwrap();
        assert!(out.log.training_class_counts.values().all(|&n| n == 6));
        let over = out.oversampled.unwrap();
        assert_eq!(over.len(), 18);
        assert!(over.iter().all(|r| r.seed == Some(9)));
    }

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
