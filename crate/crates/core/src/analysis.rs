//! Whole-document analysis: sentence-level case and document-type
//! predictions folded into a summary, a scalar score and a letter grade.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CaseId, CaseTaxonomy, DocType};
use crate::error::{Error, Result};
use crate::models::Task;
use crate::pipeline::{sha256_hex, TrainedPipeline};
use crate::textproc::{clean_text, split_sentences, SentenceConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradeBand {
    pub min: f64,
    pub grade: String,
}

/// Case weights and grade bands. Cases without a weight count as 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub weights: BTreeMap<usize, f64>,
    pub grades: Vec<GradeBand>,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        let band = |min: f64, grade: &str| GradeBand {
            min,
            grade: grade.into(),
        };
        ScoringConfig {
            weights: BTreeMap::new(),
            grades: vec![
                band(0.5, "A"),
                band(0.1, "B"),
                band(-0.1, "C"),
                band(-0.5, "D"),
                band(-1.0, "E"),
            ],
        }
    }
}

impl ScoringConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut config: ScoringConfig = serde_json::from_str(text)?;
        config.validate()?;
        config
            .grades
            .sort_by(|a, b| b.min.total_cmp(&a.min));
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (&case, &w) in &self.weights {
            let id = CaseId::new(case)?;
            if !w.is_finite() {
                return Err(Error::Config(format!("weight for case {case} is not finite")));
            }
            if id.is_abstain() && w != 0.0 {
                return Err(Error::Config(format!("abstain case {case} must have weight 0")));
            }
        }
        if self.grades.is_empty() {
            return Err(Error::Config("at least one grade band is required".into()));
        }
        let mut mins: Vec<f64> = self.grades.iter().map(|g| g.min).collect();
        if mins.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config("grade band minimum is not finite".into()));
        }
        mins.sort_by(f64::total_cmp);
        if mins.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("grade bands overlap (duplicate minimum)".into()));
        }
        Ok(())
    }

    pub fn weight(&self, case: usize) -> f64 {
        self.weights.get(&case).copied().unwrap_or(0.0)
    }

    /// Highest band whose minimum the score reaches. The lowest band is a
    /// floor and also catches scores below its minimum.
    pub fn grade(&self, score: f64) -> &str {
        let mut bands: Vec<&GradeBand> = self.grades.iter().collect();
        bands.sort_by(|a, b| b.min.total_cmp(&a.min));
        bands
            .iter()
            .find(|b| score >= b.min)
            .or(bands.last())
            .map_or("", |b| b.grade.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceEntry {
    pub text: String,
    pub case_id: usize,
    pub confidence: f64,
    pub doctype: DocType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectedCase {
    pub case_id: usize,
    pub description: String,
    pub count: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub digest: String,
    pub sentence_count: usize,
    pub sentences: Vec<SentenceEntry>,
    /// Non-abstain cases, most frequent first.
    pub detected_cases: Vec<DetectedCase>,
    pub abstained: usize,
    pub doc_type: DocType,
    pub doc_type_votes: BTreeMap<String, usize>,
    pub score: f64,
    pub grade: String,
}

fn check_task(p: &TrainedPipeline, task: Task) -> Result<()> {
    if p.task != task {
        return Err(Error::Config(format!(
            "expected a {task} model, got a {} model",
            p.task
        )));
    }
    Ok(())
}

/// Runs the case and document-type pipelines over every sentence of a
/// document.
pub fn analyze(
    document: &str,
    case_model: &TrainedPipeline,
    doctype_model: &TrainedPipeline,
    scoring: &ScoringConfig,
    sentence_config: &SentenceConfig,
    taxonomy: &CaseTaxonomy,
) -> Result<AnalysisReport> {
    check_task(case_model, Task::Case)?;
    check_task(doctype_model, Task::DocType)?;
    scoring.validate()?;

    let clean = clean_text(document);
    let sentences = split_sentences(&clean, sentence_config);
    if sentences.is_empty() {
        return Err(Error::Analysis("no analyzable sentences".into()));
    }

    let mut entries = Vec::with_capacity(sentences.len());
    let mut case_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut votes = [0usize; DocType::ALL.len()];
    for text in sentences {
        let case = case_model.predict_text(&text)?;
        let dt = doctype_model.predict_text(&text)?;
        let doctype = DocType::from_index(dt.label)
            .ok_or_else(|| Error::Analysis(format!("doctype label {} out of range", dt.label)))?;
        votes[dt.label] += 1;
        *case_counts.entry(case.label).or_insert(0) += 1;
        entries.push(SentenceEntry {
            text,
            case_id: case.label,
            confidence: case.confidence(case_model.classifier.kind()),
            doctype,
        });
    }

    let abstained = case_counts.remove(&CaseId::ABSTAIN.index()).unwrap_or(0);
    let considered: usize = case_counts.values().sum();
    let total: f64 = case_counts
        .iter()
        .map(|(&c, &n)| scoring.weight(c) * n as f64)
        .sum();
    let score = if considered == 0 {
        0.0
    } else {
        total / considered as f64
    };

    let mut detected_cases = case_counts
        .iter()
        .map(|(&case_id, &count)| {
            Ok(DetectedCase {
                case_id,
                description: taxonomy.description(CaseId::new(case_id)?).to_string(),
                count,
                weight: scoring.weight(case_id),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    detected_cases.sort_by(|a, b| b.count.cmp(&a.count).then(a.case_id.cmp(&b.case_id)));

    // first maximum wins, so ties go to the lowest index
    let mut best = 0;
    for (i, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = i;
        }
    }

    Ok(AnalysisReport {
        digest: sha256_hex(document.as_bytes()),
        sentence_count: entries.len(),
        sentences: entries,
        detected_cases,
        abstained,
        doc_type: DocType::ALL[best],
        doc_type_votes: DocType::ALL
            .iter()
            .map(|d| (d.name().to_string(), votes[d.index()]))
            .collect(),
        score,
        grade: scoring.grade(score).to_string(),
    })
}

impl AnalysisReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "## Document analysis\n");
        let _ = writeln!(out, "- digest: `{}`", self.digest);
        let _ = writeln!(out, "- document type: {}", self.doc_type.name());
        let _ = writeln!(out, "- score: {:.4} (grade {})", self.score, self.grade);
        let _ = writeln!(
            out,
            "- sentences: {} ({} abstained)\n",
            self.sentence_count, self.abstained
        );
        out.push_str("### Detected cases\n\n");
        if self.detected_cases.is_empty() {
            out.push_str("_none_\n");
        }
        for c in &self.detected_cases {
            let _ = writeln!(
                out,
                "- {} (case {}, {} sentence{}, weight {:+})",
                c.description,
                c.case_id,
                c.count,
                if c.count == 1 { "" } else { "s" },
                c.weight
            );
        }
        out.push_str("\n### Sentences\n\n| # | case | confidence | doctype | text |\n|---:|---:|---:|---|---|\n");
        for (i, s) in self.sentences.iter().enumerate() {
            let _ = writeln!(
                out,
                "| {} | {} | {:.3} | {} | {} |",
                i + 1,
                s.case_id,
                s.confidence,
                s.doctype.short_name(),
                s.text.replace('|', "\\|")
            );
        }
        out
    }
}
