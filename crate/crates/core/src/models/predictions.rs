use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{DocType, NUM_CASES};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Case,
    DocType,
}

impl Task {
    pub fn label_space(self) -> LabelSpace {
        match self {
            Task::Case => LabelSpace::new(NUM_CASES),
            Task::DocType => LabelSpace::new(DocType::ALL.len()),
        }
    }

    /// Parses a label as written in a predictions file. Document types may
    /// be given by name or by index.
    pub fn parse_label(self, text: &str) -> Result<usize> {
        let t = text.trim();
        match self {
            Task::Case => t
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("case label `{t}` is not an integer"))),
            Task::DocType => match t.parse::<usize>() {
                Ok(i) => Ok(i),
                Err(_) => t.parse::<DocType>().map(DocType::index),
            },
        }
    }

    pub fn label_name(self, label: usize) -> String {
        match self {
            Task::Case => label.to_string(),
            Task::DocType => DocType::from_index(label)
                .map_or_else(|| label.to_string(), |d| d.short_name().to_string()),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Case => "case",
            Task::DocType => "doctype",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case" => Ok(Task::Case),
            "doctype" | "doc-type" | "doc_type" => Ok(Task::DocType),
            _ => Err(Error::Invalid(format!("unknown task `{s}`"))),
        }
    }
}

/// Labels `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace {
    pub size: usize,
}

impl LabelSpace {
    pub fn new(size: usize) -> Self {
        LabelSpace { size }
    }

    pub fn contains(&self, label: usize) -> bool {
        label < self.size
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.size).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub example_id: String,
    pub gold: usize,
    pub predicted: usize,
    pub score: Option<f64>,
    /// Document type of the example, when known. Used to tag case
    /// predictions for frequency tables.
    pub doctype: Option<DocType>,
}

/// Gold/predicted pairs for one task, from a native model or imported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub task: Task,
    pub source_name: String,
    pub label_space: LabelSpace,
    rows: Vec<PredictionRow>,
}

impl PredictionSet {
    /// Validates unique ids and labels inside `label_space`.
    pub fn new(
        task: Task,
        source_name: impl Into<String>,
        label_space: LabelSpace,
        rows: Vec<PredictionRow>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            let row = i + 1;
            if !seen.insert(r.example_id.as_str()) {
                return Err(Error::Invalid(format!(
                    "row {row}: duplicate example_id `{}`",
                    r.example_id
                )));
            }
            for (what, label) in [("gold", r.gold), ("predicted", r.predicted)] {
                if !label_space.contains(label) {
                    return Err(Error::Invalid(format!(
                        "row {row}: {what} label {label} outside label space [0, {})",
                        label_space.size
                    )));
                }
            }
        }
        Ok(PredictionSet {
            task,
            source_name: source_name.into(),
            label_space,
            rows,
        })
    }

    pub fn rows(&self) -> &[PredictionRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes `example_id,gold,predicted,score`, plus a `doctype` column
    /// when any row carries one.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let with_doctype = self.rows.iter().any(|r| r.doctype.is_some());
        let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Invalid(format!("{other:?}")),
        })?;
        let mut header = vec!["example_id", "gold", "predicted", "score"];
        if with_doctype {
            header.push("doctype");
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.example_id.clone(),
                self.task.label_name(r.gold),
                self.task.label_name(r.predicted),
                r.score.map(|s| s.to_string()).unwrap_or_default(),
            ];
            if with_doctype {
                rec.push(r.doctype.map(|d| format!("{d:?}")).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Reads a predictions file with header `example_id,gold,predicted[,score]`
/// and an optional `doctype` column.
pub fn import_predictions(path: &Path, task: Task, label_space: LabelSpace) -> Result<PredictionSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let source = path
        .file_stem()
        .map_or_else(|| "predictions".to_string(), |s| s.to_string_lossy().into_owned());
    parse_predictions(&text, task, label_space, source)
}

pub(crate) fn parse_predictions(
    text: &str,
    task: Task,
    label_space: LabelSpace,
    source: String,
) -> Result<PredictionSet> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let id_col = col("example_id").ok_or(Error::MissingColumn {
        column: "example_id".into(),
    })?;
    let gold_col = col("gold").ok_or(Error::MissingColumn {
        column: "gold".into(),
    })?;
    let pred_col = col("predicted").ok_or(Error::MissingColumn {
        column: "predicted".into(),
    })?;
    let score_col = col("score");
    let doctype_col = col("doctype");

    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let field = |c: usize| rec.get(c).unwrap_or("").trim();
        let label = |c: usize, what: &str| -> Result<usize> {
            let l = task
                .parse_label(field(c))
                .map_err(|e| Error::Invalid(format!("row {row}: {what}: {e}")))?;
            if !label_space.contains(l) {
                return Err(Error::Invalid(format!(
                    "row {row}: {what} label {l} outside label space [0, {})",
                    label_space.size
                )));
            }
            Ok(l)
        };
        let score = match score_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .map_err(|_| Error::Invalid(format!("row {row}: score `{s}` is not a number")))?,
            ),
        };
        let doctype = match doctype_col.map(field) {
            None | Some("") => None,
            Some(d) => Some(
                d.parse::<DocType>()
                    .map_err(|e| Error::Invalid(format!("row {row}: doctype: {e}")))?,
            ),
        };
        rows.push(PredictionRow {
            example_id: field(id_col).to_string(),
            gold: label(gold_col, "gold")?,
            predicted: label(pred_col, "predicted")?,
            score,
            doctype,
        });
    }
    PredictionSet::new(task, source, label_space, rows)
}
