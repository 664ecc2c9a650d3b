use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AnnotationRecord, CaseId, Status};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Delimited,
    JsonLines,
}

impl InputFormat {
    /// Guesses the format from the file extension; anything that is not
    /// `.jsonl`/`.ndjson`/`.json` is treated as delimited.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson" | "json") => InputFormat::JsonLines,
            _ => InputFormat::Delimited,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ParseOutput {
    pub records: Vec<AnnotationRecord>,
    pub errors: Vec<RowError>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Description,
    Case,
    Title,
    Status,
    Service,
    Author,
    Comments,
}

const REQUIRED: [(Field, &str); 5] = [
    (Field::Description, "description"),
    (Field::Case, "case"),
    (Field::Title, "title"),
    (Field::Status, "status"),
    (Field::Author, "author"),
];

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn classify(header: &str) -> Option<Field> {
    match normalize(header).as_str() {
        "description" | "quote" | "text" => Some(Field::Description),
        "case" | "caseid" => Some(Field::Case),
        "title" | "document" | "documenttitle" | "doctyperaw" => Some(Field::Title),
        "status" => Some(Field::Status),
        "service" | "serviceid" => Some(Field::Service),
        "author" | "authorid" | "user" | "userid" => Some(Field::Author),
        "comments" | "comment" => Some(Field::Comments),
        _ => None,
    }
}

/// Raw string fields of one row, before validation.
#[derive(Default)]
struct RawRow {
    description: Option<String>,
    case: Option<String>,
    title: Option<String>,
    status: Option<String>,
    service: Option<String>,
    author: Option<String>,
    comments: Option<String>,
}

impl RawRow {
    fn slot(&mut self, field: Field) -> &mut Option<String> {
        match field {
            Field::Description => &mut self.description,
            Field::Case => &mut self.case,
            Field::Title => &mut self.title,
            Field::Status => &mut self.status,
            Field::Service => &mut self.service,
            Field::Author => &mut self.author,
            Field::Comments => &mut self.comments,
        }
    }

    fn into_record(self) -> std::result::Result<AnnotationRecord, String> {
        let description = self.description.ok_or("missing description")?;
        if description.trim().is_empty() {
            return Err("empty description".into());
        }
        let case_text = self.case.ok_or("missing case")?;
        let case_num: usize = case_text
            .trim()
            .parse()
            .map_err(|_| format!("unparseable case id `{case_text}`"))?;
        let case_id = CaseId::new(case_num).map_err(|e| e.to_string())?;
        let status_text = self.status.ok_or("missing status")?;
        let status: Status = status_text.parse().map_err(|e: Error| e.to_string())?;
        Ok(AnnotationRecord {
            description,
            case_id,
            doc_type_raw: self.title.ok_or("missing title")?,
            status,
            service_id: self.service.unwrap_or_default(),
            author_id: self.author.ok_or("missing author")?,
            comments: self.comments.filter(|c| !c.trim().is_empty()),
        })
    }
}

/// Parses an annotation export. Row-level problems are collected in
/// [`ParseOutput::errors`]; only schema and I/O problems fail the call.
///
/// Recognized columns (header names are matched ignoring case, spaces and
/// punctuation): `Description`, `Case`, `Title`, `Status`, `Author ID`,
/// optional `Comments` and optional `Service`.
pub fn parse_records(path: &Path, format: InputFormat) -> Result<ParseOutput> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        InputFormat::Delimited => parse_delimited(&text),
        InputFormat::JsonLines => Ok(parse_json_lines(&text)),
    }
}

pub(crate) fn parse_delimited(text: &str) -> Result<ParseOutput> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let columns: Vec<Option<Field>> = headers.iter().map(classify).collect();
    for (field, name) in REQUIRED {
        if !columns.contains(&Some(field)) {
            return Err(Error::MissingColumn {
                column: name.to_string(),
            });
        }
    }

    let mut out = ParseOutput::default();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                out.errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let mut raw = RawRow::default();
        for (value, column) in row.iter().zip(&columns) {
            if let Some(field) = column {
                *raw.slot(*field) = Some(value.to_string());
            }
        }
        match raw.into_record() {
            Ok(r) => out.records.push(r),
            Err(message) => out.errors.push(RowError { line, message }),
        }
    }
    Ok(out)
}

fn value_to_string(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

pub(crate) fn parse_json_lines(text: &str) -> ParseOutput {
    let mut out = ParseOutput::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let obj = match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(map)) => map,
            Ok(_) => {
                out.errors.push(RowError {
                    line: line_no,
                    message: "expected a JSON object".into(),
                });
                continue;
            }
            Err(e) => {
                out.errors.push(RowError {
                    line: line_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let mut raw = RawRow::default();
        for (key, value) in &obj {
            if let Some(field) = classify(key) {
                *raw.slot(field) = value_to_string(value);
            }
        }
        match raw.into_record() {
            Ok(r) => out.records.push(r),
            Err(message) => out.errors.push(RowError {
                line: line_no,
                message,
            }),
        }
    }
    out
}
