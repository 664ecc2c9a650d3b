//! Annotation records and the operations that turn a raw export into
//! training-ready datasets: parsing, trimming, document-type mapping,
//! service-threshold splitting and oversampling.

mod doctype;
mod oversample;
mod parse;
mod split;
mod taxonomy;
mod trim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use doctype::{MappingRule, MappingRuleset};
pub use oversample::oversample;
pub use parse::{parse_records, InputFormat, ParseOutput, RowError};
pub use split::{split_by_service, DatasetSplit, SplitReport, SplitSide, DEFAULT_THRESHOLD};
pub use taxonomy::CaseTaxonomy;
pub use trim::{trim_records, TrimPolicy, TrimReport};

/// Number of case labels, abstain included.
pub const NUM_CASES: usize = 246;

/// Identifier of a case label in `[0, 245]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct CaseId(u16);

impl CaseId {
    /// The null case assigned when no substantive concept applies.
    pub const ABSTAIN: CaseId = CaseId(245);

    pub fn new(id: usize) -> Result<CaseId> {
        if id < NUM_CASES {
            Ok(CaseId(id as u16))
        } else {
            Err(Error::LabelOutOfSpace {
                label: id,
                size: NUM_CASES,
            })
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_abstain(self) -> bool {
        self == CaseId::ABSTAIN
    }
}

impl TryFrom<u16> for CaseId {
    type Error = Error;

    fn try_from(value: u16) -> Result<Self> {
        CaseId::new(value as usize)
    }
}

impl From<CaseId> for u16 {
    fn from(id: CaseId) -> u16 {
        id.0
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Review status of an annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Pending,
    Accepted,
    Declined,
    ChangesRequested,
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "pending" => Ok(Status::Pending),
            "accepted" => Ok(Status::Accepted),
            "declined" => Ok(Status::Declined),
            "changesrequested" => Ok(Status::ChangesRequested),
            _ => Err(Error::Invalid(format!("unknown status `{s}`"))),
        }
    }
}

/// The five document categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DocType {
    TermsOfService,
    PrivacyPolicy,
    CookiePolicy,
    DataPolicy,
    OtherPolicy,
}

impl DocType {
    pub const ALL: [DocType; 5] = [
        DocType::TermsOfService,
        DocType::PrivacyPolicy,
        DocType::CookiePolicy,
        DocType::DataPolicy,
        DocType::OtherPolicy,
    ];

    /// Class index used when document type is a classification target.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<DocType> {
        DocType::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            DocType::TermsOfService => "Terms of Service",
            DocType::PrivacyPolicy => "Privacy Policy",
            DocType::CookiePolicy => "Cookie Policy",
            DocType::DataPolicy => "Data Policy",
            DocType::OtherPolicy => "Other Policy",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            DocType::TermsOfService => "ToS",
            DocType::PrivacyPolicy => "PP",
            DocType::CookiePolicy => "Cookie",
            DocType::DataPolicy => "Data",
            DocType::OtherPolicy => "Other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DocType {
    type Err = Error;

    /// Accepts the variant name, the display name, the short name or the
    /// class index.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if let Ok(i) = trimmed.parse::<usize>() {
            return DocType::from_index(i)
                .ok_or(Error::LabelOutOfSpace { label: i, size: 5 });
        }
        let key: String = trimmed
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        DocType::ALL
            .into_iter()
            .find(|d| {
                let variant = format!("{d:?}").to_ascii_lowercase();
                let display: String = d
                    .name()
                    .chars()
                    .filter(|c| c.is_ascii_alphanumeric())
                    .map(|c| c.to_ascii_lowercase())
                    .collect();
                key == variant || key == display || key == d.short_name().to_ascii_lowercase()
            })
            .ok_or_else(|| Error::Invalid(format!("unknown document type `{s}`")))
    }
}

/// One annotated sentence from a policy document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub description: String,
    #[serde(rename = "case")]
    pub case_id: CaseId,
    /// Raw document title as it appeared in the export.
    #[serde(rename = "title")]
    pub doc_type_raw: String,
    pub status: Status,
    #[serde(rename = "service")]
    pub service_id: String,
    #[serde(rename = "author")]
    pub author_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comments: Option<String>,
}

/// A record with its mapped document type, as written to curated and split
/// JSON-lines files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuratedRecord {
    #[serde(flatten)]
    pub record: AnnotationRecord,
    pub doctype: DocType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CuratedRecord {
    pub fn new(record: AnnotationRecord, doctype: DocType) -> Self {
        CuratedRecord {
            record,
            doctype,
            split: None,
            seed: None,
        }
    }
}

/// Reads a JSON-lines file of curated records. Blank lines are skipped.
pub fn read_curated(path: &std::path::Path) -> Result<Vec<CuratedRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Row {
                line: i as u64 + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_curated(path: &std::path::Path, records: &[CuratedRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
