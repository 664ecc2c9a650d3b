use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Distribution;
use crate::corpus::{CaseId, DocType};
use crate::error::{Error, Result};
use crate::models::{PredictionSet, Task};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DocTypeFrequencies {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
}

impl DocTypeFrequencies {
    pub fn count(&self, case: usize) -> u64 {
        self.counts.get(&case).copied().unwrap_or(0)
    }

    /// `count / total` per case; `None` when the type has no examples.
    pub fn fractions(&self) -> Option<Distribution> {
        if self.total == 0 {
            return None;
        }
        let t = self.total as f64;
        Some(Distribution::from_pairs(
            self.counts.iter().map(|(&c, &n)| (c, n as f64 / t)),
        ))
    }
}

/// Case counts and fractions for each document type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseFrequencyTable {
    pub per_doctype: BTreeMap<DocType, DocTypeFrequencies>,
    pub include_abstain: bool,
    /// Document types without examples; their fractions are undefined.
    pub empty_doctypes: Vec<DocType>,
}

impl CaseFrequencyTable {
    pub fn get(&self, doctype: DocType) -> &DocTypeFrequencies {
        &self.per_doctype[&doctype]
    }

    pub fn fractions(&self, doctype: DocType) -> Option<Distribution> {
        self.get(doctype).fractions()
    }

    /// Builds a table from a case prediction set whose rows all carry a
    /// document type, counting the predicted case of each row.
    pub fn from_predictions(set: &PredictionSet, include_abstain: bool) -> Result<Self> {
        if set.task != Task::Case {
            return Err(Error::Invalid("case frequencies need case predictions".into()));
        }
        let tagged = set
            .rows()
            .iter()
            .map(|r| {
                let d = r.doctype.ok_or_else(|| {
                    Error::Invalid(format!("example `{}` has no document type", r.example_id))
                })?;
                Ok((d, CaseId::new(r.predicted)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(case_frequencies(&tagged, include_abstain))
    }
}

/// Tallies case labels per document type. Abstain is dropped before
/// counting when `include_abstain` is false, so fractions renormalize over
/// the remaining cases.
pub fn case_frequencies(tagged: &[(DocType, CaseId)], include_abstain: bool) -> CaseFrequencyTable {
    let mut per_doctype: BTreeMap<DocType, DocTypeFrequencies> = DocType::ALL
        .iter()
        .map(|&d| (d, DocTypeFrequencies::default()))
        .collect();
    for &(d, c) in tagged {
        if !include_abstain && c.is_abstain() {
            continue;
        }
        let entry = per_doctype.get_mut(&d).expect("all doc types present");
        *entry.counts.entry(c.index()).or_default() += 1;
        entry.total += 1;
    }
    let empty_doctypes = per_doctype
        .iter()
        .filter(|(_, f)| f.total == 0)
        .map(|(&d, _)| d)
        .collect();
    CaseFrequencyTable {
        per_doctype,
        include_abstain,
        empty_doctypes,
    }
}
