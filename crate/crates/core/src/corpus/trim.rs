use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{AnnotationRecord, Status};

/// Which trimming rules run. Rules apply in field order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrimPolicy {
    /// When `Some`, only records whose status is listed survive.
    pub status_allowlist: Option<Vec<Status>>,
    pub drop_empty: bool,
    /// Exact duplicates on (description, title, case).
    pub dedup: bool,
}

impl Default for TrimPolicy {
    fn default() -> Self {
        TrimPolicy {
            status_allowlist: Some(vec![Status::Accepted]),
            drop_empty: true,
            dedup: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimReport {
    pub input: usize,
    pub dropped_status: usize,
    pub dropped_empty: usize,
    pub dropped_duplicate: usize,
    pub output: usize,
}

pub fn trim_records(
    records: Vec<AnnotationRecord>,
    policy: &TrimPolicy,
) -> (Vec<AnnotationRecord>, TrimReport) {
    let mut report = TrimReport {
        input: records.len(),
        ..TrimReport::default()
    };
    let mut seen: HashSet<(String, String, u16)> = HashSet::new();
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        if let Some(allow) = &policy.status_allowlist {
            if !allow.contains(&r.status) {
                report.dropped_status += 1;
                continue;
            }
        }
        if policy.drop_empty && r.description.trim().is_empty() {
            report.dropped_empty += 1;
            continue;
        }
        if policy.dedup {
            let key = (r.description.clone(), r.doc_type_raw.clone(), r.case_id.into());
            if !seen.insert(key) {
                report.dropped_duplicate += 1;
                continue;
            }
        }
        kept.push(r);
    }
    report.output = kept.len();
    (kept, report)
}
