use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CuratedRecord, DocType};

/// Minimum annotations a (service, document type) group needs to be used
/// for training.
pub const DEFAULT_THRESHOLD: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSide {
    Train,
    Test,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub threshold: usize,
    pub groups_train: usize,
    pub groups_test: usize,
    pub records_train: usize,
    pub records_test: usize,
    /// Fraction of annotations that landed in train.
    pub annotation_ratio: f64,
    /// Fraction of (service, document type) groups that landed in train.
    pub document_ratio: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct DatasetSplit {
    pub train: Vec<CuratedRecord>,
    pub test: Vec<CuratedRecord>,
    pub threshold: usize,
    pub report: SplitReport,
}

/// Partitions records by the size of their (service, document type) group:
/// groups with at least `threshold` annotations go to train, the rest to
/// test. Input order is preserved within each side.
pub fn split_by_service(records: &[CuratedRecord], threshold: usize) -> DatasetSplit {
    let mut sizes: HashMap<(&str, DocType), usize> = HashMap::new();
    for r in records {
        *sizes.entry((r.record.service_id.as_str(), r.doctype)).or_default() += 1;
    }

    let mut split = DatasetSplit {
        threshold,
        ..DatasetSplit::default()
    };
    for r in records {
        let size = sizes[&(r.record.service_id.as_str(), r.doctype)];
        let mut out = r.clone();
        if size >= threshold {
            out.split = Some(SplitSide::Train);
            split.train.push(out);
        } else {
            out.split = Some(SplitSide::Test);
            split.test.push(out);
        }
    }

    let groups_train = sizes.values().filter(|&&n| n >= threshold).count();
    let groups_test = sizes.len() - groups_train;
    let mut warnings = Vec::new();
    if records.is_empty() {
        warnings.push("empty input: split is empty".to_string());
    } else if split.train.is_empty() {
        warnings.push(format!("no group reaches the threshold of {threshold}"));
    }
    let ratio = |a: usize, total: usize| if total == 0 { 0.0 } else { a as f64 / total as f64 };
    split.report = SplitReport {
        threshold,
        groups_train,
        groups_test,
        records_train: split.train.len(),
        records_test: split.test.len(),
        annotation_ratio: ratio(split.train.len(), records.len()),
        document_ratio: ratio(groups_train, sizes.len()),
        warnings,
    };
    split
}
