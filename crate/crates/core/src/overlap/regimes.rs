use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::CaseFrequencyTable;
use crate::corpus::DocType;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeParams {
    /// Minimum count required in both document types.
    pub min_count: u64,
    /// Count differences with magnitude at most `band` are contested.
    pub band: u64,
    pub exclusions: BTreeSet<usize>,
}

impl Default for RegimeParams {
    fn default() -> Self {
        RegimeParams {
            min_count: 3,
            band: 5,
            exclusions: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeEntry {
    pub case_id: usize,
    pub count_pp: u64,
    pub count_tos: u64,
    /// `count_pp - count_tos`.
    pub diff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub pp_dominant: Vec<RegimeEntry>,
    pub tos_dominant: Vec<RegimeEntry>,
    pub contested: Vec<RegimeEntry>,
    /// Cases below `min_count` in either document type.
    pub filtered_out: Vec<RegimeEntry>,
    /// Cases removed by the exclusion list.
    pub excluded: Vec<usize>,
    pub params: RegimeParams,
}

/// Buckets cases seen in privacy policies or terms of service by the raw
/// count difference between the two.
pub fn regime_partition(table: &CaseFrequencyTable, params: &RegimeParams) -> RegimeReport {
    let pp = table.get(DocType::PrivacyPolicy);
    let tos = table.get(DocType::TermsOfService);
    let cases: BTreeSet<usize> = pp.counts.keys().chain(tos.counts.keys()).copied().collect();

    let mut report = RegimeReport {
        pp_dominant: Vec::new(),
        tos_dominant: Vec::new(),
        contested: Vec::new(),
        filtered_out: Vec::new(),
        excluded: Vec::new(),
        params: params.clone(),
    };
    let band = params.band as i64;
    for case_id in cases {
        if params.exclusions.contains(&case_id) {
            report.excluded.push(case_id);
            continue;
        }
        let entry = RegimeEntry {
            case_id,
            count_pp: pp.count(case_id),
            count_tos: tos.count(case_id),
            diff: pp.count(case_id) as i64 - tos.count(case_id) as i64,
        };
        if entry.count_pp < params.min_count || entry.count_tos < params.min_count {
            report.filtered_out.push(entry);
        } else if entry.diff > band {
            report.pp_dominant.push(entry);
        } else if entry.diff < -band {
            report.tos_dominant.push(entry);
        } else {
            report.contested.push(entry);
        }
    }
    for bucket in [
        &mut report.pp_dominant,
        &mut report.tos_dominant,
        &mut report.contested,
    ] {
        bucket.sort_by(|a, b| {
            b.diff
                .unsigned_abs()
                .cmp(&a.diff.unsigned_abs())
                .then(a.case_id.cmp(&b.case_id))
        });
    }
    report
}

impl RegimeReport {
    pub fn to_markdown(&self, describe: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        let sections = [
            ("PP-dominant", &self.pp_dominant),
            ("ToS-dominant", &self.tos_dominant),
            ("Contested", &self.contested),
        ];
        for (title, bucket) in sections {
            let _ = writeln!(out, "### {title} ({})\n", bucket.len());
            if bucket.is_empty() {
                out.push_str("_none_\n\n");
                continue;
            }
            out.push_str("| case | description | PP | ToS | diff |\n|---:|---|---:|---:|---:|\n");
            for e in bucket {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:+} |",
                    e.case_id,
                    describe(e.case_id),
                    e.count_pp,
                    e.count_tos,
                    e.diff
                );
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "min count {} · band ±{} · {} filtered · {} excluded",
            self.params.min_count,
            self.params.band,
            self.filtered_out.len(),
            self.excluded.len()
        );
        out
    }
}
