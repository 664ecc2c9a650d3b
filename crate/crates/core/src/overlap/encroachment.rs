use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AgreementReport, RegimeEntry, RegimeReport};
use crate::corpus::{CaseId, CaseTaxonomy};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncroachmentEntry {
    pub case_id: usize,
    pub description: String,
    pub count_pp: u64,
    pub count_tos: u64,
    pub diff: i64,
    pub privacy_related: bool,
    pub contested_label: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub total: usize,
    pub privacy_related: usize,
    /// Privacy-related cases in the ToS-dominant bucket, or
    /// non-privacy cases in the PP-dominant bucket. Zero for contested.
    pub misplaced: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncroachmentReport {
    pub pp_dominant: Vec<EncroachmentEntry>,
    pub tos_dominant: Vec<EncroachmentEntry>,
    pub contested: Vec<EncroachmentEntry>,
    pub pp_summary: BucketSummary,
    pub tos_summary: BucketSummary,
    pub contested_summary: BucketSummary,
}

/// Marks each regime entry with its consensus privacy-relevance label and
/// counts concepts that sit in the "wrong" document type.
pub fn encroachment_report(
    regimes: &RegimeReport,
    consensus: &AgreementReport,
    taxonomy: &CaseTaxonomy,
) -> Result<EncroachmentReport> {
    let annotate = |bucket: &[RegimeEntry]| -> Result<Vec<EncroachmentEntry>> {
        bucket
            .iter()
            .map(|e| {
                let c = consensus.consensus.get(&e.case_id).ok_or_else(|| {
                    Error::Invalid(format!("case {} missing from consensus labels", e.case_id))
                })?;
                Ok(EncroachmentEntry {
                    case_id: e.case_id,
                    description: taxonomy.description(CaseId::new(e.case_id)?).to_string(),
                    count_pp: e.count_pp,
                    count_tos: e.count_tos,
                    diff: e.diff,
                    privacy_related: c.label == 1,
                    contested_label: c.contested,
                })
            })
            .collect()
    };
    let pp_dominant = annotate(&regimes.pp_dominant)?;
    let tos_dominant = annotate(&regimes.tos_dominant)?;
    let contested = annotate(&regimes.contested)?;

    let related = |b: &[EncroachmentEntry]| b.iter().filter(|e| e.privacy_related).count();
    let pp_related = related(&pp_dominant);
    let tos_related = related(&tos_dominant);
    Ok(EncroachmentReport {
        pp_summary: BucketSummary {
            total: pp_dominant.len(),
            privacy_related: pp_related,
            misplaced: pp_dominant.len() - pp_related,
        },
        tos_summary: BucketSummary {
            total: tos_dominant.len(),
            privacy_related: tos_related,
            misplaced: tos_related,
        },
        contested_summary: BucketSummary {
            total: contested.len(),
            privacy_related: related(&contested),
            misplaced: 0,
        },
        pp_dominant,
        tos_dominant,
        contested,
    })
}

impl EncroachmentReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let sections = [
            ("PP-dominant", &self.pp_dominant, &self.pp_summary),
            ("ToS-dominant", &self.tos_dominant, &self.tos_summary),
            ("Contested", &self.contested, &self.contested_summary),
        ];
        for (title, bucket, summary) in sections {
            let _ = writeln!(
                out,
                "### {title}: {}/{} privacy-related\n",
                summary.privacy_related, summary.total
            );
            if bucket.is_empty() {
                out.push_str("_none_\n\n");
                continue;
            }
            out.push_str("| case | description | PP | ToS | diff | privacy |\n|---:|---|---:|---:|---:|:---:|\n");
            for e in bucket.iter() {
                let mark = match (e.privacy_related, e.contested_label) {
                    (true, _) => "yes",
                    (false, true) => "tie",
                    (false, false) => "",
                };
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:+} | {mark} |",
                    e.case_id, e.description, e.count_pp, e.count_tos, e.diff
                );
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "misplaced: {} non-privacy cases PP-dominant, {} privacy cases ToS-dominant",
            self.pp_summary.misplaced, self.tos_summary.misplaced
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::{agreement_report, AnnotatorLabels, RegimeParams};

    fn entry(case_id: usize, pp: u64, tos: u64) -> RegimeEntry {
        RegimeEntry {
            case_id,
            count_pp: pp,
            count_tos: tos,
            diff: pp as i64 - tos as i64,
        }
    }

    fn consensus(related: &[usize], cases: usize) -> AgreementReport {
        let rows = (0..cases)
            .map(|c| {
                let l = u8::from(related.contains(&c));
                (c, vec![l, l, l, 1 - l])
            })
            .collect();
        agreement_report(&AnnotatorLabels::new((0..4).map(|i| i.to_string()).collect(), rows).unwrap()).unwrap()
    }

    fn regimes(pp: Vec<RegimeEntry>, tos: Vec<RegimeEntry>) -> RegimeReport {
        RegimeReport {
            pp_dominant: pp,
            tos_dominant: tos,
            contested: Vec::new(),
            filtered_out: Vec::new(),
            excluded: Vec::new(),
            params: RegimeParams::default(),
        }
    }

    #[test]
    fn misplacement_tallies() {
        let pp: Vec<RegimeEntry> = (0..7).map(|c| entry(c, 20, 5)).collect();
        let tos: Vec<RegimeEntry> = (7..21).map(|c| entry(c, 3, 20)).collect();
        let related = [0, 1, 2, 3, 7, 8, 9, 10];
        let r = encroachment_report(&regimes(pp, tos), &consensus(&related, 30), &CaseTaxonomy::default()).unwrap();
        assert_eq!(r.pp_summary, BucketSummary { total: 7, privacy_related: 4, misplaced: 3 });
        assert_eq!(r.tos_summary, BucketSummary { total: 14, privacy_related: 4, misplaced: 4 });
        assert!(r.contested.is_empty());
        assert!(r.to_markdown().contains("4/14"));
        assert_eq!(r.pp_dominant[0].description, "Case 0");
    }

    #[test]
    fn missing_case_is_named() {
        let err = encroachment_report(&regimes(vec![entry(40, 9, 3)], vec![]), &consensus(&[], 10), &CaseTaxonomy::default())
            .unwrap_err();
        assert!(err.to_string().contains("40"));
    }
}
