use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chance-corrected agreement between two label sequences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    /// Observed agreement fraction.
    pub observed: f64,
    /// Agreement expected from the marginals.
    pub expected: f64,
    /// Set when expected agreement is 1 and the ratio is undefined.
    pub degenerate: bool,
}

/// Cohen's kappa `(p_o - p_e) / (1 - p_e)`.
///
/// When `p_e = 1` (both raters constant on the same label) the value is 1
/// if `p_o = 1`, else 0, and the result is marked degenerate.
pub fn cohen_kappa(a: &[u8], b: &[u8]) -> Result<Kappa> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!(
            "label lists differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Empty("kappa needs at least one item".into()));
    }
    let n = a.len() as u64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as u64;
    let mut marg_a: BTreeMap<u8, u64> = BTreeMap::new();
    let mut marg_b: BTreeMap<u8, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *marg_a.entry(x).or_default() += 1;
        *marg_b.entry(y).or_default() += 1;
    }
    // Integer numerators over n^2 keep the degenerate test exact.
    let chance: u64 = marg_a
        .iter()
        .map(|(k, ca)| ca * marg_b.get(k).copied().unwrap_or(0))
        .sum();
    let n2 = n * n;
    let observed = agree as f64 / n as f64;
    let expected = chance as f64 / n2 as f64;
    if chance == n2 {
        return Ok(Kappa {
            value: if agree == n { 1.0 } else { 0.0 },
            observed,
            expected,
            degenerate: true,
        });
    }
    let value = (n as f64 * agree as f64 - chance as f64) / (n2 - chance) as f64;
    Ok(Kappa {
        value,
        observed,
        expected,
        degenerate: false,
    })
}

/// Binary privacy-relevance labels, one row per case and one column per
/// annotator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatorLabels {
    annotators: Vec<String>,
    rows: Vec<(usize, Vec<u8>)>,
}

impl AnnotatorLabels {
    pub fn new(annotators: Vec<String>, rows: Vec<(usize, Vec<u8>)>) -> Result<Self> {
        let k = annotators.len();
        let mut seen = std::collections::HashSet::new();
        for (case, labels) in &rows {
            if labels.len() != k {
                return Err(Error::Invalid(format!(
                    "case {case}: expected {k} labels, found {}",
                    labels.len()
                )));
            }
            if let Some(bad) = labels.iter().find(|&&l| l > 1) {
                return Err(Error::Invalid(format!("case {case}: label {bad} is not 0 or 1")));
            }
            if !seen.insert(*case) {
                return Err(Error::Invalid(format!("case {case} listed twice")));
            }
        }
        Ok(AnnotatorLabels { annotators, rows })
    }

    /// Reads `case_id,annotator_1,...,annotator_k`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::MissingColumn {
                column: "annotator_1".into(),
            });
        }
        let annotators = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = i as u64 + 2;
            let parse = |s: &str| -> Result<usize> {
                s.trim().parse::<usize>().map_err(|_| Error::Row {
                    line,
                    message: format!("`{s}` is not an integer"),
                })
            };
            let case = parse(&rec[0])?;
            let labels = rec
                .iter()
                .skip(1)
                .map(|s| parse(s).map(|v| v.min(u8::MAX as usize) as u8))
                .collect::<Result<Vec<u8>>>()?;
            rows.push((case, labels));
        }
        AnnotatorLabels::new(annotators, rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AnnotatorLabels::from_csv(&text)
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn rows(&self) -> &[(usize, Vec<u8>)] {
        &self.rows
    }

    pub fn column(&self, annotator: usize) -> Vec<u8> {
        self.rows.iter().map(|(_, l)| l[annotator]).collect()
    }

    pub fn total_labels(&self) -> usize {
        self.rows.len() * self.annotators.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub first: usize,
    pub second: usize,
    pub kappa: Kappa,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Consensus {
    /// 1 = privacy-related.
    pub label: u8,
    pub votes_for: usize,
    pub votes_against: usize,
    /// Even split, resolved to 0.
    pub contested: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub annotators: Vec<String>,
    pub cases: usize,
    pub total_labels: usize,
    pub pairwise: Vec<PairKappa>,
    /// `matrix[i][j]` is the kappa between annotators i and j; the diagonal
    /// is `None`.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub mean_pairwise_kappa: f64,
    pub fleiss_kappa: Kappa,
    pub consensus: BTreeMap<usize, Consensus>,
}

/// Fleiss' kappa for a fixed number of raters per item.
pub fn fleiss_kappa(labels: &AnnotatorLabels) -> Result<Kappa> {
    let n = labels.annotators.len();
    let items = labels.rows.len();
    if n < 2 || items == 0 {
        return Err(Error::Invalid("fleiss kappa needs two raters and one item".into()));
    }
    let mut totals = [0u64; 2];
    let mut agreement = 0.0;
    for (_, row) in &labels.rows {
        let ones = row.iter().filter(|&&l| l == 1).count() as u64;
        let counts = [n as u64 - ones, ones];
        totals[0] += counts[0];
        totals[1] += counts[1];
        let sq: u64 = counts.iter().map(|c| c * c).sum();
        agreement += (sq - n as u64) as f64 / (n * (n - 1)) as f64;
    }
    let observed = agreement / items as f64;
    let all = (items * n) as f64;
    let expected: f64 = totals.iter().map(|&t| (t as f64 / all).powi(2)).sum();
    let degenerate = totals.iter().any(|&t| t as f64 == all);
    let value = if degenerate {
        if observed == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (observed - expected) / (1.0 - expected)
    };
    Ok(Kappa {
        value,
        observed,
        expected,
        degenerate,
    })
}

pub fn agreement_report(labels: &AnnotatorLabels) -> Result<AgreementReport> {
    let k = labels.annotators.len();
    if k < 2 {
        return Err(Error::Invalid(format!("need at least 2 annotators, found {k}")));
    }
    let columns: Vec<Vec<u8>> = (0..k).map(|a| labels.column(a)).collect();
    let mut pairwise = Vec::new();
    let mut matrix = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let kappa = cohen_kappa(&columns[i], &columns[j])?;
            matrix[i][j] = Some(kappa.value);
            matrix[j][i] = Some(kappa.value);
            pairwise.push(PairKappa {
                first: i,
                second: j,
                kappa,
            });
        }
    }
    let mean_pairwise_kappa =
        pairwise.iter().map(|p| p.kappa.value).sum::<f64>() / pairwise.len() as f64;
    let consensus = labels
        .rows
        .iter()
        .map(|(case, row)| {
            let votes_for = row.iter().filter(|&&l| l == 1).count();
            let votes_against = row.len() - votes_for;
            let label = u8::from(votes_for > votes_against);
            (
                *case,
                Consensus {
                    label,
                    votes_for,
                    votes_against,
                    contested: votes_for == votes_against,
                },
            )
        })
        .collect();
    Ok(AgreementReport {
        annotators: labels.annotators.clone(),
        cases: labels.rows.len(),
        total_labels: labels.total_labels(),
        pairwise,
        matrix,
        mean_pairwise_kappa,
        fleiss_kappa: fleiss_kappa(labels)?,
        consensus,
    })
}

impl AgreementReport {
    pub fn privacy_related(&self, case: usize) -> Option<bool> {
        self.consensus.get(&case).map(|c| c.label == 1)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} cases × {} annotators = {} labels\n",
            self.cases,
            self.annotators.len(),
            self.total_labels
        );
        out.push_str("| pair | kappa | observed | expected | degenerate |\n|---|---:|---:|---:|---|\n");
        for p in &self.pairwise {
            let _ = writeln!(
                out,
                "| {} / {} | {:.4} | {:.4} | {:.4} | {} |",
                self.annotators[p.first],
                self.annotators[p.second],
                p.kappa.value,
                p.kappa.observed,
                p.kappa.expected,
                if p.kappa.degenerate { "yes" } else { "" }
            );
        }
        let related = self.consensus.values().filter(|c| c.label == 1).count();
        let contested = self.consensus.values().filter(|c| c.contested).count();
        let _ = writeln!(
            out,
            "\nmean pairwise kappa {:.4} · Fleiss kappa {:.4} · {related} privacy-related · {contested} contested",
            self.mean_pairwise_kappa, self.fleiss_kappa.value
        );
        out
    }
}
