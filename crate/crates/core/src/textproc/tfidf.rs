//! Smoothed TF-IDF over unigram tokens.
//!
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, term weights are raw counts
//! times idf, and vectors are L2-normalized.

use std::collections::HashMap;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::error::{Error, Result};

pub const TFIDF_FORMAT_VERSION: u32 = 1;
const TFIDF_KIND: &str = "tfidf";

const STOP_WORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "have", "in", "is",
    "it", "its", "of", "on", "or", "that", "the", "this", "to", "was", "were", "will", "with",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfidfConfig {
    pub lowercase: bool,
    pub token_pattern: String,
    /// Terms appearing in fewer documents are dropped.
    pub min_df: usize,
    /// Keep at most this many terms, preferring higher document frequency.
    pub max_features: Option<usize>,
    pub remove_stop_words: bool,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            lowercase: true,
            token_pattern: "[a-z0-9]+".to_string(),
            min_df: 2,
            max_features: Some(50_000),
            remove_stop_words: false,
        }
    }
}

#[derive(Clone, Debug)]
struct Tokenizer {
    lowercase: bool,
    pattern: Regex,
    remove_stop_words: bool,
}

impl Tokenizer {
    fn new(config: &TfidfConfig) -> Result<Self> {
        let pattern = Regex::new(&config.token_pattern)
            .map_err(|e| Error::Config(format!("token_pattern: {e}")))?;
        Ok(Tokenizer {
            lowercase: config.lowercase,
            pattern,
            remove_stop_words: config.remove_stop_words,
        })
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        let owned;
        let text = if self.lowercase {
            owned = text.to_lowercase();
            owned.as_str()
        } else {
            text
        };
        self.pattern
            .find_iter(text)
            .map(|m| m.as_str())
            .filter(|t| !t.is_empty())
            .filter(|t| !(self.remove_stop_words && STOP_WORDS.contains(t)))
            .map(str::to_string)
            .collect()
    }
}

/// Vocabulary entry as persisted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    pub term: String,
    pub index: u32,
    pub df: u32,
}

/// Term to (index, document frequency) map; indices are contiguous from 0
/// and follow lexicographic term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    index: HashMap<String, u32>,
    total_documents: usize,
}

impl Vocabulary {
    fn from_entries(mut entries: Vec<TermEntry>, total_documents: usize) -> Result<Self> {
        entries.sort_by_key(|e| e.index);
        let mut index = HashMap::with_capacity(entries.len());
        for (expected, e) in entries.iter().enumerate() {
            if e.index as usize != expected {
                return Err(Error::Format {
                    what: "vocabulary",
                    message: format!("indices not contiguous at {expected}"),
                });
            }
            if e.df == 0 || e.df as usize > total_documents {
                return Err(Error::Format {
                    what: "vocabulary",
                    message: format!("df {} of `{}` outside [1, {total_documents}]", e.df, e.term),
                });
            }
            if index.insert(e.term.clone(), e.index).is_some() {
                return Err(Error::Format {
                    what: "vocabulary",
                    message: format!("duplicate term `{}`", e.term),
                });
            }
        }
        let (terms, df) = entries.into_iter().map(|e| (e.term, e.df)).unzip();
        Ok(Vocabulary {
            terms,
            df,
            index,
            total_documents,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_documents(&self) -> usize {
        self.total_documents
    }

    /// Index and document frequency of a term.
    pub fn get(&self, term: &str) -> Option<(u32, u32)> {
        self.index.get(term).map(|&i| (i, self.df[i as usize]))
    }

    pub fn term(&self, index: u32) -> &str {
        &self.terms[index as usize]
    }

    pub fn entries(&self) -> impl Iterator<Item = TermEntry> + '_ {
        self.terms.iter().zip(&self.df).enumerate().map(|(i, (t, &df))| TermEntry {
            term: t.clone(),
            index: i as u32,
            df,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TfidfModel {
    config: TfidfConfig,
    vocabulary: Vocabulary,
    idf: Vec<f64>,
    tokenizer: Tokenizer,
}

impl PartialEq for TfidfModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.vocabulary == other.vocabulary
    }
}

fn smoothed_idf(total_documents: usize, df: u32) -> f64 {
    ((1.0 + total_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

pub fn fit_tfidf<S: AsRef<str>>(documents: &[S], config: &TfidfConfig) -> Result<TfidfModel> {
    if documents.iter().all(|d| d.as_ref().trim().is_empty()) {
        return Err(Error::Fit("empty corpus".into()));
    }
    let tokenizer = Tokenizer::new(config)?;
    let mut df: HashMap<String, u32> = HashMap::new();
    for doc in documents {
        let mut tokens = tokenizer.tokens(doc.as_ref());
        tokens.sort_unstable();
        tokens.dedup();
        for t in tokens {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, u32)> = df
        .into_iter()
        .filter(|(_, n)| *n as usize >= config.min_df)
        .collect();
    if kept.is_empty() {
        return Err(Error::Fit(format!(
            "no term reaches min_df = {}",
            config.min_df
        )));
    }
    if let Some(cap) = config.max_features {
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(cap);
    }
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    let entries = kept
        .into_iter()
        .enumerate()
        .map(|(i, (term, df))| TermEntry {
            term,
            index: i as u32,
            df,
        })
        .collect();
    let vocabulary = Vocabulary::from_entries(entries, documents.len())?;
    Ok(TfidfModel::assemble(config.clone(), vocabulary, tokenizer))
}

#[derive(Serialize, Deserialize)]
struct TfidfFile {
    kind: String,
    format_version: u32,
    config: TfidfConfig,
    total_documents: usize,
    terms: Vec<TermEntry>,
}

impl TfidfModel {
    fn assemble(config: TfidfConfig, vocabulary: Vocabulary, tokenizer: Tokenizer) -> Self {
        let n = vocabulary.total_documents;
        let idf = vocabulary.df.iter().map(|&d| smoothed_idf(n, d)).collect();
        TfidfModel {
            config,
            vocabulary,
            idf,
            tokenizer,
        }
    }

    pub fn config(&self) -> &TfidfConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocabulary.get(term).map(|(i, _)| self.idf[i as usize])
    }

    /// Raw-count times idf, L2-normalized. Unknown terms are ignored.
    pub fn transform(&self, document: &str) -> SparseVector {
        let mut weights = self.raw_weights(document);
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut weights {
                *w /= norm;
            }
        }
        SparseVector::new(self.dim(), weights).expect("indices sorted and in range")
    }

    /// Weights before normalization, sorted by index.
    pub fn raw_weights(&self, document: &str) -> Vec<(u32, f64)> {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for t in self.tokenizer.tokens(document) {
            if let Some((i, _)) = self.vocabulary.get(&t) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let mut weights: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(i, c)| (i, c as f64 * self.idf[i as usize]))
            .collect();
        weights.sort_by_key(|&(i, _)| i);
        weights
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TfidfFile {
            kind: TFIDF_KIND.to_string(),
            format_version: TFIDF_FORMAT_VERSION,
            config: self.config.clone(),
            total_documents: self.vocabulary.total_documents,
            terms: self.vocabulary.entries().collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TfidfFile = serde_json::from_str(text)?;
        if file.kind != TFIDF_KIND {
            return Err(Error::WrongMagic {
                expected: TFIDF_KIND,
                found: file.kind,
            });
        }
        if file.format_version != TFIDF_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: file.format_version,
                supported: TFIDF_FORMAT_VERSION,
            });
        }
        let tokenizer = Tokenizer::new(&file.config)?;
        let vocabulary = Vocabulary::from_entries(file.terms, file.total_documents)?;
        Ok(TfidfModel::assemble(file.config, vocabulary, tokenizer))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TfidfModel::from_json(&text)
    }
}

impl Serialize for TfidfModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TfidfFile {
            kind: TFIDF_KIND.to_string(),
            format_version: TFIDF_FORMAT_VERSION,
            config: self.config.clone(),
            total_documents: self.vocabulary.total_documents,
            terms: self.vocabulary.entries().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TfidfModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        TfidfModel::from_json(&value.to_string()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(min_df: usize) -> TfidfConfig {
        TfidfConfig {
            min_df,
            ..TfidfConfig::default()
        }
    }

    #[test]
    fn smoothed_idf_by_hand() {
        let m = fit_tfidf(&["a b", "a c"], &cfg(1)).unwrap();
        assert_eq!(m.vocabulary().get("a"), Some((0, 2)));
        assert_eq!(m.vocabulary().get("b"), Some((1, 1)));
        assert_eq!(m.idf("a"), Some(1.0));
        // ln(3/2) + 1
        assert!((m.idf("b").unwrap() - 1.405_465_108_108_164_4).abs() < 1e-15);
    }

    #[test]
    fn min_df_filters() {
        let m = fit_tfidf(&["a b", "a c"], &cfg(2)).unwrap();
        assert_eq!(m.dim(), 1);
        assert!(m.vocabulary().get("a").is_some());
    }

    #[test]
    fn transform_by_hand() {
        let m = fit_tfidf(&["a b", "a c"], &cfg(1)).unwrap();
        let raw = m.raw_weights("a a b");
        assert_eq!(raw[0], (0, 2.0));
        assert!((raw[1].1 - 1.405_465_108_108_164_4).abs() < 1e-15);
        let v = m.transform("a a b");
        let norm = (4.0f64 + 1.405_465_108_108_164_4f64.powi(2)).sqrt();
        assert!((v.get(0) - 2.0 / norm).abs() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_vocabulary_is_empty() {
        let m = fit_tfidf(&["a b", "a c"], &cfg(1)).unwrap();
        assert!(m.transform("zzz qqq").is_empty());
        assert_eq!(m.transform("b a"), m.transform("a b"));
    }

    #[test]
    fn fit_errors() {
        let empty: [&str; 0] = [];
        assert!(matches!(fit_tfidf(&empty, &cfg(1)), Err(Error::Fit(_))));
        assert!(matches!(fit_tfidf(&["", "  "], &cfg(1)), Err(Error::Fit(_))));
        assert!(matches!(fit_tfidf(&["a", "b"], &cfg(2)), Err(Error::Fit(_))));
    }

    #[test]
    fn max_features_prefers_frequent_then_lexicographic() {
        let docs = ["z y x", "z y w", "z v"];
        let m = fit_tfidf(
            &docs,
            &TfidfConfig {
                min_df: 1,
                max_features: Some(3),
                ..TfidfConfig::default()
            },
        )
        .unwrap();
        // z (3), y (2), then v/w/x tie at 1 -> v.
        let terms: Vec<String> = m.vocabulary().entries().map(|e| e.term).collect();
        assert_eq!(terms, vec!["v", "y", "z"]);
    }

    #[test]
    fn stop_words_flag() {
        let c = TfidfConfig {
            min_df: 1,
            remove_stop_words: true,
            ..TfidfConfig::default()
        };
        let m = fit_tfidf(&["the cat", "a dog"], &c).unwrap();
        assert_eq!(m.dim(), 2);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = fit_tfidf(&["we share data", "we sell data", "cookies track you"], &cfg(1)).unwrap();
        let back = TfidfModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.transform("we share cookies"), m.transform("we share cookies"));
    }

    #[test]
    fn wrong_kind_and_version() {
        let m = fit_tfidf(&["a b", "a c"], &cfg(1)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["format_version"] = 99.into();
        assert!(matches!(
            TfidfModel::from_json(&v.to_string()),
            Err(Error::VersionMismatch { .. })
        ));
        v["kind"] = "svm".into();
        assert!(matches!(TfidfModel::from_json(&v.to_string()), Err(Error::WrongMagic { .. })));
    }

    proptest! {
        #[test]
        fn unit_norm_and_order_invariance(
            corpus in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!["a","b","c","d","e"]), 1..6), 1..8),
            doc in prop::collection::vec(prop::sample::select(vec!["a","b","c","d","e","zz"]), 0..10),
        ) {
            let docs: Vec<String> = corpus.iter().map(|d| d.join(" ")).collect();
            let m = fit_tfidf(&docs, &cfg(1)).unwrap();
            let again = fit_tfidf(&docs, &cfg(1)).unwrap();
            prop_assert_eq!(&m, &again);
            let v = m.transform(&doc.join(" "));
            prop_assert!(v.is_empty() || (v.norm() - 1.0).abs() < 1e-9);
            prop_assert!(v.entries().iter().all(|&(_, w)| w >= 0.0));
            let mut rev = doc.clone();
            rev.reverse();
            prop_assert_eq!(m.transform(&rev.join(" ")), v);
        }
    }
}
