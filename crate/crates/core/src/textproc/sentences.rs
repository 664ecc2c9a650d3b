use serde::{Deserialize, Serialize};

use super::CleanText;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SentenceConfig {
    /// Lowercase abbreviations without their final period (`"e.g"`).
    pub abbreviations: Vec<String>,
    /// Sentences with fewer tokens are dropped. Words and individual
    /// punctuation marks each count as one token.
    pub min_tokens: usize,
}

impl Default for SentenceConfig {
    fn default() -> Self {
        let abbreviations = [
            "e.g", "i.e", "etc", "no", "vs", "cf", "al", "approx", "inc", "ltd", "co", "corp",
            "mr", "mrs", "ms", "dr", "st", "jr", "sr", "art", "sec", "para", "fig", "u.s",
        ];
        SentenceConfig {
            abbreviations: abbreviations.iter().map(|s| s.to_string()).collect(),
            min_tokens: 3,
        }
    }
}

/// Counts alphanumeric runs plus every other non-space character.
pub fn count_tokens(text: &str) -> usize {
    let mut n = 0;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            if !in_word {
                n += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                n += 1;
            }
        }
    }
    n
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']')
}

/// The word that a period at byte `dot` terminates, lowercased, without
/// leading opening punctuation.
fn word_before(text: &str, dot: usize) -> String {
    let start = text[..dot]
        .rfind(char::is_whitespace)
        .map_or(0, |p| p + 1);
    text[start..dot]
        .trim_start_matches(['(', '[', '"', '\''])
        .to_ascii_lowercase()
}

/// Rule-based sentence splitter.
///
/// Breaks after `.`, `!`, `?` or `;` (optionally followed by closing quotes
/// or brackets) when whitespace or the end of text follows. A period does
/// not break after a configured abbreviation or a single letter.
pub fn split_sentences(text: &CleanText, config: &SentenceConfig) -> Vec<String> {
    let s = text.as_str();
    let bytes = s.as_bytes();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if matches!(c, '.' | '!' | '?' | ';') {
            let mut end = i + 1;
            while end < bytes.len() && is_closer(bytes[end] as char) {
                end += 1;
            }
            let boundary = end == bytes.len() || (bytes[end] as char).is_ascii_whitespace();
            if boundary {
                let suppressed = c == '.' && {
                    let word = word_before(s, i);
                    (word.len() == 1 && word.chars().all(|c| c.is_ascii_alphabetic()))
                        || config.abbreviations.contains(&word)
                };
                if !suppressed {
                    push_sentence(&mut sentences, &s[start..end], config);
                    start = end;
                }
            }
            i = end;
        } else {
            i += 1;
        }
    }
    push_sentence(&mut sentences, &s[start..], config);
    sentences
}

fn push_sentence(out: &mut Vec<String>, piece: &str, config: &SentenceConfig) {
    let piece = piece.trim();
    if !piece.is_empty() && count_tokens(piece) >= config.min_tokens {
        out.push(piece.to_string());
    }
}
