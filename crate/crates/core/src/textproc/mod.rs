//! Text cleaning, sentence splitting and TF-IDF features.

mod clean;
mod sentences;
mod tfidf;
mod vector;

pub use clean::{clean_text, CleanText};
pub use sentences::{count_tokens, split_sentences, SentenceConfig};
pub use tfidf::{fit_tfidf, TermEntry, TfidfConfig, TfidfModel, Vocabulary, TFIDF_FORMAT_VERSION};
pub use vector::SparseVector;
