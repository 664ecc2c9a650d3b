//! Concept-overlap analysis for privacy policies and terms of service.
//!
//! The crate covers the whole pipeline: curating annotated sentences
//! ([`corpus`]), text cleaning and TF-IDF features ([`textproc`]), a linear
//! SVM and a random forest ([`models`]), classification metrics ([`eval`]),
//! and the overlap measures between document types ([`overlap`]).
//!
//! ```
//! use policy_overlap::overlap::{tv_loss, Distribution};
//!
//! let pp = Distribution::from_pairs([(1, 0.5), (2, 0.5)]);
//! let tos = Distribution::from_pairs([(2, 0.5), (3, 0.5)]);
//! assert_eq!(tv_loss(&pp, &tos).unwrap(), 0.5);
//! ```

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod models;
pub mod overlap;
pub mod pipeline;
pub mod rng;
pub mod textproc;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/text.md")]
    mod text {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/distribution_loss.md")]
    mod distribution_loss {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    mod regimes {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
