//! Concept overlap between document types: per-type case frequencies, the
//! total-variation loss between two case distributions, dominance regimes,
//! annotator agreement and the encroachment report that joins them.

mod agreement;
mod encroachment;
mod frequencies;
mod regimes;
mod tv;

pub use agreement::{
    agreement_report, cohen_kappa, fleiss_kappa, AgreementReport, AnnotatorLabels, Consensus, Kappa,
    PairKappa,
};
pub use encroachment::{encroachment_report, BucketSummary, EncroachmentEntry, EncroachmentReport};
pub use frequencies::{case_frequencies, CaseFrequencyTable, DocTypeFrequencies};
pub use regimes::{regime_partition, RegimeEntry, RegimeParams, RegimeReport};
pub use tv::{tv_loss, Distribution};
