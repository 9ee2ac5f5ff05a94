//! Active learning to rank with query-by-committee acquisition.
//!
//! The crate trains a committee of gradient-boosted pairwise rankers
//! ([`gbrank`]) over a labeled pool, scores every unlabeled query with
//! uncertainty criteria ([`acquisition`]), and simulates annotation rounds
//! that grow the pool under a fixed budget ([`simulator`]).
//!
//! Acquisition criteria:
//!
//! * **Ranking entropy (RE)**: each committee member induces, per document,
//!   a distribution over ranks (a Poisson-binomial over pairwise win
//!   probabilities). The committee-averaged rank distributions are scored
//!   by Shannon entropy; queries whose rankings the committee is least sure
//!   about score highest.
//! * **Prediction variance (PV)**: mean over members of the per-member
//!   score spread across documents. High spread means the member expects
//!   strong relevance contrast inside the query.
//! * **Combined**: `f = RE + alpha * PV` trades exploration against
//!   expected pair yield.
//! * Reference criteria for comparison: label variance (an oracle that
//!   peeks at ground truth), an expected-DCG-loss style committee
//!   disagreement score, and uniform random selection.
//!
//! Everything is deterministic under a fixed seed at any thread count:
//! parallel stages map over indexed slices and collect in order, so thread
//! scheduling never changes results.

pub mod acquisition;
pub mod committee;
pub mod dataset;
mod error;
pub mod gbrank;
pub mod metrics;
mod num;
pub mod simulator;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
