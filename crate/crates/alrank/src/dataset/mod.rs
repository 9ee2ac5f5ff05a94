//! Corpus model and pool bookkeeping.
//!
//! A [`Corpus`] holds graded documents grouped by query. Every query
//! carries a difficulty bucket `0..=9` (bucket 0 easiest, 9 hardest) used
//! by selection analyses. Labels are integer grades `0..=4`.
//!
//! [`PoolState`] partitions a corpus's query ids into labeled and
//! unlabeled sets for the active learning loop; the ground-truth labels
//! stay in the corpus and are only consulted when a query is annotated.

mod letor;
mod synth;

pub use letor::{parse_letor, parse_letor_with_stats, serialize_letor, ParseStats};
pub use synth::{gen_synthetic, BucketLabelProfile, SynthConfig};

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Highest admissible relevance grade.
pub const MAX_LABEL: u8 = 4;

/// Number of difficulty buckets; bucket ids are `0..NUM_BUCKETS`.
pub const NUM_BUCKETS: usize = 10;

/// Bucket assumed when input data carries no bucket annotation.
pub const DEFAULT_BUCKET: u8 = 9;

/// One judged document: a dense feature vector plus a relevance grade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    /// Position of the document inside its query group (0-based).
    pub doc_id: u32,
    /// Relevance grade in `0..=MAX_LABEL`.
    pub label: u8,
    /// Dense feature vector; length equals the corpus feature dimension.
    pub features: Vec<f64>,
}

/// All documents judged for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGroup {
    pub query_id: u32,
    /// Difficulty bucket in `0..NUM_BUCKETS`.
    pub bucket: u8,
    pub docs: Vec<Document>,
}

impl QueryGroup {
    /// Labels in document order.
    pub fn labels(&self) -> Vec<u8> {
        self.docs.iter().map(|d| d.label).collect()
    }
}

/// Where a corpus came from; informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    File,
}

/// A collection of query groups sharing one feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub feature_dim: usize,
    pub queries: Vec<QueryGroup>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Total document count across all queries.
    pub fn num_docs(&self) -> usize {
        self.queries.iter().map(|q| q.docs.len()).sum()
    }

    /// Query ids in corpus order.
    pub fn query_ids(&self) -> Vec<u32> {
        self.queries.iter().map(|q| q.query_id).collect()
    }

    /// Checks every structural invariant: unique query ids, non-empty
    /// groups, positional doc ids, grades and buckets in range, and finite
    /// feature vectors of the declared dimension.
    pub fn validate(&self) -> Result<()> {
        if self.queries.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut seen = BTreeSet::new();
        for group in &self.queries {
            if !seen.insert(group.query_id) {
                return Err(Error::Malformed {
                    line: 0,
                    reason: format!("duplicate query id {}", group.query_id),
                });
            }
            if group.docs.is_empty() {
                return Err(Error::Malformed {
                    line: 0,
                    reason: format!("query {} has no documents", group.query_id),
                });
            }
            if group.bucket as usize >= NUM_BUCKETS {
                return Err(Error::Malformed {
                    line: 0,
                    reason: format!(
                        "query {} has bucket {} out of range",
                        group.query_id, group.bucket
                    ),
                });
            }
            for (i, doc) in group.docs.iter().enumerate() {
                if doc.doc_id != i as u32 {
                    return Err(Error::Malformed {
                        line: 0,
                        reason: format!("query {} doc ids are not positional", group.query_id),
                    });
                }
                if doc.label > MAX_LABEL {
                    return Err(Error::Malformed {
                        line: 0,
                        reason: format!(
                            "query {} doc {} has label {} above {MAX_LABEL}",
                            group.query_id, doc.doc_id, doc.label
                        ),
                    });
                }
                if doc.features.len() != self.feature_dim {
                    return Err(Error::DimMismatch {
                        expected: self.feature_dim,
                        got: doc.features.len(),
                    });
                }
                if doc.features.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Malformed {
                        line: 0,
                        reason: format!(
                            "query {} doc {} has a non-finite feature",
                            group.query_id, doc.doc_id
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Disjoint partition of query ids into labeled and unlabeled sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    labeled: BTreeSet<u32>,
    unlabeled: BTreeSet<u32>,
}

impl PoolState {
    /// Builds a pool state, rejecting overlapping sets.
    pub fn new(labeled: BTreeSet<u32>, unlabeled: BTreeSet<u32>) -> Result<Self> {
        if let Some(&qid) = labeled.intersection(&unlabeled).next() {
            return Err(Error::BadAnnotation {
                query_id: qid,
                reason: "query appears in both labeled and unlabeled sets".into(),
            });
        }
        Ok(PoolState { labeled, unlabeled })
    }

    pub fn labeled(&self) -> &BTreeSet<u32> {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &BTreeSet<u32> {
        &self.unlabeled
    }

    pub fn is_labeled(&self, query_id: u32) -> bool {
        self.labeled.contains(&query_id)
    }
}

/// Seeded split of a corpus into an initial labeled set of `base_size`
/// queries and an unlabeled remainder.
///
/// Requires `0 < base_size < corpus.queries.len()` so both sides are
/// non-empty. Deterministic in `(corpus, base_size, seed)`.
pub fn split_pool(corpus: &Corpus, base_size: usize, seed: u64) -> Result<PoolState> {
    let n = corpus.queries.len();
    if base_size == 0 || base_size >= n {
        return Err(Error::InvalidConfig(format!(
            "base_size must satisfy 0 < base_size < {n}, got {base_size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n, base_size)
        .into_iter()
        .collect();
    let mut labeled = BTreeSet::new();
    let mut unlabeled = BTreeSet::new();
    for (i, group) in corpus.queries.iter().enumerate() {
        if chosen.contains(&i) {
            labeled.insert(group.query_id);
        } else {
            unlabeled.insert(group.query_id);
        }
    }
    PoolState::new(labeled, unlabeled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(doc_id: u32, label: u8, features: Vec<f64>) -> Document {
        Document {
            doc_id,
            label,
            features,
        }
    }

    fn tiny_corpus(num_queries: usize) -> Corpus {
        let queries = (0..num_queries)
            .map(|q| QueryGroup {
                query_id: (q + 1) as u32,
                bucket: (q % 10) as u8,
                docs: vec![
                    doc(0, 0, vec![0.0, 1.0]),
                    doc(1, (q % 5) as u8, vec![1.0, 0.5]),
                ],
            })
            .collect();
        Corpus {
            feature_dim: 2,
            queries,
            provenance: Provenance::Synthetic,
        }
    }

    #[test]
    fn validate_accepts_well_formed_corpus() {
        tiny_corpus(12).validate().unwrap();
    }

    #[test]
    fn validate_rejects_duplicate_query_ids() {
        let mut corpus = tiny_corpus(3);
        corpus.queries[2].query_id = corpus.queries[0].query_id;
        assert!(matches!(corpus.validate(), Err(Error::Malformed { .. })));
    }

    #[test]
    fn validate_rejects_bad_dimension() {
        let mut corpus = tiny_corpus(3);
        corpus.queries[1].docs[0].features.push(2.0);
        assert!(matches!(corpus.validate(), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn validate_rejects_non_finite_features() {
        let mut corpus = tiny_corpus(3);
        corpus.queries[0].docs[1].features[0] = f64::NAN;
        assert!(matches!(corpus.validate(), Err(Error::Malformed { .. })));
    }

    #[test]
    fn pool_state_rejects_overlap() {
        let labeled: BTreeSet<u32> = [1, 2].into_iter().collect();
        let unlabeled: BTreeSet<u32> = [2, 3].into_iter().collect();
        assert!(matches!(
            PoolState::new(labeled, unlabeled),
            Err(Error::BadAnnotation { query_id: 2, .. })
        ));
    }

    #[test]
    fn split_pool_partitions_exactly() {
        let corpus = tiny_corpus(50);
        let pool = split_pool(&corpus, 20, 7).unwrap();
        assert_eq!(pool.labeled().len(), 20);
        assert_eq!(pool.unlabeled().len(), 30);
        let mut union: BTreeSet<u32> = pool.labeled().clone();
        union.extend(pool.unlabeled());
        let all: BTreeSet<u32> = corpus.query_ids().into_iter().collect();
        assert_eq!(union, all);
    }

    #[test]
    fn split_pool_is_seed_deterministic() {
        let corpus = tiny_corpus(40);
        let a = split_pool(&corpus, 10, 42).unwrap();
        let b = split_pool(&corpus, 10, 42).unwrap();
        assert_eq!(a, b);
        let c = split_pool(&corpus, 10, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_pool_rejects_degenerate_sizes() {
        let corpus = tiny_corpus(10);
        assert!(split_pool(&corpus, 0, 1).is_err());
        assert!(split_pool(&corpus, 10, 1).is_err());
        assert!(split_pool(&corpus, 11, 1).is_err());
        assert!(split_pool(&corpus, 9, 1).is_ok());
    }
}
