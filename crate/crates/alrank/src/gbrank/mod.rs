//! Gradient-boosted pairwise ranking (GBRank-style).
//!
//! Training pairs come from label preferences inside each query: every
//! document pair with differing grades yields `(winner, loser)`. The model
//! minimizes the mean logistic pairwise loss
//!
//! ```text
//! loss = mean over pairs of -ln sigmoid((s_winner - s_loser) / T)
//! ```
//!
//! by functional gradient boosting: each round fits a regression tree to
//! the per-document gradient of the summed pair losses and adds it with a
//! shrinkage factor. Fitting is entirely deterministic in `(data, config)`.

mod tree;

pub use tree::{Node, RegressionTree};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::QueryGroup;
use crate::num::{sigmoid, softplus};
use crate::{Error, Result};

/// Hyperparameters for one boosted ranker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of boosting rounds; at least 1.
    pub num_trees: usize,
    /// Maximum tree depth in split edges; at least 1.
    pub max_depth: usize,
    /// Step size applied to every tree's output, in `(0, 1]`.
    pub shrinkage: f64,
    /// Minimum documents per leaf; at least 1.
    pub min_samples_leaf: usize,
    /// Scale of the pairwise logistic; shared with the acquisition
    /// criteria so trained margins and win probabilities agree.
    pub temperature: f64,
    /// Reserved for stochastic variants; training itself is exhaustive
    /// and deterministic. Committees derive distinct member seeds.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            num_trees: 100,
            max_depth: 3,
            shrinkage: 0.1,
            min_samples_leaf: 5,
            temperature: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::InvalidConfig("num_trees must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "shrinkage must be in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig(
                "min_samples_leaf must be at least 1".into(),
            ));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "temperature must be finite and positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// One preference: within `query_id`, `winner` outranks `loser`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub query_id: u32,
    pub winner: u32,
    pub loser: u32,
}

/// Pair yield statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    /// Pairs with differing labels.
    pub valid: u64,
    /// Valid pairs contrasting a low grade (0 or 1) with a high grade
    /// (2, 3, or 4); the strongest training signal.
    pub neg_pos: u64,
}

/// All preference pairs extracted from a set of query groups.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairSet {
    pub pairs: Vec<Pair>,
    pub counts: PairCounts,
}

/// Extracts every within-query document pair with differing labels.
/// Pair order is deterministic: groups in input order, then `(u, v)` with
/// `u < v` by document position. Empty input yields an empty set.
pub fn build_pairs<'a, I>(groups: I) -> PairSet
where
    I: IntoIterator<Item = &'a QueryGroup>,
{
    let mut set = PairSet::default();
    for group in groups {
        let docs = &group.docs;
        for u in 0..docs.len() {
            for v in (u + 1)..docs.len() {
                if docs[u].label == docs[v].label {
                    continue;
                }
                let (w, l) = if docs[u].label > docs[v].label {
                    (u, v)
                } else {
                    (v, u)
                };
                set.counts.valid += 1;
                if docs[l].label <= 1 && docs[w].label >= 2 {
                    set.counts.neg_pos += 1;
                }
                set.pairs.push(Pair {
                    query_id: group.query_id,
                    winner: docs[w].doc_id,
                    loser: docs[l].doc_id,
                });
            }
        }
    }
    set
}

/// Mean logistic pairwise loss of a score assignment.
///
/// `scores` maps `(query_id, doc_id)` to a model score. Errors if a pair
/// references an unscored document or `temperature` is invalid. An empty
/// pair set has loss 0.
pub fn pairwise_loss(
    scores: &HashMap<(u32, u32), f64>,
    pairs: &PairSet,
    temperature: f64,
) -> Result<f64> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be finite and positive, got {temperature}"
        )));
    }
    if pairs.pairs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for pair in &pairs.pairs {
        let sw = lookup(scores, pair.query_id, pair.winner)?;
        let sl = lookup(scores, pair.query_id, pair.loser)?;
        total += softplus(-(sw - sl) / temperature);
    }
    Ok(total / pairs.pairs.len() as f64)
}

fn lookup(scores: &HashMap<(u32, u32), f64>, query_id: u32, doc_id: u32) -> Result<f64> {
    scores
        .get(&(query_id, doc_id))
        .copied()
        .ok_or(Error::MissingScore { query_id, doc_id })
}

/// A trained boosted ranker. Serializes to self-describing JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GBRankModel {
    pub feature_dim: usize,
    pub config: TrainConfig,
    pub base_score: f64,
    pub trees: Vec<RegressionTree>,
    /// Mean pairwise loss on the training pairs after each round.
    pub training_loss: Vec<f64>,
}

impl GBRankModel {
    /// Assembles a model from parts; used for constant baselines and
    /// hand-built committees.
    pub fn new(
        feature_dim: usize,
        config: TrainConfig,
        base_score: f64,
        trees: Vec<RegressionTree>,
    ) -> Result<Self> {
        config.validate()?;
        if feature_dim == 0 {
            return Err(Error::InvalidConfig(
                "feature_dim must be at least 1".into(),
            ));
        }
        Ok(GBRankModel {
            feature_dim,
            config,
            base_score,
            trees,
            training_loss: Vec::new(),
        })
    }

    /// Scores one document. Errors on a feature-vector length mismatch.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.feature_dim {
            return Err(Error::DimMismatch {
                expected: self.feature_dim,
                got: features.len(),
            });
        }
        Ok(self.predict_unchecked(features))
    }

    pub(crate) fn predict_unchecked(&self, features: &[f64]) -> f64 {
        self.base_score
            + self.config.shrinkage * self.trees.iter().map(|t| t.eval(features)).sum::<f64>()
    }

    /// Scores every document of a group, in document order.
    pub fn predict_group(&self, group: &QueryGroup) -> Result<Vec<f64>> {
        group
            .docs
            .iter()
            .map(|d| self.predict(&d.features))
            .collect()
    }
}

/// Trains a boosted pairwise ranker on labeled query groups.
///
/// Errors if the config is invalid, the input is empty or inconsistently
/// dimensioned, or no document pair has differing labels.
pub fn train(groups: &[&QueryGroup], config: &TrainConfig) -> Result<GBRankModel> {
    config.validate()?;
    let first = groups
        .iter()
        .flat_map(|g| g.docs.first())
        .next()
        .ok_or(Error::EmptyInput)?;
    let feature_dim = first.features.len();

    let mut rows: Vec<&[f64]> = Vec::new();
    let mut flat: HashMap<(u32, u32), usize> = HashMap::new();
    for group in groups {
        for doc in &group.docs {
            if doc.features.len() != feature_dim {
                return Err(Error::DimMismatch {
                    expected: feature_dim,
                    got: doc.features.len(),
                });
            }
            flat.insert((group.query_id, doc.doc_id), rows.len());
            rows.push(&doc.features);
        }
    }

    let pair_set = build_pairs(groups.iter().copied());
    if pair_set.pairs.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    let pairs: Vec<(usize, usize)> = pair_set
        .pairs
        .iter()
        .map(|p| (flat[&(p.query_id, p.winner)], flat[&(p.query_id, p.loser)]))
        .collect();

    let t = config.temperature;
    let n = rows.len();
    let mut scores = vec![0.0f64; n];
    let mut residuals = vec![0.0f64; n];
    let mut trees = Vec::with_capacity(config.num_trees);
    let mut training_loss = Vec::with_capacity(config.num_trees);

    for _ in 0..config.num_trees {
        residuals.iter_mut().for_each(|r| *r = 0.0);
        for &(w, l) in &pairs {
            // Negative gradient of the summed pair losses: a pair pushes
            // its winner up and loser down by sigmoid(-margin/T)/T.
            let g = sigmoid(-(scores[w] - scores[l]) / t) / t;
            residuals[w] += g;
            residuals[l] -= g;
        }
        let tree =
            RegressionTree::fit(&rows, &residuals, config.max_depth, config.min_samples_leaf);
        for (i, row) in rows.iter().enumerate() {
            scores[i] += config.shrinkage * tree.eval(row);
        }
        trees.push(tree);
        let loss = pairs
            .iter()
            .map(|&(w, l)| softplus(-(scores[w] - scores[l]) / t))
            .sum::<f64>()
            / pairs.len() as f64;
        training_loss.push(loss);
    }

    Ok(GBRankModel {
        feature_dim,
        config: config.clone(),
        base_score: 0.0,
        trees,
        training_loss,
    })
}
