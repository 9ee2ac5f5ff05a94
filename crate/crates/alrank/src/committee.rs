//! Query-by-committee ensemble of boosted rankers.
//!
//! Members share training data and differ by hyperparameters: one member
//! per `(tree_count, depth)` combination, ordered lexicographically. The
//! default grid (100/300/500 trees at depths 1/3/5) yields nine members.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::QueryGroup;
use crate::gbrank::{train, GBRankModel, TrainConfig};
use crate::{Error, Result};

/// Hyperparameter grid and shared training settings for a committee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitteeConfig {
    /// Boosting-round counts; one axis of the member grid.
    pub tree_counts: Vec<usize>,
    /// Tree depths; the other axis.
    pub depths: Vec<usize>,
    pub shrinkage: f64,
    pub min_samples_leaf: usize,
    pub temperature: f64,
    /// Base seed; member `m` trains with `seed + m`.
    pub seed: u64,
}

impl Default for CommitteeConfig {
    fn default() -> Self {
        CommitteeConfig {
            tree_counts: vec![100, 300, 500],
            depths: vec![1, 3, 5],
            shrinkage: 0.1,
            min_samples_leaf: 5,
            temperature: 1.0,
            seed: 0,
        }
    }
}

impl CommitteeConfig {
    /// Committee size: the full grid.
    pub fn num_members(&self) -> usize {
        self.tree_counts.len() * self.depths.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_members() < 2 {
            return Err(Error::InvalidConfig(format!(
                "committee needs at least 2 members, grid gives {}",
                self.num_members()
            )));
        }
        for config in self.member_configs() {
            config.validate()?;
        }
        Ok(())
    }

    /// Per-member training configs, ordered lexicographically by
    /// `(tree_count, depth)`. Member `m` gets seed `seed + m`.
    pub fn member_configs(&self) -> Vec<TrainConfig> {
        let mut tree_counts = self.tree_counts.clone();
        tree_counts.sort_unstable();
        let mut depths = self.depths.clone();
        depths.sort_unstable();
        let mut configs = Vec::with_capacity(self.num_members());
        for &num_trees in &tree_counts {
            for &max_depth in &depths {
                let m = configs.len() as u64;
                configs.push(TrainConfig {
                    num_trees,
                    max_depth,
                    shrinkage: self.shrinkage,
                    min_samples_leaf: self.min_samples_leaf,
                    temperature: self.temperature,
                    seed: self.seed + m,
                });
            }
        }
        configs
    }
}

/// Trained ensemble; immutable once built. Serializes as a config
/// manifest plus the member model documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Committee {
    pub config: CommitteeConfig,
    /// Members in `member_configs` order.
    pub members: Vec<GBRankModel>,
}

impl Committee {
    pub fn num_members(&self) -> usize {
        self.members.len()
    }
}

/// Per-query committee scores: row `m` holds member `m`'s scores over the
/// group's documents in document order. All entries are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub query_id: u32,
    pub scores: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    /// Number of committee members (rows).
    pub fn num_members(&self) -> usize {
        self.scores.len()
    }

    /// Number of documents (columns).
    pub fn num_docs(&self) -> usize {
        self.scores.first().map_or(0, |row| row.len())
    }

    /// Rejects empty or ragged matrices.
    pub fn check(&self) -> Result<()> {
        if self.scores.is_empty() || self.num_docs() == 0 {
            return Err(Error::EmptySlice("score matrix"));
        }
        let n = self.num_docs();
        if self.scores.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "score matrix for query {} has ragged rows",
                self.query_id
            )));
        }
        Ok(())
    }
}

/// Trains every member of the grid on the same labeled queries.
///
/// Members train in parallel; the result is ordered by the grid, so the
/// outcome is independent of scheduling.
pub fn train_committee(groups: &[&QueryGroup], config: &CommitteeConfig) -> Result<Committee> {
    config.validate()?;
    let members: Vec<GBRankModel> = config
        .member_configs()
        .par_iter()
        .map(|member_config| train(groups, member_config))
        .collect::<Result<_>>()?;
    Ok(Committee {
        config: config.clone(),
        members,
    })
}

/// Scores one query group with every member.
pub fn score_query(committee: &Committee, group: &QueryGroup) -> Result<ScoreMatrix> {
    let scores = committee
        .members
        .iter()
        .map(|member| member.predict_group(group))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreMatrix {
        query_id: group.query_id,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_synthetic, Document, SynthConfig};
    use crate::gbrank::RegressionTree;

    fn small_corpus(seed: u64) -> crate::dataset::Corpus {
        gen_synthetic(
            &SynthConfig {
                num_queries: 15,
                docs_per_query: 5,
                feature_dim: 3,
                noise_scale: 0.2,
                ..SynthConfig::default()
            },
            seed,
        )
        .unwrap()
    }

    fn small_committee_config() -> CommitteeConfig {
        CommitteeConfig {
            tree_counts: vec![5, 10],
            depths: vec![1, 2],
            min_samples_leaf: 2,
            ..CommitteeConfig::default()
        }
    }

    #[test]
    fn default_grid_has_nine_ordered_members() {
        let config = CommitteeConfig::default();
        let members = config.member_configs();
        assert_eq!(members.len(), 9);
        let grid: Vec<(usize, usize)> =
            members.iter().map(|c| (c.num_trees, c.max_depth)).collect();
        let mut sorted = grid.clone();
        sorted.sort_unstable();
        assert_eq!(grid, sorted);
        assert_eq!(grid[0], (100, 1));
        assert_eq!(grid[8], (500, 5));
        for (m, c) in members.iter().enumerate() {
            assert_eq!(c.seed, m as u64);
        }
    }

    #[test]
    fn unsorted_grid_axes_are_normalized() {
        let config = CommitteeConfig {
            tree_counts: vec![10, 5],
            depths: vec![2, 1],
            ..CommitteeConfig::default()
        };
        let grid: Vec<(usize, usize)> = config
            .member_configs()
            .iter()
            .map(|c| (c.num_trees, c.max_depth))
            .collect();
        assert_eq!(grid, vec![(5, 1), (5, 2), (10, 1), (10, 2)]);
    }

    #[test]
    fn single_member_grid_is_rejected() {
        let config = CommitteeConfig {
            tree_counts: vec![10],
            depths: vec![1],
            ..CommitteeConfig::default()
        };
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
        let two = CommitteeConfig {
            tree_counts: vec![10],
            depths: vec![1, 2],
            ..CommitteeConfig::default()
        };
        assert_eq!(two.num_members(), 2);
        two.validate().unwrap();
    }

    #[test]
    fn committee_training_is_deterministic() {
        let corpus = small_corpus(4);
        let groups: Vec<&QueryGroup> = corpus.queries.iter().collect();
        let config = small_committee_config();
        let a = train_committee(&groups, &config).unwrap();
        let b = train_committee(&groups, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.num_members(), 4);
    }

    #[test]
    fn parallel_training_matches_sequential() {
        let corpus = small_corpus(5);
        let groups: Vec<&QueryGroup> = corpus.queries.iter().collect();
        let config = small_committee_config();
        let parallel = train_committee(&groups, &config).unwrap();
        let sequential: Vec<GBRankModel> = config
            .member_configs()
            .iter()
            .map(|c| train(&groups, c).unwrap())
            .collect();
        assert_eq!(parallel.members, sequential);
    }

    #[test]
    fn score_query_matches_elementwise_predict() {
        let corpus = small_corpus(6);
        let groups: Vec<&QueryGroup> = corpus.queries.iter().collect();
        let committee = train_committee(&groups, &small_committee_config()).unwrap();
        let group = &corpus.queries[3];
        let matrix = score_query(&committee, group).unwrap();
        matrix.check().unwrap();
        assert_eq!(matrix.num_members(), 4);
        assert_eq!(matrix.num_docs(), group.docs.len());
        for (m, member) in committee.members.iter().enumerate() {
            for (j, doc) in group.docs.iter().enumerate() {
                assert_eq!(matrix.scores[m][j], member.predict(&doc.features).unwrap());
                assert!(matrix.scores[m][j].is_finite());
            }
        }
        let again = score_query(&committee, group).unwrap();
        assert_eq!(matrix, again);
    }

    #[test]
    fn constant_members_give_constant_matrix() {
        let config = TrainConfig::default();
        let member = GBRankModel::new(2, config.clone(), 0.75, Vec::new()).unwrap();
        let committee = Committee {
            config: CommitteeConfig::default(),
            members: vec![member.clone(), member],
        };
        let group = QueryGroup {
            query_id: 1,
            bucket: 0,
            docs: vec![Document {
                doc_id: 0,
                label: 2,
                features: vec![1.0, 2.0],
            }],
        };
        let matrix = score_query(&committee, &group).unwrap();
        assert_eq!(matrix.scores, vec![vec![0.75], vec![0.75]]);
    }

    #[test]
    fn score_query_rejects_dimension_mismatch() {
        let corpus = small_corpus(7);
        let groups: Vec<&QueryGroup> = corpus.queries.iter().collect();
        let committee = train_committee(&groups, &small_committee_config()).unwrap();
        let bad_group = QueryGroup {
            query_id: 99,
            bucket: 0,
            docs: vec![Document {
                doc_id: 0,
                label: 1,
                features: vec![0.0; 7],
            }],
        };
        assert!(matches!(
            score_query(&committee, &bad_group),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn hand_built_tree_committee_recovers_labels() {
        // Stumps thresholding feature 0 at grade boundaries reproduce the
        // grade exactly when feature 0 stores the grade.
        let ladder = |t: f64| {
            RegressionTree::split(0, t, RegressionTree::leaf(0.0), RegressionTree::leaf(1.0))
        };
        let trees = vec![ladder(0.5), ladder(1.5), ladder(2.5), ladder(3.5)];
        let config = TrainConfig {
            shrinkage: 1.0,
            ..TrainConfig::default()
        };
        let member = GBRankModel::new(1, config, 0.0, trees).unwrap();
        for grade in 0..=4u8 {
            let score = member.predict(&[f64::from(grade)]).unwrap();
            assert_eq!(score, f64::from(grade));
        }
    }
}
