//! Active-learning experiment loop and correlation study.
//!
//! [`run_active_learning`] drives the full protocol: seed-split the pool,
//! then per cycle train the production ranker and the committee on the
//! labeled set, evaluate on held-out validation, score the unlabeled pool
//! with every acquisition criterion, select a batch, and annotate it by
//! revealing ground-truth labels. Retraining is from scratch each cycle;
//! the annotation quota is a hard cap (the final batch shrinks rather
//! than overdrawing, and exhaustion ends the run with a partial report).
//!
//! Seed derivation inside a run: the pool split uses `seed + 1000` and
//! the cycle-`c` random-strategy draw uses `seed + 4000 + c`. Committee
//! and production training read the seeds in their own configs, so one
//! master seed plus fixed offsets (applied by the caller) pins the run.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    acquisition_score, elo_dcg, label_variance, prediction_variance, ranking_entropy_with_stats,
    select_batch, PmfStats, QueryScore, Strategy,
};
use crate::committee::{score_query, train_committee, Committee, CommitteeConfig};
use crate::dataset::{split_pool, Corpus, PoolState, QueryGroup};
use crate::gbrank::{build_pairs, train, GBRankModel, TrainConfig};
use crate::metrics::{
    best_dcg_at_k, bucket_distribution, evaluate_ranking, pearson, rank_by_scores, GainFn,
};
use crate::{Error, Result};

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ALConfig {
    /// Initially labeled queries.
    pub base_size: usize,
    /// Queries annotated per cycle.
    pub batch_size: usize,
    /// Maximum annotation cycles.
    pub cycles: usize,
    /// Total annotation budget across all cycles.
    pub quota: usize,
    /// Weight of prediction variance in the combined criterion.
    pub alpha: f64,
    /// Temperature of pairwise win probabilities.
    pub temperature: f64,
    pub strategy: Strategy,
    pub committee: CommitteeConfig,
    /// Hyperparameters of the production ranker that is evaluated on
    /// validation data; independent of the committee grid.
    pub production: TrainConfig,
    /// Cutoff for DCG and the low-grade share.
    pub eval_k: usize,
    pub gain: GainFn,
    /// Master seed. The pool split and per-cycle random selection derive
    /// from it by fixed offsets (see module docs).
    pub seed: u64,
}

impl Default for ALConfig {
    fn default() -> Self {
        ALConfig {
            base_size: 100,
            batch_size: 100,
            cycles: 20,
            quota: 2000,
            alpha: 1.0,
            temperature: 1.0,
            strategy: Strategy::RePv,
            committee: CommitteeConfig::default(),
            production: TrainConfig::default(),
            eval_k: 4,
            gain: GainFn::Exponential,
            seed: 0,
        }
    }
}

impl ALConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_size == 0 {
            return Err(Error::InvalidConfig("base_size must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.cycles == 0 {
            return Err(Error::InvalidConfig("cycles must be at least 1".into()));
        }
        if self.quota == 0 {
            return Err(Error::InvalidConfig("quota must be at least 1".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha must be finite, got {}",
                self.alpha
            )));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "temperature must be finite and positive, got {}",
                self.temperature
            )));
        }
        if self.eval_k == 0 {
            return Err(Error::InvalidConfig("eval_k must be at least 1".into()));
        }
        self.committee.validate()?;
        self.production.validate()
    }
}

/// Metrics recorded at the end of one annotation cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    /// 1-based cycle index.
    pub cycle: usize,
    /// Labeled queries after this cycle's annotation.
    pub labeled: usize,
    /// Differing-label pairs in the labeled set after annotation.
    pub valid_pairs: u64,
    /// Irrelevant-vs-relevant pairs in the labeled set after annotation.
    pub neg_pos_pairs: u64,
    /// Mean validation DCG at `eval_k` under the production ranker
    /// trained this cycle.
    pub mean_dcg: f64,
    /// Mean share of low grades in validation top-`eval_k`.
    pub mean_r01: f64,
    /// Bucket histogram of this cycle's selected queries.
    pub selection_buckets: [u64; 10],
}

/// Report metadata; the only field excluded from byte-level comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    /// Unix timestamp of report creation; 0 when not stamped.
    pub generated_at: u64,
}

/// Validity evidence for every rank distribution computed in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub distributions_checked: u64,
    pub max_pmf_sum_error: f64,
    pub min_pmf_entry: f64,
}

impl From<PmfStats> for Diagnostics {
    fn from(stats: PmfStats) -> Self {
        Diagnostics {
            distributions_checked: stats.count,
            max_pmf_sum_error: stats.max_sum_error,
            min_pmf_entry: if stats.count == 0 {
                0.0
            } else {
                stats.min_entry
            },
        }
    }
}

/// Aggregate deltas of one run against a named baseline run, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineDelta {
    pub baseline: String,
    pub mean_dcg_pct: f64,
    pub mean_r01_pct: f64,
    pub final_valid_pairs_pct: f64,
    pub final_neg_pos_pairs_pct: f64,
}

/// Everything produced by one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub meta: RunMeta,
    pub config: ALConfig,
    pub cycles: Vec<CycleReport>,
    pub diagnostics: Diagnostics,
    /// Filled by report tooling when comparing runs; `None` fresh off a
    /// run.
    pub baseline_delta: Option<BaselineDelta>,
}

impl RunReport {
    /// Mean validation DCG over all cycles.
    pub fn mean_dcg(&self) -> f64 {
        mean(self.cycles.iter().map(|c| c.mean_dcg))
    }

    /// Mean validation low-grade share over all cycles.
    pub fn mean_r01(&self) -> f64 {
        mean(self.cycles.iter().map(|c| c.mean_r01))
    }

    /// Valid pairs in the labeled set after the final cycle.
    pub fn final_valid_pairs(&self) -> u64 {
        self.cycles.last().map_or(0, |c| c.valid_pairs)
    }

    /// Neg-pos pairs in the labeled set after the final cycle.
    pub fn final_neg_pos_pairs(&self) -> u64 {
        self.cycles.last().map_or(0, |c| c.neg_pos_pairs)
    }

    /// Percentage deltas of this run's aggregates against a baseline.
    pub fn delta_vs(&self, baseline_name: &str, baseline: &RunReport) -> BaselineDelta {
        BaselineDelta {
            baseline: baseline_name.to_string(),
            mean_dcg_pct: pct(self.mean_dcg(), baseline.mean_dcg()),
            mean_r01_pct: pct(self.mean_r01(), baseline.mean_r01()),
            final_valid_pairs_pct: pct(
                self.final_valid_pairs() as f64,
                baseline.final_valid_pairs() as f64,
            ),
            final_neg_pos_pairs_pct: pct(
                self.final_neg_pos_pairs() as f64,
                baseline.final_neg_pos_pairs() as f64,
            ),
        }
    }

    /// Per-cycle metrics as CSV. The DCG column is named `dcg4` for plot
    /// compatibility regardless of the configured cutoff.
    pub fn cycles_csv(&self) -> String {
        let mut out = String::from("cycle,labeled,valid_pairs,neg_pos_pairs,dcg4,r01");
        for b in 0..10 {
            let _ = write!(out, ",bucket_{b}");
        }
        out.push('\n');
        for c in &self.cycles {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                c.cycle, c.labeled, c.valid_pairs, c.neg_pos_pairs, c.mean_dcg, c.mean_r01
            );
            for b in &c.selection_buckets {
                let _ = write!(out, ",{b}");
            }
            out.push('\n');
        }
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn pct(ours: f64, base: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (ours - base) / base * 100.0
    }
}

/// Reveals labels for `qids`, moving them from unlabeled to labeled.
/// Errors if any id is not currently unlabeled. An empty list is the
/// identity.
pub fn oracle_annotate(pool: &PoolState, qids: &[u32]) -> Result<PoolState> {
    let mut labeled = pool.labeled().clone();
    let mut unlabeled = pool.unlabeled().clone();
    for &qid in qids {
        if !unlabeled.remove(&qid) {
            return Err(Error::BadAnnotation {
                query_id: qid,
                reason: "query is not in the unlabeled pool".into(),
            });
        }
        labeled.insert(qid);
    }
    PoolState::new(labeled, unlabeled)
}

/// Runs the full active-learning protocol. Deterministic in
/// `(corpus, validation, config)` at any parallelism level.
pub fn run_active_learning(
    corpus: &Corpus,
    validation: &Corpus,
    config: &ALConfig,
) -> Result<RunReport> {
    config.validate()?;
    corpus.validate()?;
    validation.validate()?;
    let pool_ids: HashSet<u32> = corpus.query_ids().into_iter().collect();
    if let Some(&qid) = validation
        .query_ids()
        .iter()
        .find(|qid| pool_ids.contains(qid))
    {
        return Err(Error::CorpusOverlap { query_id: qid });
    }
    if validation.feature_dim != corpus.feature_dim {
        return Err(Error::DimMismatch {
            expected: corpus.feature_dim,
            got: validation.feature_dim,
        });
    }

    let index: HashMap<u32, usize> = corpus
        .queries
        .iter()
        .enumerate()
        .map(|(i, g)| (g.query_id, i))
        .collect();
    let mut pool = split_pool(corpus, config.base_size, config.seed + 1000)?;
    let mut quota_left = config.quota;
    let mut cycles = Vec::new();
    let mut stats = PmfStats::default();

    for cycle in 1..=config.cycles {
        let labeled_groups: Vec<&QueryGroup> = corpus
            .queries
            .iter()
            .filter(|g| pool.is_labeled(g.query_id))
            .collect();
        let unlabeled_groups: Vec<&QueryGroup> = corpus
            .queries
            .iter()
            .filter(|g| !pool.is_labeled(g.query_id))
            .collect();
        let batch = config
            .batch_size
            .min(quota_left)
            .min(unlabeled_groups.len());
        if batch == 0 {
            break;
        }

        let production = train(&labeled_groups, &config.production)?;
        let committee = train_committee(&labeled_groups, &config.committee)?;
        let (mean_dcg, mean_r01) =
            evaluate_on_corpus(&production, validation, config.eval_k, config.gain)?;

        let scored: Vec<(QueryScore, PmfStats)> = unlabeled_groups
            .par_iter()
            .map(|group| score_pool_query(&committee, group, config))
            .collect::<Result<_>>()?;
        let pool_scores: Vec<QueryScore> = scored.iter().map(|(q, _)| *q).collect();
        for (_, s) in &scored {
            stats.merge(s);
        }

        let selected = select_batch(
            &pool_scores,
            batch,
            config.strategy,
            config.seed + 4000 + cycle as u64,
        )?;
        pool = oracle_annotate(&pool, &selected)?;
        quota_left -= batch;

        let labeled_after: Vec<&QueryGroup> = corpus
            .queries
            .iter()
            .filter(|g| pool.is_labeled(g.query_id))
            .collect();
        let pair_set = build_pairs(labeled_after.iter().copied());
        let selection_buckets =
            bucket_distribution(selected.iter().map(|qid| &corpus.queries[index[qid]]));

        cycles.push(CycleReport {
            cycle,
            labeled: pool.labeled().len(),
            valid_pairs: pair_set.counts.valid,
            neg_pos_pairs: pair_set.counts.neg_pos,
            mean_dcg,
            mean_r01,
            selection_buckets,
        });
    }

    Ok(RunReport {
        meta: RunMeta::default(),
        config: config.clone(),
        cycles,
        diagnostics: stats.into(),
        baseline_delta: None,
    })
}

fn score_pool_query(
    committee: &Committee,
    group: &QueryGroup,
    config: &ALConfig,
) -> Result<(QueryScore, PmfStats)> {
    let matrix = score_query(committee, group)?;
    let (re, stats) = ranking_entropy_with_stats(&matrix, config.temperature)?;
    let pv = prediction_variance(&matrix)?;
    let lv = label_variance(&group.labels())?;
    let elo = elo_dcg(&matrix, config.eval_k, config.gain)?;
    Ok((
        QueryScore {
            query_id: group.query_id,
            re,
            pv,
            lv,
            elo,
            f: acquisition_score(re, pv, config.alpha),
        },
        stats,
    ))
}

/// Mean DCG and low-grade share over a corpus under one model's ranking.
fn evaluate_on_corpus(
    model: &GBRankModel,
    corpus: &Corpus,
    k: usize,
    gain: GainFn,
) -> Result<(f64, f64)> {
    let per_query: Vec<(f64, f64)> = corpus
        .queries
        .par_iter()
        .map(|group| -> Result<(f64, f64)> {
            let scores = model.predict_group(group)?;
            let labels = group.labels();
            let ranked: Vec<u8> = rank_by_scores(&scores)
                .into_iter()
                .map(|j| labels[j])
                .collect();
            let eval = evaluate_ranking(&ranked, k, gain);
            Ok((eval.dcg, eval.r01))
        })
        .collect::<Result<_>>()?;
    let n = per_query.len() as f64;
    let dcg = per_query.iter().map(|(d, _)| d).sum::<f64>() / n;
    let r01 = per_query.iter().map(|(_, r)| r).sum::<f64>() / n;
    Ok((dcg, r01))
}

/// Study shape: cutoff and gain for the best-DCG column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub eval_k: usize,
    pub gain: GainFn,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            eval_k: 4,
            gain: GainFn::Exponential,
        }
    }
}

/// One study query's criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub query_id: u32,
    pub lv: f64,
    pub pv: f64,
    pub best_dcg: f64,
}

/// Per-query criteria plus their pairwise Pearson correlations.
/// A correlation is `None` when one of its columns is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStudy {
    pub rows: Vec<CorrelationRow>,
    pub corr_lv_pv: Option<f64>,
    pub corr_bestdcg_lv: Option<f64>,
    pub corr_bestdcg_pv: Option<f64>,
}

/// Computes label variance, prediction variance, and best DCG per query
/// of a labeled corpus, plus the three pairwise correlations.
pub fn correlation_study(
    corpus: &Corpus,
    committee: &Committee,
    config: &StudyConfig,
) -> Result<CorrelationStudy> {
    if config.eval_k == 0 {
        return Err(Error::InvalidConfig("eval_k must be at least 1".into()));
    }
    corpus.validate()?;
    if corpus.queries.len() < 2 {
        return Err(Error::InvalidConfig(
            "correlation study needs at least 2 queries".into(),
        ));
    }
    let rows: Vec<CorrelationRow> = corpus
        .queries
        .par_iter()
        .map(|group| -> Result<CorrelationRow> {
            let matrix = score_query(committee, group)?;
            Ok(CorrelationRow {
                query_id: group.query_id,
                lv: label_variance(&group.labels())?,
                pv: prediction_variance(&matrix)?,
                best_dcg: best_dcg_at_k(&group.labels(), config.eval_k, config.gain),
            })
        })
        .collect::<Result<_>>()?;

    let lv: Vec<f64> = rows.iter().map(|r| r.lv).collect();
    let pv: Vec<f64> = rows.iter().map(|r| r.pv).collect();
    let bd: Vec<f64> = rows.iter().map(|r| r.best_dcg).collect();
    Ok(CorrelationStudy {
        corr_lv_pv: optional_pearson(&lv, &pv)?,
        corr_bestdcg_lv: optional_pearson(&bd, &lv)?,
        corr_bestdcg_pv: optional_pearson(&bd, &pv)?,
        rows,
    })
}

/// Pearson that treats a constant column as "undefined" rather than an
/// error; other failures still propagate.
fn optional_pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    match pearson(x, y) {
        Ok(r) => Ok(Some(r)),
        Err(Error::ConstantInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_synthetic, Document, Provenance, SynthConfig};
    use crate::gbrank::RegressionTree;
    use std::collections::BTreeSet;

    fn synth(num_queries: usize, seed: u64) -> Corpus {
        gen_synthetic(
            &SynthConfig {
                num_queries,
                docs_per_query: 5,
                feature_dim: 3,
                noise_scale: 0.3,
                ..SynthConfig::default()
            },
            seed,
        )
        .unwrap()
    }

    fn fast_config() -> ALConfig {
        ALConfig {
            base_size: 20,
            batch_size: 10,
            cycles: 1,
            quota: 2000,
            committee: CommitteeConfig {
                tree_counts: vec![3, 6],
                depths: vec![1, 2],
                min_samples_leaf: 2,
                ..CommitteeConfig::default()
            },
            production: TrainConfig {
                num_trees: 8,
                max_depth: 2,
                min_samples_leaf: 2,
                ..TrainConfig::default()
            },
            seed: 5,
            ..ALConfig::default()
        }
    }

    #[test]
    fn oracle_annotate_moves_queries() {
        let labeled: BTreeSet<u32> = [1, 2].into_iter().collect();
        let unlabeled: BTreeSet<u32> = [3, 4, 5].into_iter().collect();
        let pool = PoolState::new(labeled, unlabeled).unwrap();

        let next = oracle_annotate(&pool, &[3, 5]).unwrap();
        assert_eq!(next.labeled().len(), 4);
        assert_eq!(next.unlabeled().len(), 1);
        assert!(next.is_labeled(3) && next.is_labeled(5));

        let same = oracle_annotate(&pool, &[]).unwrap();
        assert_eq!(same, pool);

        assert!(matches!(
            oracle_annotate(&pool, &[2]),
            Err(Error::BadAnnotation { query_id: 2, .. })
        ));
        assert!(matches!(
            oracle_annotate(&pool, &[99]),
            Err(Error::BadAnnotation { query_id: 99, .. })
        ));
        assert!(oracle_annotate(&pool, &[3, 3]).is_err());
    }

    #[test]
    fn single_cycle_bookkeeping() {
        let corpus = synth(100, 1);
        let validation = gen_synthetic(
            &SynthConfig {
                num_queries: 20,
                docs_per_query: 5,
                feature_dim: 3,
                noise_scale: 0.3,
                ..SynthConfig::default()
            },
            2,
        )
        .unwrap();
        let validation = shift_ids(validation, 1000);
        let report = run_active_learning(&corpus, &validation, &fast_config()).unwrap();
        assert_eq!(report.cycles.len(), 1);
        assert_eq!(report.cycles[0].cycle, 1);
        assert_eq!(report.cycles[0].labeled, 30);
        assert_eq!(report.cycles[0].selection_buckets.iter().sum::<u64>(), 10);
        assert!(report.cycles[0].valid_pairs > 0);
        assert!(report.diagnostics.distributions_checked > 0);
        assert!(report.diagnostics.max_pmf_sum_error <= 1e-9);
        assert!(report.diagnostics.min_pmf_entry >= 0.0);
        assert!(report.baseline_delta.is_none());
    }

    fn shift_ids(mut corpus: Corpus, offset: u32) -> Corpus {
        for group in &mut corpus.queries {
            group.query_id += offset;
        }
        corpus
    }

    #[test]
    fn budget_accounting_across_cycles() {
        let corpus = synth(80, 3);
        let validation = shift_ids(synth(15, 4), 5000);
        let config = ALConfig {
            cycles: 3,
            ..fast_config()
        };
        let report = run_active_learning(&corpus, &validation, &config).unwrap();
        assert_eq!(report.cycles.len(), 3);
        for (i, cycle) in report.cycles.iter().enumerate() {
            assert_eq!(cycle.cycle, i + 1);
            assert_eq!(cycle.labeled, 20 + (i + 1) * 10);
        }
        // Valid pairs only grow as the labeled set grows.
        for w in report.cycles.windows(2) {
            assert!(w[1].valid_pairs >= w[0].valid_pairs);
        }
    }

    #[test]
    fn quota_caps_the_final_batch() {
        let corpus = synth(80, 6);
        let validation = shift_ids(synth(15, 7), 5000);
        let config = ALConfig {
            cycles: 4,
            quota: 15,
            ..fast_config()
        };
        let report = run_active_learning(&corpus, &validation, &config).unwrap();
        // Cycle 1 annotates 10, cycle 2 the remaining 5, then the run
        // stops with a partial report.
        assert_eq!(report.cycles.len(), 2);
        assert_eq!(report.cycles[1].labeled, 35);
        assert_eq!(report.cycles[1].selection_buckets.iter().sum::<u64>(), 5);
    }

    #[test]
    fn pool_exhaustion_ends_run() {
        let corpus = synth(35, 8);
        let validation = shift_ids(synth(15, 9), 5000);
        let config = ALConfig {
            cycles: 5,
            ..fast_config()
        };
        let report = run_active_learning(&corpus, &validation, &config).unwrap();
        // 15 unlabeled after the base split: cycles of 10 and 5.
        assert_eq!(report.cycles.len(), 2);
        assert_eq!(report.cycles[1].labeled, 35);
    }

    #[test]
    fn overlapping_corpora_are_rejected() {
        let corpus = synth(30, 10);
        let validation = synth(10, 11);
        let config = fast_config();
        assert!(matches!(
            run_active_learning(&corpus, &validation, &config),
            Err(Error::CorpusOverlap { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let corpus = synth(60, 12);
        let validation = shift_ids(synth(12, 13), 5000);
        let config = ALConfig {
            cycles: 2,
            strategy: Strategy::Random,
            ..fast_config()
        };
        let a = run_active_learning(&corpus, &validation, &config).unwrap();
        let b = run_active_learning(&corpus, &validation, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let other_seed = ALConfig { seed: 77, ..config };
        let c = run_active_learning(&corpus, &validation, &other_seed).unwrap();
        assert_ne!(a.cycles, c.cycles);
    }

    #[test]
    fn config_validation_rejects_degenerate_values() {
        let mut config = fast_config();
        config.batch_size = 0;
        assert!(config.validate().is_err());
        let mut config = fast_config();
        config.cycles = 0;
        assert!(config.validate().is_err());
        let mut config = fast_config();
        config.temperature = 0.0;
        assert!(config.validate().is_err());
        let mut config = fast_config();
        config.alpha = f64::NAN;
        assert!(config.validate().is_err());
    }

    #[test]
    fn report_aggregates_and_deltas() {
        let cycle = |dcg: f64, valid: u64| CycleReport {
            cycle: 1,
            labeled: 10,
            valid_pairs: valid,
            neg_pos_pairs: valid / 2,
            mean_dcg: dcg,
            mean_r01: 0.25,
            selection_buckets: [0; 10],
        };
        let mut ours = RunReport {
            meta: RunMeta::default(),
            config: fast_config(),
            cycles: vec![cycle(10.0, 150), cycle(14.0, 300)],
            diagnostics: Diagnostics {
                distributions_checked: 1,
                max_pmf_sum_error: 0.0,
                min_pmf_entry: 0.0,
            },
            baseline_delta: None,
        };
        let base = RunReport {
            cycles: vec![cycle(10.0, 100), cycle(10.0, 200)],
            ..ours.clone()
        };
        assert!((ours.mean_dcg() - 12.0).abs() < 1e-12);
        assert_eq!(ours.final_valid_pairs(), 300);
        let delta = ours.delta_vs("random", &base);
        assert_eq!(delta.baseline, "random");
        assert!((delta.mean_dcg_pct - 20.0).abs() < 1e-9);
        assert!((delta.final_valid_pairs_pct - 50.0).abs() < 1e-9);
        ours.baseline_delta = Some(delta);
        let json = serde_json::to_string(&ours).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(ours, back);
    }

    #[test]
    fn cycles_csv_shape() {
        let corpus = synth(60, 20);
        let validation = shift_ids(synth(12, 21), 5000);
        let config = ALConfig {
            cycles: 2,
            ..fast_config()
        };
        let report = run_active_learning(&corpus, &validation, &config).unwrap();
        let csv = report.cycles_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "cycle,labeled,valid_pairs,neg_pos_pairs,dcg4,r01,bucket_0,bucket_1,bucket_2,bucket_3,bucket_4,bucket_5,bucket_6,bucket_7,bucket_8,bucket_9"
        );
        assert_eq!(lines.count(), 2);
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 16);
        }
    }

    /// Committee whose members read the grade straight off feature 0, so
    /// prediction variance equals label variance exactly.
    fn grade_reading_committee() -> Committee {
        let ladder = |t: f64| {
            RegressionTree::split(0, t, RegressionTree::leaf(0.0), RegressionTree::leaf(1.0))
        };
        let trees = vec![ladder(0.5), ladder(1.5), ladder(2.5), ladder(3.5)];
        let config = TrainConfig {
            shrinkage: 1.0,
            ..TrainConfig::default()
        };
        let member = GBRankModel::new(1, config, 0.0, trees).unwrap();
        Committee {
            config: CommitteeConfig::default(),
            members: vec![member.clone(), member],
        }
    }

    fn labeled_corpus(label_sets: &[&[u8]]) -> Corpus {
        let queries = label_sets
            .iter()
            .enumerate()
            .map(|(q, labels)| QueryGroup {
                query_id: (q + 1) as u32,
                bucket: (q % 10) as u8,
                docs: labels
                    .iter()
                    .enumerate()
                    .map(|(i, &label)| Document {
                        doc_id: i as u32,
                        label,
                        features: vec![f64::from(label)],
                    })
                    .collect(),
            })
            .collect();
        Corpus {
            feature_dim: 1,
            queries,
            provenance: Provenance::Synthetic,
        }
    }

    #[test]
    fn grade_reading_committee_gives_perfect_lv_pv_correlation() {
        let corpus = labeled_corpus(&[&[0, 4], &[2, 2], &[0, 2], &[1, 3, 3]]);
        let study = correlation_study(&corpus, &grade_reading_committee(), &StudyConfig::default())
            .unwrap();
        for row in &study.rows {
            assert!((row.lv - row.pv).abs() < 1e-12);
        }
        assert!((study.corr_lv_pv.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_labels_make_correlation_undefined() {
        let corpus = labeled_corpus(&[&[2, 2], &[3, 3], &[1, 1]]);
        let study = correlation_study(&corpus, &grade_reading_committee(), &StudyConfig::default())
            .unwrap();
        assert!(study.corr_lv_pv.is_none());
        assert!(study.corr_bestdcg_lv.is_none());
    }

    #[test]
    fn trained_committee_couples_lv_and_pv() {
        let corpus = synth(80, 30);
        let groups: Vec<&QueryGroup> = corpus.queries.iter().collect();
        let committee = train_committee(
            &groups,
            &CommitteeConfig {
                tree_counts: vec![10, 20],
                depths: vec![1, 2],
                min_samples_leaf: 2,
                ..CommitteeConfig::default()
            },
        )
        .unwrap();
        let held_out = shift_ids(synth(60, 31), 9000);
        let study = correlation_study(&held_out, &committee, &StudyConfig::default()).unwrap();
        assert_eq!(study.rows.len(), 60);
        assert!(study.corr_lv_pv.unwrap() > 0.0);
    }
}
