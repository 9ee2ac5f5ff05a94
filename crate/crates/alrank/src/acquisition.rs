//! Per-query acquisition criteria and batch selection.
//!
//! Given a committee [`ScoreMatrix`] for a query:
//!
//! * [`rank_distribution`] turns one member's scores into a per-document
//!   distribution over ranks. A document's rank is the number of other
//!   documents that beat it, a Poisson-binomial over pairwise win
//!   probabilities; the pmf grows by one support point per comparator via
//!   sequential convolution.
//! * [`ranking_entropy`] (RE) averages the member pmfs per document,
//!   takes Shannon entropy in bits, and means over documents.
//! * [`prediction_variance`] (PV) means each member's per-row population
//!   score spread.
//! * [`label_variance`] (LV) is the ground-truth analogue of PV.
//! * [`elo_dcg`] estimates the DCG gap between per-member rankings and
//!   the consensus ranking.
//! * [`select_batch`] picks the top queries under a [`Strategy`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::committee::ScoreMatrix;
use crate::metrics::{rank_by_scores, GainFn};
use crate::num::sigmoid;
use crate::{Error, Result};

/// Probability that document `u` outranks document `v`:
/// `1 / (1 + exp(-(s_u - s_v) / T))`. Strictly inside `(0, 1)`.
pub fn pairwise_prob(s_u: f64, s_v: f64, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok(sigmoid((s_u - s_v) / temperature))
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be finite and positive, got {temperature}"
        )));
    }
    Ok(())
}

/// Distribution of one document's rank under one committee member.
/// Ranks run `0..N`; entries are non-negative and sum to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistribution {
    pmf: Vec<f64>,
}

impl RankDistribution {
    /// Wraps a probability vector, enforcing the pmf invariants.
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::EmptySlice("rank distribution"));
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidConfig(
                "rank distribution entries must be non-negative and finite".into(),
            ));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "rank distribution sums to {sum}, expected 1"
            )));
        }
        Ok(RankDistribution { pmf })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }
}

/// Rank distributions of every document under one member's scores.
///
/// For document `v`, each other document `u` contributes an independent
/// Bernoulli event "u beats v" with probability `pairwise_prob(u, v, T)`;
/// the pmf over `rank(v) = number of wins against v` is built by inserting
/// comparators one at a time:
///
/// ```text
/// next[r] = pmf[r] * P(v holds) + pmf[r-1] * P(u beats v)
/// ```
///
/// starting from `pmf = [1]`. Self-comparison is excluded, so the support
/// after all insertions is exactly `0..N`.
pub fn rank_distribution(member_scores: &[f64], temperature: f64) -> Result<Vec<RankDistribution>> {
    check_temperature(temperature)?;
    let n = member_scores.len();
    if n == 0 {
        return Err(Error::EmptySlice("member scores"));
    }
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let mut pmf = Vec::with_capacity(n);
        pmf.push(1.0);
        for u in 0..n {
            if u == v {
                continue;
            }
            let beats = sigmoid((member_scores[u] - member_scores[v]) / temperature);
            let holds = 1.0 - beats;
            let mut next = vec![0.0; pmf.len() + 1];
            for (r, &p) in pmf.iter().enumerate() {
                next[r] += p * holds;
                next[r + 1] += p * beats;
            }
            pmf = next;
        }
        out.push(RankDistribution { pmf });
    }
    Ok(out)
}

/// Shannon entropy (bits) of the committee-averaged rank pmf for one
/// document. All member pmfs must share a length; the result lies in
/// `[0, log2 N]`.
pub fn doc_entropy(member_pmfs: &[RankDistribution]) -> Result<f64> {
    let first = member_pmfs
        .first()
        .ok_or(Error::EmptySlice("member pmfs"))?;
    let n = first.len();
    let mut avg = vec![0.0; n];
    for dist in member_pmfs {
        if dist.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "rank pmfs have lengths {n} and {}",
                dist.len()
            )));
        }
        for (a, &p) in avg.iter_mut().zip(dist.pmf()) {
            *a += p;
        }
    }
    let m = member_pmfs.len() as f64;
    avg.iter_mut().for_each(|a| *a /= m);
    Ok(entropy_bits(&avg))
}

/// `-sum p log2 p` with `0 log 0 = 0`.
fn entropy_bits(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Validity statistics over emitted rank distributions, aggregated across
/// a run so reports can attest every pmf stayed a probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfStats {
    /// Number of rank distributions inspected.
    pub count: u64,
    /// Largest observed `|sum - 1|`.
    pub max_sum_error: f64,
    /// Smallest observed entry (negative would be a violation).
    pub min_entry: f64,
}

impl Default for PmfStats {
    fn default() -> Self {
        PmfStats {
            count: 0,
            max_sum_error: 0.0,
            min_entry: f64::INFINITY,
        }
    }
}

impl PmfStats {
    fn observe(&mut self, dist: &RankDistribution) {
        self.count += 1;
        let sum: f64 = dist.pmf().iter().sum();
        self.max_sum_error = self.max_sum_error.max((sum - 1.0).abs());
        for &p in dist.pmf() {
            self.min_entry = self.min_entry.min(p);
        }
    }

    /// Combines statistics from independent computations; commutative and
    /// associative, so parallel aggregation order cannot change results.
    pub fn merge(&mut self, other: &PmfStats) {
        self.count += other.count;
        self.max_sum_error = self.max_sum_error.max(other.max_sum_error);
        self.min_entry = self.min_entry.min(other.min_entry);
    }
}

/// Ranking entropy of a query: mean over documents of [`doc_entropy`]
/// applied to the committee's rank distributions. Lies in `[0, log2 N]`.
pub fn ranking_entropy(matrix: &ScoreMatrix, temperature: f64) -> Result<f64> {
    ranking_entropy_with_stats(matrix, temperature).map(|(re, _)| re)
}

/// [`ranking_entropy`] plus pmf validity statistics over every rank
/// distribution the computation produced.
pub fn ranking_entropy_with_stats(
    matrix: &ScoreMatrix,
    temperature: f64,
) -> Result<(f64, PmfStats)> {
    matrix.check()?;
    let n = matrix.num_docs();
    let m = matrix.num_members() as f64;
    let mut stats = PmfStats::default();
    let member_dists: Vec<Vec<RankDistribution>> = matrix
        .scores
        .iter()
        .map(|row| rank_distribution(row, temperature))
        .collect::<Result<_>>()?;
    for dists in &member_dists {
        for dist in dists {
            stats.observe(dist);
        }
    }
    let mut total = 0.0;
    let mut avg = vec![0.0; n];
    for v in 0..n {
        avg.iter_mut().for_each(|a| *a = 0.0);
        for dists in &member_dists {
            for (a, &p) in avg.iter_mut().zip(dists[v].pmf()) {
                *a += p;
            }
        }
        avg.iter_mut().for_each(|a| *a /= m);
        total += entropy_bits(&avg);
    }
    Ok((total / n as f64, stats))
}

/// Prediction variance of a query: mean over members of the population
/// standard deviation of that member's scores. Zero exactly when every
/// member scores all documents identically.
pub fn prediction_variance(matrix: &ScoreMatrix) -> Result<f64> {
    matrix.check()?;
    let total: f64 = matrix.scores.iter().map(|row| population_std(row)).sum();
    Ok(total / matrix.num_members() as f64)
}

/// Welford's algorithm; returns exact 0 on constant input because the
/// running deviation is identically zero at every step.
fn population_std(values: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    (m2 / values.len() as f64).sqrt()
}

/// Population standard deviation of the grades in one query; the
/// ground-truth spread that prediction variance approximates.
pub fn label_variance(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptySlice("labels"));
    }
    let n = labels.len() as f64;
    let mean = labels.iter().map(|&l| f64::from(l)).sum::<f64>() / n;
    let var = labels
        .iter()
        .map(|&l| (f64::from(l) - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(var.sqrt())
}

/// Expected-DCG-loss style committee disagreement: mean over members of
/// the DCG of ranking by that member's scores (pseudo-gains from the
/// scores themselves, clamped at 0) minus the DCG of ranking by the
/// column-mean scores. Zero when all members agree; sign not guaranteed.
pub fn elo_dcg(matrix: &ScoreMatrix, k: usize, gain: GainFn) -> Result<f64> {
    matrix.check()?;
    if k == 0 {
        return Err(Error::InvalidConfig("elo_dcg requires k >= 1".into()));
    }
    let m = matrix.num_members();
    let n = matrix.num_docs();
    let mean_col: Vec<f64> = (0..n)
        .map(|j| matrix.scores.iter().map(|row| row[j]).sum::<f64>() / m as f64)
        .collect();
    let consensus = score_dcg(&mean_col, k, gain);
    let member_avg = matrix
        .scores
        .iter()
        .map(|row| score_dcg(row, k, gain))
        .sum::<f64>()
        / m as f64;
    Ok(member_avg - consensus)
}

/// DCG of ranking documents by `scores`, using the scores themselves as
/// pseudo-gains.
fn score_dcg(scores: &[f64], k: usize, gain: GainFn) -> f64 {
    rank_by_scores(scores)
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(p, j)| gain.score_gain(scores[j]) / (p as f64 + 2.0).log2())
        .sum()
}

/// Combined acquisition value `f = re + alpha * pv`.
pub fn acquisition_score(re: f64, pv: f64, alpha: f64) -> f64 {
    re + alpha * pv
}

/// Every acquisition criterion evaluated for one pool query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryScore {
    pub query_id: u32,
    /// Ranking entropy, bits.
    pub re: f64,
    /// Prediction variance, score units.
    pub pv: f64,
    /// Label variance (oracle criterion), grade units.
    pub lv: f64,
    /// Committee DCG disagreement, used by the `elo_dcg` strategy.
    pub elo: f64,
    /// Combined value `re + alpha * pv`.
    pub f: f64,
}

/// Batch selection strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Re,
    Pv,
    Lv,
    RePv,
    EloDcg,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Random,
        Strategy::Re,
        Strategy::Pv,
        Strategy::Lv,
        Strategy::RePv,
        Strategy::EloDcg,
    ];
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Random => "random",
            Strategy::Re => "re",
            Strategy::Pv => "pv",
            Strategy::Lv => "lv",
            Strategy::RePv => "re_pv",
            Strategy::EloDcg => "elo_dcg",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "re" => Ok(Strategy::Re),
            "pv" => Ok(Strategy::Pv),
            "lv" => Ok(Strategy::Lv),
            "re_pv" => Ok(Strategy::RePv),
            "elo_dcg" => Ok(Strategy::EloDcg),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy `{other}` (expected one of random, re, pv, lv, re_pv, elo_dcg)"
            ))),
        }
    }
}

/// Selects `batch_size` query ids from the pool.
///
/// Criterion strategies take the top queries by their field, descending,
/// with ties broken by ascending query id. `random` samples uniformly
/// without replacement under `seed` (other strategies ignore the seed).
/// The result is a pure function of `(pool_scores, batch_size, strategy,
/// seed)`.
pub fn select_batch(
    pool_scores: &[QueryScore],
    batch_size: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<Vec<u32>> {
    if batch_size > pool_scores.len() {
        return Err(Error::BatchTooLarge {
            requested: batch_size,
            available: pool_scores.len(),
        });
    }
    if let Strategy::Random = strategy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(
            rand::seq::index::sample(&mut rng, pool_scores.len(), batch_size)
                .into_iter()
                .map(|i| pool_scores[i].query_id)
                .collect(),
        );
    }
    let key = |q: &QueryScore| -> f64 {
        match strategy {
            Strategy::Re => q.re,
            Strategy::Pv => q.pv,
            Strategy::Lv => q.lv,
            Strategy::RePv => q.f,
            Strategy::EloDcg => q.elo,
            Strategy::Random => unreachable!(),
        }
    };
    let mut order: Vec<usize> = (0..pool_scores.len()).collect();
    order.sort_by(|&a, &b| {
        key(&pool_scores[b])
            .total_cmp(&key(&pool_scores[a]))
            .then(pool_scores[a].query_id.cmp(&pool_scores[b].query_id))
    });
    Ok(order
        .into_iter()
        .take(batch_size)
        .map(|i| pool_scores[i].query_id)
        .collect())
}
