//! Flat TOML configuration file shared by all subcommands.
//!
//! One document carries the run parameters, the committee grid, the
//! production-ranker hyperparameters, and the generator shape, so a
//! single file pins an entire experiment. Every key has a default and
//! unknown keys are rejected. Committee and production seeds are not
//! separate keys: they derive from the master `seed` by fixed offsets
//! (+2000 and +3000), and both trainers share `temperature`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use alrank::acquisition::Strategy;
use alrank::committee::CommitteeConfig;
use alrank::dataset::{BucketLabelProfile, SynthConfig};
use alrank::gbrank::TrainConfig;
use alrank::metrics::GainFn;
use alrank::simulator::ALConfig;

use crate::commands::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    // Annotation loop.
    pub base_size: usize,
    pub batch_size: usize,
    pub cycles: usize,
    pub quota: usize,
    pub alpha: f64,
    pub temperature: f64,
    pub strategy: Strategy,
    pub eval_k: usize,
    pub gain: GainFn,
    pub seed: u64,
    // Committee grid.
    pub committee_tree_counts: Vec<usize>,
    pub committee_depths: Vec<usize>,
    pub committee_shrinkage: f64,
    pub committee_min_samples_leaf: usize,
    // Production ranker.
    pub production_num_trees: usize,
    pub production_max_depth: usize,
    pub production_shrinkage: f64,
    pub production_min_samples_leaf: usize,
    // Synthetic generator.
    pub gen_queries: usize,
    pub gen_docs: usize,
    pub gen_dim: usize,
    pub gen_noise: f64,
    pub gen_profile: BucketLabelProfile,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        let al = ALConfig::default();
        let synth = SynthConfig::default();
        RunConfigFile {
            base_size: al.base_size,
            batch_size: al.batch_size,
            cycles: al.cycles,
            quota: al.quota,
            alpha: al.alpha,
            temperature: al.temperature,
            strategy: al.strategy,
            eval_k: al.eval_k,
            gain: al.gain,
            seed: al.seed,
            committee_tree_counts: al.committee.tree_counts,
            committee_depths: al.committee.depths,
            committee_shrinkage: al.committee.shrinkage,
            committee_min_samples_leaf: al.committee.min_samples_leaf,
            production_num_trees: al.production.num_trees,
            production_max_depth: al.production.max_depth,
            production_shrinkage: al.production.shrinkage,
            production_min_samples_leaf: al.production.min_samples_leaf,
            gen_queries: synth.num_queries,
            gen_docs: synth.docs_per_query,
            gen_dim: synth.feature_dim,
            gen_noise: synth.noise_scale,
            gen_profile: synth.profile,
        }
    }
}

impl RunConfigFile {
    /// Reads and parses a config file; unknown keys or bad values are
    /// usage errors, an unreadable path is a data error.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Loads `path` when given, otherwise starts from defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    /// Effective configuration as TOML; re-ingesting it reproduces the
    /// same run.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn to_al_config(&self) -> ALConfig {
        ALConfig {
            base_size: self.base_size,
            batch_size: self.batch_size,
            cycles: self.cycles,
            quota: self.quota,
            alpha: self.alpha,
            temperature: self.temperature,
            strategy: self.strategy,
            eval_k: self.eval_k,
            gain: self.gain,
            seed: self.seed,
            committee: self.to_committee_config(),
            production: self.to_production_config(),
        }
    }

    pub fn to_committee_config(&self) -> CommitteeConfig {
        CommitteeConfig {
            tree_counts: self.committee_tree_counts.clone(),
            depths: self.committee_depths.clone(),
            shrinkage: self.committee_shrinkage,
            min_samples_leaf: self.committee_min_samples_leaf,
            temperature: self.temperature,
            seed: self.seed + 2000,
        }
    }

    pub fn to_production_config(&self) -> TrainConfig {
        TrainConfig {
            num_trees: self.production_num_trees,
            max_depth: self.production_max_depth,
            shrinkage: self.production_shrinkage,
            min_samples_leaf: self.production_min_samples_leaf,
            temperature: self.temperature,
            seed: self.seed + 3000,
        }
    }

    pub fn to_synth_config(&self) -> SynthConfig {
        SynthConfig {
            num_queries: self.gen_queries,
            docs_per_query: self.gen_docs,
            feature_dim: self.gen_dim,
            noise_scale: self.gen_noise,
            profile: self.gen_profile.clone(),
        }
    }
}
