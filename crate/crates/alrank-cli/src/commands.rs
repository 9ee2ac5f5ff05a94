//! Subcommand implementations and the exit-code policy.
//!
//! Exit codes: 0 success, 1 usage or configuration-value errors, 2 data
//! errors (unreadable or malformed inputs), 3 runtime errors (training
//! failures, unwritable outputs).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use alrank::committee::{train_committee, Committee};
use alrank::dataset::{parse_letor_with_stats, serialize_letor, Corpus, QueryGroup};
use alrank::gbrank::{train, GBRankModel};
use alrank::metrics::{
    bucket_distribution, evaluate_ranking, label_distribution, rank_by_scores, GainFn,
};
use alrank::simulator::{correlation_study, run_active_learning, RunReport, StudyConfig};
use alrank::Error;

use crate::config::RunConfigFile;
use crate::{AnalyzeArgs, EvalArgs, GenArgs, ReportArgs, RunArgs};

/// Process-level error carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration values; exits 1.
    Usage(String),
    /// Missing or malformed input data; exits 2.
    Data(String),
    /// Failure while computing or writing results; exits 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match &err {
            Error::InvalidConfig(_) => CliError::Usage(err.to_string()),
            Error::Malformed { .. }
            | Error::DimMismatch { .. }
            | Error::EmptyInput
            | Error::EmptyPairSet
            | Error::BadAnnotation { .. }
            | Error::CorpusOverlap { .. } => CliError::Data(err.to_string()),
            _ => CliError::Runtime(err.to_string()),
        }
    }
}

fn read_corpus(path: &Path) -> Result<Corpus, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let (corpus, stats) = parse_letor_with_stats(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if stats.clamped_labels > 0 {
        eprintln!(
            "warning: {}: clamped {} out-of-range labels to 4",
            path.display(),
            stats.clamped_labels
        );
    }
    Ok(corpus)
}

/// Writes an output artifact, creating parent directories as needed.
fn write_artifact(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{what} {}: {e}", path.display())))
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let mut file = RunConfigFile::load_or_default(args.config.as_deref())?;
    if let Some(v) = args.queries {
        file.gen_queries = v;
    }
    if let Some(v) = args.docs {
        file.gen_docs = v;
    }
    if let Some(v) = args.dim {
        file.gen_dim = v;
    }
    if let Some(v) = args.noise {
        file.gen_noise = v;
    }
    if let Some(v) = args.seed {
        file.seed = v;
    }
    let val_queries = args.val_queries.unwrap_or(0);
    if args.val_queries == Some(0) {
        return Err(CliError::Usage("--val-queries must be at least 1".into()));
    }
    let mut synth = file.to_synth_config();
    // The primary slice alone must satisfy the generator minimums; the
    // validation slice is extra queries from the same corpus, so both
    // files share one latent relevance direction.
    synth.validate()?;
    synth.num_queries += val_queries;
    let mut corpus = alrank::dataset::gen_synthetic(&synth, file.seed)?;
    if args.qid_offset > 0 {
        for group in &mut corpus.queries {
            group.query_id = group.query_id.checked_add(args.qid_offset).ok_or_else(|| {
                CliError::Usage(format!(
                    "--qid-offset {} overflows query id {}",
                    args.qid_offset, group.query_id
                ))
            })?;
        }
    }
    if let Some(val_out) = &args.val_out {
        let validation = Corpus {
            feature_dim: corpus.feature_dim,
            queries: corpus.queries.split_off(file.gen_queries),
            provenance: corpus.provenance,
        };
        write_artifact(val_out, &serialize_letor(&validation))?;
        println!(
            "wrote {} queries ({} docs, {} features) to {}",
            validation.queries.len(),
            validation.num_docs(),
            validation.feature_dim,
            val_out.display()
        );
    }
    write_artifact(&args.out, &serialize_letor(&corpus))?;
    println!(
        "wrote {} queries ({} docs, {} features) to {}",
        corpus.queries.len(),
        corpus.num_docs(),
        corpus.feature_dim,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut file = RunConfigFile::load_or_default(args.config.as_deref())?;
    apply_run_flags(&mut file, args);
    if args.print_config {
        print!("{}", file.to_toml());
        return Ok(());
    }
    let pool_path = args
        .pool
        .as_deref()
        .ok_or_else(|| CliError::Usage("--pool is required".into()))?;
    let val_path = args
        .val
        .as_deref()
        .ok_or_else(|| CliError::Usage("--val is required".into()))?;
    let pool = read_corpus(pool_path)?;
    let validation = read_corpus(val_path)?;
    let config = file.to_al_config();

    let mut report = run_active_learning(&pool, &validation, &config)?;
    report.meta.generated_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    let json_path = format!("{}.json", args.out);
    let csv_path = format!("{}.csv", args.out);
    write_artifact(Path::new(&json_path), &to_pretty_json(&report))?;
    write_artifact(Path::new(&csv_path), &report.cycles_csv())?;
    println!(
        "run complete: {} cycles, {} labeled, mean dcg {:.4}, mean r01 {:.4}",
        report.cycles.len(),
        report.cycles.last().map_or(config.base_size, |c| c.labeled),
        report.mean_dcg(),
        report.mean_r01()
    );
    println!("wrote {json_path}");
    println!("wrote {csv_path}");

    // Artifacts for `analyze` and `eval`: models trained on the full
    // pool with the same derived configs the run used.
    let all_groups: Vec<&QueryGroup> = pool.queries.iter().collect();
    if let Some(path) = &args.save_committee {
        let committee = train_committee(&all_groups, &config.committee)?;
        write_artifact(path, &to_pretty_json(&committee))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.save_model {
        let model = train(&all_groups, &config.production)?;
        write_artifact(path, &to_pretty_json(&model))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn apply_run_flags(file: &mut RunConfigFile, args: &RunArgs) {
    if let Some(v) = args.base {
        file.base_size = v;
    }
    if let Some(v) = args.bs {
        file.batch_size = v;
    }
    if let Some(v) = args.cycles {
        file.cycles = v;
    }
    if let Some(v) = args.quota {
        file.quota = v;
    }
    if let Some(v) = args.alpha {
        file.alpha = v;
    }
    if let Some(v) = args.temperature {
        file.temperature = v;
    }
    if let Some(v) = args.strategy {
        file.strategy = v;
    }
    if let Some(v) = args.eval_k {
        file.eval_k = v;
    }
    if let Some(v) = args.gain {
        file.gain = v;
    }
    if let Some(v) = args.seed {
        file.seed = v;
    }
}

#[derive(Debug, Serialize)]
struct CorrelationSummary {
    queries: usize,
    eval_k: usize,
    gain: GainFn,
    corr_lv_pv: Option<f64>,
    corr_bestdcg_lv: Option<f64>,
    corr_bestdcg_pv: Option<f64>,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let mut file = RunConfigFile::load_or_default(args.config.as_deref())?;
    if let Some(v) = args.eval_k {
        file.eval_k = v;
    }
    if let Some(v) = args.gain {
        file.gain = v;
    }
    let corpus = read_corpus(&args.data)?;
    let committee: Committee = read_json(&args.committee, "committee")?;
    let study = correlation_study(
        &corpus,
        &committee,
        &StudyConfig {
            eval_k: file.eval_k,
            gain: file.gain,
        },
    )?;

    let mut correlation = String::from("query_id,lv,pv,best_dcg\n");
    for row in &study.rows {
        let _ = writeln!(
            correlation,
            "{},{},{},{}",
            row.query_id, row.lv, row.pv, row.best_dcg
        );
    }

    let buckets = bucket_distribution(corpus.queries.iter());
    let mut bucket_csv = String::from("bucket,queries\n");
    for (bucket, count) in buckets.iter().enumerate() {
        let _ = writeln!(bucket_csv, "{bucket},{count}");
    }

    let labels = label_distribution(corpus.queries.iter());
    let mut label_csv = String::from("bucket,label,count\n");
    for (bucket, row) in labels.iter().enumerate() {
        for (label, count) in row.iter().enumerate() {
            let _ = writeln!(label_csv, "{bucket},{label},{count}");
        }
    }

    let summary = CorrelationSummary {
        queries: study.rows.len(),
        eval_k: file.eval_k,
        gain: file.gain,
        corr_lv_pv: study.corr_lv_pv,
        corr_bestdcg_lv: study.corr_bestdcg_lv,
        corr_bestdcg_pv: study.corr_bestdcg_pv,
    };

    for (name, contents) in [
        ("correlation.csv", correlation),
        ("bucket_distribution.csv", bucket_csv),
        ("label_distribution.csv", label_csv),
        ("correlation_summary.json", to_pretty_json(&summary)),
    ] {
        let path = args.out.join(name);
        write_artifact(&path, &contents)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalSummary {
    queries: usize,
    eval_k: usize,
    gain: GainFn,
    mean_dcg: f64,
    mean_best_dcg: f64,
    mean_r01: f64,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let model: GBRankModel = read_json(&args.model, "model")?;
    let corpus = read_corpus(&args.data)?;
    let mut dcg = 0.0;
    let mut best = 0.0;
    let mut r01 = 0.0;
    for group in &corpus.queries {
        let scores = model.predict_group(group)?;
        let labels = group.labels();
        let ranked: Vec<u8> = rank_by_scores(&scores)
            .into_iter()
            .map(|j| labels[j])
            .collect();
        let eval = evaluate_ranking(&ranked, args.k, args.gain);
        dcg += eval.dcg;
        best += eval.best_dcg;
        r01 += eval.r01;
    }
    let n = corpus.queries.len() as f64;
    let summary = EvalSummary {
        queries: corpus.queries.len(),
        eval_k: args.k,
        gain: args.gain,
        mean_dcg: dcg / n,
        mean_best_dcg: best / n,
        mean_r01: r01 / n,
    };
    emit_json(args.out.as_deref(), &summary)
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let mut report: RunReport = read_json(&args.run, "run report")?;
    let baseline: RunReport = read_json(&args.baseline, "baseline report")?;
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| baseline.config.strategy.to_string());
    let delta = report.delta_vs(&name, &baseline);
    println!(
        "vs {name}: mean dcg {:+.2}%, mean r01 {:+.2}%, final valid pairs {:+.2}%, final neg-pos pairs {:+.2}%",
        delta.mean_dcg_pct,
        delta.mean_r01_pct,
        delta.final_valid_pairs_pct,
        delta.final_neg_pos_pairs_pct
    );
    report.baseline_delta = Some(delta);
    emit_json(args.out.as_deref(), &report)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = to_pretty_json(value);
    match out {
        Some(path) => {
            write_artifact(path, &text)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
