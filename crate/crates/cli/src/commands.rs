use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use emofed::corpus::{explode, CategoryTable, EmojiCategory, Example, RawTweet, NUM_CATEGORIES};
use emofed::dataset::{class_counts, class_weights, resample, synth as generate, Labeled};
use emofed::fedsim::{run_experiment, Algorithm, FeaturizedSplits, PartitionMode, RoundLog};
use emofed::io::{read_jsonl, write_json, write_jsonl};
use emofed::metrics::{MetricsReport, Summary};
use emofed::model::{evaluate, init, sgd_train, TrainConfig};
use emofed::{Error, Result};

use crate::config::{Balancing, ExperimentConfig};
use crate::RunArgs;

pub const SPLIT_FILES: [&str; 3] = ["train.jsonl", "validation.jsonl", "test.jsonl"];
pub const CONFIG_FILE: &str = "config.json";
pub const INPUTS_FILE: &str = "inputs.json";
pub const CENTRAL_FILE: &str = "central.json";
pub const CELLS_DIR: &str = "cells";
pub const ROUNDS_FILE: &str = "rounds.jsonl";
pub const RESULT_FILE: &str = "result.json";

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Distribution {
    n: usize,
    counts: BTreeMap<String, usize>,
    /// Head class count over second-largest class count.
    head_ratio: f64,
}

fn distribution(examples: &[Example]) -> Distribution {
    let counts = class_counts(examples, NUM_CATEGORIES);
    let mut sorted = counts.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Distribution {
        n: examples.len(),
        counts: EmojiCategory::ALL
            .iter()
            .map(|c| (c.name().to_string(), counts[c.index()]))
            .collect(),
        head_ratio: if sorted[1] > 0 {
            sorted[0] as f64 / sorted[1] as f64
        } else {
            f64::INFINITY
        },
    }
}

pub fn synth(cfg: &ExperimentConfig, out: &Path, summary: Option<&Path>) -> Result<()> {
    let examples = generate(&cfg.synth, cfg.seed)?;
    ensure_parent(out)?;
    write_jsonl(out, &examples)?;
    let summary_path = summary.map_or_else(|| sibling(out, "summary.json"), Path::to_path_buf);
    let dist = distribution(&examples);
    write_json(&summary_path, &dist)?;
    println!("{}", serde_json::to_string(&dist).expect("summary serializes"));
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PrepCounts {
    pub tweets_in: usize,
    pub tweets_dropped_no_emoji: usize,
    pub examples_out: usize,
    pub unknown_emojis: usize,
    pub table_checksum: String,
}

pub fn prep(cfg: &ExperimentConfig, input: &Path, out: &Path, table: Option<&Path>, counts: Option<&Path>) -> Result<()> {
    let table = match table {
        Some(p) => CategoryTable::from_path(p)?,
        None => CategoryTable::bundled(),
    };
    let tweets: Vec<RawTweet> = read_jsonl(input)?;
    let mut examples = Vec::new();
    let mut stats = PrepCounts {
        tweets_in: tweets.len(),
        tweets_dropped_no_emoji: 0,
        examples_out: 0,
        unknown_emojis: 0,
        table_checksum: table.checksum().to_string(),
    };
    for t in &tweets {
        let exploded = explode(t, &table, cfg.normalize_mode);
        if exploded.examples.is_empty() {
            stats.tweets_dropped_no_emoji += 1;
        }
        stats.unknown_emojis += exploded.unknown_emojis;
        examples.extend(exploded.examples);
    }
    stats.examples_out = examples.len();
    ensure_parent(out)?;
    write_jsonl(out, &examples)?;
    write_json(&counts.map_or_else(|| sibling(out, "counts.json"), Path::to_path_buf), &stats)?;
    println!("{}", serde_json::to_string(&stats).expect("counts serialize"));
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitRecord {
    #[serde(flatten)]
    manifest: emofed::dataset::SplitManifest,
    input_sha256: String,
    files: BTreeMap<String, String>,
}

pub fn split(cfg: &ExperimentConfig, input: &Path, out_dir: &Path) -> Result<()> {
    let corpus: Vec<Example> = read_jsonl(input)?;
    let set = emofed::dataset::split(&corpus, cfg.seed, cfg.split.by_source)?;
    create_dir(out_dir)?;
    let mut files = BTreeMap::new();
    for (name, part) in SPLIT_FILES.iter().zip([&set.train, &set.validation, &set.test]) {
        let path = out_dir.join(name);
        write_jsonl(&path, part.iter())?;
        files.insert(name.to_string(), sha256_file(&path)?);
    }
    let record = SplitRecord {
        manifest: set.manifest(),
        input_sha256: sha256_file(input)?,
        files,
    };
    write_json(&out_dir.join("manifest.json"), &record)?;
    println!(
        "train {} / validation {} / test {}",
        set.train.len(),
        set.validation.len(),
        set.test.len()
    );
    Ok(())
}

struct Splits {
    train: Vec<Example>,
    validation: Vec<Example>,
    test: Vec<Example>,
    checksums: BTreeMap<String, String>,
}

fn load_splits(dir: &Path) -> Result<Splits> {
    let mut parts = Vec::new();
    let mut checksums = BTreeMap::new();
    for name in SPLIT_FILES {
        let path = dir.join(name);
        parts.push(read_jsonl::<Example>(&path)?);
        checksums.insert(name.to_string(), sha256_file(&path)?);
    }
    let test = parts.pop().unwrap();
    let validation = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    if train.is_empty() || validation.is_empty() || test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Splits {
        train,
        validation,
        test,
        checksums,
    })
}

/// Resolves the run directory and writes the config echo and input checksums.
fn prepare_run(command: &str, cfg: &ExperimentConfig, run: &RunArgs, splits: &Splits) -> Result<PathBuf> {
    let echo = serde_json::to_value(cfg).expect("config serializes");
    let dir = match &run.run_dir {
        Some(d) => d.clone(),
        None => {
            let mut h = Sha256::new();
            h.update(echo.to_string());
            for sum in splits.checksums.values() {
                h.update(sum);
            }
            let digest = format!("{:x}", h.finalize());
            run.runs_root.join(format!("{command}-{}", &digest[..12]))
        }
    };
    create_dir(&dir)?;
    write_json(&dir.join(CONFIG_FILE), &echo)?;
    write_json(&dir.join(INPUTS_FILE), &splits.checksums)?;
    Ok(dir)
}

fn balanced_train<T: Labeled + Clone>(train: &[T], balancing: Balancing, seed: u64) -> Result<Vec<T>> {
    match balancing {
        Balancing::Resample => resample(train, NUM_CATEGORIES, seed),
        _ => Ok(train.to_vec()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CentralEntry {
    pub balancing: Balancing,
    pub train_counts: Vec<usize>,
    pub validation: MetricsReport,
    pub test: MetricsReport,
}

pub fn central(cfg: &ExperimentConfig, run: &RunArgs) -> Result<()> {
    let splits = load_splits(&run.splits)?;
    let dir = prepare_run("central", cfg, run, &splits)?;
    let dim = cfg.model.dim;
    let arch = cfg.model.arch();
    let mut entries = Vec::new();
    for &balancing in &cfg.balancing {
        let train = balanced_train(&splits.train, balancing, cfg.seed)?;
        let data = FeaturizedSplits::from_examples(&train, &splits.validation, &splits.test, dim);
        let train_cfg = TrainConfig {
            learning_rate: cfg.central.learning_rate,
            batch_size: cfg.central.batch_size,
            local_epochs: cfg.central.epochs,
            mu: 0.0,
            class_weights: match balancing {
                Balancing::CostSensitive => Some(class_weights(&data.train, NUM_CATEGORIES)?),
                _ => None,
            },
            anchor: None,
        };
        let params = sgd_train(&init(arch, cfg.seed), &data.train, &train_cfg, cfg.seed)?;
        let entry = CentralEntry {
            balancing,
            train_counts: class_counts(&data.train, NUM_CATEGORIES),
            validation: evaluate(&params, &data.validation)?,
            test: evaluate(&params, &data.test)?,
        };
        eprintln!(
            "central {}: test weighted F1 {}",
            balancing.label(),
            emofed::metrics::percent(entry.test.f1)
        );
        entries.push(entry);
    }
    write_json(&dir.join(CENTRAL_FILE), &entries)?;
    println!("{}", dir.display());
    Ok(())
}

/// Written next to each cell's round log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub algorithm: Algorithm,
    pub balancing: Balancing,
    pub client_fraction: f64,
    pub partition: PartitionMode,
    pub initial_val: Summary,
    pub rounds_to_target: Option<usize>,
    pub test: MetricsReport,
}

pub fn cell_slug(algorithm: Algorithm, balancing: Balancing, fraction: f64, mode: PartitionMode) -> String {
    let alg = serde_json::to_value(algorithm).expect("enum serializes");
    let part = serde_json::to_value(mode).expect("enum serializes");
    format!(
        "{}-{}-c{:03}-{}",
        alg.as_str().unwrap_or("alg"),
        balancing.slug(),
        (fraction * 100.0).round() as u64,
        part.as_str().unwrap_or("part")
    )
}

pub fn fed(cfg: &ExperimentConfig, run: &RunArgs, workers: usize) -> Result<()> {
    let splits = load_splits(&run.splits)?;
    let dir = prepare_run("fed", cfg, run, &splits)?;
    let cells_dir = dir.join(CELLS_DIR);
    create_dir(&cells_dir)?;
    let dim = cfg.model.dim;
    for &balancing in &cfg.balancing {
        // Resampling happens once, before any partitioning.
        let train = balanced_train(&splits.train, balancing, cfg.seed)?;
        let data = FeaturizedSplits::from_examples(&train, &splits.validation, &splits.test, dim);
        let weights = match balancing {
            Balancing::CostSensitive => Some(class_weights(&data.train, NUM_CATEGORIES)?),
            _ => None,
        };
        for &algorithm in &cfg.fed.algorithms {
            for &fraction in &cfg.fed.client_fractions {
                for &mode in &cfg.fed.partitions {
                    let mut fc = cfg.fed_config(algorithm, fraction, mode);
                    fc.train.class_weights = weights.clone();
                    let slug = cell_slug(algorithm, balancing, fraction, mode);
                    let out = run_experiment(&fc, &data, workers)?;
                    let cell_dir = cells_dir.join(&slug);
                    create_dir(&cell_dir)?;
                    write_jsonl::<RoundLog, _>(&cell_dir.join(ROUNDS_FILE), &out.rounds)?;
                    let result = CellResult {
                        algorithm,
                        balancing,
                        client_fraction: fraction,
                        partition: mode,
                        initial_val: out.initial_val,
                        rounds_to_target: out.rounds_to_target,
                        test: out.test,
                    };
                    write_json(&cell_dir.join(RESULT_FILE), &result)?;
                    eprintln!("fed {slug}: test weighted F1 {}", emofed::metrics::percent(result.test.f1));
                }
            }
        }
    }
    println!("{}", dir.display());
    Ok(())
}
