//! `run`: expands a config into jobs, executes them on a bounded pool and
//! merges the per-job result files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use claimscope_core::evaluation::report::{markdown_tables, read_results, write_results, ResultRow};
use claimscope_core::evaluation::pool_seed;
use claimscope_core::seed;
use claimscope_core::{
    load_corpus, load_embeddings, make_cv_splits, run_cross_domain, run_in_domain, run_lodo,
    Corpus, EmbeddingTable, ExperimentSpec, FeatureGroup, Protocol, SplitPlan, System,
};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Job {
    pub protocol: Protocol,
    pub system: System,
    pub sources: Vec<String>,
    pub target: String,
}

impl Job {
    pub fn id(&self) -> String {
        format!("{}__{}__{}__{}", self.protocol, self.system, self.sources.join("+"), self.target)
    }
}

/// Every (protocol, system, source, target) combination requested by the
/// config, in a fixed order.
pub fn expand_jobs(config: &RunConfig) -> Vec<Job> {
    let names: Vec<&String> = config.corpora.keys().collect();
    let mut jobs = Vec::new();
    for &protocol in &config.protocols {
        for &system in &config.systems {
            match protocol {
                Protocol::InDomain => {
                    for t in &names {
                        jobs.push(Job { protocol, system, sources: vec![t.to_string()], target: t.to_string() });
                    }
                }
                Protocol::CrossDomain => {
                    for s in &names {
                        for t in names.iter().filter(|t| *t != s) {
                            jobs.push(Job { protocol, system, sources: vec![s.to_string()], target: t.to_string() });
                        }
                    }
                }
                Protocol::Lodo if names.len() >= 2 => {
                    for t in &names {
                        let sources = names.iter().filter(|s| *s != t).map(|s| s.to_string()).collect();
                        jobs.push(Job { protocol, system, sources, target: t.to_string() });
                    }
                }
                Protocol::Lodo => {}
            }
        }
    }
    jobs
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Inputs shared by all jobs.
pub struct Inputs {
    pub corpora: BTreeMap<String, Corpus>,
    pub table: Option<EmbeddingTable>,
    pub digests: BTreeMap<String, String>,
    pub embeddings_digest: Option<String>,
}

impl Inputs {
    pub fn load(config: &RunConfig) -> Result<Inputs> {
        let mut corpora = BTreeMap::new();
        let mut digests = BTreeMap::new();
        for (name, path) in &config.corpora {
            let mut c = load_corpus(path).with_context(|| format!("corpus {name} ({})", path.display()))?;
            c.name = name.clone();
            digests.insert(name.clone(), sha256_file(path)?);
            corpora.insert(name.clone(), c);
        }
        let (table, embeddings_digest) = match &config.embeddings {
            Some(p) => (
                Some(load_embeddings(p).with_context(|| format!("embeddings {}", p.display()))?),
                Some(sha256_file(p)?),
            ),
            None => (None, None),
        };
        Ok(Inputs { corpora, table, digests, embeddings_digest })
    }
}

/// Hash of everything that determines the results: settings (not paths or
/// output location), input file contents and the library version.
pub fn config_hash(config: &RunConfig, inputs: &Inputs) -> String {
    #[derive(Serialize)]
    struct Hashed<'a> {
        version: &'a str,
        systems: &'a [System],
        protocols: &'a [Protocol],
        seed: u64,
        folds: usize,
        n_members: usize,
        keyword: &'a str,
        train: &'a claimscope_core::TrainConfig,
        cutoffs: &'a claimscope_core::Cutoffs,
        corpora: &'a BTreeMap<String, String>,
        embeddings: &'a Option<String>,
    }
    let h = Hashed {
        version: claimscope_core::VERSION,
        systems: &config.systems,
        protocols: &config.protocols,
        seed: config.seed,
        folds: config.folds,
        n_members: config.n_members,
        keyword: &config.keyword,
        train: &config.train,
        cutoffs: &config.cutoffs,
        corpora: &inputs.digests,
        embeddings: &inputs.embeddings_digest,
    };
    let json = serde_json::to_vec(&h).expect("config serializes");
    hex::encode(Sha256::digest(&json))[..16].to_string()
}

pub fn spec_for(config: &RunConfig, system: System) -> ExperimentSpec {
    ExperimentSpec {
        system,
        cutoffs: config.cutoffs,
        train: config.train.clone(),
        n_members: config.n_members,
        seed: config.seed,
        keyword: config.keyword.clone(),
    }
}

pub fn split_seed(config: &RunConfig, corpus: &str) -> u64 {
    seed::derive_str(config.seed, &format!("splits/{corpus}"))
}

fn run_job(
    job: &Job,
    config: &RunConfig,
    inputs: &Inputs,
    splits: &BTreeMap<String, SplitPlan>,
    hash: &str,
) -> Result<Vec<ResultRow>> {
    let spec = spec_for(config, job.system);
    let table = inputs.table.as_ref();
    let target = &inputs.corpora[&job.target];
    let system = job.system.to_string();
    let source = job.sources.join("+");
    Ok(match job.protocol {
        Protocol::InDomain => {
            let rep = run_in_domain(target, &spec, &splits[&job.target], table)?;
            let mut rows: Vec<ResultRow> = rep
                .folds
                .iter()
                .zip(&rep.fold_seeds)
                .enumerate()
                .map(|(f, (r, &s))| ResultRow::new(&system, job.protocol, &source, &job.target, Some(f), r, s, hash))
                .collect();
            rows.push(ResultRow::new(&system, job.protocol, &source, &job.target, None, &rep.pooled, spec.seed, hash));
            rows
        }
        Protocol::CrossDomain | Protocol::Lodo => {
            let rep = if job.protocol == Protocol::CrossDomain {
                run_cross_domain(&inputs.corpora[&job.sources[0]], target, &spec, table)?
            } else {
                let all: Vec<Corpus> = inputs.corpora.values().cloned().collect();
                run_lodo(&all, &job.target, &spec, table)?
            };
            let names: Vec<&str> = job.sources.iter().map(String::as_str).collect();
            let s = pool_seed(spec.seed, &names, &job.target);
            vec![ResultRow::new(&system, job.protocol, &source, &job.target, None, &rep, s, hash)]
        }
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct JobRecord {
    id: String,
    #[serde(flatten)]
    job: Job,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    cli_version: &'static str,
    core_version: &'static str,
    config_hash: &'a str,
    seed: u64,
    config: &'a RunConfig,
    corpus_sha256: &'a BTreeMap<String, String>,
    embeddings_sha256: &'a Option<String>,
    split_seeds: BTreeMap<String, u64>,
    jobs: Vec<JobRecord>,
}

pub struct RunSummary {
    pub out: PathBuf,
    pub rows: Vec<ResultRow>,
    pub failed: Vec<(String, String)>,
    pub reused: usize,
}

/// Runs every job of `config`. Completed jobs with a matching config hash
/// are reused from `out/jobs` unless `fresh` is set.
pub fn run(config: &RunConfig, fresh: bool) -> Result<RunSummary> {
    let inputs = Inputs::load(config)?;
    let hash = config_hash(config, &inputs);
    let out = config.out.clone();
    let jobs_dir = out.join("jobs");
    let splits_dir = out.join("splits");
    fs::create_dir_all(&jobs_dir).with_context(|| format!("creating {}", jobs_dir.display()))?;
    fs::create_dir_all(&splits_dir)?;

    if inputs.table.is_none()
        && config
            .systems
            .iter()
            .any(|s| matches!(s, System::LrAll) || matches!(s, System::LrMinus(g) if *g != FeatureGroup::Embedding))
    {
        log::warn!("no embedding table configured; LR_ALL and the ablations run without the embedding group");
    }

    let mut splits = BTreeMap::new();
    let mut split_seeds = BTreeMap::new();
    if config.protocols.contains(&Protocol::InDomain) {
        for (name, corpus) in &inputs.corpora {
            let s = split_seed(config, name);
            let plan = make_cv_splits(corpus, config.folds, s).with_context(|| format!("splitting {name}"))?;
            write_atomic(&splits_dir.join(format!("{name}.json")), &serde_json::to_vec_pretty(&plan)?)?;
            split_seeds.insert(name.clone(), s);
            splits.insert(name.clone(), plan);
        }
    }

    let jobs = expand_jobs(config);
    let outcomes: Vec<(Result<Vec<ResultRow>>, bool)> = jobs
        .par_iter()
        .map(|job| {
            let path = jobs_dir.join(format!("{}.csv", job.id()));
            let err_path = path.with_extension("error");
            if !fresh {
                if let Some(rows) = reusable(&path, &hash) {
                    return (Ok(rows), true);
                }
            }
            log::info!("running {}", job.id());
            let result = run_job(job, config, &inputs, &splits, &hash);
            let saved = match &result {
                Ok(rows) => {
                    let _ = fs::remove_file(&err_path);
                    let mut buf = Vec::new();
                    write_results(rows, &mut buf).map_err(anyhow::Error::from).and_then(|_| write_atomic(&path, &buf))
                }
                Err(e) => {
                    let _ = fs::remove_file(&path);
                    write_atomic(&err_path, format!("{e:#}\n").as_bytes())
                }
            };
            match saved {
                Ok(()) => (result, false),
                Err(e) => (Err(e), false),
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut failed = Vec::new();
    let mut records = Vec::new();
    let mut reused = 0;
    for (job, (result, was_reused)) in jobs.into_iter().zip(outcomes) {
        reused += usize::from(was_reused);
        let id = job.id();
        match result {
            Ok(r) => {
                rows.extend(r);
                records.push(JobRecord { id, job, status: "ok", error: None });
            }
            Err(e) => {
                let msg = format!("{e:#}");
                log::error!("job {id} failed: {msg}");
                failed.push((id.clone(), msg.clone()));
                records.push(JobRecord { id, job, status: "failed", error: Some(msg) });
            }
        }
    }

    let mut buf = Vec::new();
    write_results(&rows, &mut buf)?;
    write_atomic(&out.join("results.csv"), &buf)?;
    write_atomic(&out.join("tables.md"), markdown_tables(&rows).as_bytes())?;
    let manifest = Manifest {
        tool: "claimscope",
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: claimscope_core::VERSION,
        config_hash: &hash,
        seed: config.seed,
        config,
        corpus_sha256: &inputs.digests,
        embeddings_sha256: &inputs.embeddings_digest,
        split_seeds,
        jobs: records,
    };
    write_atomic(&out.join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(RunSummary { out, rows, failed, reused })
}

fn reusable(path: &Path, hash: &str) -> Option<Vec<ResultRow>> {
    let file = fs::File::open(path).ok()?;
    let rows = read_results(file).ok()?;
    (!rows.is_empty() && rows.iter().all(|r| r.config_hash == hash)).then_some(rows)
}

/// Reads the corpora of a config, failing with the first unreadable one.
pub fn load_config_corpora(config: &RunConfig) -> Result<Vec<Corpus>> {
    let inputs = Inputs::load(config)?;
    if inputs.corpora.is_empty() {
        bail!("config lists no corpora");
    }
    Ok(inputs.corpora.into_values().collect())
}
