//! `analyze`: corpus similarity, the cross-domain regression and pairwise
//! significance tests over a results CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use claimscope_core::evaluation::report::{read_results, ResultRow};
use claimscope_core::stats::{build_regression_input, ols_with_aliasing, RegressionResult};
use claimscope_core::{compare_systems, corpus_stats, Corpus, Protocol, SimilarityMatrix, System};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct RegressionCsvRow {
    pub system: String,
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub aliased: bool,
    pub r_squared: f64,
    pub df_residual: usize,
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct SignificanceRow {
    pub system_a: String,
    pub system_b: String,
    pub protocol: Protocol,
    pub pairing: &'static str,
    pub metric: &'static str,
    pub n_pairs: usize,
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub exact: bool,
    pub significant: bool,
}

pub struct Analysis {
    pub similarity: SimilarityMatrix,
    pub regressions: BTreeMap<String, RegressionResult>,
    pub significance: Vec<SignificanceRow>,
}

/// Macro-F1 per (source, target) for one system's overall cross-domain rows.
fn cross_domain_scores(rows: &[ResultRow], system: &str) -> BTreeMap<(String, String), f64> {
    rows.iter()
        .filter(|r| r.protocol == Protocol::CrossDomain && r.is_overall() && r.system == system)
        .map(|r| ((r.source.clone(), r.target.clone()), r.macro_f1))
        .collect()
}

type PairKey = (String, String, String);

fn paired(rows: &[ResultRow], system: &str, protocol: Protocol, claim: bool) -> BTreeMap<PairKey, f64> {
    rows.iter()
        .filter(|r| r.system == system && r.protocol == protocol)
        // in-domain pairs per fold, the other protocols per dataset cell
        .filter(|r| (protocol == Protocol::InDomain) != r.is_overall())
        .map(|r| {
            let key = (r.source.clone(), r.target.clone(), r.fold.clone());
            (key, if claim { r.claim_f1 } else { r.macro_f1 })
        })
        .collect()
}

pub fn analyze(rows: &[ResultRow], corpora: &[Corpus], config: &RunConfig) -> Result<Analysis> {
    let similarity = SimilarityMatrix::compute(corpora, config.analysis.top_lemmas)?;
    let stats: BTreeMap<String, _> = corpora.iter().map(|c| (c.name.clone(), corpus_stats(c))).collect();

    let systems: Vec<String> = match &config.analysis.systems {
        Some(s) => s.iter().map(System::to_string).collect(),
        None => {
            let mut seen = BTreeSet::new();
            rows.iter()
                .filter(|r| r.protocol == Protocol::CrossDomain)
                .filter(|r| seen.insert(r.system.clone()))
                .map(|r| r.system.clone())
                .collect()
        }
    };
    let mut regressions = BTreeMap::new();
    for system in &systems {
        let scores = cross_domain_scores(rows, system);
        let input = build_regression_input(&scores, &similarity, &stats)
            .with_context(|| format!("regression input for {system}"))?;
        let fit = ols_with_aliasing(&input).with_context(|| format!("regression for {system}"))?;
        if !fit.aliased.is_empty() {
            log::info!("{system}: aliased terms {:?}", fit.aliased);
        }
        regressions.insert(system.clone(), fit);
    }

    let mut significance = Vec::new();
    for (a, b) in &config.analysis.compare {
        let (a, b) = (a.to_string(), b.to_string());
        for protocol in [Protocol::InDomain, Protocol::CrossDomain, Protocol::Lodo] {
            for (metric, claim) in [("macro_f1", false), ("claim_f1", true)] {
                let pa = paired(rows, &a, protocol, claim);
                let pb = paired(rows, &b, protocol, claim);
                if pa.is_empty() && pb.is_empty() {
                    continue;
                }
                let cmp = compare_systems(&pa, &pb)
                    .with_context(|| format!("comparing {a} and {b} under {protocol}"))?;
                significance.push(SignificanceRow {
                    system_a: a.clone(),
                    system_b: b.clone(),
                    protocol,
                    pairing: if protocol == Protocol::InDomain { "fold" } else { "dataset" },
                    metric,
                    n_pairs: pa.len(),
                    n_effective: cmp.test.n_effective,
                    w_plus: cmp.test.w_plus,
                    w_minus: cmp.test.w_minus,
                    p_value: cmp.test.p_value,
                    exact: cmp.test.exact,
                    significant: cmp.significant,
                });
            }
        }
    }
    Ok(Analysis { similarity, regressions, significance })
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn regression_rows(analysis: &Analysis) -> Vec<RegressionCsvRow> {
    analysis
        .regressions
        .iter()
        .flat_map(|(system, fit)| {
            fit.coefficients.iter().map(move |c| RegressionCsvRow {
                system: system.clone(),
                term: c.name.clone(),
                estimate: c.estimate,
                std_error: c.std_error,
                t_stat: c.t_stat,
                p_value: c.p_value,
                aliased: fit.aliased.contains(&c.name),
                r_squared: fit.r_squared,
                df_residual: fit.df_residual,
                n: fit.residuals.len(),
            })
        })
        .collect()
}

pub fn write_analysis(analysis: &Analysis, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("similarity.csv"), analysis.similarity.to_csv())?;
    fs::write(out.join("similarity.md"), analysis.similarity.to_markdown())?;
    write_csv(
        &out.join("regression.csv"),
        &["system", "term", "estimate", "std_error", "t_stat", "p_value", "aliased", "r_squared", "df_residual", "n"],
        &regression_rows(analysis),
    )?;
    write_csv(
        &out.join("significance.csv"),
        &[
            "system_a", "system_b", "protocol", "pairing", "metric", "n_pairs", "n_effective", "w_plus",
            "w_minus", "p_value", "exact", "significant",
        ],
        &analysis.significance,
    )?;
    Ok(())
}

pub fn read_results_file(path: &Path) -> Result<Vec<ResultRow>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_results(f).map_err(|e| anyhow!("{}: {e}", path.display()))
}
