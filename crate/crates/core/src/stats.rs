//! Statistical analysis of results: Wilcoxon signed-rank comparisons,
//! Spearman similarity of lemma distributions, and the least-squares
//! regression of cross-domain scores on similarity, training size and the
//! target's class ratio.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::corpus::{Corpus, DatasetStats};
use crate::error::{invalid, Error, Result};

/// Average (fractional) ranks, 1-based.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid(format!("spearman: lengths {} and {} differ", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(invalid("spearman needs at least 3 observations"));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    if rx == ry && rx.iter().any(|&r| r != rx[0]) {
        return Ok(1.0);
    }
    pearson(&rx, &ry).ok_or_else(|| Error::UndefinedCorrelation("constant input vector".into()))
}

/// Lemma frequencies of a corpus (lemma falls back to the lowercased surface).
pub fn lemma_counts(corpus: &Corpus) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for s in corpus.sentences() {
        for t in &s.tokens {
            *counts.entry(t.lemma_or_lower()).or_insert(0) += 1;
        }
    }
    counts
}

/// The `top_k` most frequent lemmas, ties at equal counts broken
/// lexicographically.
pub fn top_lemmas(counts: &HashMap<String, usize>, top_k: usize) -> Vec<String> {
    let mut ranked: Vec<(&String, usize)> = counts.iter().map(|(k, &c)| (k, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(top_k).map(|(k, _)| k.clone()).collect()
}

pub const DEFAULT_TOP_LEMMAS: usize = 500;

/// Spearman correlation between the source and target frequencies of the
/// source's `top_k` most frequent lemmas (absent in target = 0).
pub fn lemma_similarity(source: &Corpus, target: &Corpus, top_k: usize) -> Result<f64> {
    let sc = lemma_counts(source);
    if sc.len() < top_k {
        log::warn!(
            "{} has only {} distinct lemmas, fewer than {top_k}; using all",
            source.name,
            sc.len()
        );
    }
    let vocab = top_lemmas(&sc, top_k);
    let tc = lemma_counts(target);
    let x: Vec<f64> = vocab.iter().map(|l| sc[l] as f64).collect();
    let y: Vec<f64> = vocab.iter().map(|l| tc.get(l).copied().unwrap_or(0) as f64).collect();
    spearman(&x, &y)
}

/// Source-by-target Spearman similarities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimilarityMatrix {
    pub names: Vec<String>,
    pub values: BTreeMap<(String, String), f64>,
}

impl SimilarityMatrix {
    pub fn compute(corpora: &[Corpus], top_k: usize) -> Result<SimilarityMatrix> {
        let mut values = BTreeMap::new();
        for s in corpora {
            for t in corpora {
                let rho = if s.name == t.name { 1.0 } else { lemma_similarity(s, t, top_k)? };
                values.insert((s.name.clone(), t.name.clone()), rho);
            }
        }
        Ok(SimilarityMatrix {
            names: corpora.iter().map(|c| c.name.clone()).collect(),
            values,
        })
    }

    pub fn get(&self, source: &str, target: &str) -> Option<f64> {
        self.values.get(&(source.to_string(), target.to_string())).copied()
    }

    /// CSV at full precision: header row of targets, one row per source.
    pub fn to_csv(&self) -> String {
        let mut out = format!("source,{}\n", self.names.join(","));
        for s in &self.names {
            let cells: Vec<String> = self
                .names
                .iter()
                .map(|t| self.get(s, t).map(|v| v.to_string()).unwrap_or_default())
                .collect();
            out.push_str(&format!("{s},{}\n", cells.join(",")));
        }
        out
    }

    /// Markdown heatmap in integer percent.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("| source \\ target | {} |\n|---|", self.names.join(" | "));
        out.push_str(&"---:|".repeat(self.names.len()));
        out.push('\n');
        for s in &self.names {
            let cells: Vec<String> = self
                .names
                .iter()
                .map(|t| self.get(s, t).map(|v| format!("{:.0}", 100.0 * v)).unwrap_or_default())
                .collect();
            out.push_str(&format!("| {s} | {} |\n", cells.join(" | ")));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// regression

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub source: String,
    pub target: String,
    /// Macro-F1 of training on `source` and testing on `target`.
    pub y: f64,
    pub similarity: f64,
    pub log_source_claims: f64,
    /// Claims per non-claim in the target.
    pub target_claim_ratio: f64,
}

/// Design for `y_st = a*T5_st + b*log(#C_s) + c*R_t + sum_sigma d_sigma 1[s = sigma] + e_st`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionInput {
    pub rows: Vec<RegressionRow>,
    pub sources: Vec<String>,
}

pub const TERM_SIMILARITY: &str = "alpha_similarity";
pub const TERM_LOG_CLAIMS: &str = "beta_log_source_claims";
pub const TERM_RATIO: &str = "gamma_target_ratio";

impl RegressionInput {
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![TERM_SIMILARITY.to_string(), TERM_LOG_CLAIMS.to_string(), TERM_RATIO.to_string()];
        names.extend(self.sources.iter().map(|s| format!("source_{s}")));
        names
    }

    pub fn design(&self) -> (DMatrix<f64>, DVector<f64>) {
        let p = 3 + self.sources.len();
        let x = DMatrix::from_fn(self.rows.len(), p, |i, j| {
            let r = &self.rows[i];
            match j {
                0 => r.similarity,
                1 => r.log_source_claims,
                2 => r.target_claim_ratio,
                _ => f64::from(r.source == self.sources[j - 3]),
            }
        });
        let y = DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.y));
        (x, y)
    }
}

/// One row per ordered pair `(s, t)`, `s != t`, of the corpora in `stats`.
/// `scores` maps `(source, target)` to Macro-F1.
pub fn build_regression_input(
    scores: &BTreeMap<(String, String), f64>,
    sim: &SimilarityMatrix,
    stats: &BTreeMap<String, DatasetStats>,
) -> Result<RegressionInput> {
    let names: Vec<String> = stats.keys().cloned().collect();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for s in &names {
        for t in &names {
            if s == t {
                continue;
            }
            let key = (s.clone(), t.clone());
            let (Some(&y), Some(t5)) = (scores.get(&key), sim.get(s, t)) else {
                missing.push(format!("({s},{t})"));
                continue;
            };
            let claims = stats[s].n_claims;
            if claims == 0 {
                return Err(invalid(format!("source {s} has no claims; log(#C) undefined")));
            }
            rows.push(RegressionRow {
                source: s.clone(),
                target: t.clone(),
                y,
                similarity: t5,
                log_source_claims: (claims as f64).ln(),
                target_claim_ratio: stats[t].claims_to_non_claims(),
            });
        }
    }
    if !missing.is_empty() {
        return Err(invalid(format!("missing cross-domain cells: {}", missing.join(", "))));
    }
    Ok(RegressionInput { rows, sources: names })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub df_residual: usize,
    /// Columns dropped because they lie in the span of earlier columns.
    pub aliased: Vec<String>,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Columns (by index) that are linear combinations of earlier columns,
/// found by modified Gram-Schmidt.
fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm0 = col.norm();
        let mut v = col;
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        // second pass for numerical stability
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let n = v.norm();
        if norm0 == 0.0 || n <= 1e-10 * norm0 {
            dependent.push(j);
        } else {
            basis.push(v / n);
        }
    }
    dependent
}

/// Ordinary least squares with classical inference on an explicit design.
/// With `allow_aliasing`, columns in the span of earlier ones are dropped
/// and reported (NaN estimates) instead of failing.
pub fn ols_matrix(
    names: &[String],
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    allow_aliasing: bool,
) -> Result<RegressionResult> {
    if names.len() != x.ncols() || y.len() != x.nrows() {
        return Err(invalid("design dimensions do not match names / response"));
    }
    let dependent = dependent_columns(x);
    if !dependent.is_empty() && !allow_aliasing {
        return Err(Error::RankDeficient {
            columns: dependent.iter().map(|&j| names[j].clone()).collect(),
        });
    }
    let kept: Vec<usize> = (0..x.ncols()).filter(|j| !dependent.contains(j)).collect();
    let xk = x.select_columns(&kept);
    let (n, p) = (xk.nrows(), xk.ncols());
    if n <= p {
        return Err(invalid(format!("{n} observations leave no residual degrees of freedom for {p} columns")));
    }
    let qr = xk.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient { columns: vec!["<numerically singular>".into()] })?;
    let residuals = y - &xk * &beta;
    let rss = residuals.norm_squared();
    let df = n - p;
    let sigma2 = rss / df as f64;
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient { columns: vec!["<numerically singular>".into()] })?;
    let cov_unscaled = &r_inv * r_inv.transpose();
    let tdist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    let ybar = y.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let mut coefficients = Vec::with_capacity(names.len());
    let mut k = 0;
    for (j, name) in names.iter().enumerate() {
        if dependent.contains(&j) {
            coefficients.push(Coefficient {
                name: name.clone(),
                estimate: f64::NAN,
                std_error: f64::NAN,
                t_stat: f64::NAN,
                p_value: f64::NAN,
            });
            continue;
        }
        let est = beta[k];
        let se = (sigma2 * cov_unscaled[(k, k)]).max(0.0).sqrt();
        let (t, pv) = if se > 0.0 {
            let t = est / se;
            (t, (2.0 * tdist.sf(t.abs())).min(1.0))
        } else if est == 0.0 {
            (0.0, 1.0)
        } else {
            (est.signum() * f64::INFINITY, 0.0)
        };
        coefficients.push(Coefficient { name: name.clone(), estimate: est, std_error: se, t_stat: t, p_value: pv });
        k += 1;
    }
    Ok(RegressionResult {
        coefficients,
        residuals: residuals.iter().copied().collect(),
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 0.0 },
        df_residual: df,
        aliased: dependent.iter().map(|&j| names[j].clone()).collect(),
    })
}

/// Fits the regression model; fails on a rank-deficient design.
pub fn ols(input: &RegressionInput) -> Result<RegressionResult> {
    let (x, y) = input.design();
    ols_matrix(&input.column_names(), &x, &y, false)
}

/// Like [`ols`], but drops columns that lie in the span of earlier columns.
///
/// On a complete source/target grid `log(#C_s)` is constant per source and
/// hence a combination of the source indicators; the last indicator is the
/// one dropped.
pub fn ols_with_aliasing(input: &RegressionInput) -> Result<RegressionResult> {
    let (x, y) = input.design();
    ols_matrix(&input.column_names(), &x, &y, true)
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub exact: bool,
    /// No nonzero differences; p is 1 by convention.
    pub degenerate: bool,
}

/// Largest effective sample size handled by exact enumeration.
pub const EXACT_MAX_N: usize = 20;

/// Exact two-sided p-value of observing `w_plus` (given as twice the rank
/// sum) under the sign-flip null, for doubled ranks `ranks2`.
fn exact_p(ranks2: &[u64], w2: u64) -> f64 {
    let total: u64 = ranks2.iter().sum();
    let mut dist = vec![0u64; total as usize + 1];
    dist[0] = 1;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if dist[s] != 0 {
                dist[s + r] += dist[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(ranks2.len() as i32);
    let upper: u64 = dist[w2 as usize..].iter().sum();
    let lower: u64 = dist[..=w2 as usize].iter().sum();
    (2.0 * upper.min(lower) as f64 / all).min(1.0)
}

/// Two-sided signed-rank test on paired samples. Zero differences are
/// dropped; ties get average ranks. Exact (by enumerating the sign-flip
/// distribution) up to [`EXACT_MAX_N`] nonzero pairs, otherwise the normal
/// approximation with tie and continuity corrections.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(invalid(format!("wilcoxon: lengths {} and {} differ", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(invalid("wilcoxon needs at least one pair"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&v| v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n_effective: 0,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            exact: true,
            degenerate: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    // fold from +0.0: an empty f64 sum is -0.0
    let w_plus = ranks.iter().zip(&d).filter(|(_, &v)| v > 0.0).fold(0.0, |acc, (r, _)| acc + r);
    let w_minus = ranks.iter().zip(&d).filter(|(_, &v)| v < 0.0).fold(0.0, |acc, (r, _)| acc + r);
    let nf = n as f64;
    let (p_value, exact) = if n <= EXACT_MAX_N {
        let ranks2: Vec<u64> = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
        (exact_p(&ranks2, (2.0 * w_plus).round() as u64), true)
    } else {
        let mut ties = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            ties += t * t * t - t;
            i = j + 1;
        }
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        if var <= 0.0 {
            (1.0, false)
        } else {
            let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
            let normal = Normal::standard();
            ((2.0 * normal.sf(z)).min(1.0), false)
        }
    };
    Ok(WilcoxonResult { n_effective: n, w_plus, w_minus, p_value, exact, degenerate: false })
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub test: WilcoxonResult,
    pub significant: bool,
}

/// Pairs two systems' F1 scores by key and runs the signed-rank test.
/// The key sets must be identical.
pub fn compare_systems<K: Ord + Debug>(
    a: &BTreeMap<K, f64>,
    b: &BTreeMap<K, f64>,
) -> Result<Comparison> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        let only_a: Vec<&K> = a.keys().filter(|k| !b.contains_key(k)).collect();
        let only_b: Vec<&K> = b.keys().filter(|k| !a.contains_key(k)).collect();
        return Err(invalid(format!(
            "pairing mismatch: only in first {only_a:?}, only in second {only_b:?}"
        )));
    }
    let xs: Vec<f64> = a.values().copied().collect();
    let ys: Vec<f64> = b.values().copied().collect();
    let test = wilcoxon_signed_rank(&xs, &ys)?;
    Ok(Comparison {
        significant: !test.degenerate && test.p_value <= SIGNIFICANCE_LEVEL,
        test,
    })
}
