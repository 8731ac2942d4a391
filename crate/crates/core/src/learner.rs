//! L2-regularized logistic regression and the downsampling ensemble.
//!
//! The objective over parameters `(w, b)` is
//!
//! ```text
//! J(w, b) = sum_i log(1 + exp(-y_i (w . x_i + b))) + lambda/2 |w|^2
//! ```
//!
//! with the bias left unpenalized. It is minimized full-batch with L-BFGS and
//! an Armijo backtracking line search, so a fit is a deterministic function of
//! its inputs.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{downsample_indices, Label};
use crate::error::{invalid, Error, Result};
use crate::features::{FeatureSpace, SparseVector};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub max_iterations: usize,
    /// Stop once the max-norm of the gradient falls below this value.
    pub gradient_tolerance: f64,
    pub seed: u64,
    /// Standardize non-binary columns (count and embedding features).
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1.0,
            max_iterations: 500,
            gradient_tolerance: 1e-5,
            seed: 0,
            standardize: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(invalid(format!("l2_lambda must be finite and >= 0, got {}", self.l2_lambda)));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(invalid("gradient_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Labeled training vectors over a fixed column count.
#[derive(Clone, Debug)]
pub struct TrainingData<'a> {
    vectors: Vec<&'a SparseVector>,
    labels: Vec<Label>,
    dim: usize,
    fingerprint: String,
}

impl<'a> TrainingData<'a> {
    pub fn new(
        vectors: &'a [SparseVector],
        labels: &[Label],
        dim: usize,
        fingerprint: impl Into<String>,
    ) -> Result<Self> {
        Self::from_refs(vectors.iter().collect(), labels.to_vec(), dim, fingerprint.into())
    }

    pub fn from_refs(
        vectors: Vec<&'a SparseVector>,
        labels: Vec<Label>,
        dim: usize,
        fingerprint: String,
    ) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(invalid(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        for v in &vectors {
            if v.min_dim() > dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.min_dim() - 1 });
            }
            if v.iter().any(|(_, x)| !x.is_finite()) {
                return Err(invalid("non-finite feature value"));
            }
        }
        Ok(TrainingData { vectors, labels, dim, fingerprint })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    fn subset(&self, indices: &[usize]) -> TrainingData<'a> {
        TrainingData {
            vectors: indices.iter().map(|&i| self.vectors[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
            fingerprint: self.fingerprint.clone(),
        }
    }

    fn check_both_classes(&self) -> Result<()> {
        if self.is_empty() {
            return Err(invalid("empty training set"));
        }
        let claims = self.labels.iter().filter(|l| l.is_claim()).count();
        if claims == 0 || claims == self.len() {
            return Err(invalid("training data contains a single class"));
        }
        Ok(())
    }
}

/// Per-column affine standardization `(x - mean) / scale`; identity entries
/// have mean 0 and scale 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    /// Fits on training vectors. Columns whose stored values are all exactly
    /// 1 are binary and left untouched, as are constant columns.
    pub fn fit(data: &TrainingData) -> Standardization {
        let d = data.dim;
        let n = data.len() as f64;
        let mut sum = vec![0.0; d];
        let mut sumsq = vec![0.0; d];
        let mut binary = vec![true; d];
        for v in &data.vectors {
            for (j, x) in v.iter() {
                sum[j] += x;
                sumsq[j] += x * x;
                if x != 1.0 {
                    binary[j] = false;
                }
            }
        }
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            if binary[j] || n == 0.0 {
                continue;
            }
            let m = sum[j] / n;
            let var = (sumsq[j] / n - m * m).max(0.0);
            let sd = var.sqrt();
            if sd > 1e-12 * (1.0 + m.abs()) {
                mean[j] = m;
                scale[j] = sd;
            }
        }
        Standardization { mean, scale }
    }

    pub fn is_identity(&self) -> bool {
        self.mean.iter().all(|&m| m == 0.0) && self.scale.iter().all(|&s| s == 1.0)
    }
}

/// Logistic loss plus L2 penalty over `theta = [w_0, .., w_{d-1}, b]`, with
/// optional standardization of the inputs.
pub struct LogisticObjective<'a> {
    data: &'a TrainingData<'a>,
    y: Vec<f64>,
    lambda: f64,
    mean: Vec<f64>,
    inv_scale: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl<'a> LogisticObjective<'a> {
    pub fn new(
        data: &'a TrainingData<'a>,
        lambda: f64,
        standardization: Option<&Standardization>,
    ) -> Self {
        let d = data.dim;
        let (mean, inv_scale) = match standardization {
            Some(s) => (s.mean.clone(), s.scale.iter().map(|s| 1.0 / s).collect()),
            None => (vec![0.0; d], vec![1.0; d]),
        };
        LogisticObjective {
            data,
            y: data.labels.iter().map(|l| l.sign()).collect(),
            lambda,
            mean,
            inv_scale,
        }
    }

    /// Number of parameters (columns plus bias).
    pub fn n_params(&self) -> usize {
        self.data.dim + 1
    }

    fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.data.dim;
        let eff: Vec<f64> = (0..d).map(|j| theta[j] * self.inv_scale[j]).collect();
        let offset: f64 = theta[d] - (0..d).map(|j| eff[j] * self.mean[j]).sum::<f64>();
        self.data.vectors.iter().map(|v| v.dot(&eff) + offset).collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let d = self.data.dim;
        let loss: f64 = self
            .margins(theta)
            .iter()
            .zip(&self.y)
            .map(|(m, y)| softplus(-y * m))
            .sum();
        let norm: f64 = theta[..d].iter().map(|w| w * w).sum();
        loss + 0.5 * self.lambda * norm
    }

    pub fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let d = self.data.dim;
        let margins = self.margins(theta);
        let mut loss = 0.0;
        let mut raw = vec![0.0; d];
        let mut gsum = 0.0;
        for ((m, y), v) in margins.iter().zip(&self.y).zip(&self.data.vectors) {
            let z = -y * m;
            loss += softplus(z);
            let g = -y * sigmoid(z);
            gsum += g;
            for (j, x) in v.iter() {
                raw[j] += g * x;
            }
        }
        let mut grad = vec![0.0; d + 1];
        let mut norm = 0.0;
        for j in 0..d {
            let w = theta[j];
            norm += w * w;
            grad[j] = self.inv_scale[j] * (raw[j] - self.mean[j] * gsum) + self.lambda * w;
        }
        grad[d] = gsum;
        (loss + 0.5 * self.lambda * norm, grad)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of an L-BFGS run.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub theta: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const LBFGS_MEMORY: usize = 10;

pub fn minimize(obj: &LogisticObjective, start: Vec<f64>, config: &TrainConfig) -> Solution {
    let mut theta = start;
    let (mut f, mut g) = obj.value_and_gradient(&theta);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(LBFGS_MEMORY);
    let mut iterations = 0;
    while iterations < config.max_iterations {
        if max_norm(&g) < config.gradient_tolerance {
            return Solution { theta, value: f, iterations, converged: true };
        }
        // two-loop recursion
        let mut dir: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
            alphas.push(a);
        }
        let step0 = match history.back() {
            Some((s, y, _)) => {
                let gamma = dot(s, y) / dot(y, y);
                dir.iter_mut().for_each(|d| *d *= gamma);
                1.0
            }
            None => 1.0 / dot(&g, &g).sqrt().max(1.0),
        };
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (a - b) * si);
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // not a descent direction; restart from steepest descent
            history.clear();
            dir = g.iter().map(|x| -x).collect();
            slope = dot(&g, &dir);
        }

        let mut step = step0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
            let (ft, gt) = obj.value_and_gradient(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((next, f_next, g_next)) = accepted else {
            // no further decrease representable
            break;
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        theta = next;
        f = f_next;
        g = g_next;
    }
    let converged = max_norm(&g) < config.gradient_tolerance;
    Solution { theta, value: f, iterations, converged }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearModel {
    /// Weights in standardized coordinates when `standardization` is present.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub space_fingerprint: String,
    pub standardization: Option<Standardization>,
    #[serde(skip)]
    raw: OnceLock<(Vec<f64>, f64)>,
}

impl PartialEq for LinearModel {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
            && self.bias == other.bias
            && self.space_fingerprint == other.space_fingerprint
            && self.standardization == other.standardization
    }
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> LinearModel {
        LinearModel {
            weights,
            bias,
            space_fingerprint: String::new(),
            standardization: None,
            raw: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `[w..., b]`, the parameter vector seen by the objective.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    /// Weights and bias acting on unstandardized inputs.
    fn raw(&self) -> &(Vec<f64>, f64) {
        self.raw.get_or_init(|| match &self.standardization {
            None => (self.weights.clone(), self.bias),
            Some(st) => {
                let w: Vec<f64> = self.weights.iter().zip(&st.scale).map(|(w, s)| w / s).collect();
                let shift: f64 = w.iter().zip(&st.mean).map(|(w, m)| w * m).sum();
                (w, self.bias - shift)
            }
        })
    }

    pub fn decision(&self, x: &SparseVector) -> Result<f64> {
        if x.min_dim() > self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.min_dim() - 1 });
        }
        let (w, b) = self.raw();
        Ok(x.dot(w) + b)
    }

    pub fn check_space(&self, space: &FeatureSpace) -> Result<()> {
        let fp = space.fingerprint();
        if fp != self.space_fingerprint || space.n_columns() != self.dim() {
            return Err(Error::FingerprintMismatch { model: self.space_fingerprint.clone(), space: fp });
        }
        Ok(())
    }
}

/// Probability of CLAIM and the thresholded label (CLAIM iff p >= 0.5).
pub fn predict(model: &LinearModel, x: &SparseVector) -> Result<(f64, Label)> {
    let p = sigmoid(model.decision(x)?);
    Ok((p, if p >= 0.5 { Label::Claim } else { Label::NonClaim }))
}

/// Trains a single model starting from the zero vector.
pub fn train_logreg(data: &TrainingData, config: &TrainConfig) -> Result<LinearModel> {
    train_logreg_with_start(data, config, None)
}

/// Trains from an explicit starting point `[w..., b]` (zeros when `None`).
pub fn train_logreg_with_start(
    data: &TrainingData,
    config: &TrainConfig,
    start: Option<&[f64]>,
) -> Result<LinearModel> {
    config.validate()?;
    data.check_both_classes()?;
    let standardization = if config.standardize {
        Some(Standardization::fit(data)).filter(|s| !s.is_identity())
    } else {
        None
    };
    let obj = LogisticObjective::new(data, config.l2_lambda, standardization.as_ref());
    let start = match start {
        Some(s) if s.len() == obj.n_params() => s.to_vec(),
        Some(s) => {
            return Err(invalid(format!(
                "start vector has length {}, expected {}",
                s.len(),
                obj.n_params()
            )))
        }
        None => vec![0.0; obj.n_params()],
    };
    let sol = minimize(&obj, start, config);
    if !sol.converged {
        log::debug!(
            "L-BFGS stopped after {} iterations without reaching tolerance {}",
            sol.iterations,
            config.gradient_tolerance
        );
    }
    let mut theta = sol.theta;
    let bias = theta.pop().unwrap_or(0.0);
    if theta.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(invalid("optimizer produced non-finite weights"));
    }
    Ok(LinearModel {
        weights: theta,
        bias,
        space_fingerprint: data.fingerprint.clone(),
        standardization,
        raw: OnceLock::new(),
    })
}

/// Small seeded random starting point, useful for restart checks.
pub fn random_start(n_params: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_params).map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub members: Vec<LinearModel>,
    pub member_seeds: Vec<u64>,
}

pub const DEFAULT_MEMBERS: usize = 20;

/// Trains `n_members` models, member `i` on the training data downsampled to
/// 1:1 with seed `derive(config.seed, i)`.
pub fn train_ensemble(
    data: &TrainingData,
    n_members: usize,
    config: &TrainConfig,
) -> Result<EnsembleModel> {
    if n_members == 0 {
        return Err(invalid("ensemble needs at least one member"));
    }
    data.check_both_classes()?;
    let member_seeds: Vec<u64> = (0..n_members as u64).map(|i| seed::derive(config.seed, i)).collect();
    let members = member_seeds
        .par_iter()
        .map(|&s| {
            let keep = downsample_indices(&data.labels, s);
            let member_config = TrainConfig { seed: s, ..config.clone() };
            train_logreg(&data.subset(&keep), &member_config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel { members, member_seeds })
}

/// Majority vote of the members. An exact tie is broken by the sign of the
/// summed member probabilities minus n/2; a residual exact tie yields CLAIM.
pub fn predict_ensemble(ensemble: &EnsembleModel, x: &SparseVector) -> Result<Label> {
    if ensemble.members.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    let mut probs = ensemble
        .members
        .iter()
        .map(|m| predict(m, x).map(|(p, _)| p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vote(&mut probs))
}

/// Applies the ensemble decision rule to member probabilities (reordered in
/// place so the tie-break sum is order independent).
pub fn vote(probs: &mut [f64]) -> Label {
    let n = probs.len();
    let claims = probs.iter().filter(|&&p| p >= 0.5).count();
    if 2 * claims > n {
        return Label::Claim;
    }
    if 2 * claims < n {
        return Label::NonClaim;
    }
    probs.sort_by(f64::total_cmp);
    let total: f64 = probs.iter().sum();
    if total < n as f64 / 2.0 {
        Label::NonClaim
    } else {
        Label::Claim
    }
}

impl EnsembleModel {
    pub fn fingerprint(&self) -> Option<&str> {
        self.members.first().map(|m| m.space_fingerprint.as_str())
    }

    pub fn check_space(&self, space: &FeatureSpace) -> Result<()> {
        self.members.iter().try_for_each(|m| m.check_space(space))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            space_fingerprint: self.fingerprint().unwrap_or_default().to_string(),
            ensemble: self.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(json: &str) -> Result<EnsembleModel> {
        let file: ModelFile = serde_json::from_str(json)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(invalid(format!(
                "unsupported model container {} v{}",
                file.format, file.version
            )));
        }
        if file
            .ensemble
            .members
            .iter()
            .any(|m| m.space_fingerprint != file.space_fingerprint)
        {
            return Err(invalid("ensemble members disagree on the feature space fingerprint"));
        }
        Ok(file.ensemble)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EnsembleModel> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const MODEL_FORMAT: &str = "claimscope-ensemble";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    space_fingerprint: String,
    ensemble: EnsembleModel,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(points: &[(f64, Label)]) -> (Vec<SparseVector>, Vec<Label>) {
        (
            points.iter().map(|&(x, _)| SparseVector::from_dense(&[x])).collect(),
            points.iter().map(|&(_, l)| l).collect(),
        )
    }

    #[test]
    fn separable_pair() {
        let (x, y) = one_d(&[(1.0, Label::Claim), (-1.0, Label::NonClaim)]);
        let data = TrainingData::new(&x, &y, 1, "fp").unwrap();
        let cfg = TrainConfig { standardize: false, gradient_tolerance: 1e-10, ..Default::default() };
        let m = train_logreg(&data, &cfg).unwrap();
        assert!(m.weights[0] > 0.0);
        assert!(m.bias.abs() < 1e-8);
        assert_eq!(predict(&m, &x[0]).unwrap().1, Label::Claim);
        assert_eq!(predict(&m, &x[1]).unwrap().1, Label::NonClaim);
    }

    #[test]
    fn heavy_penalty_flattens() {
        let pts: Vec<(f64, Label)> = (0..20)
            .map(|i| (i as f64 / 10.0 - 1.0, if i % 2 == 0 { Label::Claim } else { Label::NonClaim }))
            .collect();
        let (x, y) = one_d(&pts);
        let data = TrainingData::new(&x, &y, 1, "").unwrap();
        let cfg = TrainConfig { l2_lambda: 1e6, standardize: false, gradient_tolerance: 1e-9, ..Default::default() };
        let m = train_logreg(&data, &cfg).unwrap();
        assert!(m.weights[0].abs() < 1e-3);
        for v in &x {
            assert!((predict(&m, v).unwrap().0 - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn single_class_and_bad_values_rejected() {
        let (x, y) = one_d(&[(1.0, Label::Claim), (2.0, Label::Claim)]);
        let data = TrainingData::new(&x, &y, 1, "").unwrap();
        assert!(matches!(train_logreg(&data, &TrainConfig::default()), Err(Error::InvalidInput(_))));
        let bad = vec![SparseVector::from_pairs(vec![(0, f64::NAN)])];
        assert!(TrainingData::new(&bad, &[Label::Claim], 1, "").is_err());
        assert!(TrainingData::new(&x, &y[..1], 1, "").is_err());
    }

    #[test]
    fn predict_rules() {
        let zero = LinearModel::new(vec![0.0, 0.0], 0.0);
        let x = SparseVector::from_dense(&[1.0, -2.0]);
        assert_eq!(predict(&zero, &x).unwrap(), (0.5, Label::Claim));
        let biased = LinearModel::new(vec![0.0, 0.0], 10.0);
        let (p, l) = predict(&biased, &x).unwrap();
        assert!(p > 0.9999 && l == Label::Claim);
        let m = LinearModel::new(vec![0.3, 0.1], -0.05);
        let neg = LinearModel::new(vec![-0.3, -0.1], 0.05);
        assert_eq!(predict(&m, &x).unwrap().1.flip(), predict(&neg, &x).unwrap().1);
        let wide = SparseVector::from_pairs(vec![(5, 1.0)]);
        assert!(matches!(predict(&m, &wide), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn standardized_prediction_matches_manual() {
        let m = LinearModel {
            weights: vec![2.0, 1.0],
            bias: 0.5,
            space_fingerprint: String::new(),
            standardization: Some(Standardization { mean: vec![3.0, 0.0], scale: vec![2.0, 1.0] }),
            raw: OnceLock::new(),
        };
        let x = SparseVector::from_dense(&[5.0, 1.0]);
        let z = 2.0 * (5.0 - 3.0) / 2.0 + 1.0 + 0.5;
        assert!((m.decision(&x).unwrap() - z).abs() < 1e-12);
    }

    fn fixed_member(p: f64) -> LinearModel {
        // sigmoid(b) = p
        LinearModel::new(vec![0.0], (p / (1.0 - p)).ln())
    }

    #[test]
    fn ensemble_votes() {
        let x = SparseVector::default();
        let mk = |ps: Vec<f64>| EnsembleModel {
            member_seeds: (0..ps.len() as u64).collect(),
            members: ps.into_iter().map(fixed_member).collect(),
        };
        let mut ps = vec![0.6; 12];
        ps.extend(vec![0.1; 8]);
        assert_eq!(predict_ensemble(&mk(ps), &x).unwrap(), Label::Claim);
        // 10-10 tie with probability sum 10.4
        let mut ps = vec![0.7; 10];
        ps.extend(vec![0.34; 10]);
        assert!((ps.iter().sum::<f64>() - 10.4).abs() < 1e-9);
        assert_eq!(predict_ensemble(&mk(ps), &x).unwrap(), Label::Claim);
        let mut ps = vec![0.55; 10];
        ps.extend(vec![0.2; 10]);
        assert_eq!(predict_ensemble(&mk(ps), &x).unwrap(), Label::NonClaim);
        assert_eq!(predict_ensemble(&mk(vec![0.1; 20]), &x).unwrap(), Label::NonClaim);
        assert!(predict_ensemble(&mk(vec![]), &x).is_err());
    }

    #[test]
    fn ensemble_json_round_trip() {
        let mut m = fixed_member(0.3);
        m.space_fingerprint = "abc".into();
        let e = EnsembleModel { members: vec![m.clone(), m], member_seeds: vec![1, 2] };
        let back = EnsembleModel::from_json(&e.to_json().unwrap()).unwrap();
        assert_eq!(back, e);
        let mut tampered = e.clone();
        tampered.members[1].space_fingerprint = "zzz".into();
        assert!(EnsembleModel::from_json(&tampered.to_json().unwrap()).is_err());
    }
}
