//! Metrics, baselines and the three experimental protocols.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, Sentence, SplitPlan};
use crate::error::{invalid, Error, Result};
use crate::features::{featurize_all, fit_feature_space, Cutoffs, EmbeddingTable, FeatureGroup};
use crate::learner::{predict_ensemble, train_ensemble, TrainConfig, TrainingData, DEFAULT_MEMBERS};
use crate::seed;

pub mod report;

/// Binary confusion matrix with CLAIM as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn from_labels(predictions: &[Label], gold: &[Label]) -> ConfusionMatrix {
        let mut m = ConfusionMatrix::default();
        for (p, g) in predictions.iter().zip(gold) {
            match (p.is_claim(), g.is_claim()) {
                (true, true) => m.tp += 1,
                (true, false) => m.fp += 1,
                (false, true) => m.fn_ += 1,
                (false, false) => m.tn += 1,
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Same matrix with the roles of the two classes exchanged.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix { tp: self.tn, fp: self.fn_, fn_: self.fp, tn: self.tp }
    }

    pub fn report(&self) -> ScoreReport {
        let claim = ClassScores::from_counts(self.tp, self.fp, self.fn_);
        let non_claim = ClassScores::from_counts(self.tn, self.fn_, self.fp);
        ScoreReport {
            confusion: *self,
            claim,
            non_claim,
            macro_f1: (claim.f1 + non_claim.f1) / 2.0,
            claim_f1: claim.f1,
        }
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassScores {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> ClassScores {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
        ClassScores { precision, recall, f1 }
    }
}

/// Per-class scores, Macro-F1 and Claim-F1, all fractions in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub confusion: ConfusionMatrix,
    pub claim: ClassScores,
    pub non_claim: ClassScores,
    pub macro_f1: f64,
    pub claim_f1: f64,
}

impl ScoreReport {
    pub fn macro_f1_pct(&self) -> f64 {
        100.0 * self.macro_f1
    }

    pub fn claim_f1_pct(&self) -> f64 {
        100.0 * self.claim_f1
    }
}

pub fn score(predictions: &[Label], gold: &[Label]) -> Result<ScoreReport> {
    if predictions.len() != gold.len() {
        return Err(invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(invalid("cannot score an empty prediction list"));
    }
    Ok(ConfusionMatrix::from_labels(predictions, gold).report())
}

// ---------------------------------------------------------------------------
// baselines

pub fn baseline_majority(n: usize) -> Vec<Label> {
    vec![Label::NonClaim; n]
}

/// I.i.d. Bernoulli(0.5) labels.
pub fn baseline_random(n: usize, seed: u64) -> Vec<Label> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| if rng.random_bool(0.5) { Label::Claim } else { Label::NonClaim })
        .collect()
}

/// CLAIM iff some surface token equals `word`, case-insensitively.
pub fn keyword_predictions<'a>(sentences: impl IntoIterator<Item = &'a Sentence>, word: &str) -> Vec<Label> {
    let word = word.to_lowercase();
    sentences
        .into_iter()
        .map(|s| {
            if s.tokens.iter().any(|t| t.lower() == word) {
                Label::Claim
            } else {
                Label::NonClaim
            }
        })
        .collect()
}

pub fn baseline_keyword(target: &Corpus, word: &str) -> Vec<Label> {
    keyword_predictions(target.sentences(), word)
}

// ---------------------------------------------------------------------------
// systems and protocols

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum System {
    LrAll,
    LrMinus(FeatureGroup),
    LrPlus(FeatureGroup),
    Majority,
    Random,
    Keyword,
}

impl System {
    pub fn is_learned(self) -> bool {
        matches!(self, System::LrAll | System::LrMinus(_) | System::LrPlus(_))
    }

    /// Feature groups used by a learned system. Without an embedding table
    /// the embedding group is dropped from LR_ALL and the ablations.
    pub fn groups(self, embeddings_available: bool) -> Result<BTreeSet<FeatureGroup>> {
        let mut all = FeatureGroup::all();
        if !embeddings_available {
            all.remove(&FeatureGroup::Embedding);
        }
        match self {
            System::LrAll => Ok(all),
            System::LrMinus(g) => {
                all.remove(&g);
                Ok(all)
            }
            System::LrPlus(FeatureGroup::Embedding) if !embeddings_available => Err(Error::Config(
                "LR_PLUS_EMBEDDING requires an embedding table".into(),
            )),
            System::LrPlus(g) => Ok([g].into_iter().collect()),
            _ => Err(invalid(format!("{self} is not a learned system"))),
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            System::LrAll => f.write_str("LR_ALL"),
            System::LrMinus(g) => write!(f, "LR_MINUS_{}", g.name()),
            System::LrPlus(g) => write!(f, "LR_PLUS_{}", g.name()),
            System::Majority => f.write_str("MAJORITY"),
            System::Random => f.write_str("RANDOM"),
            System::Keyword => f.write_str("KEYWORD"),
        }
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        Ok(match up.as_str() {
            "LR_ALL" => System::LrAll,
            "MAJORITY" => System::Majority,
            "RANDOM" => System::Random,
            "KEYWORD" => System::Keyword,
            _ => {
                if let Some(g) = up.strip_prefix("LR_MINUS_") {
                    System::LrMinus(g.parse()?)
                } else if let Some(g) = up.strip_prefix("LR_PLUS_") {
                    System::LrPlus(g.parse()?)
                } else {
                    return Err(invalid(format!("unknown system {s:?}")));
                }
            }
        })
    }
}

impl Serialize for System {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for System {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Protocol {
    InDomain,
    CrossDomain,
    Lodo,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::InDomain => "IN_DOMAIN",
            Protocol::CrossDomain => "CROSS_DOMAIN",
            Protocol::Lodo => "LODO",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "IN_DOMAIN" => Ok(Protocol::InDomain),
            "CROSS_DOMAIN" => Ok(Protocol::CrossDomain),
            "LODO" => Ok(Protocol::Lodo),
            _ => Err(invalid(format!("unknown protocol {s:?}"))),
        }
    }
}

/// A system together with everything needed to run it reproducibly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub system: System,
    pub cutoffs: Cutoffs,
    pub train: TrainConfig,
    pub n_members: usize,
    pub seed: u64,
    pub keyword: String,
}

impl ExperimentSpec {
    pub fn new(system: System, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            system,
            cutoffs: Cutoffs::default(),
            train: TrainConfig::default(),
            n_members: DEFAULT_MEMBERS,
            seed,
            keyword: "should".to_string(),
        }
    }
}

/// Trains `spec.system` on `train` and labels `test`. Only token content of
/// the test sentences is read.
pub fn train_and_predict(
    spec: &ExperimentSpec,
    train: &[&Sentence],
    test: &[&Sentence],
    table: Option<&EmbeddingTable>,
    seed: u64,
) -> Result<Vec<Label>> {
    match spec.system {
        System::Majority => Ok(baseline_majority(test.len())),
        System::Random => Ok(baseline_random(test.len(), seed)),
        System::Keyword => Ok(keyword_predictions(test.iter().copied(), &spec.keyword)),
        system => {
            let groups = system.groups(table.is_some())?;
            let space = fit_feature_space(train, &groups, &spec.cutoffs, table)?;
            let (train_vectors, _) = featurize_all(train, &space, table)?;
            let labels: Vec<Label> = train.iter().map(|s| s.label).collect();
            let fingerprint = space.fingerprint();
            let data = TrainingData::new(&train_vectors, &labels, space.n_columns(), fingerprint)?;
            let config = TrainConfig { seed, ..spec.train.clone() };
            let ensemble = train_ensemble(&data, spec.n_members, &config)?;
            ensemble.check_space(&space)?;
            let (test_vectors, _) = featurize_all(test, &space, table)?;
            test_vectors
                .par_iter()
                .map(|x| predict_ensemble(&ensemble, x))
                .collect()
        }
    }
}

/// Result of a cross-validation run.
#[derive(Clone, Debug, PartialEq)]
pub struct InDomainReport {
    /// Scores on the pooled predictions of all folds.
    pub pooled: ScoreReport,
    /// Confusion-derived report per fold (fold order).
    pub folds: Vec<ScoreReport>,
    /// Predictions in corpus sentence order.
    pub predictions: Vec<Label>,
    pub fold_seeds: Vec<u64>,
}

/// k-fold cross-validation over the given document-level split plan.
pub fn run_in_domain(
    corpus: &Corpus,
    spec: &ExperimentSpec,
    splits: &SplitPlan,
    table: Option<&EmbeddingTable>,
) -> Result<InDomainReport> {
    splits.check_covers(corpus)?;
    let fold_of: Vec<usize> = corpus
        .documents
        .iter()
        .flat_map(|d| {
            let f = splits.fold_of(&d.id).expect("checked coverage");
            std::iter::repeat_n(f, d.sentences.len())
        })
        .collect();
    let sentences: Vec<&Sentence> = corpus.sentences().collect();
    let fold_seeds: Vec<u64> = (0..splits.k as u64)
        .map(|f| seed::derive(seed::derive_str(spec.seed, &corpus.name), f))
        .collect();

    let per_fold: Vec<Vec<Label>> = (0..splits.k)
        .into_par_iter()
        .map(|f| {
            let (train, test): (Vec<&Sentence>, Vec<&Sentence>) = sentences
                .iter()
                .zip(&fold_of)
                .map(|(s, &sf)| (*s, sf == f))
                .fold((Vec::new(), Vec::new()), |(mut tr, mut te), (s, is_test)| {
                    if is_test {
                        te.push(s)
                    } else {
                        tr.push(s)
                    }
                    (tr, te)
                });
            train_and_predict(spec, &train, &test, table, fold_seeds[f])
                .map_err(|e| invalid(format!("fold {f} of {}: {e}", corpus.name)))
        })
        .collect::<Result<_>>()?;

    let mut cursors = vec![0usize; splits.k];
    let mut predictions = Vec::with_capacity(sentences.len());
    for &f in &fold_of {
        predictions.push(per_fold[f][cursors[f]]);
        cursors[f] += 1;
    }
    let gold = corpus.labels();
    let folds = (0..splits.k)
        .map(|f| {
            let (p, g): (Vec<Label>, Vec<Label>) = fold_of
                .iter()
                .enumerate()
                .filter(|(_, &sf)| sf == f)
                .map(|(i, _)| (predictions[i], gold[i]))
                .unzip();
            ConfusionMatrix::from_labels(&p, &g).report()
        })
        .collect();
    Ok(InDomainReport {
        pooled: score(&predictions, &gold)?,
        folds,
        predictions,
        fold_seeds,
    })
}

/// Seed of a cross-domain or leave-one-domain-out run, derived from the
/// experiment seed, the `+`-joined source names and the target name.
pub fn pool_seed(spec_seed: u64, source_names: &[&str], target: &str) -> u64 {
    let pool = source_names.join("+");
    seed::derive_str(seed::derive_str(spec_seed, &pool), target)
}

/// Trains on all of `source` and scores on all of `target`.
pub fn run_cross_domain(
    source: &Corpus,
    target: &Corpus,
    spec: &ExperimentSpec,
    table: Option<&EmbeddingTable>,
) -> Result<ScoreReport> {
    if source.name == target.name {
        return Err(invalid(format!("source and target are both {}", source.name)));
    }
    run_pooled(&[source], target, spec, table)
}

fn run_pooled(
    sources: &[&Corpus],
    target: &Corpus,
    spec: &ExperimentSpec,
    table: Option<&EmbeddingTable>,
) -> Result<ScoreReport> {
    let train: Vec<&Sentence> = sources.iter().flat_map(|c| c.sentences()).collect();
    let test: Vec<&Sentence> = target.sentences().collect();
    let names: Vec<&str> = sources.iter().map(|c| c.name.as_str()).collect();
    let seed = pool_seed(spec.seed, &names, &target.name);
    let predictions = train_and_predict(spec, &train, &test, table, seed)?;
    score(&predictions, &target.labels())
}

/// Leave-one-domain-out: trains on the concatenation of every corpus except
/// `held_out` and scores on `held_out`.
pub fn run_lodo(
    corpora: &[Corpus],
    held_out: &str,
    spec: &ExperimentSpec,
    table: Option<&EmbeddingTable>,
) -> Result<ScoreReport> {
    if corpora.len() < 2 {
        return Err(invalid("leave-one-domain-out needs at least two corpora"));
    }
    let target = corpora
        .iter()
        .find(|c| c.name == held_out)
        .ok_or_else(|| invalid(format!("held-out corpus {held_out} not among the corpora")))?;
    let sources: Vec<&Corpus> = corpora.iter().filter(|c| c.name != held_out).collect();
    run_pooled(&sources, target, spec, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, make_cv_splits, SyntheticParams};
    use Label::{Claim as C, NonClaim as N};

    #[test]
    fn score_examples() {
        let r = score(&[C, N, C, N], &[C, N, N, C]).unwrap();
        assert_eq!(r.confusion, ConfusionMatrix { tp: 1, fp: 1, fn_: 1, tn: 1 });
        assert_eq!((r.claim.precision, r.claim.recall, r.claim.f1), (0.5, 0.5, 0.5));
        assert!((r.macro_f1_pct() - 50.0).abs() < 1e-12);
        let gold = [C, N, N, C, N];
        let perfect = score(&gold, &gold).unwrap();
        assert_eq!((perfect.macro_f1, perfect.claim_f1), (1.0, 1.0));
        assert!(score(&[C], &[C, N]).is_err());
        assert!(score(&[], &[]).is_err());
    }

    #[test]
    fn majority_on_mt_distribution() {
        let mut gold = vec![C; 112];
        gold.extend(vec![N; 449 - 112]);
        let r = score(&baseline_majority(449), &gold).unwrap();
        assert_eq!(format!("{:.1}", r.macro_f1_pct()), "42.9");
        assert_eq!(r.claim_f1, 0.0);
    }

    #[test]
    fn swapped_labels_swap_class_scores() {
        let gold = [C, N, N, C, N, N, C];
        let pred = [C, C, N, N, N, C, C];
        let r = score(&pred, &gold).unwrap();
        let flip = |v: &[Label]| v.iter().map(|l| l.flip()).collect::<Vec<_>>();
        let s = score(&flip(&pred), &flip(&gold)).unwrap();
        assert_eq!(r.claim, s.non_claim);
        assert_eq!(r.non_claim, s.claim);
        assert!((r.macro_f1 - s.macro_f1).abs() < 1e-15);
    }

    #[test]
    fn system_names_round_trip() {
        for s in [
            System::LrAll,
            System::LrMinus(FeatureGroup::Syntax),
            System::LrPlus(FeatureGroup::Embedding),
            System::Majority,
            System::Random,
            System::Keyword,
        ] {
            assert_eq!(s.to_string().parse::<System>().unwrap(), s);
        }
        assert!("LR_MINUS_FOO".parse::<System>().is_err());
        assert_eq!("cross-domain".parse::<Protocol>().unwrap(), Protocol::CrossDomain);
    }

    #[test]
    fn keyword_baseline() {
        let c = generate_synthetic(&SyntheticParams { n_docs: 20, ..Default::default() }).unwrap();
        let preds = baseline_keyword(&c, "should");
        for (s, p) in c.sentences().zip(&preds) {
            assert_eq!(p.is_claim(), s.tokens.iter().any(|t| t.surface == "should"));
        }
        assert_eq!(baseline_keyword(&c, "xyzzy"), baseline_majority(c.n_sentences()));
    }

    #[test]
    fn in_domain_covers_each_sentence_once() {
        let c = generate_synthetic(&SyntheticParams { n_docs: 2, ..Default::default() }).unwrap();
        let plan = make_cv_splits(&c, 2, 0).unwrap();
        let r = run_in_domain(&c, &ExperimentSpec::new(System::Random, 1), &plan, None).unwrap();
        assert_eq!(r.predictions.len(), c.n_sentences());
        let fold_total: usize = r.folds.iter().map(|f| f.confusion.total()).sum();
        assert_eq!(fold_total, c.n_sentences());
        assert_eq!(r.pooled.confusion.total(), c.n_sentences());
    }

    #[test]
    fn cross_domain_guards() {
        let c = generate_synthetic(&SyntheticParams { n_docs: 5, ..Default::default() }).unwrap();
        assert!(run_cross_domain(&c, &c, &ExperimentSpec::new(System::Majority, 0), None).is_err());
        assert!(run_lodo(&[c.clone()], "SYN1", &ExperimentSpec::new(System::Majority, 0), None).is_err());
    }
}
