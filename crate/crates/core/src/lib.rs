//! Sentence-level claim identification across heterogeneous argument-mining
//! corpora.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`]: unified corpus model, JSON-lines ingestion, statistics,
//!   document-level CV splits, downsampling and a synthetic corpus generator.
//! * [`features`]: structure, lexical, syntax, discourse and embedding
//!   feature groups fitted on training data into sparse vectors.
//! * [`learner`]: L2-regularized logistic regression and the downsampling
//!   majority-vote ensemble.
//! * [`evaluation`]: metrics, baselines and the in-domain, cross-domain and
//!   leave-one-domain-out protocols.
//! * [`stats`]: Wilcoxon signed-rank tests, Spearman similarity of lemma
//!   distributions and the cross-domain performance regression.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod learner;
pub mod seed;
pub mod stats;

pub use corpus::{
    corpus_stats, downsample, generate_synthetic, label_sentences, load_corpus, make_cv_splits,
    parse_corpus, write_corpus, ClaimLabel, Corpus, DatasetStats, DiscourseRelationTag, Document,
    Label, Sentence, SplitPlan, SyntheticParams, Token,
};
pub use error::{Error, Result};
pub use evaluation::{
    baseline_keyword, baseline_majority, baseline_random, run_cross_domain, run_in_domain,
    run_lodo, score, ConfusionMatrix, ExperimentSpec, InDomainReport, Protocol, ScoreReport,
    System,
};
pub use features::{
    featurize, fit_feature_space, load_embeddings, Cutoffs, EmbeddingTable, ExtractionWarnings,
    FeatureGroup, FeatureSpace, SparseVector,
};
pub use learner::{
    predict, predict_ensemble, train_ensemble, train_logreg, EnsembleModel, LinearModel,
    TrainConfig,
};
pub use stats::{
    compare_systems, lemma_similarity, ols, spearman, wilcoxon_signed_rank, RegressionInput,
    RegressionResult, SimilarityMatrix, WilcoxonResult,
};
