//! TOML run configuration.
//!
//! ```toml
//! seed = 0
//! out = "results"            # relative to this file
//! folds = 10
//! n_members = 20
//! keyword = "should"
//! embeddings = "vectors.txt" # optional
//! systems = ["LR_ALL", "LR_MINUS_SYNTAX", "MAJORITY", "RANDOM", "KEYWORD"]
//! protocols = ["IN_DOMAIN", "CROSS_DOMAIN", "LODO"]
//!
//! [corpora]
//! MT = "data/MT.jsonl"
//! OC = "data/OC.jsonl"
//!
//! [train]                     # learner settings, all optional
//! l2_lambda = 1.0
//!
//! [cutoffs]                   # feature cutoffs, all optional
//! lexical_top = 4000
//!
//! [analysis]
//! top_lemmas = 500
//! systems = ["LR_ALL"]        # default: every system with cross-domain rows
//! compare = [["LR_ALL", "LR_MINUS_SYNTAX"]]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use claimscope_core::stats::DEFAULT_TOP_LEMMAS;
use claimscope_core::{Cutoffs, Protocol, System, TrainConfig};
use serde::{Deserialize, Serialize};

fn default_folds() -> usize {
    10
}

fn default_members() -> usize {
    claimscope_core::learner::DEFAULT_MEMBERS
}

fn default_keyword() -> String {
    "should".into()
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_protocols() -> Vec<Protocol> {
    vec![Protocol::InDomain, Protocol::CrossDomain, Protocol::Lodo]
}

fn default_top_lemmas() -> usize {
    DEFAULT_TOP_LEMMAS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_top_lemmas")]
    pub top_lemmas: usize,
    #[serde(default)]
    pub systems: Option<Vec<System>>,
    #[serde(default)]
    pub compare: Vec<(System, System)>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { top_lemmas: DEFAULT_TOP_LEMMAS, systems: None, compare: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpora: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    pub systems: Vec<System>,
    #[serde(default = "default_protocols")]
    pub protocols: Vec<Protocol>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_members")]
    pub n_members: usize,
    #[serde(default = "default_keyword")]
    pub keyword: String,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub cutoffs: Cutoffs,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config and resolves every relative path against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config = RunConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in config.corpora.values_mut() {
            *p = base.join(&*p);
        }
        if let Some(e) = &mut config.embeddings {
            *e = base.join(&*e);
        }
        config.out = base.join(&config.out);
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.corpora.is_empty() {
            bail!("no corpora configured");
        }
        if self.systems.is_empty() {
            bail!("no systems configured");
        }
        if self.n_members == 0 {
            bail!("n_members must be at least 1");
        }
        for name in self.corpora.keys() {
            if name.is_empty() || name.contains(['+', '/', '\\', ',']) {
                bail!("corpus name {name:?} may not be empty or contain '+', '/', '\\' or ','");
            }
        }
        if self.embeddings.is_none() && self.systems.contains(&System::LrPlus(claimscope_core::FeatureGroup::Embedding)) {
            bail!("LR_PLUS_EMBEDDING requires `embeddings`");
        }
        Ok(())
    }
}
