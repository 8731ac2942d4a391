//! Shared fixtures for the benchmarks.

use claimscope_core::{generate_synthetic, Corpus, SyntheticParams};

/// Synthetic corpus of `n_docs` documents (about 5 sentences each).
pub fn corpus(n_docs: usize) -> Corpus {
    generate_synthetic(&SyntheticParams { seed: 7, n_docs, ..Default::default() }).expect("valid parameters")
}
