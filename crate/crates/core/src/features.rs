//! Feature groups and the fitted feature space.
//!
//! A [`FeatureSpace`] is fitted on training sentences only. Columns are laid
//! out group by group in the fixed order structure, lexical, syntax,
//! discourse, embedding; each enabled group owns one contiguous range.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::{AddAssign, Range};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{ArgumentRole, DiscourseRelationTag, Realization, Sentence};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureGroup {
    Structure,
    Lexical,
    Syntax,
    Discourse,
    Embedding,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Structure,
        FeatureGroup::Lexical,
        FeatureGroup::Syntax,
        FeatureGroup::Discourse,
        FeatureGroup::Embedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Structure => "STRUCTURE",
            FeatureGroup::Lexical => "LEXICAL",
            FeatureGroup::Syntax => "SYNTAX",
            FeatureGroup::Discourse => "DISCOURSE",
            FeatureGroup::Embedding => "EMBEDDING",
        }
    }

    /// Set of every group.
    pub fn all() -> BTreeSet<FeatureGroup> {
        Self::ALL.into_iter().collect()
    }
}

impl std::str::FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| {
                // accept plural forms such as "Embeddings"
                g.name().eq_ignore_ascii_case(s)
                    || s.strip_suffix(['s', 'S']).is_some_and(|t| g.name().eq_ignore_ascii_case(t))
            })
            .ok_or_else(|| invalid(format!("unknown feature group {s:?}")))
    }
}

/// Frequency cutoffs applied while fitting a feature space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Cutoffs {
    pub lexical_top: usize,
    pub pos_ngram_top: usize,
    pub production_top: usize,
    pub production_min_count: usize,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs {
            lexical_top: 4000,
            pos_ngram_top: 2000,
            production_top: 4000,
            production_min_count: 5,
        }
    }
}

/// Sparse real vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pairs: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds a vector from arbitrary pairs: sorts, sums duplicates and drops
    /// zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> SparseVector {
        pairs.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|&(_, v)| v != 0.0);
        SparseVector { pairs: out }
    }

    pub fn from_dense(values: &[f64]) -> SparseVector {
        SparseVector {
            pairs: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, f64)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.pairs
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|p| self.pairs[p].1)
            .unwrap_or(0.0)
    }

    /// One past the largest stored index (0 when empty).
    pub fn min_dim(&self) -> usize {
        self.pairs.last().map(|&(i, _)| i + 1).unwrap_or(0)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.pairs.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    fn shifted(self, offset: usize) -> impl Iterator<Item = (usize, f64)> {
        self.pairs.into_iter().map(move |(i, v)| (i + offset, v))
    }
}

/// Word vectors keyed by lowercased token.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
    /// Rows skipped because their (lowercased) token was already present.
    pub duplicates: usize,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
            duplicates: 0,
        }
    }

    /// Inserts a vector unless the token is already present; returns whether
    /// it was inserted.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(invalid(format!(
                "vector for {token:?} has dimension {}, table has {}",
                vector.len(),
                self.dim
            )));
        }
        let key = token.to_lowercase();
        if self.vectors.contains_key(&key) {
            self.duplicates += 1;
            return Ok(false);
        }
        self.vectors.insert(key, vector);
        Ok(true)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(&token.to_lowercase()).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Parses the whitespace-separated text embedding format, with an optional
/// `N D` header line.
pub fn parse_embeddings<R: Read>(reader: R) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut header_dim = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if table.is_none() && header_dim.is_none() && fields.len() == 2 {
            if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                header_dim = Some(d);
                continue;
            }
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            document: None,
            message,
        };
        if fields.len() < 2 {
            return Err(parse_err("embedding row without values".into()));
        }
        let dim = fields.len() - 1;
        let t = table.get_or_insert_with(|| EmbeddingTable::new(header_dim.unwrap_or(dim)));
        if dim != t.dim {
            return Err(parse_err(format!("row has {dim} values, expected {}", t.dim)));
        }
        let values = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(format!("invalid embedding value {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        t.insert(fields[0], values)?;
    }
    Ok(table.unwrap_or_else(|| EmbeddingTable::new(header_dim.unwrap_or(0))))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let table = parse_embeddings(File::open(path)?)?;
    if table.duplicates > 0 {
        log::warn!("embedding file contained {} duplicate tokens", table.duplicates);
    }
    Ok(table)
}

/// Counters for annotations missing at extraction time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionWarnings {
    pub missing_pos: usize,
    pub missing_productions: usize,
    pub missing_discourse: usize,
}

impl AddAssign for ExtractionWarnings {
    fn add_assign(&mut self, rhs: Self) {
        self.missing_pos += rhs.missing_pos;
        self.missing_productions += rhs.missing_productions;
        self.missing_discourse += rhs.missing_discourse;
    }
}

impl ExtractionWarnings {
    pub fn total(&self) -> usize {
        self.missing_pos + self.missing_productions + self.missing_discourse
    }
}

/// Column keys of the structure group, in layout order.
pub const STRUCTURE_KEYS: [&str; 8] = [
    "struct:first_in_paragraph",
    "struct:last_in_paragraph",
    "struct:n_tokens",
    "struct:n_punctuation",
    "struct:ends_question",
    "struct:ends_exclamation",
    "struct:n_commas",
    "struct:has_quote",
];

#[derive(Serialize, Deserialize)]
struct FeatureSpaceRepr {
    groups: BTreeSet<FeatureGroup>,
    cutoffs: Cutoffs,
    embedding_dim: usize,
    ranges: BTreeMap<FeatureGroup, (usize, usize)>,
    keys: Vec<String>,
}

/// Fitted mapping from namespaced feature keys to column indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FeatureSpaceRepr", into = "FeatureSpaceRepr")]
pub struct FeatureSpace {
    groups: BTreeSet<FeatureGroup>,
    cutoffs: Cutoffs,
    embedding_dim: usize,
    ranges: BTreeMap<FeatureGroup, (usize, usize)>,
    keys: Vec<String>,
    index: HashMap<String, usize>,
}

impl TryFrom<FeatureSpaceRepr> for FeatureSpace {
    type Error = Error;

    fn try_from(r: FeatureSpaceRepr) -> Result<Self> {
        let index: HashMap<String, usize> =
            r.keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        if index.len() != r.keys.len() {
            return Err(invalid("feature space contains duplicate keys"));
        }
        let mut expect = 0;
        for (g, &(start, end)) in &r.ranges {
            if !r.groups.contains(g) || start != expect || end < start {
                return Err(invalid("feature space group ranges are not contiguous"));
            }
            expect = end;
        }
        if expect != r.keys.len() {
            return Err(invalid("feature space ranges do not cover every column"));
        }
        Ok(FeatureSpace {
            groups: r.groups,
            cutoffs: r.cutoffs,
            embedding_dim: r.embedding_dim,
            ranges: r.ranges,
            keys: r.keys,
            index,
        })
    }
}

impl From<FeatureSpace> for FeatureSpaceRepr {
    fn from(s: FeatureSpace) -> Self {
        FeatureSpaceRepr {
            groups: s.groups,
            cutoffs: s.cutoffs,
            embedding_dim: s.embedding_dim,
            ranges: s.ranges,
            keys: s.keys,
        }
    }
}

impl FeatureSpace {
    pub fn n_columns(&self) -> usize {
        self.keys.len()
    }

    pub fn groups(&self) -> &BTreeSet<FeatureGroup> {
        &self.groups
    }

    pub fn has_group(&self, g: FeatureGroup) -> bool {
        self.groups.contains(&g)
    }

    pub fn cutoffs(&self) -> &Cutoffs {
        &self.cutoffs
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// Column range owned by a group (empty if the group is disabled).
    pub fn range(&self, g: FeatureGroup) -> Range<usize> {
        self.ranges.get(&g).map(|&(s, e)| s..e).unwrap_or(0..0)
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, column: usize) -> Option<&str> {
        self.keys.get(column).map(String::as_str)
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// Number of keys in the given namespace (e.g. `"lex"`).
    pub fn count_prefix(&self, namespace: &str) -> usize {
        let p = format!("{namespace}:");
        self.keys.iter().filter(|k| k.starts_with(&p)).count()
    }

    /// SHA-256 over the canonical JSON form, hex, first 16 characters.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("feature space serializes");
        let digest = Sha256::digest(&json);
        hex::encode(digest)[..16].to_string()
    }
}

fn lexical_key(token: &str) -> String {
    format!("lex:{token}")
}

fn pos_ngram_keys<'a>(tags: &'a [&str]) -> impl Iterator<Item = String> + 'a {
    (2..=4).flat_map(move |n| tags.windows(n).map(|w| format!("posng:{}", w.join("_"))))
}

fn production_key(rule: &str) -> String {
    format!("prod:{rule}")
}

fn pos_count_key(tag: &str) -> String {
    format!("poscnt:{tag}")
}

fn discourse_key(tag: &DiscourseRelationTag) -> String {
    let real = match tag.realization {
        Realization::Explicit => "E",
        Realization::Implicit => "I",
    };
    let arg = match tag.argument_role {
        ArgumentRole::Arg1 => "1",
        ArgumentRole::Arg2 => "2",
        ArgumentRole::Both => "B",
    };
    format!("disc:{}|{real}|{arg}", tag.relation_type)
}

/// POS tags of a sentence, or `None` unless every token is tagged.
fn pos_tags(sentence: &Sentence) -> Option<Vec<&str>> {
    sentence.tokens.iter().map(|t| t.pos.as_deref()).collect()
}

/// Keys ranked by (count desc, key asc), truncated to `top` and filtered by
/// `min_count`; returned in lexicographic order.
fn select_top(counts: HashMap<String, usize>, top: usize, min_count: usize) -> Vec<String> {
    let mut ranked: Vec<(String, usize)> =
        counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top);
    let mut keys: Vec<String> = ranked.into_iter().map(|(k, _)| k).collect();
    keys.sort();
    keys
}

/// Fits a feature space on training sentences.
///
/// `embedding` is required when the embedding group is enabled; only its
/// dimensionality is recorded.
pub fn fit_feature_space(
    train: &[&Sentence],
    groups: &BTreeSet<FeatureGroup>,
    cutoffs: &Cutoffs,
    embedding: Option<&EmbeddingTable>,
) -> Result<FeatureSpace> {
    if groups.is_empty() {
        return Err(invalid("no feature groups enabled"));
    }
    if train.is_empty() {
        return Err(invalid("cannot fit a feature space on zero sentences"));
    }
    let mut keys: Vec<String> = Vec::new();
    let mut ranges = BTreeMap::new();
    let mut embedding_dim = 0;
    for &g in groups {
        let start = keys.len();
        match g {
            FeatureGroup::Structure => keys.extend(STRUCTURE_KEYS.iter().map(|k| k.to_string())),
            FeatureGroup::Lexical => {
                let mut counts = HashMap::new();
                for s in train {
                    for t in &s.tokens {
                        *counts.entry(lexical_key(&t.lower())).or_insert(0) += 1;
                    }
                }
                keys.extend(select_top(counts, cutoffs.lexical_top, 1));
            }
            FeatureGroup::Syntax => {
                let mut ngrams = HashMap::new();
                let mut prods = HashMap::new();
                let mut tags_seen = BTreeSet::new();
                for s in train {
                    if let Some(tags) = pos_tags(s) {
                        for k in pos_ngram_keys(&tags) {
                            *ngrams.entry(k).or_insert(0) += 1;
                        }
                        tags_seen.extend(tags.iter().map(|t| pos_count_key(t)));
                    }
                    for rule in s.syntax_productions.iter().flatten() {
                        *prods.entry(production_key(rule)).or_insert(0) += 1;
                    }
                }
                keys.extend(select_top(ngrams, cutoffs.pos_ngram_top, 1));
                keys.extend(select_top(prods, cutoffs.production_top, cutoffs.production_min_count));
                keys.extend(tags_seen);
            }
            FeatureGroup::Discourse => {
                let seen: BTreeSet<String> = train
                    .iter()
                    .flat_map(|s| s.discourse_relations.iter().flatten())
                    .map(discourse_key)
                    .collect();
                keys.extend(seen);
            }
            FeatureGroup::Embedding => {
                let table = embedding.ok_or_else(|| {
                    Error::Config("embedding features enabled but no embedding table given".into())
                })?;
                embedding_dim = table.dim;
                keys.extend((0..table.dim).map(|i| format!("emb:{i}")));
            }
        }
        ranges.insert(g, (start, keys.len()));
    }
    FeatureSpace::try_from(FeatureSpaceRepr {
        groups: groups.clone(),
        cutoffs: *cutoffs,
        embedding_dim,
        ranges,
        keys,
    })
}

fn is_punctuation(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '…' | '–' | '—'))
}

fn is_quote(token: &str) -> bool {
    token == "``" || token == "''" || token.contains(['"', '“', '”'])
}

/// Structure features in local coordinates (indices into [`STRUCTURE_KEYS`]).
pub fn extract_structure(sentence: &Sentence) -> SparseVector {
    let toks = &sentence.tokens;
    let last = toks.last().map(|t| t.surface.as_str()).unwrap_or("");
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let values = [
        flag(sentence.is_first_in_paragraph),
        flag(sentence.is_last_in_paragraph),
        toks.len() as f64,
        toks.iter().filter(|t| is_punctuation(&t.surface)).count() as f64,
        flag(last.ends_with('?')),
        flag(last.ends_with('!')),
        toks.iter().filter(|t| t.surface == ",").count() as f64,
        flag(toks.iter().any(|t| is_quote(&t.surface))),
    ];
    SparseVector::from_dense(&values)
}

/// Binary indicators of in-vocabulary lowercased tokens (global columns).
pub fn extract_lexical(sentence: &Sentence, space: &FeatureSpace) -> SparseVector {
    let pairs = sentence
        .tokens
        .iter()
        .filter_map(|t| space.index_of(&lexical_key(&t.lower())))
        .collect::<BTreeSet<usize>>()
        .into_iter()
        .map(|i| (i, 1.0))
        .collect();
    SparseVector { pairs }
}

/// POS n-gram and production indicators plus POS tag counts (global columns).
pub fn extract_syntax(
    sentence: &Sentence,
    space: &FeatureSpace,
    warnings: &mut ExtractionWarnings,
) -> SparseVector {
    let mut binary = BTreeSet::new();
    let mut pairs = Vec::new();
    match pos_tags(sentence) {
        Some(tags) => {
            binary.extend(pos_ngram_keys(&tags).filter_map(|k| space.index_of(&k)));
            for tag in &tags {
                if let Some(i) = space.index_of(&pos_count_key(tag)) {
                    pairs.push((i, 1.0));
                }
            }
        }
        None => warnings.missing_pos += 1,
    }
    match &sentence.syntax_productions {
        Some(rules) => binary.extend(rules.iter().filter_map(|r| space.index_of(&production_key(r)))),
        None => warnings.missing_productions += 1,
    }
    pairs.extend(binary.into_iter().map(|i| (i, 1.0)));
    SparseVector::from_pairs(pairs)
}

/// One indicator per attached discourse relation present in the space.
pub fn extract_discourse(
    sentence: &Sentence,
    space: &FeatureSpace,
    warnings: &mut ExtractionWarnings,
) -> SparseVector {
    match &sentence.discourse_relations {
        Some(tags) => SparseVector {
            pairs: tags
                .iter()
                .filter_map(|t| space.index_of(&discourse_key(t)))
                .collect::<BTreeSet<usize>>()
                .into_iter()
                .map(|i| (i, 1.0))
                .collect(),
        },
        None => {
            warnings.missing_discourse += 1;
            SparseVector::default()
        }
    }
}

/// Componentwise sum of the vectors of every in-table token occurrence.
pub fn extract_embedding(sentence: &Sentence, table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim];
    for v in sentence.tokens.iter().filter_map(|t| table.get(&t.surface)) {
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
    }
    sum
}

/// Concatenates the fragments of every enabled group into the space's
/// global column layout.
pub fn featurize(
    sentence: &Sentence,
    space: &FeatureSpace,
    table: Option<&EmbeddingTable>,
    warnings: &mut ExtractionWarnings,
) -> Result<SparseVector> {
    let mut pairs = Vec::new();
    for &g in space.groups() {
        match g {
            FeatureGroup::Structure => {
                pairs.extend(extract_structure(sentence).shifted(space.range(g).start))
            }
            FeatureGroup::Lexical => pairs.extend(extract_lexical(sentence, space).pairs),
            FeatureGroup::Syntax => pairs.extend(extract_syntax(sentence, space, warnings).pairs),
            FeatureGroup::Discourse => {
                pairs.extend(extract_discourse(sentence, space, warnings).pairs)
            }
            FeatureGroup::Embedding => {
                let table = table.ok_or_else(|| {
                    Error::Config("embedding features enabled but no embedding table given".into())
                })?;
                if table.dim != space.embedding_dim() {
                    return Err(Error::Config(format!(
                        "embedding table has dimension {}, feature space expects {}",
                        table.dim,
                        space.embedding_dim()
                    )));
                }
                let dense = extract_embedding(sentence, table);
                pairs.extend(SparseVector::from_dense(&dense).shifted(space.range(g).start));
            }
        }
    }
    Ok(SparseVector::from_pairs(pairs))
}

/// Featurizes many sentences in parallel; the result is independent of the
/// thread count.
pub fn featurize_all(
    sentences: &[&Sentence],
    space: &FeatureSpace,
    table: Option<&EmbeddingTable>,
) -> Result<(Vec<SparseVector>, ExtractionWarnings)> {
    let results: Vec<Result<(SparseVector, ExtractionWarnings)>> = sentences
        .par_iter()
        .map(|s| {
            let mut w = ExtractionWarnings::default();
            featurize(s, space, table, &mut w).map(|v| (v, w))
        })
        .collect();
    let mut warnings = ExtractionWarnings::default();
    let mut vectors = Vec::with_capacity(results.len());
    for r in results {
        let (v, w) = r?;
        warnings += w;
        vectors.push(v);
    }
    if warnings.total() > 0 {
        log::debug!("missing annotations during extraction: {warnings:?}");
    }
    Ok((vectors, warnings))
}
