//! Unified corpus model and everything that operates on whole corpora:
//! JSON-lines ingestion, dataset statistics, document-level CV splits,
//! negative-class downsampling and the synthetic corpus generator.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Token-level claim annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClaimLabel {
    #[serde(rename = "C")]
    Claim,
    #[serde(rename = "MC")]
    MajorClaim,
    #[serde(rename = "O")]
    Other,
}

impl ClaimLabel {
    pub fn is_claim(self) -> bool {
        matches!(self, ClaimLabel::Claim | ClaimLabel::MajorClaim)
    }
}

/// Sentence-level class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "CLAIM")]
    Claim,
    #[serde(rename = "NON_CLAIM")]
    NonClaim,
}

impl Label {
    pub fn is_claim(self) -> bool {
        self == Label::Claim
    }

    /// +1 for claims, -1 otherwise.
    pub fn sign(self) -> f64 {
        if self.is_claim() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Claim => Label::NonClaim,
            Label::NonClaim => Label::Claim,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Claim => "CLAIM",
            Label::NonClaim => "NON_CLAIM",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: Option<String>,
    pub pos: Option<String>,
    pub claim_label: ClaimLabel,
}

impl Token {
    pub fn new(surface: impl Into<String>, claim_label: ClaimLabel) -> Token {
        Token {
            surface: surface.into(),
            lemma: None,
            pos: None,
            claim_label,
        }
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }

    /// The annotated lemma, lowercased, or the lowercased surface form.
    pub fn lemma_or_lower(&self) -> String {
        match &self.lemma {
            Some(l) => l.to_lowercase(),
            None => self.lower(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Realization {
    #[serde(rename = "E")]
    Explicit,
    #[serde(rename = "I")]
    Implicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArgumentRole {
    #[serde(rename = "1")]
    Arg1,
    #[serde(rename = "2")]
    Arg2,
    #[serde(rename = "B")]
    Both,
}

/// A PDTB-style discourse relation attached to a sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscourseRelationTag {
    #[serde(rename = "rel")]
    pub relation_type: String,
    #[serde(rename = "real")]
    pub realization: Realization,
    #[serde(rename = "arg")]
    pub argument_role: ArgumentRole,
}

impl DiscourseRelationTag {
    pub fn new(relation_type: &str, realization: Realization, argument_role: ArgumentRole) -> Self {
        DiscourseRelationTag {
            relation_type: relation_type.to_string(),
            realization,
            argument_role,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub index_in_doc: usize,
    pub paragraph_index: usize,
    pub is_first_in_paragraph: bool,
    pub is_last_in_paragraph: bool,
    pub label: Label,
    pub syntax_productions: Option<Vec<String>>,
    pub discourse_relations: Option<Vec<DiscourseRelationTag>>,
}

impl Sentence {
    /// Builds a standalone sentence (a one-sentence paragraph) whose label is
    /// derived from its tokens.
    pub fn from_tokens(tokens: Vec<Token>) -> Result<Sentence> {
        let labels: Vec<ClaimLabel> = tokens.iter().map(|t| t.claim_label).collect();
        let label = label_sentences(&labels)?;
        Ok(Sentence {
            tokens,
            index_in_doc: 0,
            paragraph_index: 0,
            is_first_in_paragraph: true,
            is_last_in_paragraph: true,
            label,
            syntax_productions: None,
            discourse_relations: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.sentences().map(|s| s.label).collect()
    }

    pub fn n_sentences(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }
}

/// Sentence label from token labels: a sentence is a claim iff at least one
/// of its tokens belongs to a claim or major claim.
pub fn label_sentences(token_labels: &[ClaimLabel]) -> Result<Label> {
    if token_labels.is_empty() {
        return Err(invalid("cannot label a sentence without tokens"));
    }
    Ok(if token_labels.iter().any(|l| l.is_claim()) {
        Label::Claim
    } else {
        Label::NonClaim
    })
}

// ---------------------------------------------------------------------------
// JSON-lines wire format

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDocument {
    id: String,
    sentences: Vec<WireSentence>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireSentence {
    paragraph: usize,
    label: Label,
    tokens: Vec<WireToken>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    productions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discourse: Option<Vec<DiscourseRelationTag>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireToken {
    t: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<String>,
    cl: ClaimLabel,
}

fn parse_error(line: usize, document: Option<&str>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        document: document.map(str::to_string),
        message: message.into(),
    }
}

fn document_from_wire(wire: WireDocument, line: usize) -> Result<Document> {
    let id = wire.id;
    if id.is_empty() {
        return Err(parse_error(line, None, "empty document id"));
    }
    let doc = Some(id.as_str());
    let n = wire.sentences.len();
    let mut sentences = Vec::with_capacity(n);
    for (i, ws) in wire.sentences.into_iter().enumerate() {
        if ws.tokens.is_empty() {
            return Err(parse_error(line, doc, format!("sentence {i} has no tokens")));
        }
        let mut tokens = Vec::with_capacity(ws.tokens.len());
        for wt in ws.tokens {
            if wt.t.is_empty() {
                return Err(parse_error(line, doc, format!("sentence {i} has an empty token")));
            }
            tokens.push(Token {
                surface: wt.t,
                lemma: wt.lemma,
                pos: wt.pos,
                claim_label: wt.cl,
            });
        }
        let token_labels: Vec<ClaimLabel> = tokens.iter().map(|t| t.claim_label).collect();
        let derived = label_sentences(&token_labels)?;
        if derived != ws.label {
            return Err(parse_error(
                line,
                doc,
                format!(
                    "label inconsistency in sentence {i}: stored {} but token labels imply {derived}",
                    ws.label
                ),
            ));
        }
        if let Some(rels) = &ws.discourse {
            if rels.iter().any(|r| r.relation_type.is_empty()) {
                return Err(parse_error(line, doc, format!("sentence {i}: empty discourse relation type")));
            }
        }
        sentences.push(Sentence {
            tokens,
            index_in_doc: i,
            paragraph_index: ws.paragraph,
            is_first_in_paragraph: false,
            is_last_in_paragraph: false,
            label: ws.label,
            syntax_productions: ws.productions,
            discourse_relations: ws.discourse,
        });
    }
    mark_paragraph_boundaries(&mut sentences);
    Ok(Document { id, sentences })
}

/// Sets first/last-in-paragraph flags: first iff no earlier sentence shares
/// the paragraph index, last iff no later one does.
pub fn mark_paragraph_boundaries(sentences: &mut [Sentence]) {
    let mut seen = HashSet::new();
    for s in sentences.iter_mut() {
        s.is_first_in_paragraph = seen.insert(s.paragraph_index);
    }
    seen.clear();
    for s in sentences.iter_mut().rev() {
        s.is_last_in_paragraph = seen.insert(s.paragraph_index);
    }
}

fn document_to_wire(doc: &Document) -> WireDocument {
    WireDocument {
        id: doc.id.clone(),
        sentences: doc
            .sentences
            .iter()
            .map(|s| WireSentence {
                paragraph: s.paragraph_index,
                label: s.label,
                tokens: s
                    .tokens
                    .iter()
                    .map(|t| WireToken {
                        t: t.surface.clone(),
                        lemma: t.lemma.clone(),
                        pos: t.pos.clone(),
                        cl: t.claim_label,
                    })
                    .collect(),
                productions: s.syntax_productions.clone(),
                discourse: s.discourse_relations.clone(),
            })
            .collect(),
    }
}

/// Parses a JSON-lines corpus. Blank lines are ignored; line numbers in
/// errors are 1-based.
pub fn parse_corpus<R: Read>(name: &str, reader: R) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireDocument = serde_json::from_str(&line).map_err(|e| {
            // try to recover the id for the diagnostic
            let id = serde_json::from_str::<serde_json::Value>(&line)
                .ok()
                .and_then(|v| v.get("id").and_then(|x| x.as_str()).map(str::to_string));
            parse_error(lineno, id.as_deref(), e.to_string())
        })?;
        let doc = document_from_wire(wire, lineno)?;
        if !ids.insert(doc.id.clone()) {
            return Err(parse_error(lineno, Some(&doc.id), "duplicate document id"));
        }
        documents.push(doc);
    }
    Ok(Corpus {
        name: name.to_string(),
        documents,
    })
}

/// Loads a corpus file; the corpus is named after the file stem.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_corpus(&name, File::open(path)?)
}

/// Writes the corpus in the JSON-lines format read by [`parse_corpus`].
pub fn write_corpus<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for doc in &corpus.documents {
        serde_json::to_writer(&mut writer, &document_to_wire(doc))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// statistics

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_docs: usize,
    pub n_tokens: usize,
    pub n_sentences: usize,
    pub n_claims: usize,
    pub claim_ratio: f64,
}

impl DatasetStats {
    /// Claim ratio rounded to four decimals, as reported in dataset tables.
    pub fn claim_ratio_rounded(&self) -> f64 {
        (self.claim_ratio * 1e4).round() / 1e4
    }

    /// Claims per non-claim.
    pub fn claims_to_non_claims(&self) -> f64 {
        let non = self.n_sentences - self.n_claims;
        if non == 0 {
            0.0
        } else {
            self.n_claims as f64 / non as f64
        }
    }
}

pub fn corpus_stats(corpus: &Corpus) -> DatasetStats {
    let n_docs = corpus.documents.len();
    let (mut n_tokens, mut n_sentences, mut n_claims) = (0, 0, 0);
    for s in corpus.sentences() {
        n_sentences += 1;
        n_tokens += s.tokens.len();
        if s.label.is_claim() {
            n_claims += 1;
        }
    }
    let claim_ratio = if n_sentences == 0 {
        0.0
    } else {
        n_claims as f64 / n_sentences as f64
    };
    DatasetStats {
        n_docs,
        n_tokens,
        n_sentences,
        n_claims,
        claim_ratio,
    }
}

// ---------------------------------------------------------------------------
// cross-validation splits

/// Assignment of documents to CV folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: BTreeMap<String, usize>,
}

impl SplitPlan {
    pub fn fold_of(&self, doc_id: &str) -> Option<usize> {
        self.assignment.get(doc_id).copied()
    }

    /// Document ids per fold, each list sorted.
    pub fn folds(&self) -> Vec<Vec<String>> {
        let mut folds = vec![Vec::new(); self.k];
        for (id, &f) in &self.assignment {
            folds[f].push(id.clone());
        }
        folds
    }

    /// Checks that the plan assigns every document of `corpus` to a valid fold
    /// and nothing else.
    pub fn check_covers(&self, corpus: &Corpus) -> Result<()> {
        if self.assignment.len() != corpus.documents.len() {
            return Err(invalid(format!(
                "split plan has {} documents, corpus {} has {}",
                self.assignment.len(),
                corpus.name,
                corpus.documents.len()
            )));
        }
        for d in &corpus.documents {
            match self.fold_of(&d.id) {
                Some(f) if f < self.k => {}
                Some(f) => return Err(invalid(format!("document {} assigned to fold {f} >= k", d.id))),
                None => return Err(invalid(format!("document {} missing from split plan", d.id))),
            }
        }
        Ok(())
    }
}

/// Shuffles document ids with a seeded PRNG and deals them round-robin
/// into `k` folds.
pub fn make_cv_splits(corpus: &Corpus, k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(invalid(format!("need at least 2 folds, got {k}")));
    }
    if corpus.documents.len() < k {
        return Err(invalid(format!(
            "corpus {} has {} documents, fewer than {k} folds",
            corpus.name,
            corpus.documents.len()
        )));
    }
    let mut ids: Vec<&str> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let assignment = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_string(), i % k))
        .collect();
    Ok(SplitPlan { k, seed, assignment })
}

// ---------------------------------------------------------------------------
// downsampling

/// Indices (ascending) of the instances kept after discarding non-claims
/// uniformly at random down to a 1:1 ratio. Claims are always kept and
/// nothing is ever upsampled.
pub fn downsample_indices(labels: &[Label], seed: u64) -> Vec<usize> {
    let (claims, non_claims): (Vec<usize>, Vec<usize>) =
        (0..labels.len()).partition(|&i| labels[i].is_claim());
    if non_claims.len() <= claims.len() {
        return (0..labels.len()).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, non_claims.len(), claims.len());
    let mut keep: Vec<usize> = claims;
    keep.extend(picked.into_iter().map(|j| non_claims[j]));
    keep.sort_unstable();
    keep
}

/// Downsamples a labeled list to a 1:1 class ratio, preserving order.
pub fn downsample<T: Clone>(items: &[(T, Label)], seed: u64) -> Vec<(T, Label)> {
    let labels: Vec<Label> = items.iter().map(|(_, l)| *l).collect();
    downsample_indices(&labels, seed)
        .into_iter()
        .map(|i| items[i].clone())
        .collect()
}

// ---------------------------------------------------------------------------
// synthetic corpora

/// Parameters of the planted-cue synthetic corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    pub seed: u64,
    pub n_docs: usize,
    pub claim_ratio: f64,
    pub vocab_size: usize,
    /// Probability that a claim sentence carries the modal cue "should".
    pub cue_strength: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            seed: 1,
            n_docs: 100,
            claim_ratio: 0.25,
            vocab_size: 500,
            cue_strength: 0.75,
        }
    }
}

const FUNCTION_WORDS: &[(&str, &str, &str)] = &[
    ("the", "DT", "the"),
    ("a", "DT", "a"),
    ("of", "IN", "of"),
    ("to", "TO", "to"),
    ("and", "CC", "and"),
    ("is", "VBZ", "be"),
    ("that", "IN", "that"),
    ("it", "PRP", "it"),
    ("in", "IN", "in"),
    ("we", "PRP", "we"),
];

const CONTENT_TAGS: &[&str] = &["NN", "NNS", "VB", "JJ", "NN", "RB", "VBZ", "NN"];

struct SentenceBuilder<'a> {
    rng: &'a mut ChaCha8Rng,
    vocab_size: usize,
    tokens: Vec<Token>,
}

impl SentenceBuilder<'_> {
    fn push(&mut self, surface: &str, pos: &str, lemma: &str) {
        self.tokens.push(Token {
            surface: surface.to_string(),
            lemma: Some(lemma.to_string()),
            pos: Some(pos.to_string()),
            claim_label: ClaimLabel::Other,
        });
    }

    fn filler(&mut self, n: usize) {
        for _ in 0..n {
            if self.rng.random_bool(0.4) {
                let (w, p, l) = FUNCTION_WORDS[self.rng.random_range(0..FUNCTION_WORDS.len())];
                self.push(w, p, l);
            } else {
                // skewed towards low indices so that frequencies are Zipf-like
                let u: f64 = self.rng.random();
                let idx = ((u * u) * self.vocab_size as f64) as usize;
                let idx = idx.min(self.vocab_size - 1);
                let pos = CONTENT_TAGS[idx % CONTENT_TAGS.len()];
                let word = format!("w{idx}");
                if pos == "NNS" {
                    self.push(&format!("{word}s"), pos, &word);
                } else {
                    self.push(&word, pos, &word);
                }
            }
        }
    }
}

fn synthetic_productions(tokens: &[Token]) -> Vec<String> {
    let mut prods = vec!["S->NP VP".to_string()];
    let tags: Vec<&str> = tokens.iter().map(|t| t.pos.as_deref().unwrap_or("")).collect();
    for w in tags.windows(2) {
        let p = match (w[0], w[1]) {
            ("DT", "NN") | ("DT", "NNS") => format!("NP->DT {}", w[1]),
            ("JJ", "NN") => "NP->JJ NN".to_string(),
            ("MD", "VB") => "VP->MD VP".to_string(),
            ("IN", _) => "PP->IN NP".to_string(),
            ("PRP", _) => "NP->PRP".to_string(),
            _ => continue,
        };
        if !prods.contains(&p) {
            prods.push(p);
        }
    }
    prods
}

/// Generates a corpus whose claims carry planted lexical cues ("should",
/// "therefore", "think") with elevated probability. The number of claims is
/// exactly `round(claim_ratio * n_sentences)`. Fully annotated (lemmas, POS,
/// productions, discourse) and deterministic per seed.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<Corpus> {
    if !(params.claim_ratio > 0.0 && params.claim_ratio < 1.0) {
        return Err(invalid(format!("claim_ratio must lie in (0,1), got {}", params.claim_ratio)));
    }
    if params.vocab_size < 10 {
        return Err(invalid(format!("vocab_size must be at least 10, got {}", params.vocab_size)));
    }
    if !(0.0..=1.0).contains(&params.cue_strength) {
        return Err(invalid("cue_strength must lie in [0,1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // layout: per document, the paragraph index of each sentence
    let layouts: Vec<Vec<usize>> = (0..params.n_docs)
        .map(|_| {
            let n_par = rng.random_range(1..=3);
            (0..n_par)
                .flat_map(|p| std::iter::repeat_n(p, rng.random_range(1..=4)))
                .collect::<Vec<_>>()
        })
        .collect();
    let total: usize = layouts.iter().map(Vec::len).sum();
    let n_claims = ((params.claim_ratio * total as f64).round() as usize).min(total);
    let mut is_claim = vec![false; total];
    is_claim[..n_claims].iter_mut().for_each(|c| *c = true);
    is_claim.shuffle(&mut rng);

    let mut slot = 0;
    let mut documents = Vec::with_capacity(params.n_docs);
    for (d, layout) in layouts.into_iter().enumerate() {
        let mut sentences = Vec::with_capacity(layout.len());
        for (i, paragraph) in layout.into_iter().enumerate() {
            let claim = is_claim[slot];
            slot += 1;
            let mut b = SentenceBuilder {
                rng: &mut rng,
                vocab_size: params.vocab_size,
                tokens: Vec::new(),
            };
            let mut relations = Vec::new();
            if claim {
                let lead = b.rng.random_bool(0.3);
                if lead {
                    b.push("Therefore", "RB", "therefore");
                    b.push(",", ",", ",");
                    relations.push(DiscourseRelationTag::new(
                        "Contingency.Cause.Result",
                        Realization::Explicit,
                        ArgumentRole::Arg2,
                    ));
                } else if b.rng.random_bool(0.25) {
                    b.push("I", "PRP", "i");
                    b.push("think", "VBP", "think");
                }
                let start = b.tokens.len();
                let n1 = b.rng.random_range(2..6);
                b.filler(n1);
                if b.rng.random_bool(params.cue_strength) {
                    b.push("should", "MD", "should");
                    b.push("be", "VB", "be");
                }
                let n2 = b.rng.random_range(2..8);
                b.filler(n2);
                let label = if d % 5 == 0 && i == 0 {
                    ClaimLabel::MajorClaim
                } else {
                    ClaimLabel::Claim
                };
                for t in &mut b.tokens[start..] {
                    t.claim_label = label;
                }
                if b.rng.random_bool(0.1) {
                    b.push("!", ".", "!");
                } else {
                    b.push(".", ".", ".");
                }
            } else {
                let n1 = b.rng.random_range(3..9);
                b.filler(n1);
                if b.rng.random_bool(0.04) {
                    b.push("should", "MD", "should");
                    b.push("be", "VB", "be");
                }
                if b.rng.random_bool(0.3) {
                    b.push("because", "IN", "because");
                    relations.push(DiscourseRelationTag::new(
                        "Contingency.Cause.Reason",
                        Realization::Explicit,
                        ArgumentRole::Arg2,
                    ));
                }
                if b.rng.random_bool(0.15) {
                    b.push(",", ",", ",");
                    b.push("\"", "``", "\"");
                }
                let n2 = b.rng.random_range(2..8);
                b.filler(n2);
                if b.rng.random_bool(0.1) {
                    b.push("?", ".", "?");
                } else {
                    b.push(".", ".", ".");
                }
            }
            if b.rng.random_bool(0.2) {
                let role = [ArgumentRole::Arg1, ArgumentRole::Arg2, ArgumentRole::Both]
                    [b.rng.random_range(0..3)];
                relations.push(DiscourseRelationTag::new(
                    "Expansion.Conjunction",
                    Realization::Implicit,
                    role,
                ));
            }
            let tokens = b.tokens;
            let productions = synthetic_productions(&tokens);
            sentences.push(Sentence {
                tokens,
                index_in_doc: i,
                paragraph_index: paragraph,
                is_first_in_paragraph: false,
                is_last_in_paragraph: false,
                label: if claim { Label::Claim } else { Label::NonClaim },
                syntax_productions: Some(productions),
                discourse_relations: Some(relations),
            });
        }
        mark_paragraph_boundaries(&mut sentences);
        documents.push(Document {
            id: format!("syn-{d:05}"),
            sentences,
        });
    }
    Ok(Corpus {
        name: format!("SYN{}", params.seed),
        documents,
    })
}
