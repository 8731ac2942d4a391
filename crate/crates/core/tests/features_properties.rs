use std::collections::{BTreeSet, HashSet};

use claimscope_core::corpus::{ArgumentRole, Realization};
use claimscope_core::features::{featurize_all, STRUCTURE_KEYS};
use claimscope_core::{
    featurize, fit_feature_space, generate_synthetic, ClaimLabel, Cutoffs, DiscourseRelationTag,
    EmbeddingTable, ExtractionWarnings, FeatureGroup, FeatureSpace, Sentence, SyntheticParams,
    Token,
};
use proptest::prelude::*;

fn table() -> EmbeddingTable {
    let mut t = EmbeddingTable::new(3);
    t.insert("should", vec![1.0, 0.0, -1.0]).unwrap();
    t.insert("because", vec![0.0, 2.0, 0.5]).unwrap();
    t.insert("the", vec![0.1, 0.1, 0.1]).unwrap();
    t
}

/// Every key a sentence could contribute, computed independently of the
/// library's extraction code.
fn observable_keys(s: &Sentence) -> HashSet<String> {
    let mut keys: HashSet<String> = STRUCTURE_KEYS.iter().map(|k| k.to_string()).collect();
    keys.extend(s.tokens.iter().map(|t| format!("lex:{}", t.surface.to_lowercase())));
    if let Some(tags) = s.tokens.iter().map(|t| t.pos.clone()).collect::<Option<Vec<String>>>() {
        for n in 2..=4 {
            for w in tags.windows(n) {
                keys.insert(format!("posng:{}", w.join("_")));
            }
        }
        keys.extend(tags.iter().map(|t| format!("poscnt:{t}")));
    }
    for p in s.syntax_productions.iter().flatten() {
        keys.insert(format!("prod:{p}"));
    }
    for d in s.discourse_relations.iter().flatten() {
        let real = if d.realization == Realization::Explicit { "E" } else { "I" };
        let arg = match d.argument_role {
            ArgumentRole::Arg1 => "1",
            ArgumentRole::Arg2 => "2",
            ArgumentRole::Both => "B",
        };
        keys.insert(format!("disc:{}|{real}|{arg}", d.relation_type));
    }
    keys
}

fn groups_without(g: FeatureGroup) -> BTreeSet<FeatureGroup> {
    FeatureGroup::all().into_iter().filter(|&x| x != g).collect()
}

fn check_layout(space: &FeatureSpace) {
    let mut covered = vec![0u8; space.n_columns()];
    for &g in space.groups() {
        for c in space.range(g) {
            covered[c] += 1;
        }
    }
    assert!(covered.iter().all(|&c| c == 1), "ranges must tile the columns exactly once");
    for (i, k) in space.keys().iter().enumerate() {
        assert_eq!(space.index_of(k), Some(i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn space_never_leaks_and_vectors_are_well_formed(seed in 0u64..1000, split in 2usize..8) {
        let c = generate_synthetic(&SyntheticParams { seed, n_docs: 30, ..Default::default() }).unwrap();
        let sentences: Vec<&Sentence> = c.sentences().collect();
        let (train, test): (Vec<&Sentence>, Vec<&Sentence>) =
            sentences.iter().enumerate().fold((vec![], vec![]), |(mut tr, mut te), (i, s)| {
                if i % split == 0 { te.push(*s) } else { tr.push(*s) }
                (tr, te)
            });
        let t = table();
        let cutoffs = Cutoffs { lexical_top: 60, pos_ngram_top: 40, production_top: 30, production_min_count: 2 };
        let space = fit_feature_space(&train, &FeatureGroup::all(), &cutoffs, Some(&t)).unwrap();
        let seen: HashSet<String> = train.iter().flat_map(|s| observable_keys(s)).collect();
        for k in space.keys() {
            prop_assert!(k.starts_with("emb:") || seen.contains(k), "key {} not in training data", k);
        }
        prop_assert!(space.count_prefix("lex") <= 60);
        prop_assert!(space.count_prefix("posng") <= 40);
        prop_assert!(space.count_prefix("prod") <= 30);
        check_layout(&space);

        let (vectors, _) = featurize_all(&test, &space, Some(&t)).unwrap();
        let binary: BTreeSet<&str> = ["lex", "posng", "prod", "disc"].into();
        for (s, v) in test.iter().zip(&vectors) {
            let mut w = ExtractionWarnings::default();
            prop_assert_eq!(&featurize(s, &space, Some(&t), &mut w).unwrap(), v);
            prop_assert!(v.pairs().windows(2).all(|p| p[0].0 < p[1].0));
            for (j, x) in v.iter() {
                prop_assert!(x != 0.0 && x.is_finite());
                let key = space.key(j).unwrap();
                let ns = key.split(':').next().unwrap();
                if binary.contains(ns) {
                    prop_assert_eq!(x, 1.0);
                } else if ns == "poscnt" || key == "struct:n_tokens" {
                    prop_assert!(x >= 1.0 && x.fract() == 0.0);
                }
            }
        }
    }
}

#[test]
fn ablation_removes_only_the_dropped_group() {
    let c = generate_synthetic(&SyntheticParams { seed: 9, n_docs: 30, ..Default::default() }).unwrap();
    let sentences: Vec<&Sentence> = c.sentences().collect();
    let t = table();
    let full = fit_feature_space(&sentences, &FeatureGroup::all(), &Cutoffs::default(), Some(&t)).unwrap();
    for g in FeatureGroup::all() {
        let groups = groups_without(g);
        let space = fit_feature_space(&sentences, &groups, &Cutoffs::default(), Some(&t)).unwrap();
        check_layout(&space);
        assert!(!space.has_group(g));
        assert_eq!(space.n_columns(), full.n_columns() - full.range(g).len());
        let (vectors, _) = featurize_all(&sentences, &space, Some(&t)).unwrap();
        let dropped_prefixes: &[&str] = match g {
            FeatureGroup::Structure => &["struct:"],
            FeatureGroup::Lexical => &["lex:"],
            FeatureGroup::Syntax => &["posng:", "prod:", "poscnt:"],
            FeatureGroup::Discourse => &["disc:"],
            FeatureGroup::Embedding => &["emb:"],
        };
        for v in &vectors {
            for (j, _) in v.iter() {
                let key = space.key(j).unwrap();
                assert!(!dropped_prefixes.iter().any(|p| key.starts_with(p)), "{key} with {g:?} dropped");
            }
        }
    }
    // a single group keeps the support inside its range
    let lex: BTreeSet<FeatureGroup> = [FeatureGroup::Lexical].into();
    let space = fit_feature_space(&sentences, &lex, &Cutoffs::default(), None).unwrap();
    let (vectors, _) = featurize_all(&sentences, &space, None).unwrap();
    let range = space.range(FeatureGroup::Lexical);
    assert!(vectors.iter().all(|v| v.iter().all(|(j, _)| range.contains(&j))));
}

#[test]
fn fully_annotated_sentence_touches_every_group() {
    let words = [("We", "PRP"), ("should", "MD"), ("act", "VB"), ("because", "IN"), ("time", "NN"), ("?", ".")];
    let make = || {
        let tokens = words
            .iter()
            .map(|(w, p)| Token { surface: w.to_string(), lemma: Some(w.to_lowercase()), pos: Some(p.to_string()), claim_label: ClaimLabel::Claim })
            .collect();
        let mut s = Sentence::from_tokens(tokens).unwrap();
        s.syntax_productions = Some(vec!["S -> NP VP".into()]);
        s.discourse_relations =
            Some(vec![DiscourseRelationTag::new("Contingency.Cause", Realization::Explicit, ArgumentRole::Arg2)]);
        s
    };
    let train: Vec<Sentence> = (0..5).map(|_| make()).collect();
    let refs: Vec<&Sentence> = train.iter().collect();
    let t = table();
    let space = fit_feature_space(&refs, &FeatureGroup::all(), &Cutoffs::default(), Some(&t)).unwrap();
    let mut w = ExtractionWarnings::default();
    let v = featurize(&train[0], &space, Some(&t), &mut w).unwrap();
    assert_eq!(w.total(), 0);
    let hit: BTreeSet<FeatureGroup> = FeatureGroup::all()
        .into_iter()
        .filter(|&g| v.iter().any(|(j, _)| space.range(g).contains(&j)))
        .collect();
    assert_eq!(hit, FeatureGroup::all());
    assert!(hit.len() >= 4);
    assert_eq!(v.get(space.index_of("prod:S -> NP VP").unwrap()), 1.0);
    assert_eq!(v.get(space.index_of("disc:Contingency.Cause|E|2").unwrap()), 1.0);
    assert_eq!(v.get(space.index_of("struct:ends_question").unwrap()), 1.0);
    // "should" + "because" embeddings
    let emb = space.range(FeatureGroup::Embedding).start;
    assert_eq!((v.get(emb), v.get(emb + 1), v.get(emb + 2)), (1.0, 2.0, -0.5));
}

#[test]
fn embeddings_without_table_are_a_configuration_error() {
    let c = generate_synthetic(&SyntheticParams { seed: 2, n_docs: 5, ..Default::default() }).unwrap();
    let s: Vec<&Sentence> = c.sentences().collect();
    let emb: BTreeSet<FeatureGroup> = [FeatureGroup::Embedding].into();
    assert!(fit_feature_space(&s, &emb, &Cutoffs::default(), None).is_err());
    let space = fit_feature_space(&s, &emb, &Cutoffs::default(), Some(&table())).unwrap();
    let mut w = ExtractionWarnings::default();
    assert!(matches!(featurize(s[0], &space, None, &mut w), Err(claimscope_core::Error::Config(_))));
}
