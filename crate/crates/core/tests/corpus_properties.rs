use std::collections::BTreeSet;

use claimscope_core::corpus::{downsample_indices, mark_paragraph_boundaries};
use claimscope_core::evaluation::baseline_majority;
use claimscope_core::{
    corpus_stats, generate_synthetic, label_sentences, make_cv_splits, parse_corpus, score,
    write_corpus, ClaimLabel, Corpus, Document, Label, Sentence, SyntheticParams, Token,
};
use proptest::prelude::*;

fn claim_label() -> impl Strategy<Value = ClaimLabel> {
    prop_oneof![Just(ClaimLabel::Other), Just(ClaimLabel::Claim), Just(ClaimLabel::MajorClaim)]
}

fn token() -> impl Strategy<Value = Token> {
    (
        "[a-zA-Z]{1,8}|[.,?!\"]",
        prop::option::of("[a-z]{1,8}"),
        prop::option::of(prop_oneof![Just("NN".to_string()), Just("VB".to_string()), Just("MD".to_string())]),
        claim_label(),
    )
        .prop_map(|(surface, lemma, pos, claim_label)| Token { surface, lemma, pos, claim_label })
}

fn sentence() -> impl Strategy<Value = (Vec<Token>, usize, Option<Vec<String>>)> {
    (
        prop::collection::vec(token(), 1..8),
        0usize..3,
        prop::option::of(prop::collection::vec("[A-Z]{1,3} -> [A-Z]{1,3}", 0..3)),
    )
}

fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(prop::collection::vec(sentence(), 1..5), 0..5).prop_map(|docs| {
        let documents = docs
            .into_iter()
            .enumerate()
            .map(|(d, sents)| {
                let mut paragraph = 0;
                let mut sentences: Vec<Sentence> = sents
                    .into_iter()
                    .enumerate()
                    .map(|(i, (tokens, bump, productions))| {
                        // paragraph indices are nondecreasing within a document
                        paragraph += usize::from(bump == 0 && i > 0);
                        let mut s = Sentence::from_tokens(tokens).unwrap();
                        s.index_in_doc = i;
                        s.paragraph_index = paragraph;
                        s.syntax_productions = productions;
                        s
                    })
                    .collect();
                mark_paragraph_boundaries(&mut sentences);
                Document { id: format!("doc-{d}"), sentences }
            })
            .collect();
        Corpus { name: "RT".into(), documents }
    })
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(c in corpus()) {
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        let back = parse_corpus("RT", buf.as_slice()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn labelling_is_monotone(labels in prop::collection::vec(claim_label(), 1..20), flip in any::<prop::sample::Index>()) {
        let before = label_sentences(&labels).unwrap();
        let mut after = labels.clone();
        let i = flip.index(after.len());
        if after[i] == ClaimLabel::Other {
            after[i] = ClaimLabel::Claim;
        }
        let after = label_sentences(&after).unwrap();
        prop_assert!(!(before == Label::Claim && after == Label::NonClaim));
        if labels[i] == ClaimLabel::Other {
            prop_assert_eq!(after, Label::Claim);
        }
    }

    #[test]
    fn splits_partition_documents(n_docs in 2usize..60, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n_docs);
        let c = generate_synthetic(&SyntheticParams { seed: 1, n_docs, ..Default::default() }).unwrap();
        let plan = make_cv_splits(&c, k, seed).unwrap();
        let folds = plan.folds();
        let mut seen = BTreeSet::new();
        for f in &folds {
            for id in f {
                prop_assert!(seen.insert(id.clone()));
            }
        }
        let all: BTreeSet<String> = c.documents.iter().map(|d| d.id.clone()).collect();
        prop_assert_eq!(seen, all);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(make_cv_splits(&c, k, seed).unwrap(), plan);
    }

    #[test]
    fn downsample_counts(claims in 0usize..50, non_claims in 0usize..200, seed in any::<u64>()) {
        let mut labels = vec![Label::Claim; claims];
        labels.extend(vec![Label::NonClaim; non_claims]);
        // interleave so positions matter
        labels.sort_by_key(|l| (seed as usize).wrapping_mul(l.is_claim() as usize + 7) % 3);
        let kept = downsample_indices(&labels, seed);
        let kept_claims = kept.iter().filter(|&&i| labels[i].is_claim()).count();
        prop_assert_eq!(kept_claims, claims);
        if non_claims >= claims {
            prop_assert_eq!(kept.len(), 2 * claims);
        } else {
            prop_assert_eq!(kept.len(), labels.len());
        }
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn majority_on_balanced_sample() {
    // ratio 0.5: one claim per non-claim, so majority Macro-F1 is 100/3
    let c = generate_synthetic(&SyntheticParams { seed: 4, n_docs: 60, claim_ratio: 0.5, ..Default::default() }).unwrap();
    let stats = corpus_stats(&c);
    assert!((stats.claim_ratio - 0.5).abs() < 0.01);
    let gold = c.labels();
    let rep = score(&baseline_majority(gold.len()), &gold).unwrap();
    let r = stats.claim_ratio;
    assert!((rep.macro_f1_pct() - 100.0 * (1.0 - r) / (2.0 - r)).abs() < 1e-9);
    assert!((rep.macro_f1_pct() - 33.3).abs() < 0.5);
}

#[test]
fn synthetic_claim_ratio_and_round_trip() {
    for seed in 0..5 {
        let c = generate_synthetic(&SyntheticParams { seed, n_docs: 50, claim_ratio: 0.25, ..Default::default() }).unwrap();
        let st = corpus_stats(&c);
        assert!((st.claim_ratio - 0.25).abs() <= 0.03);
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        let back = parse_corpus(&c.name, buf.as_slice()).unwrap();
        assert_eq!(back, c);
        assert_eq!(corpus_stats(&back), st);
    }
}
