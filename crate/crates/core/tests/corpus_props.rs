mod common;

use std::collections::BTreeSet;

use distsem_core::corpus::{TokenCounts, Vocabulary};
use distsem_core::{build_vocabulary, normalize_sentence, PreprocessConfig};
use proptest::prelude::*;

fn words(s: &[&str]) -> Vec<String> {
    s.iter().map(|w| w.to_string()).collect()
}

#[test]
fn lowercases_and_drops_punctuation_tokens() {
    let out = normalize_sentence(
        &["De", "kat", "!!", "zat", "op", "de", "mat"],
        &PreprocessConfig::default(),
    );
    assert_eq!(out, words(&["de", "kat", "zat", "op", "de", "mat"]));
}

#[test]
fn sentences_under_five_tokens_are_dropped() {
    let out = normalize_sentence(
        &["Hallo", "daar", "jij", "hond"],
        &PreprocessConfig::default(),
    );
    assert!(out.is_empty());
}

#[test]
fn single_characters_except_u_are_dropped_on_request() {
    let cfg = PreprocessConfig {
        drop_single_char: true,
        ..Default::default()
    };
    let tokens = ["u", "s", "regio", "x", "winkel", "gaan"];
    let kept: Vec<String> = tokens
        .iter()
        .filter_map(|t| cfg.normalize_token(t))
        .collect();
    assert_eq!(kept, words(&["u", "regio", "winkel", "gaan"]));
    assert!(normalize_sentence(&tokens, &cfg).is_empty());
}

#[test]
fn vocabulary_keeps_most_frequent() {
    let corpus: Vec<Vec<String>> = (0..4)
        .map(|_| words(&["a", "a", "a", "b", "b", "c"]))
        .collect();
    let v = build_vocabulary(&corpus, &PreprocessConfig::default(), Some(2), 1).unwrap();
    assert_eq!(v.words(), &words(&["a", "b"]));
    // tokens of retained words only
    assert_eq!(v.total_tokens(), 20);
}

fn token_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z]{1,6}",
        "[A-Z][a-zé]{0,5}",
        "[!?.,;:]{1,3}",
        Just("u".to_string()),
        Just("U".to_string()),
        "[a-z0-9'-]{1,5}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_is_idempotent(
        sentence in prop::collection::vec(token_strategy(), 0..15),
        single in any::<bool>(),
        min in 1usize..7,
    ) {
        let cfg = PreprocessConfig { drop_single_char: single, min_sentence_tokens: min, ..Default::default() };
        let once = normalize_sentence(&sentence, &cfg);
        let twice = normalize_sentence(&once, &cfg);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.is_empty() || once.len() >= min);
    }

    #[test]
    fn vocabulary_ignores_sentence_order(
        corpus in prop::collection::vec(prop::collection::vec("[a-f]{1,2}", 5..9), 1..20),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let cfg = PreprocessConfig::default();
        let a = build_vocabulary(&corpus, &cfg, None, 1).unwrap();
        let mut shuffled = corpus.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let b = build_vocabulary(&shuffled, &cfg, None, 1).unwrap();
        prop_assert_eq!(&a, &b);

        // truncation returns a prefix of the full ordering
        for size in 1..=a.len() {
            let t = build_vocabulary(&corpus, &cfg, Some(size), 1).unwrap();
            prop_assert_eq!(t.words(), &a.words()[..size]);
        }
    }

    #[test]
    fn vocabulary_tsv_round_trips(counts in prop::collection::btree_map("[a-z]{1,8}", 1u64..1000, 1..40)) {
        let v = Vocabulary::from_counts(counts, 1, None).unwrap();
        let mut buf = Vec::new();
        v.write_tsv(&mut buf).unwrap();
        let back = Vocabulary::read_tsv(buf.as_slice()).unwrap();
        prop_assert_eq!(v, back);
    }

    #[test]
    fn merged_counts_equal_single_pass(
        corpus in prop::collection::vec(prop::collection::vec("[a-d]", 5..8), 2..12),
        split in 0usize..12,
    ) {
        let cfg = PreprocessConfig::default();
        let split = split.min(corpus.len());
        let mut left = TokenCounts::new();
        corpus[..split].iter().for_each(|s| left.add_sentence(s, &cfg));
        let mut right = TokenCounts::new();
        corpus[split..].iter().for_each(|s| right.add_sentence(s, &cfg));
        left.merge(right);
        let merged = left.into_vocabulary(None, 1).unwrap();
        prop_assert_eq!(merged, build_vocabulary(&corpus, &cfg, None, 1).unwrap());
    }
}

#[test]
fn intersection_of_vocabularies() {
    let a = Vocabulary::from_counts([("x".to_string(), 3), ("y".to_string(), 2)], 1, None).unwrap();
    let b = Vocabulary::from_counts([("y".to_string(), 5), ("z".to_string(), 1)], 1, None).unwrap();
    let both = distsem_core::intersect_vocabularies(&[&a, &b]);
    assert_eq!(both, BTreeSet::from(["y".to_string()]));
}
