mod common;

use common::{perfect_analogy_space, random_space, rescale_rows, top1_answers};
use distsem_core::releval::read_tuples;
use distsem_core::{
    analogy_query, build_sppmi, cosine, evaluate_relations, generate_questions, nearest_neighbors,
    AnalogyCategory, AnalogyOptions, DenseEmbeddings, EmbeddingSpace, Error, RelationKind,
    SppmiConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raw() -> AnalogyOptions {
    AnalogyOptions {
        normalize_inputs: false,
        ..Default::default()
    }
}

#[test]
fn king_queen_by_hand() {
    let space = DenseEmbeddings::from_rows(vec![
        ("king".into(), vec![1.0, 1.0]),
        ("man".into(), vec![1.0, 0.0]),
        ("woman".into(), vec![2.0, 0.0]),
        ("queen".into(), vec![2.0, 1.0]),
    ])
    .unwrap();
    let top = analogy_query(&space, "king", "man", "woman", 1, raw()).unwrap();
    assert_eq!(top[0].word, "queen");
    assert!((top[0].similarity - 1.0).abs() < 1e-12);

    // without exclusion the query words compete: king scores 3/(√2·√5)
    let all = analogy_query(
        &space,
        "king",
        "man",
        "woman",
        4,
        AnalogyOptions {
            exclude_query_words: false,
            ..raw()
        },
    )
    .unwrap();
    let sim = |w: &str| all.iter().find(|n| n.word == w).unwrap().similarity;
    assert!((sim("man") - 4.0 / (5f64.sqrt() * 2.0)).abs() < 1e-12);
    assert!((sim("king") - 3.0 / (2f64.sqrt() * 5f64.sqrt())).abs() < 1e-12);
}

#[test]
fn neighbours_follow_hand_cosines_with_word_tiebreak() {
    let space = DenseEmbeddings::from_rows(vec![
        ("q".into(), vec![1.0, 0.0]),
        ("b".into(), vec![1.0, 1.0]),
        ("a".into(), vec![1.0, -1.0]),
        ("c".into(), vec![0.0, 1.0]),
    ])
    .unwrap();
    let n = nearest_neighbors(&space, "q", 3).unwrap();
    let order: Vec<&str> = n.iter().map(|x| x.word.as_str()).collect();
    assert_eq!(order, ["a", "b", "c"]);
    assert!((n[0].similarity - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(matches!(
        nearest_neighbors(&space, "zz", 3),
        Err(Error::OutOfVocabulary(_))
    ));
}

#[test]
fn zero_vectors_are_flagged() {
    let c = cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
    assert!(c.zero_vector);
    assert_eq!(c.value, 0.0);
    assert!(matches!(
        cosine(&[1.0], &[1.0, 2.0]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn twenty_tuples_give_380_questions() {
    let tuples = (0..20)
        .map(|i| (format!("x{i}"), format!("y{i}")))
        .collect();
    let cat = AnalogyCategory::new("c", RelationKind::Semantic, tuples).unwrap();
    let q = generate_questions(&cat).unwrap();
    assert_eq!(q.questions.len(), 380);
    assert_eq!(q.dropped, 0);
    let one =
        AnalogyCategory::new("c", RelationKind::Semantic, vec![("a".into(), "b".into())]).unwrap();
    assert!(generate_questions(&one).is_err());
}

#[test]
fn perfect_space_scores_one_and_deletion_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let sizes = [6, 5, 7, 4];
    let (space, cats) = perfect_analogy_space(&mut rng, &sizes);
    let total: usize = sizes.iter().map(|n| n * (n - 1)).sum();
    for options in [AnalogyOptions::default(), raw()] {
        let report = evaluate_relations(&space, &cats, options);
        assert_eq!(report.generated, total);
        assert_eq!(report.attempted, total);
        assert_eq!(report.skipped_oov, 0);
        assert_eq!(report.accuracy, Some(1.0));
        assert_eq!(report.macro_accuracy, Some(1.0));
    }

    // drop one word: exactly the questions mentioning it are skipped
    let gone = "r2_3";
    let rows = (0..space.len())
        .filter(|&i| space.word(i) != gone)
        .map(|i| (space.word(i).to_owned(), space.row(i).to_vec()))
        .collect();
    let reduced = DenseEmbeddings::from_rows(rows).unwrap();
    let report = evaluate_relations(&reduced, &cats, AnalogyOptions::default());
    let affected = cats
        .iter()
        .flat_map(|c| generate_questions(c).unwrap().questions)
        .filter(|q| [&q.a, &q.b, &q.c, &q.d].iter().any(|w| w.as_str() == gone))
        .count();
    assert_eq!(affected, 2 * (7 - 1));
    assert_eq!(report.skipped_oov, affected);
    assert_eq!(report.attempted + report.skipped_oov, report.generated);
    assert_eq!(report.generated, total);
    assert_eq!(report.accuracy, Some(1.0));
}

#[test]
fn category_with_everything_missing_reports_no_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (space, mut cats) = perfect_analogy_space(&mut rng, &[3]);
    cats.push(
        AnalogyCategory::new(
            "ghost",
            RelationKind::Syntactic,
            vec![("p".into(), "q".into()), ("s".into(), "t".into())],
        )
        .unwrap(),
    );
    let report = evaluate_relations(&space, &cats, AnalogyOptions::default());
    assert_eq!(report.categories[1].accuracy, None);
    assert_eq!(report.categories[1].skipped_oov, 2);
    assert_eq!(report.macro_accuracy, Some(1.0));
    let mut tsv = Vec::new();
    report.write_tsv(&mut tsv).unwrap();
    let tsv = String::from_utf8(tsv).unwrap();
    assert!(
        tsv.lines()
            .any(|l| l.starts_with("ghost\tsyntactic\t0\t0\t2\tNA")),
        "{tsv}"
    );
}

#[test]
fn tuple_file_errors_carry_line_numbers() {
    let good = ": meervoud syntactic\nboek\tboeken\nhuis huizen\n\n: geslacht semantic\nkoning koningin\nman vrouw\n";
    let cats = read_tuples(good.as_bytes()).unwrap();
    assert_eq!(cats.len(), 2);
    assert_eq!(
        cats[0].tuples[1],
        ("huis".to_string(), "huizen".to_string())
    );
    assert_eq!(cats[1].kind, RelationKind::Semantic);

    for (bad, line) in [
        ("boek boeken\n", 1),
        (": a syntactic\nx y\nx\n", 3),
        (": a weird\n", 1),
        (": a syntactic\nx y\n: a semantic\n", 3),
    ] {
        match read_tuples(bad.as_bytes()) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
            other => panic!("{bad:?} gave {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn rescaling_rows_changes_no_top1(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 60, 12);
        let scaled = rescale_rows(&mut rng, &space);
        let before = top1_answers(&space, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let after = top1_answers(&scaled, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        prop_assert_eq!(before, after);
        for w in ["v000", "v017", "v059"] {
            let a: Vec<String> = nearest_neighbors(&space, w, 5).unwrap().into_iter().map(|n| n.word).collect();
            let b: Vec<String> = nearest_neighbors(&scaled, w, 5).unwrap().into_iter().map(|n| n.word).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn word2vec_text_round_trip(seed in any::<u64>(), words in 1usize..30, dim in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..words)
            .map(|i| (format!("w{i}"), (0..dim).map(|_| rng.random_range(-50.0..50.0)).collect()))
            .collect();
        let space = DenseEmbeddings::from_rows(rows).unwrap();
        let mut buf = Vec::new();
        space.write_text(&mut buf).unwrap();
        let back = DenseEmbeddings::read_text(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), space.len());
        for (x, y) in space.data().iter().zip(back.data()) {
            prop_assert!((x - y).abs() < 1e-5, "{} vs {}", x, y);
        }
    }
}

#[test]
fn sparse_and_dense_spaces_agree() {
    let corpus: Vec<Vec<String>> = ["a b c d", "b c d e", "a c e", "d e a b"]
        .iter()
        .map(|s| common::tokens(s))
        .collect();
    let vocab = std::sync::Arc::new(
        distsem_core::Vocabulary::from_counts(
            [("a", 1), ("b", 1), ("c", 1), ("d", 1), ("e", 1)].map(|(w, c)| (w.to_string(), c)),
            1,
            None,
        )
        .unwrap(),
    );
    let m = distsem_core::count_cooccurrences(
        &corpus,
        vocab,
        &distsem_core::CoocConfig {
            window: 2,
            dynamic_window: false,
        },
        0,
    )
    .unwrap();
    let sparse = build_sppmi(&m, &SppmiConfig { shift_k: 1.0 }).unwrap();
    let dense = DenseEmbeddings::from_rows(
        sparse
            .densify()
            .into_iter()
            .enumerate()
            .map(|(i, r)| (sparse.word(i).to_owned(), r))
            .collect(),
    )
    .unwrap();
    for w in ["a", "c", "e"] {
        let s = nearest_neighbors(&sparse, w, 4).unwrap();
        let d = nearest_neighbors(&dense, w, 4).unwrap();
        for (x, y) in s.iter().zip(&d) {
            assert_eq!(x.word, y.word);
            assert!((x.similarity - y.similarity).abs() < 1e-12);
        }
    }
}
