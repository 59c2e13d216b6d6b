//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use distsem_core::sgns::{init_model, SgnsConfig, SgnsModel};
use distsem_core::{
    analogy_query, cosine, AnalogyCategory, AnalogyOptions, CoocConfig, DenseEmbeddings,
    EmbeddingSpace, LabeledPost, RelationKind, Vocabulary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense co-occurrence counts by direct enumeration of every (i, j) pair
/// within `window` positions, after deleting tokens outside `vocab`.
pub fn dense_counts(corpus: &[Vec<String>], vocab: &[String], window: usize) -> Vec<Vec<f64>> {
    let index: HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let n = vocab.len();
    let mut counts = vec![vec![0.0; n]; n];
    for sentence in corpus {
        let ids: Vec<usize> = sentence
            .iter()
            .filter_map(|w| index.get(w.as_str()).copied())
            .collect();
        for i in 0..ids.len() {
            for j in 0..ids.len() {
                let dist = i.abs_diff(j);
                if dist >= 1 && dist <= window {
                    counts[ids[i]][ids[j]] += 1.0;
                }
            }
        }
    }
    counts
}

/// `max(ln(p(w,c) / (p(w) p(c))) − ln k, 0)` on a dense matrix, zero where
/// the count is zero.
pub fn dense_sppmi(counts: &[Vec<f64>], shift_k: f64) -> Vec<Vec<f64>> {
    let n = counts.len();
    let total: f64 = counts.iter().flatten().sum();
    let rows: Vec<f64> = counts.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..n).map(|c| counts.iter().map(|r| r[c]).sum()).collect();
    counts
        .iter()
        .enumerate()
        .map(|(w, row)| {
            row.iter()
                .enumerate()
                .map(|(c, &n_wc)| {
                    if n_wc == 0.0 {
                        return 0.0;
                    }
                    let p_wc = n_wc / total;
                    let p_w = rows[w] / total;
                    let p_c = cols[c] / total;
                    (p_wc.ln() - p_w.ln() - p_c.ln() - shift_k.ln()).max(0.0)
                })
                .collect()
        })
        .collect()
}

/// A random corpus over `n_words` synthetic words with `n_tokens` tokens in
/// sentences of 2..=12 tokens.
pub fn random_corpus<R: Rng>(rng: &mut R, n_words: usize, n_tokens: usize) -> Vec<Vec<String>> {
    let mut corpus = Vec::new();
    let mut left = n_tokens;
    while left > 0 {
        let len = rng.random_range(2..=12).min(left);
        // skewed draw so frequencies differ
        let sentence = (0..len)
            .map(|_| {
                let r: f64 = rng.random();
                format!("w{}", ((r * r) * n_words as f64) as usize)
            })
            .collect();
        corpus.push(sentence);
        left -= len;
    }
    corpus
}

pub fn tokens(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_owned).collect()
}

/// Unit vectors where, within a category, every left word equals
/// `left_j = right_j + (left_i − right_i)` for all tuples i, j.
///
/// Tuple i is `(u_i + h·e_k, u_i − h·e_k)` with `|u_i|² + h² = 1` and one
/// offset axis `e_k` per category, so normalising inputs changes nothing.
pub fn perfect_analogy_space<R: Rng>(
    rng: &mut R,
    tuples_per_category: &[usize],
) -> (DenseEmbeddings, Vec<AnalogyCategory>) {
    const BASE: usize = 8;
    const H: f64 = 0.5;
    let dim = BASE + tuples_per_category.len();
    let mut rows = Vec::new();
    let mut categories = Vec::new();
    for (k, &n) in tuples_per_category.iter().enumerate() {
        let mut tuples = Vec::new();
        for i in 0..n {
            let mut u: Vec<f64> = (0..BASE).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = (1.0 - H * H).sqrt() / len;
            u.iter_mut().for_each(|x| *x *= scale);
            let mut left = u.clone();
            left.resize(dim, 0.0);
            let mut right = left.clone();
            left[BASE + k] = H;
            right[BASE + k] = -H;
            let (l, r) = (format!("l{k}_{i}"), format!("r{k}_{i}"));
            rows.push((l.clone(), left));
            rows.push((r.clone(), right));
            tuples.push((l, r));
        }
        let kind = if k % 2 == 0 {
            RelationKind::Syntactic
        } else {
            RelationKind::Semantic
        };
        categories.push(AnalogyCategory::new(format!("cat{k}"), kind, tuples).unwrap());
    }
    (DenseEmbeddings::from_rows(rows).unwrap(), categories)
}

/// Gaussian-free random space: entries uniform in (−1, 1).
pub fn random_space<R: Rng>(rng: &mut R, words: usize, dim: usize) -> DenseEmbeddings {
    let rows = (0..words)
        .map(|i| {
            let v = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (format!("v{i:03}"), v)
        })
        .collect();
    DenseEmbeddings::from_rows(rows).unwrap()
}

/// Multiply every row by its own positive factor in [0.1, 10).
pub fn rescale_rows<R: Rng>(rng: &mut R, space: &DenseEmbeddings) -> DenseEmbeddings {
    let rows = (0..space.len())
        .map(|i| {
            let s: f64 = rng.random_range(0.1..10.0);
            (
                space.word(i).to_owned(),
                space.row(i).iter().map(|x| x * s).collect(),
            )
        })
        .collect();
    DenseEmbeddings::from_rows(rows).unwrap()
}

/// Mean reciprocal rank and accuracy from 1-based ranks; an abstention is
/// incorrect whatever its rank.
pub fn hand_metrics(ranks: &[(usize, bool)]) -> (f64, f64) {
    let n = ranks.len() as f64;
    let correct = ranks
        .iter()
        .filter(|(r, abstained)| *r == 1 && !abstained)
        .count() as f64;
    let rr: f64 = ranks.iter().map(|(r, _)| 1.0 / *r as f64).sum();
    (correct / n, rr / n)
}

/// Unshifted PPMI from dense counts. Positivity is decided on exact integer
/// products, so the nonzero pattern does not depend on rounding.
pub fn dense_ppmi(counts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = counts.len();
    let total: u128 = counts.iter().flatten().map(|&c| c as u128).sum();
    let rows: Vec<u128> = counts
        .iter()
        .map(|r| r.iter().map(|&c| c as u128).sum())
        .collect();
    let cols: Vec<u128> = (0..n)
        .map(|c| counts.iter().map(|r| r[c] as u128).sum())
        .collect();
    let mut out = vec![vec![0.0; n]; n];
    for w in 0..n {
        for c in 0..n {
            let joint = counts[w][c] as u128 * total;
            let indep = rows[w] * cols[c];
            if counts[w][c] > 0.0 && joint > indep {
                out[w][c] = (joint as f64 / indep as f64).ln();
            }
        }
    }
    out
}

/// `n` words `w00..` with strictly decreasing counts.
pub fn small_vocab(n: usize) -> Arc<Vocabulary> {
    Arc::new(
        Vocabulary::from_counts(
            (0..n).map(|i| (format!("w{i:02}"), (n - i) as u64 * 3)),
            1,
            None,
        )
        .unwrap(),
    )
}

pub fn randomize(model: &mut SgnsModel, rng: &mut ChaCha8Rng, scale: f64) {
    for id in 0..model.vocab().len() {
        for x in model.input_vector_mut(id) {
            *x = rng.random_range(-scale..scale);
        }
        for x in model.output_vector_mut(id) {
            *x = rng.random_range(-scale..scale);
        }
    }
}

/// Central differences of the pair loss with respect to one vector.
pub fn finite_difference(
    model: &mut SgnsModel,
    which: fn(&mut SgnsModel, usize) -> &mut [f64],
    id: usize,
    pair: (usize, usize, &[usize]),
    h: f64,
) -> Vec<f64> {
    let dim = model.dim();
    (0..dim)
        .map(|i| {
            let orig = which(model, id)[i];
            which(model, id)[i] = orig + h;
            let plus = model.loss(pair.0, pair.1, pair.2);
            which(model, id)[i] = orig - h;
            let minus = model.loss(pair.0, pair.1, pair.2);
            which(model, id)[i] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// Gradient check over random states; returns the worst relative error.
pub fn gradient_check(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = small_vocab(30);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let dim = rng.random_range(2..=24);
        let cfg = SgnsConfig {
            dim,
            ..Default::default()
        };
        let mut model = init_model(v.clone(), &cfg).unwrap();
        randomize(&mut model, &mut rng, 0.8);
        let center = rng.random_range(0..30);
        let context = rng.random_range(0..30);
        let mut negatives = Vec::new();
        while negatives.len() < rng.random_range(1..=15).min(20) {
            let n = rng.random_range(0..30);
            if n != context && !negatives.contains(&n) {
                negatives.push(n);
            }
        }
        let grads = model.analytic_gradients(center, context, &negatives);
        let pair = (center, context, negatives.as_slice());
        let fd_w = finite_difference(&mut model, SgnsModel::input_vector_mut, center, pair, 1e-5);
        worst = worst.max(max_relative_error(&grads.center, &fd_w));
        let fd_c = finite_difference(
            &mut model,
            SgnsModel::output_vector_mut,
            context,
            pair,
            1e-5,
        );
        worst = worst.max(max_relative_error(&grads.positive, &fd_c));
        for (k, &n) in negatives.iter().enumerate() {
            let fd_n = finite_difference(&mut model, SgnsModel::output_vector_mut, n, pair, 1e-5);
            worst = worst.max(max_relative_error(&grads.negatives[k], &fd_n));
        }
    }
    worst
}

/// Mean cosine over word pairs sharing their first letter, and over pairs
/// that do not.
pub fn topic_means(space: &impl EmbeddingSpace) -> (f64, f64) {
    let (mut intra, mut inter, mut ni, mut ne) = (0.0, 0.0, 0, 0);
    for x in 0..space.len() {
        for y in (x + 1)..space.len() {
            let sim = cosine(&space.dense_row(x), &space.dense_row(y))
                .unwrap()
                .value;
            if space.word(x).as_bytes()[0] == space.word(y).as_bytes()[0] {
                intra += sim;
                ni += 1;
            } else {
                inter += sim;
                ne += 1;
            }
        }
    }
    (intra / ni as f64, inter / ne as f64)
}

/// Every word of the corpus, min count 1.
pub fn vocab_of(corpus: &[Vec<String>]) -> Arc<Vocabulary> {
    let mut counts = std::collections::HashMap::new();
    for w in corpus.iter().flatten() {
        *counts.entry(w.clone()).or_insert(0u64) += 1;
    }
    Arc::new(Vocabulary::from_counts(counts, 1, None).unwrap())
}

pub fn fixed(window: usize) -> CoocConfig {
    CoocConfig {
        window,
        dynamic_window: false,
    }
}

/// Up to 7 provinces drawing from a shared word pool, plus a standard list.
pub fn random_dictionary(
    rng: &mut ChaCha8Rng,
) -> (BTreeMap<String, BTreeSet<String>>, BTreeSet<String>) {
    let pool = rng.random_range(5..60);
    let provinces = rng.random_range(1..8);
    let raw = (0..provinces)
        .map(|p| {
            let n = rng.random_range(0..15);
            (
                format!("p{p}"),
                (0..n)
                    .map(|_| format!("w{}", rng.random_range(0..pool)))
                    .collect(),
            )
        })
        .collect();
    let standard = (0..rng.random_range(0..10))
        .map(|_| format!("w{}", rng.random_range(0..pool)))
        .collect();
    (raw, standard)
}

pub fn random_posts(rng: &mut ChaCha8Rng, provinces: &[String], n: usize) -> Vec<LabeledPost> {
    (0..n)
        .map(|_| LabeledPost {
            label: provinces[rng.random_range(0..provinces.len())].clone(),
            tokens: (0..rng.random_range(0..10))
                .map(|_| format!("w{}", rng.random_range(0..70)))
                .collect(),
        })
        .collect()
}

/// Top answers to 40 random analogy queries drawn with `rng`.
pub fn top1_answers(space: &DenseEmbeddings, rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..40)
        .map(|_| {
            let pick =
                |rng: &mut ChaCha8Rng| space.word(rng.random_range(0..space.len())).to_owned();
            let (a, b, d) = (pick(rng), pick(rng), pick(rng));
            analogy_query(space, &a, &b, &d, 1, AnalogyOptions::default()).unwrap()[0]
                .word
                .clone()
        })
        .collect()
}
