//! Synthetic inputs shared by the benchmarks.

use std::sync::Arc;

use distsem_core::{DenseEmbeddings, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sentences of 5..=20 tokens over `words` words with a Zipf-like skew.
pub fn zipf_corpus(words: usize, tokens: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Vec::new();
    let mut left = tokens;
    while left > 0 {
        let len = rng.random_range(5..=20).min(left);
        let sentence = (0..len)
            .map(|_| {
                let r: f64 = rng.random();
                format!("w{}", (r.powi(3) * words as f64) as usize)
            })
            .collect();
        corpus.push(sentence);
        left -= len;
    }
    corpus
}

pub fn vocabulary(corpus: &[Vec<String>]) -> Arc<Vocabulary> {
    Arc::new(distsem_core::build_vocabulary(corpus, &Default::default(), None, 1).unwrap())
}

pub fn random_embeddings(words: usize, dim: usize, seed: u64) -> DenseEmbeddings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..words)
        .map(|i| {
            (
                format!("w{i}"),
                (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
        })
        .collect();
    DenseEmbeddings::from_rows(rows).unwrap()
}
