//! Skip-gram with negative sampling, trained by streaming SGD.
//!
//! Each (center, context) pair minimizes
//! `L = −ln σ(w·c⁺) − Σ ln σ(−w·c⁻)` over the input vector `w` of the
//! center word, the output vector `c⁺` of the observed context and the
//! output vectors `c⁻` of sampled noise words.
//!
//! With more than one worker the two parameter matrices are shared between
//! threads without synchronization (Hogwild). Concurrent writes may be lost;
//! results are only reproducible with `workers = 1`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceSource, Vocabulary};
use crate::embedspace::DenseEmbeddings;
use crate::error::{Error, Result};

/// Scores are clamped to this range before exponentiation.
pub const MAX_SCORE: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Maximum half-window; the effective window is drawn from `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// The learning rate never decays below `initial_lr * final_lr_fraction`.
    pub final_lr_fraction: f64,
    /// Frequent-word subsampling threshold; `0` disables subsampling.
    pub subsample_threshold: f64,
    pub unigram_power: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 320,
            window: 11,
            negatives: 15,
            epochs: 5,
            initial_lr: 0.025,
            final_lr_fraction: 1e-4,
            subsample_threshold: 0.0,
            unigram_power: 0.75,
            seed: 1,
            workers: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.dim < 1 {
            return fail("dim must be at least 1");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.negatives < 1 {
            return fail("negatives must be at least 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.workers < 1 {
            return fail("workers must be at least 1");
        }
        if !self.initial_lr.is_finite() || self.initial_lr <= 0.0 {
            return fail("initial_lr must be positive");
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return fail("final_lr_fraction must lie in (0, 1]");
        }
        if !self.subsample_threshold.is_finite() || self.subsample_threshold < 0.0 {
            return fail("subsample_threshold must be >= 0");
        }
        if !self.unigram_power.is_finite() {
            return fail("unigram_power must be finite");
        }
        Ok(())
    }

    /// Learning rate after a fraction `progress` of all expected pairs.
    pub fn learning_rate(&self, progress: f64) -> f64 {
        let floor = self.initial_lr * self.final_lr_fraction;
        (self.initial_lr * (1.0 - progress)).max(floor)
    }
}

/// Samples word ids with probability proportional to `count^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn new(counts: &[u64], power: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(power);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, id: usize) -> f64 {
        let prev = if id == 0 {
            0.0
        } else {
            self.cumulative[id - 1]
        };
        (self.cumulative[id] - prev) / self.total()
    }

    /// Append `n` samples to `out`, redrawing any sample equal to `exclude`.
    pub fn draw_into<R: Rng + ?Sized>(
        &self,
        out: &mut Vec<usize>,
        n: usize,
        exclude: usize,
        rng: &mut R,
    ) {
        let exclusive = exclude < self.len() && self.len() > 1 && self.probability(exclude) < 1.0;
        out.extend((0..n).map(|_| loop {
            let id = self.sample(rng);
            if id != exclude || !exclusive {
                break id;
            }
        }));
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let target = rng.random::<f64>() * self.total();
        self.cumulative
            .partition_point(|&c| c <= target)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-MAX_SCORE, MAX_SCORE)).exp())
}

/// `ln σ(x)` for a clamped score.
fn log_sigmoid(x: f64) -> f64 {
    -(-x.clamp(-MAX_SCORE, MAX_SCORE)).exp().ln_1p()
}

/// Gradients of the pair loss with respect to each participating vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub center: Vec<f64>,
    pub positive: Vec<f64>,
    /// One entry per negative sample, in the order given.
    pub negatives: Vec<Vec<f64>>,
}

/// Raw view of the two parameter matrices, shared by the single-threaded and
/// the Hogwild code paths.
#[derive(Clone, Copy)]
struct Params {
    input: *mut f64,
    output: *mut f64,
    dim: usize,
}

// SAFETY: workers write through these pointers without synchronization; lost
// updates are accepted. The backing vectors outlive every worker thread.
unsafe impl Send for Params {}
unsafe impl Sync for Params {}

impl Params {
    /// One SGD step on a (center, context, negatives) example. Returns the
    /// loss before the update.
    ///
    /// # Safety
    /// All ids must be valid rows and the matrices must stay alive.
    unsafe fn step(
        &self,
        center: usize,
        context: usize,
        negatives: &[usize],
        lr: f64,
        scratch: &mut Vec<f64>,
    ) -> f64 {
        let dim = self.dim;
        let w = self.input.add(center * dim);
        let dot = |row: usize| -> f64 {
            let c = self.output.add(row * dim);
            (0..dim).map(|i| *w.add(i) * *c.add(i)).sum()
        };

        let targets = std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        let mut loss = 0.0;
        let mut coefficients = Vec::with_capacity(negatives.len() + 1);
        for (row, label) in targets {
            let score = dot(row);
            loss -= if label == 1.0 {
                log_sigmoid(score)
            } else {
                log_sigmoid(-score)
            };
            coefficients.push((row, sigmoid(score) - label));
        }

        scratch.clear();
        scratch.resize(dim, 0.0);
        for &(row, g) in &coefficients {
            let c = self.output.add(row * dim);
            for (i, acc) in scratch.iter_mut().enumerate() {
                *acc += g * *c.add(i);
            }
        }
        for &(row, g) in &coefficients {
            let c = self.output.add(row * dim);
            for i in 0..dim {
                *c.add(i) -= lr * g * *w.add(i);
            }
        }
        for (i, grad) in scratch.iter().enumerate() {
            *w.add(i) -= lr * grad;
        }
        loss
    }
}

/// Input vectors `W`, output vectors `C` and the noise distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SgnsModel {
    vocab: Arc<Vocabulary>,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    noise: NoiseTable,
}

/// `W` uniform in `(−0.5/dim, 0.5/dim)`, `C` all zeros.
pub fn init_model(vocab: Arc<Vocabulary>, config: &SgnsConfig) -> Result<SgnsModel> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let input = (0..vocab.len() * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let output = vec![0.0; vocab.len() * dim];
    let noise = NoiseTable::new(vocab.counts(), config.unigram_power);
    Ok(SgnsModel {
        vocab,
        dim,
        input,
        output,
        noise,
    })
}

impl SgnsModel {
    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_table(&self) -> &NoiseTable {
        &self.noise
    }

    pub fn input_vector(&self, id: usize) -> &[f64] {
        &self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_vector(&self, id: usize) -> &[f64] {
        &self.output[id * self.dim..(id + 1) * self.dim]
    }

    pub fn input_vector_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_vector_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.output[id * self.dim..(id + 1) * self.dim]
    }

    /// Draw `n` noise words; samples equal to `exclude` are redrawn.
    ///
    /// With a one-word vocabulary nothing can be excluded, so the only word
    /// is returned.
    pub fn draw_negatives<R: Rng + ?Sized>(
        &self,
        n: usize,
        exclude: usize,
        rng: &mut R,
    ) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        self.noise.draw_into(&mut out, n, exclude, rng);
        out
    }

    fn score(&self, a: usize, b: usize) -> f64 {
        self.input_vector(a)
            .iter()
            .zip(self.output_vector(b))
            .map(|(x, y)| x * y)
            .sum()
    }

    /// Pair loss without touching the parameters.
    pub fn loss(&self, center: usize, context: usize, negatives: &[usize]) -> f64 {
        -log_sigmoid(self.score(center, context))
            - negatives
                .iter()
                .map(|&n| log_sigmoid(-self.score(center, n)))
                .sum::<f64>()
    }

    pub fn analytic_gradients(
        &self,
        center: usize,
        context: usize,
        negatives: &[usize],
    ) -> Gradients {
        let w = self.input_vector(center);
        let g_pos = sigmoid(self.score(center, context)) - 1.0;
        let mut center_grad: Vec<f64> = self
            .output_vector(context)
            .iter()
            .map(|c| g_pos * c)
            .collect();
        let positive = w.iter().map(|x| g_pos * x).collect();
        let negatives = negatives
            .iter()
            .map(|&n| {
                let g = sigmoid(self.score(center, n));
                for (acc, c) in center_grad.iter_mut().zip(self.output_vector(n)) {
                    *acc += g * c;
                }
                w.iter().map(|x| g * x).collect()
            })
            .collect();
        Gradients {
            center: center_grad,
            positive,
            negatives,
        }
    }

    /// Apply one SGD update and return the loss measured before it.
    pub fn pair_step(
        &mut self,
        center: usize,
        context: usize,
        negatives: &[usize],
        lr: f64,
    ) -> f64 {
        let n = self.vocab.len();
        assert!(
            center < n && context < n && negatives.iter().all(|&x| x < n),
            "word id out of range"
        );
        let params = self.params();
        let mut scratch = Vec::with_capacity(self.dim);
        // SAFETY: ids checked above; `&mut self` gives exclusive access.
        unsafe { params.step(center, context, negatives, lr, &mut scratch) }
    }

    fn params(&mut self) -> Params {
        Params {
            input: self.input.as_mut_ptr(),
            output: self.output.as_mut_ptr(),
            dim: self.dim,
        }
    }

    fn first_non_finite(&self) -> Option<(&'static str, usize)> {
        let find = |m: &[f64]| m.iter().position(|x| !x.is_finite()).map(|p| p / self.dim);
        find(&self.input)
            .map(|r| ("input", r))
            .or_else(|| find(&self.output).map(|r| ("output", r)))
    }

    /// The input matrix `W` as the embedding table.
    pub fn into_embeddings(self) -> Result<DenseEmbeddings> {
        DenseEmbeddings::new(self.vocab.words().to_vec(), self.dim, self.input)
    }
}

/// Loss bookkeeping from a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean pre-update pair loss of every epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean loss over a fixed pair sample before training.
    pub initial_objective: f64,
    /// The same sample evaluated after every epoch.
    pub epoch_objectives: Vec<f64>,
    pub pairs: u64,
    pub expected_pairs: f64,
    pub final_lr: f64,
}

/// Cap on the number of pairs in the objective sample.
pub const OBJECTIVE_SAMPLE_PAIRS: usize = 100_000;

/// Fixed (center, context, negatives) triples used to track the objective
/// between epochs. Drawing them once keeps epochs comparable.
struct ObjectiveSample {
    pairs: Vec<(u32, u32)>,
    negatives: Vec<usize>,
    per_pair: usize,
}

impl ObjectiveSample {
    fn draw(sentences: &[Vec<u32>], noise: &NoiseTable, config: &SgnsConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(0);
        let mut pairs = Vec::new();
        let mut negatives = Vec::new();
        'outer: for tokens in sentences {
            for i in 0..tokens.len() {
                let w = rng.random_range(1..=config.window);
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(tokens.len() - 1);
                for j in (lo..=hi).filter(|&j| j != i) {
                    if pairs.len() == OBJECTIVE_SAMPLE_PAIRS {
                        break 'outer;
                    }
                    pairs.push((tokens[i], tokens[j]));
                    noise.draw_into(
                        &mut negatives,
                        config.negatives,
                        tokens[j] as usize,
                        &mut rng,
                    );
                }
            }
        }
        ObjectiveSample {
            pairs,
            negatives,
            per_pair: config.negatives,
        }
    }

    fn mean_loss(&self, model: &SgnsModel) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        const CHUNK: usize = 4096;
        let partial: Vec<f64> = self
            .pairs
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(k, chunk)| {
                chunk
                    .iter()
                    .enumerate()
                    .map(|(i, &(w, c))| {
                        let at = (k * CHUNK + i) * self.per_pair;
                        model.loss(
                            w as usize,
                            c as usize,
                            &self.negatives[at..at + self.per_pair],
                        )
                    })
                    .sum()
            })
            .collect();
        partial.iter().sum::<f64>() / self.pairs.len() as f64
    }
}

/// Expected number of (center, context) pairs in a sentence of `len` tokens
/// when the half-window is drawn uniformly from `1..=window`.
pub fn expected_pairs(len: usize, window: usize) -> f64 {
    let mut total = 0usize;
    for i in 0..len {
        for w in 1..=window {
            total += i.min(w) + (len - 1 - i).min(w);
        }
    }
    total as f64 / window as f64
}

/// Keep probabilities `min(1, sqrt(t / f(w)))`; `None` when subsampling is off.
fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Option<Vec<f64>> {
    if threshold == 0.0 {
        return None;
    }
    let total = vocab.total_tokens() as f64;
    Some(
        vocab
            .counts()
            .iter()
            .map(|&c| (threshold / (c as f64 / total)).sqrt().min(1.0))
            .collect(),
    )
}

/// Drop tokens with probability `1 − keep[w]`. Identity when `keep` is `None`.
pub fn subsample<R: Rng + ?Sized>(sentence: &[u32], keep: Option<&[f64]>, rng: &mut R) -> Vec<u32> {
    match keep {
        None => sentence.to_vec(),
        Some(keep) => sentence
            .iter()
            .copied()
            .filter(|&w| {
                let p = keep[w as usize];
                p >= 1.0 || rng.random::<f64>() < p
            })
            .collect(),
    }
}

struct Shared<'a> {
    params: Params,
    vocab: &'a Vocabulary,
    noise: &'a NoiseTable,
    config: &'a SgnsConfig,
    keep: Option<&'a [f64]>,
    processed: &'a AtomicU64,
    expected_total: f64,
}

struct Worker {
    rng: ChaCha8Rng,
    scratch: Vec<f64>,
    negatives: Vec<usize>,
}

impl Worker {
    fn new(config: &SgnsConfig, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index + 1);
        Worker {
            rng,
            scratch: Vec::with_capacity(config.dim),
            negatives: Vec::with_capacity(config.negatives),
        }
    }
}

#[derive(Default)]
struct EpochStats {
    loss: f64,
    pairs: u64,
    last_lr: f64,
    non_finite: Option<String>,
}

fn run_epoch(
    shared: &Shared<'_>,
    sentences: &[Vec<u32>],
    worker: &mut Worker,
    epoch: usize,
) -> EpochStats {
    let config = shared.config;
    let mut stats = EpochStats {
        last_lr: config.initial_lr,
        ..Default::default()
    };
    for sentence in sentences {
        let tokens = subsample(sentence, shared.keep, &mut worker.rng);
        if tokens.len() < 2 {
            continue;
        }
        let progress = shared.processed.load(Ordering::Relaxed) as f64 / shared.expected_total;
        let lr = config.learning_rate(progress.min(1.0));
        stats.last_lr = lr;
        let mut pairs = 0u64;
        for (i, &center) in tokens.iter().enumerate() {
            let w = worker.rng.random_range(1..=config.window);
            let lo = i.saturating_sub(w);
            let hi = (i + w).min(tokens.len() - 1);
            for (j, &context) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                worker.negatives.clear();
                shared.noise.draw_into(
                    &mut worker.negatives,
                    config.negatives,
                    context as usize,
                    &mut worker.rng,
                );
                // SAFETY: ids come from the vocabulary the matrices were sized for.
                let loss = unsafe {
                    shared.params.step(
                        center as usize,
                        context as usize,
                        &worker.negatives,
                        lr,
                        &mut worker.scratch,
                    )
                };
                if !loss.is_finite() {
                    stats.non_finite = Some(format!(
                        "loss became {loss} in epoch {} at center `{}`",
                        epoch + 1,
                        shared.vocab.word(center as usize)
                    ));
                    return stats;
                }
                stats.loss += loss;
                pairs += 1;
            }
        }
        stats.pairs += pairs;
        shared.processed.fetch_add(pairs, Ordering::Relaxed);
    }
    stats
}

fn split_shards(sentences: &[Vec<u32>], workers: usize) -> Vec<&[Vec<u32>]> {
    let total: usize = sentences.iter().map(Vec::len).sum();
    let target = total.div_ceil(workers).max(1);
    let mut shards = Vec::with_capacity(workers);
    let mut start = 0;
    let mut acc = 0;
    for (i, s) in sentences.iter().enumerate() {
        acc += s.len();
        if acc >= target && shards.len() + 1 < workers {
            shards.push(&sentences[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    shards.push(&sentences[start..]);
    shards
}

/// Train a model from scratch and return it with its loss history.
pub fn train_model(
    corpus: &(impl SentenceSource + ?Sized),
    vocab: Arc<Vocabulary>,
    config: &SgnsConfig,
) -> Result<(SgnsModel, TrainReport)> {
    config.validate()?;
    let mut sentences = Vec::new();
    corpus.for_each_sentence(&mut |s| {
        let ids = vocab.encode(s);
        if ids.len() > 1 {
            sentences.push(ids);
        }
    })?;
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut model = init_model(vocab, config)?;
    let expected_epoch: f64 = sentences
        .iter()
        .map(|s| expected_pairs(s.len(), config.window))
        .sum();
    let expected_total = expected_epoch * config.epochs as f64;
    let keep = keep_probabilities(&model.vocab, config.subsample_threshold);
    let processed = AtomicU64::new(0);
    let sample = ObjectiveSample::draw(&sentences, &model.noise, config);
    let shards = if config.workers == 1 {
        vec![sentences.as_slice()]
    } else {
        split_shards(&sentences, config.workers)
    };
    let mut workers: Vec<Worker> = (0..shards.len())
        .map(|k| Worker::new(config, k as u64))
        .collect();

    let mut report = TrainReport {
        epoch_losses: Vec::with_capacity(config.epochs),
        initial_objective: sample.mean_loss(&model),
        epoch_objectives: Vec::with_capacity(config.epochs),
        pairs: 0,
        expected_pairs: expected_total,
        final_lr: config.initial_lr,
    };

    for epoch in 0..config.epochs {
        let results: Vec<EpochStats> = {
            let params = Params {
                input: model.input.as_mut_ptr(),
                output: model.output.as_mut_ptr(),
                dim: model.dim,
            };
            let shared = Shared {
                params,
                vocab: &model.vocab,
                noise: &model.noise,
                config,
                keep: keep.as_deref(),
                processed: &processed,
                expected_total,
            };
            if let [worker] = workers.as_mut_slice() {
                vec![run_epoch(&shared, shards[0], worker, epoch)]
            } else {
                std::thread::scope(|scope| {
                    let handles: Vec<_> = shards
                        .iter()
                        .zip(workers.iter_mut())
                        .map(|(shard, worker)| {
                            let shared = &shared;
                            scope.spawn(move || run_epoch(shared, shard, worker, epoch))
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("training worker panicked"))
                        .collect()
                })
            }
        };

        if let Some(msg) = results.iter().find_map(|r| r.non_finite.clone()) {
            return Err(Error::NonFinite(msg));
        }
        if let Some((matrix, row)) = model.first_non_finite() {
            return Err(Error::NonFinite(format!(
                "{matrix} vector of `{}` is not finite after epoch {}",
                model.vocab.word(row),
                epoch + 1
            )));
        }
        let loss: f64 = results.iter().map(|r| r.loss).sum();
        let pairs: u64 = results.iter().map(|r| r.pairs).sum();
        report.pairs += pairs;
        report
            .epoch_losses
            .push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
        report.epoch_objectives.push(sample.mean_loss(&model));
        report.final_lr = results
            .iter()
            .map(|r| r.last_lr)
            .fold(f64::INFINITY, f64::min);
    }
    Ok((model, report))
}

/// Train and return the input vectors as embeddings.
pub fn train(
    corpus: &(impl SentenceSource + ?Sized),
    vocab: Arc<Vocabulary>,
    config: &SgnsConfig,
) -> Result<(DenseEmbeddings, TrainReport)> {
    let (model, report) = train_model(corpus, vocab, config)?;
    Ok((model.into_embeddings()?, report))
}
