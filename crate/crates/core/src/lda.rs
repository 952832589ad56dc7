//! Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.
//!
//! Each token's topic assignment is resampled from its full conditional
//!
//! ```text
//! p(z = k) ∝ (n(d,k) + α) · (n(k,w) + β) / (n(k) + V·β)
//! ```
//!
//! with the current token excluded from all counts. After the configured
//! number of sweeps, point estimates come from the final state:
//! `phi[k][w] = (n(k,w) + β) / (n(k) + V·β)` and
//! `theta[d][k] = (n(d,k) + α) / (len(d) + K·α)`.
//!
//! The sampler is single-threaded and driven by a seeded [`SplitMix64`],
//! so a (corpus, config) pair reproduces the model bit for bit.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::config::LdaConfig;
use crate::error::{Error, Result};
use crate::preprocess::TokenizedDoc;
use crate::rng::{SplitMix64, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub config: LdaConfig,
    /// Name of the random stream that produced the assignments.
    pub rng_algorithm: String,
    pub document_ids: Vec<String>,
    /// Corpus vocabulary in first-occurrence order.
    pub vocab: Vec<String>,
    /// K rows over the vocabulary, each summing to 1.
    pub topic_term_weights: Vec<Vec<f64>>,
    /// One simplex vector of length K per document.
    pub doc_topic_weights: Vec<Vec<f64>>,
    /// Final topic assignment per token, parallel to the input corpus.
    pub assignments: Vec<Vec<usize>>,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.topic_term_weights.len()
    }
}

/// Collapsed Gibbs sampler state, exposed so tests can drive sweeps and
/// check the count identities directly.
pub struct GibbsSampler {
    pub num_topics: usize,
    pub vocab_size: usize,
    alpha: f64,
    beta: f64,
    /// Documents as vocabulary indices.
    docs: Vec<Vec<usize>>,
    /// Topic assignment per token.
    z: Vec<Vec<usize>>,
    /// n(d,k): tokens of document d assigned to topic k.
    doc_topic: Vec<Vec<u32>>,
    /// n(k,w): occurrences of word w assigned to topic k.
    topic_word: Vec<Vec<u32>>,
    /// n(k): tokens assigned to topic k.
    topic_total: Vec<u32>,
    rng: SplitMix64,
}

impl GibbsSampler {
    pub fn new(docs: Vec<Vec<usize>>, vocab_size: usize, cfg: &LdaConfig) -> Self {
        let k = cfg.topics;
        let mut sampler = GibbsSampler {
            num_topics: k,
            vocab_size,
            alpha: cfg.alpha,
            beta: cfg.beta,
            z: docs.iter().map(|d| vec![0; d.len()]).collect(),
            doc_topic: vec![vec![0; k]; docs.len()],
            topic_word: vec![vec![0; vocab_size]; k],
            topic_total: vec![0; k],
            docs,
            rng: SplitMix64::new(cfg.seed),
        };
        for d in 0..sampler.docs.len() {
            for i in 0..sampler.docs[d].len() {
                let topic = sampler.rng.below(k);
                sampler.z[d][i] = topic;
                sampler.increment(d, i, topic);
            }
        }
        sampler
    }

    fn increment(&mut self, d: usize, i: usize, topic: usize) {
        let w = self.docs[d][i];
        self.doc_topic[d][topic] += 1;
        self.topic_word[topic][w] += 1;
        self.topic_total[topic] += 1;
    }

    fn decrement(&mut self, d: usize, i: usize, topic: usize) {
        let w = self.docs[d][i];
        self.doc_topic[d][topic] -= 1;
        self.topic_word[topic][w] -= 1;
        self.topic_total[topic] -= 1;
    }

    /// Unnormalized full conditional for token `i` of document `d`, with
    /// the token's current assignment already excluded from the counts.
    fn conditional_weights(&self, d: usize, i: usize) -> Vec<f64> {
        let w = self.docs[d][i];
        let v_beta = self.vocab_size as f64 * self.beta;
        (0..self.num_topics)
            .map(|k| {
                (self.doc_topic[d][k] as f64 + self.alpha)
                    * (self.topic_word[k][w] as f64 + self.beta)
                    / (self.topic_total[k] as f64 + v_beta)
            })
            .collect()
    }

    /// Normalized full conditional for a token, for diagnostics and tests.
    /// The token's current assignment is excluded, as during sampling.
    pub fn full_conditional(&mut self, d: usize, i: usize) -> Vec<f64> {
        let current = self.z[d][i];
        self.decrement(d, i, current);
        let weights = self.conditional_weights(d, i);
        self.increment(d, i, current);
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|x| x / total).collect()
    }

    /// One full sweep: resample every token in document order.
    pub fn sweep(&mut self) {
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let old = self.z[d][i];
                self.decrement(d, i, old);
                let weights = self.conditional_weights(d, i);
                let total: f64 = weights.iter().sum();
                let mut u = self.rng.next_f64() * total;
                let mut new = self.num_topics - 1;
                for (k, w) in weights.iter().enumerate() {
                    u -= w;
                    if u <= 0.0 {
                        new = k;
                        break;
                    }
                }
                self.z[d][i] = new;
                self.increment(d, i, new);
            }
        }
    }

    /// Joint assignment state flattened in token order; small corpora only.
    pub fn state_key(&self) -> Vec<usize> {
        self.z.iter().flatten().copied().collect()
    }

    /// Exact integer count identities:
    /// Σ_k n(d,k) = len(d), Σ_w n(k,w) = n(k), Σ_k n(k) = total tokens.
    pub fn counts_consistent(&self) -> bool {
        let per_doc = self
            .doc_topic
            .iter()
            .zip(&self.docs)
            .all(|(row, doc)| row.iter().map(|&c| c as usize).sum::<usize>() == doc.len());
        let per_topic = self
            .topic_word
            .iter()
            .zip(&self.topic_total)
            .all(|(row, &total)| row.iter().map(|&c| c as u64).sum::<u64>() == total as u64);
        let total_tokens: usize = self.docs.iter().map(Vec::len).sum();
        let assigned: u64 = self.topic_total.iter().map(|&c| c as u64).sum();
        per_doc && per_topic && assigned == total_tokens as u64
    }

    /// Point estimates (phi, theta) from the current state.
    pub fn estimate(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let v_beta = self.vocab_size as f64 * self.beta;
        let k_alpha = self.num_topics as f64 * self.alpha;
        let phi = (0..self.num_topics)
            .map(|k| {
                let denom = self.topic_total[k] as f64 + v_beta;
                (0..self.vocab_size)
                    .map(|w| (self.topic_word[k][w] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect();
        let theta = (0..self.docs.len())
            .map(|d| {
                let denom = self.docs[d].len() as f64 + k_alpha;
                (0..self.num_topics)
                    .map(|k| (self.doc_topic[d][k] as f64 + self.alpha) / denom)
                    .collect()
            })
            .collect();
        (phi, theta)
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }
}

/// Map a corpus onto vocabulary indices, vocabulary in first-occurrence
/// order across documents.
pub fn build_vocab(corpus: &[TokenizedDoc]) -> (Vec<String>, Vec<Vec<usize>>) {
    let mut vocab: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut docs = Vec::with_capacity(corpus.len());
    for doc in corpus {
        let mut ids = Vec::with_capacity(doc.tokens.len());
        for token in &doc.tokens {
            let id = match index.get(token) {
                Some(&id) => id,
                None => {
                    vocab.push(token.clone());
                    index.insert(token.clone(), vocab.len() - 1);
                    vocab.len() - 1
                }
            };
            ids.push(id);
        }
        docs.push(ids);
    }
    (vocab, docs)
}

/// Fit a topic model. Deterministic: equal corpus, config and seed give a
/// bit-identical model.
pub fn fit(corpus: &[TokenizedDoc], cfg: &LdaConfig) -> Result<TopicModel> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Input("cannot fit a topic model on an empty corpus".into()));
    }
    let total_tokens: usize = corpus.iter().map(|d| d.tokens.len()).sum();
    if total_tokens == 0 {
        return Err(Error::Input("corpus has no tokens after preprocessing".into()));
    }
    if cfg.topics > total_tokens {
        tracing::warn!(
            topics = cfg.topics,
            total_tokens,
            "more topics than tokens; most topics will stay empty"
        );
    }

    let (vocab, docs) = build_vocab(corpus);
    let mut sampler = GibbsSampler::new(docs, vocab.len(), cfg);
    for _ in 0..cfg.iterations {
        sampler.sweep();
        debug_assert!(sampler.counts_consistent());
    }
    let (phi, theta) = sampler.estimate();
    Ok(TopicModel {
        config: cfg.clone(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        document_ids: corpus.iter().map(|d| d.document_id.clone()).collect(),
        vocab,
        topic_term_weights: phi,
        doc_topic_weights: theta,
        assignments: sampler.assignments().to_vec(),
    })
}

/// Like [`fit`], but estimates phi and theta by averaging the per-sweep
/// point estimates after `burn_in` sweeps instead of reading the final
/// state. Assignments still come from the final sweep.
pub fn fit_averaged(corpus: &[TokenizedDoc], cfg: &LdaConfig) -> Result<TopicModel> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Input("cannot fit a topic model on an empty corpus".into()));
    }
    if corpus.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::Input("corpus has no tokens after preprocessing".into()));
    }
    let (vocab, docs) = build_vocab(corpus);
    let mut sampler = GibbsSampler::new(docs, vocab.len(), cfg);
    let mut phi_sum: Vec<Vec<f64>> = vec![vec![0.0; vocab.len()]; cfg.topics];
    let mut theta_sum: Vec<Vec<f64>> = vec![vec![0.0; cfg.topics]; corpus.len()];
    let mut samples = 0u32;
    for sweep in 0..cfg.iterations {
        sampler.sweep();
        if sweep >= cfg.burn_in {
            let (phi, theta) = sampler.estimate();
            for (acc, row) in phi_sum.iter_mut().zip(&phi) {
                for (a, x) in acc.iter_mut().zip(row) {
                    *a += x;
                }
            }
            for (acc, row) in theta_sum.iter_mut().zip(&theta) {
                for (a, x) in acc.iter_mut().zip(row) {
                    *a += x;
                }
            }
            samples += 1;
        }
    }
    let scale = 1.0 / samples as f64;
    for row in &mut phi_sum {
        for x in row {
            *x *= scale;
        }
    }
    for row in &mut theta_sum {
        for x in row {
            *x *= scale;
        }
    }
    Ok(TopicModel {
        config: cfg.clone(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        document_ids: corpus.iter().map(|d| d.document_id.clone()).collect(),
        vocab,
        topic_term_weights: phi_sum,
        doc_topic_weights: theta_sum,
        assignments: sampler.assignments().to_vec(),
    })
}

/// The `n` heaviest terms of topic `k`, ties broken lexicographically.
pub fn top_terms(model: &TopicModel, k: usize, n: usize) -> Result<Vec<(String, f64)>> {
    let row = model
        .topic_term_weights
        .get(k)
        .ok_or_else(|| Error::Input(format!("topic id {k} out of range (K={})", model.num_topics())))?;
    let mut terms: Vec<(String, f64)> = model.vocab.iter().cloned().zip(row.iter().copied()).collect();
    terms.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    terms.truncate(n);
    Ok(terms)
}

/// Per-term score used when topics are pooled: the maximum weight the term
/// attains in any topic.
pub fn pooled_term_weights(model: &TopicModel) -> Vec<(String, f64)> {
    let mut pooled: Vec<(String, f64)> = model
        .vocab
        .iter()
        .enumerate()
        .map(|(w, term)| {
            let max = model
                .topic_term_weights
                .iter()
                .map(|row| row[w])
                .fold(f64::NEG_INFINITY, f64::max);
            (term.clone(), max)
        })
        .collect();
    pooled.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    pooled
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perplexity {
    pub value: f64,
    /// Corpus tokens absent from the model vocabulary, skipped.
    pub skipped_tokens: usize,
}

/// exp(−Σ log p(w|d) / N) with p(w|d) = Σ_k theta[d][k]·phi[k][w], over
/// the model's own documents.
pub fn perplexity(model: &TopicModel, corpus: &[TokenizedDoc]) -> Result<Perplexity> {
    if corpus.len() != model.doc_topic_weights.len() {
        return Err(Error::Input(format!(
            "perplexity needs one document per doc-topic row: corpus has {}, model has {}",
            corpus.len(),
            model.doc_topic_weights.len()
        )));
    }
    let index: HashMap<&str, usize> = model
        .vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut log_sum = 0.0f64;
    let mut counted = 0usize;
    let mut skipped = 0usize;
    for (d, doc) in corpus.iter().enumerate() {
        let theta = &model.doc_topic_weights[d];
        for token in &doc.tokens {
            match index.get(token.as_str()) {
                Some(&w) => {
                    let p: f64 = theta
                        .iter()
                        .zip(model.topic_term_weights.iter())
                        .map(|(t, phi)| t * phi[w])
                        .sum();
                    log_sum += p.ln();
                    counted += 1;
                }
                None => skipped += 1,
            }
        }
    }
    if counted == 0 {
        return Err(Error::Input(
            "perplexity undefined: no corpus token appears in the model vocabulary".into(),
        ));
    }
    Ok(Perplexity {
        value: (-log_sum / counted as f64).exp(),
        skipped_tokens: skipped,
    })
}
