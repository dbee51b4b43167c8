//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaParams {
    pub k: usize,
    /// Document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iters: usize,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            k: 10,
            alpha: None,
            beta: 0.01,
            iters: 200,
        }
    }
}

impl LdaParams {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }
}

/// Sweeps used when inferring topic proportions of an unseen document.
pub const INFER_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub words: Vec<String>,
    word_index: HashMap<String, usize>,
    /// `topic_word[t * W + w]`
    pub topic_word: Vec<u32>,
    pub topic_totals: Vec<u32>,
    /// `doc_topic[d * K + t]`
    pub doc_topic: Vec<u32>,
    pub doc_lens: Vec<u32>,
    pub assignments: Vec<Vec<u16>>,
}

fn draw(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

pub fn lda_fit<S: AsRef<str>>(
    corpus: &[Vec<S>],
    params: LdaParams,
    seed: u64,
) -> Result<TopicModel> {
    let k = params.k;
    if k == 0 || k > u16::MAX as usize {
        return Err(Error::invalid("topic count must be in 1..=65535"));
    }
    if corpus.len() < k {
        return Err(Error::invalid(format!(
            "LDA with {k} topics needs at least {k} documents, got {}",
            corpus.len()
        )));
    }
    if !(params.beta > 0.0) || !(params.alpha() > 0.0) {
        return Err(Error::invalid("LDA priors must be positive"));
    }
    let mut words = Vec::new();
    let mut word_index = HashMap::new();
    let docs: Vec<Vec<usize>> = corpus
        .iter()
        .map(|d| {
            d.iter()
                .map(|t| {
                    let t = t.as_ref();
                    *word_index.entry(t.to_string()).or_insert_with(|| {
                        words.push(t.to_string());
                        words.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let w_count = words.len();
    if w_count < k {
        return Err(Error::invalid(format!(
            "LDA with {k} topics needs at least {k} distinct words, got {w_count}"
        )));
    }

    let alpha = params.alpha();
    let beta = params.beta;
    let w_beta = w_count as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut topic_word = vec![0u32; k * w_count];
    let mut topic_totals = vec![0u32; k];
    let mut doc_topic = vec![0u32; docs.len() * k];
    let mut assignments: Vec<Vec<u16>> = Vec::with_capacity(docs.len());
    for (d, doc) in docs.iter().enumerate() {
        let z: Vec<u16> = doc
            .iter()
            .map(|&w| {
                let t = rng.gen_range(0..k);
                topic_word[t * w_count + w] += 1;
                topic_totals[t] += 1;
                doc_topic[d * k + t] += 1;
                t as u16
            })
            .collect();
        assignments.push(z);
    }

    let mut weights = vec![0.0; k];
    for _ in 0..params.iters {
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = assignments[d][i] as usize;
                topic_word[old * w_count + w] -= 1;
                topic_totals[old] -= 1;
                doc_topic[d * k + old] -= 1;
                for t in 0..k {
                    weights[t] = (doc_topic[d * k + t] as f64 + alpha)
                        * (topic_word[t * w_count + w] as f64 + beta)
                        / (topic_totals[t] as f64 + w_beta);
                }
                let new = draw(&weights, &mut rng);
                topic_word[new * w_count + w] += 1;
                topic_totals[new] += 1;
                doc_topic[d * k + new] += 1;
                assignments[d][i] = new as u16;
            }
        }
    }

    Ok(TopicModel {
        k,
        alpha,
        beta,
        words,
        word_index,
        topic_word,
        topic_totals,
        doc_topic,
        doc_lens: docs.iter().map(|d| d.len() as u32).collect(),
        assignments,
    })
}

/// What inference needs from a fitted model: priors, vocabulary and
/// topic-word counts. Per-document state is not kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicState {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub words: Vec<String>,
    pub topic_word: Vec<u32>,
    pub topic_totals: Vec<u32>,
}

impl TopicModel {
    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn word_id(&self, w: &str) -> Option<usize> {
        self.word_index.get(w).copied()
    }

    pub fn state(&self) -> TopicState {
        TopicState {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            words: self.words.clone(),
            topic_word: self.topic_word.clone(),
            topic_totals: self.topic_totals.clone(),
        }
    }

    /// Model for inference only; it has no training documents.
    pub fn from_state(state: TopicState) -> Result<Self> {
        let w = state.words.len();
        if state.k == 0
            || state.topic_word.len() != state.k * w
            || state.topic_totals.len() != state.k
        {
            return Err(Error::invalid("topic state has inconsistent sizes"));
        }
        if !(state.alpha > 0.0 && state.beta > 0.0) {
            return Err(Error::invalid("topic priors must be positive"));
        }
        let mut word_index = HashMap::with_capacity(w);
        for (i, word) in state.words.iter().enumerate() {
            if word_index.insert(word.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate topic word {word:?}")));
            }
        }
        Ok(Self {
            k: state.k,
            alpha: state.alpha,
            beta: state.beta,
            words: state.words,
            word_index,
            topic_word: state.topic_word,
            topic_totals: state.topic_totals,
            doc_topic: Vec::new(),
            doc_lens: Vec::new(),
            assignments: Vec::new(),
        })
    }

    /// `P(word | topic)` with the beta prior.
    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        let w = self.words.len();
        (self.topic_word[topic * w + word] as f64 + self.beta)
            / (self.topic_totals[topic] as f64 + w as f64 * self.beta)
    }

    pub fn topic_word_distribution(&self, topic: usize) -> Vec<f64> {
        (0..self.words.len()).map(|w| self.phi(topic, w)).collect()
    }

    /// The `m` most frequent words of `topic` (ties by first appearance).
    pub fn top_words(&self, topic: usize, m: usize) -> Vec<&str> {
        let w = self.words.len();
        let row = &self.topic_word[topic * w..(topic + 1) * w];
        let mut idx: Vec<usize> = (0..w).collect();
        idx.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
        idx.into_iter()
            .take(m)
            .map(|i| self.words[i].as_str())
            .collect()
    }

    /// Topic proportions of training document `d`.
    pub fn doc_distribution(&self, d: usize) -> Vec<f64> {
        let k = self.k;
        let denom = self.doc_lens[d] as f64 + k as f64 * self.alpha;
        (0..k)
            .map(|t| (self.doc_topic[d * k + t] as f64 + self.alpha) / denom)
            .collect()
    }

    /// Topic proportions of an unseen document, folded in against the fixed
    /// topic-word distributions by iterating expected assignments. Unknown
    /// words are ignored; with none known the prior (uniform) is returned.
    pub fn infer<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let k = self.k;
        let ids: Vec<usize> = tokens
            .iter()
            .filter_map(|t| self.word_id(t.as_ref()))
            .collect();
        let n = ids.len() as f64;
        let mut theta = vec![1.0 / k as f64; k];
        if ids.is_empty() {
            return theta;
        }
        let phis: Vec<Vec<f64>> = ids
            .iter()
            .map(|&w| (0..k).map(|t| self.phi(t, w)).collect())
            .collect();
        let mut counts = vec![0.0; k];
        let mut r = vec![0.0; k];
        for _ in 0..INFER_ITERS {
            counts.iter_mut().for_each(|c| *c = 0.0);
            for phi in &phis {
                let mut s = 0.0;
                for t in 0..k {
                    r[t] = theta[t] * phi[t];
                    s += r[t];
                }
                for t in 0..k {
                    counts[t] += r[t] / s;
                }
            }
            let denom = n + k as f64 * self.alpha;
            for t in 0..k {
                theta[t] = (counts[t] + self.alpha) / denom;
            }
        }
        theta
    }

    /// Index of the largest proportion (ties to the lower topic), or `None`
    /// when the document has no known word.
    pub fn dominant_topic<S: AsRef<str>>(&self, tokens: &[S]) -> Option<usize> {
        if !tokens.iter().any(|t| self.word_id(t.as_ref()).is_some()) {
            return None;
        }
        let theta = self.infer(tokens);
        let mut best = 0;
        for t in 1..self.k {
            if theta[t] > theta[best] {
                best = t;
            }
        }
        Some(best)
    }
}
