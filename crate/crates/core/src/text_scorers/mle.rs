//! Word MLE: a person's text is modelled as generated by a mixture of their
//! types (plus an optional background "pseudo type"), with fixed per-type
//! word distributions. The mixture weights are fit by EM and used as scores.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::corpus::{AssociatedText, PersonTexts};
use crate::features::{build_vocabulary, corpus_weights, CandidatePools, Vocabulary};
use crate::ids::{PersonId, TypeId};
use crate::score::RawScore;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub vocab_cap: usize,
    /// Persons drawn to build the background distribution.
    pub pseudo_sample: usize,
    pub use_pseudo: bool,
    pub epsilon: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        MleConfig {
            vocab_cap: 20_000,
            pseudo_sample: 10_000,
            use_pseudo: true,
            epsilon: 1e-9,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleModel {
    /// Global vocabulary; its document frequencies give the idf used for tf.
    pub vocab: Vocabulary,
    /// `P(w | type)` over `vocab`, smoothed, summing to one.
    pub types: BTreeMap<TypeId, Vec<f64>>,
    pub pseudo: Option<Vec<f64>>,
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub person: PersonId,
    pub types: Vec<TypeId>,
    pub has_pseudo: bool,
    /// Mixture weights; the pseudo type, when present, comes first.
    pub mixture: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl MleEstimate {
    pub fn weight_of(&self, type_id: &TypeId) -> Option<f64> {
        let offset = usize::from(self.has_pseudo);
        self.types.iter().position(|t| t == type_id).map(|i| self.mixture[i + offset])
    }
}

/// Normalizes tf-idf weights into a distribution, adds `epsilon` to every
/// entry and renormalizes. `None` if all weights are zero.
fn word_distribution<'a>(texts: impl IntoIterator<Item = &'a AssociatedText>, vocab: &Vocabulary, epsilon: f64) -> Option<Vec<f64>> {
    let weights = corpus_weights(texts, vocab);
    let mut dist = vec![0.0; vocab.len()];
    for (tok, w) in &weights.weights {
        dist[vocab.index_of(tok).expect("weights are restricted to vocab")] = *w;
    }
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for d in &mut dist {
        *d = *d / total + epsilon;
    }
    let total: f64 = dist.iter().sum();
    for d in &mut dist {
        *d /= total;
    }
    Some(dist)
}

pub fn build_mle_model(pools: &CandidatePools, texts: &PersonTexts, cfg: &MleConfig, seed: u64) -> MleModel {
    let vocab = build_vocabulary(texts.values(), cfg.vocab_cap);
    let mut types = BTreeMap::new();
    for (type_id, pool) in pools {
        let docs = pool.positives.iter().filter_map(|p| texts.get(p));
        match word_distribution(docs, &vocab, cfg.epsilon) {
            Some(d) => {
                types.insert(type_id.clone(), d);
            }
            None => log::warn!("{type_id}: no usable positive text, dropped from word MLE"),
        }
    }
    let pseudo = if cfg.use_pseudo {
        let candidates: Vec<&AssociatedText> = texts.values().filter(|t| !t.is_empty()).collect();
        let n = cfg.pseudo_sample.min(candidates.len());
        let mut rng = seed::rng_for(seed, "pseudo-type");
        let mut picked: Vec<usize> = sample(&mut rng, candidates.len(), n).into_vec();
        picked.sort_unstable();
        word_distribution(picked.into_iter().map(|i| candidates[i]), &vocab, cfg.epsilon)
    } else {
        None
    };
    MleModel {
        vocab,
        types,
        pseudo,
        max_iter: cfg.max_iter,
        tol: cfg.tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmResult {
    pub mixture: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Log-likelihood at the initial point and after every iteration.
    pub trace: Vec<f64>,
}

/// `sum_j tf_j * ln(sum_i mixture_i * components[i][j])`.
pub fn log_likelihood(components: &[Vec<f64>], tf: &[f64], mixture: &[f64]) -> f64 {
    tf.iter()
        .enumerate()
        .map(|(j, &t)| {
            let p: f64 = components.iter().zip(mixture).map(|(c, m)| m * c[j]).sum();
            t * p.ln()
        })
        .sum()
}

/// EM over mixture weights with fixed components, from the uniform start.
/// Stops when the log-likelihood changes by less than `tol` or after
/// `max_iter` iterations.
pub fn em_mixture(components: &[Vec<f64>], tf: &[f64], max_iter: usize, tol: f64) -> EmResult {
    let k = components.len();
    let total_tf: f64 = tf.iter().sum();
    let mut mixture = vec![1.0 / k as f64; k];
    let mut ll = log_likelihood(components, tf, &mixture);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut acc = vec![0.0; k];
    while iterations < max_iter {
        iterations += 1;
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (j, &t) in tf.iter().enumerate() {
            let denom: f64 = components.iter().zip(&mixture).map(|(c, m)| m * c[j]).sum();
            if denom <= 0.0 {
                continue;
            }
            for i in 0..k {
                acc[i] += t * mixture[i] * components[i][j] / denom;
            }
        }
        for i in 0..k {
            mixture[i] = acc[i] / total_tf;
        }
        let next = log_likelihood(components, tf, &mixture);
        trace.push(next);
        let delta = (next - ll).abs();
        ll = next;
        if delta < tol {
            break;
        }
    }
    EmResult {
        mixture,
        log_likelihood: ll,
        iterations,
        trace,
    }
}

impl MleModel {
    /// Fits the person's type mixture. `None` when the text is empty, has no
    /// in-vocabulary word, or none of `types` is modelled.
    pub fn estimate(&self, text: &AssociatedText, types: &[TypeId]) -> Option<MleEstimate> {
        self.estimate_with(text, types, self.max_iter, self.tol)
    }

    pub fn estimate_with(&self, text: &AssociatedText, types: &[TypeId], max_iter: usize, tol: f64) -> Option<MleEstimate> {
        let present: Vec<TypeId> = types.iter().filter(|t| self.types.contains_key(*t)).cloned().collect();
        if present.is_empty() {
            return None;
        }
        let words: Vec<(usize, f64)> = text
            .token_counts
            .iter()
            .filter_map(|(tok, &c)| self.vocab.index_of(tok).map(|i| (i, c as f64 * self.vocab.idf(i))))
            .collect();
        if words.is_empty() {
            return None;
        }
        let tf: Vec<f64> = words.iter().map(|w| w.1).collect();
        let restrict = |dist: &Vec<f64>| words.iter().map(|&(i, _)| dist[i]).collect::<Vec<f64>>();
        let mut components = Vec::with_capacity(present.len() + 1);
        if let Some(p0) = &self.pseudo {
            components.push(restrict(p0));
        }
        components.extend(present.iter().map(|t| restrict(&self.types[t])));
        let em = em_mixture(&components, &tf, max_iter, tol);
        Some(MleEstimate {
            person: text.person.clone(),
            types: present,
            has_pseudo: self.pseudo.is_some(),
            mixture: em.mixture,
            log_likelihood: em.log_likelihood,
            iterations: em.iterations,
        })
    }

    /// Mixture weight of each requested type, aligned with `types`.
    pub fn score_person(&self, text: Option<&AssociatedText>, types: &[TypeId]) -> Vec<RawScore> {
        let est = text.and_then(|t| self.estimate(t, types));
        types
            .iter()
            .map(|t| match est.as_ref().and_then(|e| e.weight_of(t)) {
                Some(w) => RawScore::Probability(w.clamp(0.0, 1.0)),
                None => RawScore::Abstain,
            })
            .collect()
    }
}
