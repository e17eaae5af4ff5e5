//! Vocabulary selection, tf-idf weighting, and popularity-stratified
//! sampling of training persons. Shared by the three text scorers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::corpus::{types_by_person, AssociatedText, KbAssertion, Popularity};
use crate::ids::{PersonId, TypeId};
use crate::seed;

/// Smoothed inverse document frequency, always >= 1.
pub fn idf(df: u32, n_docs: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    df: Vec<u32>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    n_docs: usize,
    tokens: Vec<String>,
    df: Vec<u32>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_parts(r.tokens, r.df, r.n_docs)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            n_docs: v.n_docs,
            tokens: v.tokens,
            df: v.df,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.df == other.df && self.n_docs == other.n_docs
    }
}

impl Vocabulary {
    fn from_parts(tokens: Vec<String>, df: Vec<u32>, n_docs: usize) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens, df, n_docs, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn df(&self, index: usize) -> u32 {
        self.df[index]
    }

    pub fn idf(&self, index: usize) -> f64 {
        idf(self.df[index], self.n_docs)
    }

    /// Keeps the first `cap` tokens (they are already frequency ranked).
    pub fn truncated(&self, cap: usize) -> Vocabulary {
        let n = cap.min(self.len());
        Vocabulary::from_parts(self.tokens[..n].to_vec(), self.df[..n].to_vec(), self.n_docs)
    }
}

/// Ranks tokens by total frequency (descending, ties lexicographic) and
/// keeps the top `cap`. Document frequencies count person-documents.
pub fn build_vocabulary<'a>(texts: impl IntoIterator<Item = &'a AssociatedText>, cap: usize) -> Vocabulary {
    let mut freq: BTreeMap<&str, (u64, u32)> = BTreeMap::new();
    let mut n_docs = 0;
    for text in texts {
        n_docs += 1;
        for (tok, &c) in &text.token_counts {
            let e = freq.entry(tok.as_str()).or_insert((0, 0));
            e.0 += c as u64;
            e.1 += 1;
        }
    }
    let mut ranked: Vec<(&str, u64, u32)> = freq.into_iter().map(|(t, (f, d))| (t, f, d)).collect();
    // BTreeMap order is lexicographic, so a stable sort by frequency keeps the tie-break.
    ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
    ranked.truncate(cap);
    let tokens = ranked.iter().map(|r| r.0.to_string()).collect();
    let df = ranked.iter().map(|r| r.2).collect();
    Vocabulary::from_parts(tokens, df, n_docs)
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }
}

/// Per-document tf-idf vector, L2-normalized. Out-of-vocabulary tokens are
/// ignored; a document with no in-vocabulary token maps to the zero vector.
pub fn tfidf_vector(doc: &AssociatedText, vocab: &Vocabulary) -> SparseVector {
    let mut entries: Vec<(usize, f64)> = doc
        .token_counts
        .iter()
        .filter_map(|(tok, &c)| vocab.index_of(tok).map(|i| (i, c as f64 * vocab.idf(i))))
        .collect();
    entries.sort_unstable_by_key(|e| e.0);
    let mut v = SparseVector { entries };
    let norm = v.norm();
    if norm > 0.0 {
        for e in &mut v.entries {
            e.1 /= norm;
        }
    }
    v
}

/// Corpus-level word weights: total count times idf, unnormalized.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfIdfWeights {
    pub weights: BTreeMap<String, f64>,
}

impl TfIdfWeights {
    pub fn get(&self, token: &str) -> Option<f64> {
        self.weights.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Weight of every vocabulary token that occurs in `texts`: its total count
/// there times its idf, with document frequencies taken over `texts`.
pub fn corpus_weights<'a>(texts: impl IntoIterator<Item = &'a AssociatedText>, vocab: &Vocabulary) -> TfIdfWeights {
    let mut stats: BTreeMap<&str, (u64, u32)> = BTreeMap::new();
    let mut n_docs = 0;
    for text in texts {
        n_docs += 1;
        for (tok, &c) in &text.token_counts {
            if let Some(i) = vocab.index_of(tok) {
                let e = stats.entry(vocab.tokens[i].as_str()).or_insert((0, 0));
                e.0 += c as u64;
                e.1 += 1;
            }
        }
    }
    TfIdfWeights {
        weights: stats
            .into_iter()
            .map(|(t, (count, df))| (t.to_string(), count as f64 * idf(df, n_docs)))
            .collect(),
    }
}

/// Positive candidates have exactly one type (this one); negatives lack it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidatePool {
    pub positives: Vec<PersonId>,
    pub negatives: Vec<PersonId>,
}

pub type CandidatePools = BTreeMap<TypeId, CandidatePool>;

pub fn candidate_pools(kb: &[KbAssertion]) -> CandidatePools {
    let by_person = types_by_person(kb);
    let universe: BTreeSet<&TypeId> = kb.iter().map(|a| &a.type_id).collect();
    let mut pools: CandidatePools = universe.into_iter().map(|t| (t.clone(), CandidatePool::default())).collect();
    for (person, types) in &by_person {
        for (t, pool) in pools.iter_mut() {
            if !types.contains(t) {
                pool.negatives.push(person.clone());
            } else if types.len() == 1 {
                pool.positives.push(person.clone());
            }
        }
    }
    pools
}

/// Popularity bucket `i` covers `[2^i, 2^(i+1))`; zero popularity has none.
pub fn bucket_of(popularity: u64) -> Option<u32> {
    (popularity > 0).then(|| 63 - popularity.leading_zeros())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub person: PersonId,
    pub positive: bool,
}

pub type SampledExamples = BTreeMap<TypeId, Vec<Example>>;

/// Per type and per popularity bucket, draws `min(cap, positives)` positives
/// and as many negatives, uniformly without replacement. If a bucket holds
/// fewer negatives than that, both draws shrink to the negative count.
pub fn sample_examples(pools: &CandidatePools, popularity: &Popularity, bucket_cap: usize, seed: u64) -> SampledExamples {
    let mut out = SampledExamples::new();
    for (type_id, pool) in pools {
        let mut rng = seed::rng_for(seed, type_id.as_str());
        let by_bucket = |persons: &[PersonId]| {
            let mut b: BTreeMap<u32, Vec<PersonId>> = BTreeMap::new();
            for p in persons {
                if let Some(i) = bucket_of(popularity.get(p).copied().unwrap_or(0)) {
                    b.entry(i).or_default().push(p.clone());
                }
            }
            b
        };
        let pos = by_bucket(&pool.positives);
        let neg = by_bucket(&pool.negatives);
        let mut examples = Vec::new();
        for (bucket, positives) in &pos {
            let negatives = neg.get(bucket).map(Vec::as_slice).unwrap_or(&[]);
            let wanted = bucket_cap.min(positives.len());
            let n = wanted.min(negatives.len());
            if n < wanted {
                log::debug!(
                    "{type_id}: bucket {bucket} has {} negatives for {wanted} positives; drawing {n} of each",
                    negatives.len()
                );
            }
            for i in sample(&mut rng, positives.len(), n).into_iter() {
                examples.push(Example {
                    person: positives[i].clone(),
                    positive: true,
                });
            }
            for i in sample(&mut rng, negatives.len(), n).into_iter() {
                examples.push(Example {
                    person: negatives[i].clone(),
                    positive: false,
                });
            }
        }
        out.insert(type_id.clone(), examples);
    }
    out
}
