//! Word counting: a person's score for a type is the sum over their words of
//! count times the word's tf-idf weight in the type's positive-candidate
//! corpus.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{AssociatedText, PersonTexts};
use crate::features::{build_vocabulary, corpus_weights, CandidatePools, TfIdfWeights};
use crate::ids::TypeId;
use crate::score::RawScore;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountingModel {
    pub types: BTreeMap<TypeId, TfIdfWeights>,
}

pub fn build_counting_model(pools: &CandidatePools, texts: &PersonTexts, vocab_cap: usize) -> CountingModel {
    let mut types = BTreeMap::new();
    for (type_id, pool) in pools {
        let docs: Vec<&AssociatedText> = pool.positives.iter().filter_map(|p| texts.get(p)).collect();
        if docs.iter().all(|d| d.is_empty()) {
            log::warn!("{type_id}: no text for positive candidates, word counting will abstain");
            continue;
        }
        let vocab = build_vocabulary(docs.iter().copied(), vocab_cap);
        types.insert(type_id.clone(), corpus_weights(docs.iter().copied(), &vocab));
    }
    CountingModel { types }
}

impl CountingModel {
    pub fn score(&self, type_id: &TypeId, text: Option<&AssociatedText>) -> RawScore {
        let (Some(text), Some(weights)) = (text.filter(|t| !t.is_empty()), self.types.get(type_id)) else {
            return RawScore::Abstain;
        };
        RawScore::WeightedSum(score_text(weights, text))
    }
}

pub fn score_text(weights: &TfIdfWeights, text: &AssociatedText) -> f64 {
    text.token_counts
        .iter()
        .filter_map(|(tok, &n)| weights.get(tok).map(|w| n as f64 * w))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::CandidatePool;
    use crate::ids::PersonId;
    use proptest::prelude::*;

    fn model(weights: &[(&str, f64)]) -> CountingModel {
        CountingModel {
            types: [(
                TypeId::new("Actor"),
                TfIdfWeights {
                    weights: weights.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
                },
            )]
            .into(),
        }
    }

    #[test]
    fn direct_formula() {
        let m = model(&[("actor", 3.5)]);
        let t = AssociatedText::from_counts("p", [("actor", 2)]);
        assert_eq!(m.score(&TypeId::new("Actor"), Some(&t)), RawScore::WeightedSum(7.0));
        let t = AssociatedText::from_counts("p", [("tractor", 2)]);
        assert_eq!(m.score(&TypeId::new("Actor"), Some(&t)), RawScore::WeightedSum(0.0));
        let t = AssociatedText::from_counts("p", []);
        assert_eq!(m.score(&TypeId::new("Actor"), Some(&t)), RawScore::Abstain);
        assert_eq!(m.score(&TypeId::new("Farmer"), Some(&t)), RawScore::Abstain);
    }

    #[test]
    fn built_from_positive_corpus() {
        let mut texts = PersonTexts::new();
        texts.insert("a".into(), AssociatedText::from_counts("a", [("film", 2), ("stage", 1)]));
        texts.insert("b".into(), AssociatedText::from_counts("b", [("film", 1)]));
        texts.insert("c".into(), AssociatedText::from_counts("c", [("cow", 9)]));
        let pools: CandidatePools = [(
            TypeId::new("Actor"),
            CandidatePool {
                positives: vec![PersonId::new("a"), PersonId::new("b")],
                negatives: vec![PersonId::new("c")],
            },
        )]
        .into();
        let m = build_counting_model(&pools, &texts, 100_000);
        let w = &m.types[&TypeId::new("Actor")];
        assert_eq!(w.get("film"), Some(3.0));
        assert!((w.get("stage").unwrap() - (1.0 + (3.0f64 / 2.0).ln())).abs() < 1e-12);
        assert_eq!(w.get("cow"), None);
    }

    proptest! {
        #[test]
        fn doubling_counts_doubles_score(counts in prop::collection::btree_map("[a-e]", 1u32..50, 1..5)) {
            let m = model(&[("a", 1.25), ("b", 3.0), ("c", 0.5)]);
            let t1 = AssociatedText { person: "p".into(), token_counts: counts.clone() };
            let t2 = AssociatedText { person: "p".into(), token_counts: counts.iter().map(|(k, v)| (k.clone(), v * 2)).collect() };
            let s1 = m.score(&TypeId::new("Actor"), Some(&t1)).value().unwrap();
            let s2 = m.score(&TypeId::new("Actor"), Some(&t2)).value().unwrap();
            prop_assert!((s2 - 2.0 * s1).abs() <= 1e-12 * s2.abs().max(1.0));
        }
    }
}
