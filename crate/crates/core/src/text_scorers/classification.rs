//! Word classification: one binary tf-idf logistic classifier per type,
//! trained on popularity-stratified positive/negative examples.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logistic::{cross_validate, fit, lambda_grid, NewtonOptions};
use crate::corpus::{AssociatedText, PersonTexts};
use crate::features::{build_vocabulary, tfidf_vector, SampledExamples, SparseVector, Vocabulary};
use crate::ids::TypeId;
use crate::score::{sigmoid, RawScore};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub vocab_cap: usize,
    pub cv_folds: usize,
    pub grid_size: usize,
    pub newton: NewtonOptions,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            vocab_cap: 20_000,
            cv_folds: 5,
            grid_size: 10,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TypeClassifier {
    Trained {
        vocab: Vocabulary,
        weights: Vec<f64>,
        bias: f64,
        lambda: f64,
        cv_accuracy: f64,
        training_accuracy: f64,
    },
    Untrainable {
        reason: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassificationModel {
    pub types: BTreeMap<TypeId, TypeClassifier>,
}

fn empty_text() -> &'static AssociatedText {
    use std::sync::OnceLock;
    static EMPTY: OnceLock<AssociatedText> = OnceLock::new();
    EMPTY.get_or_init(|| AssociatedText::new("__empty__".into()))
}

fn train_one(
    type_id: &TypeId,
    examples: &[crate::features::Example],
    texts: &PersonTexts,
    cfg: &ClassifierConfig,
    seed: u64,
) -> TypeClassifier {
    let n_pos = examples.iter().filter(|e| e.positive).count();
    let n_neg = examples.len() - n_pos;
    if n_pos < 2 || n_neg < 2 {
        log::warn!("{type_id}: {n_pos} positive / {n_neg} negative examples, classifier not trained");
        return TypeClassifier::Untrainable {
            reason: format!("need at least 2 examples per label, have {n_pos}+/{n_neg}-"),
        };
    }
    let docs: Vec<&AssociatedText> = examples
        .iter()
        .map(|e| texts.get(&e.person).unwrap_or_else(|| empty_text()))
        .collect();
    let vocab = build_vocabulary(docs.iter().copied(), cfg.vocab_cap);
    let vectors: Vec<SparseVector> = docs.iter().map(|d| tfidf_vector(d, &vocab)).collect();
    let rows: Vec<&SparseVector> = vectors.iter().collect();
    let labels: Vec<bool> = examples.iter().map(|e| e.positive).collect();

    let grid = lambda_grid(cfg.grid_size);
    let cv = cross_validate(&rows, &labels, vocab.len(), &grid, cfg.cv_folds, seed, cfg.newton);
    let model = fit(&rows, &labels, vocab.len(), cv.lambda, cfg.newton);
    let best = grid.iter().position(|&l| l == cv.lambda).unwrap_or(0);
    let correct = rows.iter().zip(&labels).filter(|(x, &y)| (model.decision(x) > 0.0) == y).count();
    TypeClassifier::Trained {
        vocab,
        weights: model.weights,
        bias: model.bias,
        lambda: cv.lambda,
        cv_accuracy: cv.accuracies.get(best).copied().unwrap_or(0.0),
        training_accuracy: correct as f64 / labels.len() as f64,
    }
}

/// Trains every type independently (in parallel on the current rayon pool).
pub fn train_word_classification(
    examples: &SampledExamples,
    texts: &PersonTexts,
    cfg: &ClassifierConfig,
    seed: u64,
) -> ClassificationModel {
    let types = examples
        .par_iter()
        .map(|(t, ex)| (t.clone(), train_one(t, ex, texts, cfg, seed::derive(seed, t.as_str()))))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    ClassificationModel { types }
}

impl ClassificationModel {
    /// Classifier confidence that `type_id` applies to the person whose text
    /// is given. Abstains on empty text and untrained types.
    pub fn score(&self, type_id: &TypeId, text: Option<&AssociatedText>) -> RawScore {
        let Some(text) = text.filter(|t| !t.is_empty()) else {
            return RawScore::Abstain;
        };
        match self.types.get(type_id) {
            Some(TypeClassifier::Trained { vocab, weights, bias, .. }) => {
                let x = tfidf_vector(text, vocab);
                RawScore::Probability(sigmoid(x.dot(weights) + bias))
            }
            _ => RawScore::Abstain,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Example;
    use crate::ids::PersonId;

    fn world() -> (SampledExamples, PersonTexts) {
        let mut texts = PersonTexts::new();
        let mut ex = Vec::new();
        for i in 0..12 {
            let pos = i % 2 == 0;
            let name = format!("p{i}");
            let words: &[(&str, u32)] = if pos {
                &[("stage", 3), ("film", 2), ("born", 1)]
            } else {
                &[("harvest", 3), ("cattle", 2), ("born", 1)]
            };
            texts.insert(PersonId::new(&name), AssociatedText::from_counts(&name, words.iter().copied()));
            ex.push(Example {
                person: PersonId::new(&name),
                positive: pos,
            });
        }
        ([(TypeId::new("Actor"), ex)].into(), texts)
    }

    #[test]
    fn separable_world_is_learned() {
        let (ex, texts) = world();
        let m = train_word_classification(&ex, &texts, &ClassifierConfig::default(), 5);
        let TypeClassifier::Trained { training_accuracy, .. } = &m.types[&TypeId::new("Actor")] else {
            panic!("untrainable");
        };
        assert_eq!(*training_accuracy, 1.0);
        let actorish = AssociatedText::from_counts("q", [("stage", 1)]);
        let farmerish = AssociatedText::from_counts("q", [("cattle", 1)]);
        let pa = m.score(&TypeId::new("Actor"), Some(&actorish)).value().unwrap();
        let pf = m.score(&TypeId::new("Actor"), Some(&farmerish)).value().unwrap();
        assert!(pa > 0.5 && pf < 0.5);
    }

    #[test]
    fn single_label_is_untrainable() {
        let (mut ex, texts) = world();
        for e in ex.values_mut().flatten() {
            e.positive = true;
        }
        let m = train_word_classification(&ex, &texts, &ClassifierConfig::default(), 5);
        assert!(matches!(m.types[&TypeId::new("Actor")], TypeClassifier::Untrainable { .. }));
        let t = AssociatedText::from_counts("q", [("stage", 1)]);
        assert_eq!(m.score(&TypeId::new("Actor"), Some(&t)), RawScore::Abstain);
    }

    #[test]
    fn training_is_deterministic() {
        let (ex, texts) = world();
        let a = train_word_classification(&ex, &texts, &ClassifierConfig::default(), 5);
        let b = train_word_classification(&ex, &texts, &ClassifierConfig::default(), 5);
        assert_eq!(a, b);
    }

    #[test]
    fn scoring_contract() {
        let vocab = build_vocabulary([&AssociatedText::from_counts("d", [("a", 1)])], 10);
        let mut m = ClassificationModel::default();
        m.types.insert(
            TypeId::new("T"),
            TypeClassifier::Trained {
                vocab: vocab.clone(),
                weights: vec![0.0],
                bias: 0.0,
                lambda: 1.0,
                cv_accuracy: 1.0,
                training_accuracy: 1.0,
            },
        );
        let t = AssociatedText::from_counts("q", [("a", 2)]);
        assert_eq!(m.score(&TypeId::new("T"), Some(&t)), RawScore::Probability(0.5));
        // unit tf-idf vector on `a`, so w.x + b = ln 3
        m.types.insert(
            TypeId::new("T"),
            TypeClassifier::Trained {
                vocab,
                weights: vec![3f64.ln()],
                bias: 0.0,
                lambda: 1.0,
                cv_accuracy: 1.0,
                training_accuracy: 1.0,
            },
        );
        let p = m.score(&TypeId::new("T"), Some(&t)).value().unwrap();
        assert!((p - 0.75).abs() < 1e-12);
        assert_eq!(
            m.score(&TypeId::new("T"), Some(&AssociatedText::from_counts("q", []))),
            RawScore::Abstain
        );
        assert_eq!(m.score(&TypeId::new("T"), None), RawScore::Abstain);
    }
}
