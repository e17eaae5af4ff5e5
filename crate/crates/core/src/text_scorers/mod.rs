//! The three text-based base scorers.

pub mod classification;
pub mod counting;
pub mod logistic;
pub mod mle;

pub use classification::{train_word_classification, ClassificationModel, ClassifierConfig, TypeClassifier};
pub use counting::{build_counting_model, CountingModel};
pub use mle::{build_mle_model, em_mixture, EmResult, MleConfig, MleEstimate, MleModel};
