//! Scorer identities and raw (pre-mapping) scorer outputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScorerKind {
    #[serde(rename = "wordclass")]
    WordClassification,
    #[serde(rename = "wordcount")]
    WordCounting,
    #[serde(rename = "wordmle")]
    WordMle,
    #[serde(rename = "pathrank")]
    PathRanking,
}

impl ScorerKind {
    pub const ALL: [ScorerKind; 4] = [
        ScorerKind::WordClassification,
        ScorerKind::WordCounting,
        ScorerKind::WordMle,
        ScorerKind::PathRanking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScorerKind::WordClassification => "wordclass",
            ScorerKind::WordCounting => "wordcount",
            ScorerKind::WordMle => "wordmle",
            ScorerKind::PathRanking => "pathrank",
        }
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScorerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scorer `{s}` (expected wordclass, wordcount, wordmle or pathrank)")))
    }
}

/// A base scorer's output for one triple, before mapping to 0..=7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RawScore {
    /// A value in [0, 1].
    Probability(f64),
    /// An unbounded non-negative magnitude.
    WeightedSum(f64),
    Abstain,
}

impl RawScore {
    pub fn value(self) -> Option<f64> {
        match self {
            RawScore::Probability(v) | RawScore::WeightedSum(v) => Some(v),
            RawScore::Abstain => None,
        }
    }

    pub fn is_abstain(self) -> bool {
        matches!(self, RawScore::Abstain)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
