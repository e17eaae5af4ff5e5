//! ACC-weighted averaging of mapped scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::metric_acc;
use crate::ids::TargetRelation;
use crate::mapping::MAX_SCORE;
use crate::score::ScorerKind;

/// Dev-set ACC per scorer, per relation. Normalisation happens per triple.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnsembleWeights {
    pub relations: BTreeMap<TargetRelation, BTreeMap<ScorerKind, f64>>,
}

impl EnsembleWeights {
    pub fn for_relation(&self, relation: TargetRelation) -> Option<&BTreeMap<ScorerKind, f64>> {
        self.relations.get(&relation)
    }

    pub fn set(&mut self, relation: TargetRelation, scorer: ScorerKind, acc: f64) {
        self.relations.entry(relation).or_default().insert(scorer, acc);
    }
}

/// Mapped score per scorer for one triple; `None` is an abstention.
pub type ScoreVector = BTreeMap<ScorerKind, Option<u8>>;

/// `floor(sum_i w_i s_i)` with `w_i = acc_i / sum_j acc_j` over the scorers
/// that did not abstain. Zero when every scorer abstains, or when every
/// participating scorer has zero weight.
pub fn combine(scores: &ScoreVector, weights: &BTreeMap<ScorerKind, f64>) -> Result<u8> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (kind, score) in scores {
        let Some(s) = *score else { continue };
        if s > MAX_SCORE {
            return Err(Error::invalid(format!("{kind} score {s} outside 0..=7")));
        }
        let w = *weights
            .get(kind)
            .ok_or_else(|| Error::invalid(format!("no ensemble weight for scorer {kind}")))?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!(
                "ensemble weight {w} for {kind} is not a non-negative number"
            )));
        }
        num += w * s as f64;
        den += w;
    }
    if den == 0.0 {
        return Ok(0);
    }
    // The slack absorbs rounding in quotients that are exact integers.
    Ok(((num / den + 1e-9).floor() as u8).min(MAX_SCORE))
}

/// ACC of each scorer's (prediction, gold) dev pairs.
pub fn derive_weights(dev: &BTreeMap<ScorerKind, Vec<(u8, u8)>>, acc_threshold: u8) -> Result<BTreeMap<ScorerKind, f64>> {
    if dev.is_empty() {
        return Err(Error::invalid("no dev scores to derive ensemble weights from"));
    }
    let mut out = BTreeMap::new();
    for (&kind, pairs) in dev {
        if pairs.is_empty() {
            return Err(Error::invalid(format!("empty dev set for scorer {kind}")));
        }
        out.insert(kind, metric_acc(pairs, acc_threshold)?);
    }
    if out.values().all(|&a| a == 0.0) {
        return Err(Error::invalid("every scorer has dev ACC 0; ensemble weights are undefined"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ScorerKind::*;

    fn w(pairs: &[(ScorerKind, f64)]) -> BTreeMap<ScorerKind, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn unanimous_scores() {
        let scores = ScorerKind::ALL.into_iter().map(|k| (k, Some(5))).collect();
        let weights = w(&[(WordClassification, 0.7), (WordCounting, 0.2), (WordMle, 0.5), (PathRanking, 0.9)]);
        assert_eq!(combine(&scores, &weights).unwrap(), 5);
    }

    #[test]
    fn two_scorer_example() {
        let scores = ScoreVector::from([(WordCounting, Some(7)), (WordMle, Some(0))]);
        assert_eq!(combine(&scores, &w(&[(WordCounting, 0.8), (WordMle, 0.6)])).unwrap(), 4);
    }

    #[test]
    fn all_abstain_is_zero() {
        let scores = ScoreVector::from([(WordCounting, None), (WordMle, None)]);
        assert_eq!(combine(&scores, &w(&[(WordCounting, 0.8), (WordMle, 0.6)])).unwrap(), 0);
        assert_eq!(combine(&ScoreVector::new(), &BTreeMap::new()).unwrap(), 0);
    }

    #[test]
    fn abstainers_are_renormalised_away() {
        let scores = ScoreVector::from([(WordCounting, Some(6)), (WordMle, None)]);
        assert_eq!(combine(&scores, &w(&[(WordCounting, 0.1), (WordMle, 0.9)])).unwrap(), 6);
    }

    #[test]
    fn missing_weight_is_error() {
        let scores = ScoreVector::from([(PathRanking, Some(3))]);
        assert!(combine(&scores, &w(&[(WordMle, 0.5)])).is_err());
    }

    #[test]
    fn derived_weights_are_raw_acc() {
        let dev = BTreeMap::from([(WordCounting, vec![(3, 3), (7, 7)]), (WordMle, vec![(0, 7), (5, 5)])]);
        let got = derive_weights(&dev, 2).unwrap();
        assert_eq!(got, w(&[(WordCounting, 1.0), (WordMle, 0.5)]));
        let w2 = w(&[(WordCounting, 0.74), (WordMle, 0.72)]);
        assert!((0.74f64 / (0.74 + 0.72) - 0.506_849_3).abs() < 1e-6);
        let scores = ScoreVector::from([(WordCounting, Some(7)), (WordMle, Some(0))]);
        assert_eq!(combine(&scores, &w2).unwrap(), 3);
    }

    #[test]
    fn degenerate_dev_sets() {
        assert!(derive_weights(&BTreeMap::from([(WordMle, vec![])]), 2).is_err());
        assert!(derive_weights(&BTreeMap::from([(WordMle, vec![(0, 7)]), (WordCounting, vec![(7, 0)])]), 2).is_err());
        assert!(derive_weights(&BTreeMap::new(), 2).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_permutation_invariant(
            raw in prop::collection::vec((prop::option::of(0u8..=7), 1u32..100), 4),
        ) {
            let scores: ScoreVector = ScorerKind::ALL.iter().zip(&raw).map(|(&k, r)| (k, r.0)).collect();
            let weights: BTreeMap<ScorerKind, f64> =
                ScorerKind::ALL.iter().zip(&raw).map(|(&k, r)| (k, r.1 as f64 / 100.0)).collect();
            let got = combine(&scores, &weights).unwrap();
            let present: Vec<u8> = raw.iter().filter_map(|r| r.0).collect();
            if present.is_empty() {
                prop_assert_eq!(got, 0);
            } else {
                prop_assert!(got >= *present.iter().min().unwrap() && got <= *present.iter().max().unwrap());
            }
            // Reversed insertion order builds the same maps, so permute the
            // scorer labels instead: swap the roles of two scorers.
            let swap = |k: ScorerKind| match k { WordMle => PathRanking, PathRanking => WordMle, o => o };
            let s2: ScoreVector = scores.iter().map(|(&k, &v)| (swap(k), v)).collect();
            let w2: BTreeMap<ScorerKind, f64> = weights.iter().map(|(&k, &v)| (swap(k), v)).collect();
            prop_assert_eq!(combine(&s2, &w2).unwrap(), got);
        }
    }
}
