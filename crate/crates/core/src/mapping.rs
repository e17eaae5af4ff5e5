//! Raw scorer outputs to integer relevance scores 0..=7.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::TargetRelation;
use crate::score::{RawScore, ScorerKind};

pub const MAX_SCORE: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingStrategy {
    Maplin,
    Maplog,
    Mapscale,
}

impl MappingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MappingStrategy::Maplin => "maplin",
            MappingStrategy::Maplog => "maplog",
            MappingStrategy::Mapscale => "mapscale",
        }
    }
}

impl fmt::Display for MappingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maplin" => Ok(MappingStrategy::Maplin),
            "maplog" => Ok(MappingStrategy::Maplog),
            "mapscale" => Ok(MappingStrategy::Mapscale),
            other => Err(Error::Config(format!(
                "unknown mapping `{other}` (expected maplin, maplog or mapscale)"
            ))),
        }
    }
}

fn clamp_floor(x: f64) -> u8 {
    x.floor().clamp(0.0, MAX_SCORE as f64) as u8
}

fn check_range(s: f64, s_max: f64) -> Result<()> {
    if !(s >= 0.0 && s_max >= 0.0 && s.is_finite() && s_max.is_finite()) {
        return Err(Error::invalid(format!(
            "raw score {s} / maximum {s_max} must be finite and non-negative"
        )));
    }
    if s > s_max {
        return Err(Error::invalid(format!("raw score {s} exceeds the per-person maximum {s_max}")));
    }
    Ok(())
}

/// `floor(s / s_max * 7)`.
pub fn map_linear(s: f64, s_max: f64) -> Result<u8> {
    check_range(s, s_max)?;
    if s_max == 0.0 {
        return Ok(0);
    }
    Ok(clamp_floor(s / s_max * 7.0))
}

/// `floor(max(0, log2(s / s_max * 2^7)))`.
pub fn map_log(s: f64, s_max: f64) -> Result<u8> {
    check_range(s, s_max)?;
    if s == 0.0 || s_max == 0.0 {
        return Ok(0);
    }
    Ok(clamp_floor((s / s_max * 128.0).log2().max(0.0)))
}

/// `floor(s * 8 - 1e-4)` for a probability `s`.
pub fn map_scale(s: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("probability {s} outside [0, 1]")));
    }
    Ok(clamp_floor(s * 8.0 - 1e-4))
}

/// Maps one raw score; abstentions stay abstentions.
pub fn map_raw(strategy: MappingStrategy, raw: RawScore, s_max: f64) -> Result<Option<u8>> {
    match (strategy, raw) {
        (_, RawScore::Abstain) => Ok(None),
        (MappingStrategy::Mapscale, RawScore::Probability(p)) => map_scale(p).map(Some),
        (MappingStrategy::Mapscale, RawScore::WeightedSum(_)) => Err(Error::Config("mapscale applies only to probability scores".into())),
        (MappingStrategy::Maplin, r) => map_linear(r.value().unwrap_or(0.0), s_max).map(Some),
        (MappingStrategy::Maplog, r) => map_log(r.value().unwrap_or(0.0), s_max).map(Some),
    }
}

/// Maps all of one person's candidate-type scores from a single scorer;
/// `s_max` is the largest non-abstaining value among them.
pub fn map_person(strategy: MappingStrategy, raws: &[RawScore]) -> Result<Vec<Option<u8>>> {
    let s_max = raws.iter().filter_map(|r| r.value()).fold(0.0, f64::max);
    raws.iter().map(|&r| map_raw(strategy, r, s_max)).collect()
}

/// Strategy per (scorer, relation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MappingTable {
    entries: BTreeMap<ScorerKind, BTreeMap<TargetRelation, MappingStrategy>>,
}

impl Default for MappingTable {
    fn default() -> Self {
        use MappingStrategy::*;
        let rows = [
            (ScorerKind::WordClassification, Mapscale, Maplog),
            (ScorerKind::WordCounting, Maplin, Maplin),
            (ScorerKind::WordMle, Maplog, Maplog),
            (ScorerKind::PathRanking, Mapscale, Maplog),
        ];
        let entries = rows
            .into_iter()
            .map(|(k, prof, nat)| {
                (
                    k,
                    BTreeMap::from([(TargetRelation::Profession, prof), (TargetRelation::Nationality, nat)]),
                )
            })
            .collect();
        MappingTable { entries }
    }
}

impl MappingTable {
    pub fn get(&self, scorer: ScorerKind, relation: TargetRelation) -> MappingStrategy {
        self.entries
            .get(&scorer)
            .and_then(|m| m.get(&relation))
            .copied()
            .unwrap_or_else(|| MappingTable::default().entries[&scorer][&relation])
    }

    pub fn set(&mut self, scorer: ScorerKind, relation: TargetRelation, strategy: MappingStrategy) {
        self.entries.entry(scorer).or_default().insert(relation, strategy);
    }

    /// Applies overrides and checks that mapscale only lands on scorers that
    /// emit probabilities.
    pub fn with_overrides(mut self, overrides: &BTreeMap<ScorerKind, BTreeMap<TargetRelation, MappingStrategy>>) -> Result<Self> {
        for (&k, m) in overrides {
            for (&r, &s) in m {
                if s == MappingStrategy::Mapscale && !matches!(k, ScorerKind::WordClassification | ScorerKind::PathRanking) {
                    return Err(Error::Config(format!(
                        "mapscale cannot map {k} scores, which are not probabilities"
                    )));
                }
                self.set(k, r, s);
            }
        }
        Ok(self)
    }
}
