//! Evaluation of predicted scores against gold, and synthetic worlds for
//! end-to-end runs.

pub mod metrics;
pub mod world;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use metrics::{metric_acc, metric_asd, metric_tau, tau_distance};
pub use world::{generate_world, World, WorldConfig, WorldFiles};

use crate::corpus::GoldTriple;
use crate::error::{Error, Result};
use crate::ids::{PersonId, TypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub acc_threshold: u8,
    /// Gold triples without a prediction count as predicted 0.
    pub allow_missing: bool,
    pub min_group: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            acc_threshold: 2,
            allow_missing: false,
            min_group: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub asd: f64,
    /// `None` when no person has two gold-ordered triples.
    pub tau: Option<f64>,
    pub n_triples: usize,
    pub n_rank_groups: usize,
    pub n_missing: usize,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// One line: `ACC 0.8700  ASD 1.6300  TAU 0.3300`.
    pub fn summary(&self) -> String {
        let tau = self.tau.map_or_else(|| "n/a".to_string(), |t| format!("{t:.4}"));
        format!("ACC {:.4}  ASD {:.4}  TAU {tau}", self.acc, self.asd)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let tau = self.tau.map_or_else(|| "n/a".to_string(), |t| format!("{t:.4}"));
        let _ = writeln!(s, "metric        value");
        let _ = writeln!(s, "ACC           {:.4}", self.acc);
        let _ = writeln!(s, "ASD           {:.4}", self.asd);
        let _ = writeln!(s, "TAU           {tau}");
        let _ = writeln!(s, "triples       {}", self.n_triples);
        let _ = writeln!(s, "rank groups   {}", self.n_rank_groups);
        if self.n_missing > 0 {
            let _ = writeln!(s, "missing       {}", self.n_missing);
        }
        s
    }
}

/// Scores `pred` against `gold`. With `restrict_to`, only gold triples in
/// that set are evaluated. Extra predictions are ignored.
pub fn evaluate(
    pred: &[GoldTriple],
    gold: &[GoldTriple],
    opts: &EvalOptions,
    restrict_to: Option<&BTreeSet<(PersonId, TypeId)>>,
) -> Result<MetricsReport> {
    let predicted: BTreeMap<(&PersonId, &TypeId), u8> = pred.iter().map(|t| ((&t.person, &t.type_id), t.score)).collect();
    let mut pairs = Vec::new();
    let mut groups: BTreeMap<&PersonId, Vec<(u8, u8)>> = BTreeMap::new();
    let mut n_missing = 0;
    for g in gold {
        if let Some(keep) = restrict_to {
            if !keep.contains(&(g.person.clone(), g.type_id.clone())) {
                continue;
            }
        }
        let p = match predicted.get(&(&g.person, &g.type_id)) {
            Some(&p) => p,
            None if opts.allow_missing => {
                n_missing += 1;
                0
            }
            None => {
                return Err(Error::invalid(format!(
                    "no prediction for gold triple ({}, {}); pass --allow-missing to score it as 0",
                    g.person, g.type_id
                )))
            }
        };
        pairs.push((p, g.score));
        groups.entry(&g.person).or_default().push((p, g.score));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("no gold triples to evaluate"));
    }
    let groups: Vec<Vec<(u8, u8)>> = groups.into_values().collect();
    let (tau, n_rank_groups) = match metric_tau(&groups, opts.min_group) {
        Ok((t, n)) => (Some(t), n),
        Err(_) => {
            log::warn!("no person has two gold-ordered triples; TAU undefined");
            (None, 0)
        }
    };
    Ok(MetricsReport {
        acc: metric_acc(&pairs, opts.acc_threshold)?,
        asd: metric_asd(&pairs)?,
        tau,
        n_triples: pairs.len(),
        n_rank_groups,
        n_missing,
    })
}
