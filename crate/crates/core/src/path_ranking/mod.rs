//! Knowledge-graph base scorer: path-type features between a person and a
//! type node, classified by a random forest.

pub mod auc;
pub mod forest;
pub mod graph;
pub mod pairs;
pub mod paths;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use auc::compute_auc;
pub use forest::{fit_forest, train_forest, DecisionTree, ForestSelection, HyperGrid, MaxFeatures, RandomForest, TreeParams};
pub use graph::{build_graph, filter_relations, KbGraph};
pub use pairs::{make_training_pairs, negatives_are_unobserved, LabeledPair};
pub use paths::{extract_paths, Direction, PathFeatureVector, PathOptions, PathType, Step};

use crate::corpus::KbAssertion;
use crate::error::{Error, Result};
use crate::ids::{EntityId, PersonId, RelationId, TargetRelation, TypeId};
use crate::score::RawScore;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathRankingConfig {
    pub n_trees: usize,
    pub top_n: usize,
    pub grid: HyperGrid,
    pub validation_fraction: f64,
    pub paths: PathOptions,
    /// Profession queries abstain for persons with fewer KB professions.
    pub min_professions: usize,
}

impl Default for PathRankingConfig {
    fn default() -> Self {
        PathRankingConfig {
            n_trees: 300,
            top_n: 10_000,
            grid: HyperGrid::default(),
            validation_fraction: 0.3,
            paths: PathOptions::default(),
            min_professions: 4,
        }
    }
}

/// Sorted feature vocabulary plus dense rows, one per pair.
pub fn path_dataset(graph: &KbGraph, pairs: &[(PersonId, TypeId)], opts: PathOptions) -> (Vec<PathType>, Vec<Vec<f64>>) {
    let vectors: Vec<PathFeatureVector> = pairs
        .par_iter()
        .map(|(p, t)| extract_paths(graph, &EntityId::from(p), &EntityId::from(t), opts))
        .collect();
    let features: Vec<PathType> = vectors
        .iter()
        .flat_map(|v| v.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rows = vectors.iter().map(|v| dense_row(&features, v)).collect();
    (features, rows)
}

fn dense_row(features: &[PathType], v: &PathFeatureVector) -> Vec<f64> {
    let mut row = vec![0.0; features.len()];
    for (path, &count) in v {
        if let Ok(i) = features.binary_search(path) {
            row[i] = count as f64;
        }
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRankingModel {
    pub relation: TargetRelation,
    pub type_relation: RelationId,
    pub paths: PathOptions,
    pub min_professions: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    /// Sorted; a row's column i counts paths of `features[i]`.
    pub features: Vec<PathType>,
    pub selection: ForestSelection,
}

pub fn train_path_ranking(
    graph: &KbGraph,
    kb: &[KbAssertion],
    relation: TargetRelation,
    type_relation: &RelationId,
    cfg: &PathRankingConfig,
    seed: u64,
) -> Result<PathRankingModel> {
    let pairs = make_training_pairs(graph, kb, type_relation, cfg.top_n, seed::derive(seed, "pairs"));
    debug_assert!(negatives_are_unobserved(&pairs, graph, kb, type_relation));
    let n_positive = pairs.iter().filter(|p| p.positive).count();
    let n_negative = pairs.len() - n_positive;
    if n_positive == 0 || n_negative == 0 {
        return Err(Error::invalid(format!(
            "path ranking for {relation} needs positive and negative pairs, got {n_positive} and {n_negative} \
             (are there `{type_relation}` edges in the graph?)"
        )));
    }
    let keys: Vec<(PersonId, TypeId)> = pairs.iter().map(|p| (p.head.clone(), p.tail.clone())).collect();
    let labels: Vec<bool> = pairs.iter().map(|p| p.positive).collect();
    let (features, rows) = path_dataset(graph, &keys, cfg.paths);
    log::info!("{relation}: {} pairs, {} path types", pairs.len(), features.len());
    let selection = train_forest(
        &rows,
        &labels,
        &cfg.grid,
        cfg.n_trees,
        cfg.validation_fraction,
        seed::derive(seed, "forest"),
    )?;
    Ok(PathRankingModel {
        relation,
        type_relation: type_relation.clone(),
        paths: cfg.paths,
        min_professions: cfg.min_professions,
        n_positive,
        n_negative,
        features,
        selection,
    })
}

impl PathRankingModel {
    pub fn feature_row(&self, graph: &KbGraph, person: &PersonId, type_id: &TypeId) -> Vec<f64> {
        let v = extract_paths(graph, &EntityId::from(person), &EntityId::from(type_id), self.paths);
        dense_row(&self.features, &v)
    }

    /// Forest probability that `person` has `type_id`. `kb_type_count` is
    /// the number of distinct types the task KB lists for the person.
    pub fn score(&self, graph: &KbGraph, person: &PersonId, type_id: &TypeId, kb_type_count: usize) -> RawScore {
        if self.relation == TargetRelation::Profession && kb_type_count < self.min_professions {
            return RawScore::Abstain;
        }
        RawScore::Probability(self.selection.forest.predict(&self.feature_row(graph, person, type_id)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::KgTriple;

    fn t(h: &str, r: &str, tl: &str) -> KgTriple {
        KgTriple {
            head: h.into(),
            relation: r.into(),
            tail: tl.into(),
        }
    }

    /// Persons reach their type through a field node; a third of them also
    /// carry the direct type edge.
    fn world() -> (KbGraph, Vec<KbAssertion>) {
        let mut triples = Vec::new();
        let mut kb = Vec::new();
        let types = ["Actor", "Farmer", "Singer", "Writer"];
        for ty in types {
            triples.push(t(&format!("Field_{ty}"), "fieldOf", ty));
        }
        for p in 0..60 {
            let ty = types[p % 4];
            let name = format!("p{p:02}");
            triples.push(t(&name, "memberOf", &format!("Field_{ty}")));
            if p % 3 == 0 {
                triples.push(t(&name, "profession", ty));
            }
            kb.push(KbAssertion {
                person: name.as_str().into(),
                relation: TargetRelation::Profession,
                type_id: ty.into(),
            });
        }
        (build_graph(&triples), kb)
    }

    fn small_cfg() -> PathRankingConfig {
        PathRankingConfig {
            n_trees: 25,
            min_professions: 1,
            ..PathRankingConfig::default()
        }
    }

    #[test]
    fn learns_the_field_pattern() {
        let (g, kb) = world();
        let m = train_path_ranking(&g, &kb, TargetRelation::Profession, &"profession".into(), &small_cfg(), 1).unwrap();
        assert_eq!(m.selection.forest.trees.len(), 25);
        let person: PersonId = "p01".into();
        let right = m.score(&g, &person, &"Farmer".into(), 1).value().unwrap();
        let wrong = m.score(&g, &person, &"Singer".into(), 1).value().unwrap();
        assert!(right > wrong, "{right} vs {wrong}");
    }

    #[test]
    fn profession_filter_abstains() {
        let (g, kb) = world();
        let cfg = PathRankingConfig {
            n_trees: 5,
            ..PathRankingConfig::default()
        };
        let m = train_path_ranking(&g, &kb, TargetRelation::Profession, &"profession".into(), &cfg, 1).unwrap();
        assert!(m.score(&g, &"p01".into(), &"Farmer".into(), 2).is_abstain());
        assert!(!m.score(&g, &"p01".into(), &"Farmer".into(), 4).is_abstain());
        let mut nat = m.clone();
        nat.relation = TargetRelation::Nationality;
        assert!(!nat.score(&g, &"p01".into(), &"Farmer".into(), 0).is_abstain());
    }

    #[test]
    fn unknown_entities_still_score() {
        let (g, kb) = world();
        let m = train_path_ranking(&g, &kb, TargetRelation::Profession, &"profession".into(), &small_cfg(), 1).unwrap();
        let p = m.score(&g, &"nobody".into(), &"Actor".into(), 9).value().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn no_type_edges_is_error() {
        let g = build_graph(&[t("a", "knows", "b")]);
        assert!(train_path_ranking(&g, &[], TargetRelation::Profession, &"profession".into(), &small_cfg(), 1).is_err());
    }
}
