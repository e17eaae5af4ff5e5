//! Labelled (person, type) pairs for the forest: observed type edges as
//! positives, random unobserved types as negatives.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::graph::KbGraph;
use crate::corpus::KbAssertion;
use crate::ids::{EntityId, PersonId, RelationId, TypeId};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledPair {
    pub head: PersonId,
    pub tail: TypeId,
    pub positive: bool,
}

/// Types linked to each head by `type_relation` edges in the graph.
pub fn observed_types(graph: &KbGraph, type_relation: &RelationId) -> BTreeMap<u32, BTreeSet<TypeId>> {
    let mut out: BTreeMap<u32, BTreeSet<TypeId>> = BTreeMap::new();
    let Some(rel) = graph.relation(type_relation) else {
        return out;
    };
    for e in 0..graph.entity_count() as u32 {
        for &(r, t) in graph.forward(e) {
            if r == rel {
                out.entry(e).or_default().insert(TypeId::new(graph.entity_id(t).as_str()));
            }
        }
    }
    out
}

/// Persons with at least one observed type edge, by descending degree then
/// ascending id, truncated to `top_n`.
pub fn rank_persons(graph: &KbGraph, candidates: impl IntoIterator<Item = u32>, top_n: usize) -> Vec<u32> {
    let mut ranked: Vec<u32> = candidates.into_iter().collect();
    ranked.sort_by(|&a, &b| {
        graph
            .degree(b)
            .cmp(&graph.degree(a))
            .then_with(|| graph.entity_id(a).cmp(graph.entity_id(b)))
    });
    ranked.truncate(top_n);
    ranked
}

pub fn make_training_pairs(graph: &KbGraph, kb: &[KbAssertion], type_relation: &RelationId, top_n: usize, seed: u64) -> Vec<LabeledPair> {
    let observed = observed_types(graph, type_relation);
    let mut kb_types: BTreeMap<&str, BTreeSet<&TypeId>> = BTreeMap::new();
    for a in kb {
        kb_types.entry(a.person.as_str()).or_default().insert(&a.type_id);
    }
    let universe: BTreeSet<TypeId> = kb
        .iter()
        .map(|a| a.type_id.clone())
        .chain(observed.values().flatten().cloned())
        .collect();

    let mut pairs = Vec::new();
    for e in rank_persons(graph, observed.keys().copied(), top_n) {
        let person = PersonId::new(graph.entity_id(e).as_str());
        let seen = &observed[&e];
        let in_kb = kb_types.get(person.as_str());
        let alternatives: Vec<&TypeId> = universe
            .iter()
            .filter(|t| !seen.contains(*t) && !in_kb.is_some_and(|k| k.contains(t)))
            .collect();
        let mut rng = seed::rng_for(seed, person.as_str());
        for t in seen {
            pairs.push(LabeledPair {
                head: person.clone(),
                tail: t.clone(),
                positive: true,
            });
            match alternatives.choose(&mut rng) {
                Some(&neg) => pairs.push(LabeledPair {
                    head: person.clone(),
                    tail: neg.clone(),
                    positive: false,
                }),
                None => log::info!("no unobserved type left for {person}; skipping its negative"),
            }
        }
    }
    pairs
}

/// True when no negative pair is a graph edge or a KB assertion.
pub fn negatives_are_unobserved(pairs: &[LabeledPair], graph: &KbGraph, kb: &[KbAssertion], type_relation: &RelationId) -> bool {
    let asserted: BTreeSet<(&str, &str)> = kb.iter().map(|a| (a.person.as_str(), a.type_id.as_str())).collect();
    pairs.iter().filter(|p| !p.positive).all(|p| {
        !asserted.contains(&(p.head.as_str(), p.tail.as_str()))
            && !graph.has_edge(&EntityId::from(&p.head), type_relation, &EntityId::from(&p.tail))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::KgTriple;
    use crate::ids::TargetRelation;
    use crate::path_ranking::graph::build_graph;

    fn t(h: &str, r: &str, tl: &str) -> KgTriple {
        KgTriple {
            head: h.into(),
            relation: r.into(),
            tail: tl.into(),
        }
    }

    fn kb(p: &str, ty: &str) -> KbAssertion {
        KbAssertion {
            person: p.into(),
            relation: TargetRelation::Profession,
            type_id: ty.into(),
        }
    }

    #[test]
    fn negative_drawn_from_unobserved_types() {
        let g = build_graph(&[t("p", "profession", "Actor")]);
        let kb = [kb("q", "Farmer"), kb("q", "Singer")];
        let mut drawn = BTreeSet::new();
        for s in 0..40 {
            let pairs = make_training_pairs(&g, &kb, &"profession".into(), 10, s);
            assert_eq!(pairs.len(), 2);
            assert!(pairs[0].positive && pairs[0].tail.as_str() == "Actor");
            assert!(!pairs[1].positive);
            drawn.insert(pairs[1].tail.to_string());
            assert_eq!(pairs, make_training_pairs(&g, &kb, &"profession".into(), 10, s));
        }
        assert_eq!(drawn, ["Farmer", "Singer"].map(String::from).into());
    }

    #[test]
    fn ranking_by_degree_then_id() {
        let mut triples = Vec::new();
        for (p, n) in [("a", 5), ("c", 9), ("b", 9)] {
            triples.push(t(p, "profession", "Actor"));
            for i in 1..n {
                triples.push(t(p, "knows", &format!("{p}{i}")));
            }
        }
        let g = build_graph(&triples);
        let observed = observed_types(&g, &"profession".into());
        let ranked: Vec<&str> = rank_persons(&g, observed.keys().copied(), 10)
            .into_iter()
            .map(|e| g.entity_id(e).as_str())
            .collect();
        assert_eq!(ranked, ["b", "c", "a"]);
        let top: Vec<&str> = rank_persons(&g, observed.keys().copied(), 1)
            .into_iter()
            .map(|e| g.entity_id(e).as_str())
            .collect();
        assert_eq!(top, ["b"]);
    }

    #[test]
    fn skips_negative_when_everything_observed() {
        let g = build_graph(&[t("p", "profession", "Actor")]);
        let pairs = make_training_pairs(&g, &[kb("p", "Farmer")], &"profession".into(), 10, 0);
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn negatives_never_observed() {
        let mut triples = Vec::new();
        let types = ["A", "B", "C", "D", "E"];
        for p in 0..30 {
            for (k, ty) in types.iter().enumerate() {
                if (p + k) % 3 == 0 {
                    triples.push(t(&format!("p{p}"), "profession", ty));
                }
            }
        }
        let g = build_graph(&triples);
        let kbs: Vec<KbAssertion> = (0..30).map(|p| kb(&format!("p{p}"), types[p % 5])).collect();
        let pairs = make_training_pairs(&g, &kbs, &"profession".into(), 1000, 3);
        assert!(pairs.iter().any(|p| !p.positive));
        assert!(negatives_are_unobserved(&pairs, &g, &kbs, &"profession".into()));
    }
}
