//! Directed multigraph with forward and inverse adjacency.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::KgTriple;
use crate::ids::{EntityId, RelationId};

/// Interned graph. Entity and relation indices follow sorted id order, and
/// every adjacency list is sorted by `(relation, neighbour)`.
#[derive(Debug, Clone, Default)]
pub struct KbGraph {
    entities: Vec<EntityId>,
    entity_index: HashMap<EntityId, u32>,
    relations: Vec<RelationId>,
    relation_index: HashMap<RelationId, u32>,
    forward: Vec<Vec<(u32, u32)>>,
    inverse: Vec<Vec<(u32, u32)>>,
    n_edges: usize,
}

pub fn build_graph(triples: &[KgTriple]) -> KbGraph {
    let entities: Vec<EntityId> = triples
        .iter()
        .flat_map(|t| [&t.head, &t.tail])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let relations: Vec<RelationId> = triples
        .iter()
        .map(|t| &t.relation)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let entity_index: HashMap<EntityId, u32> = entities.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
    let relation_index: HashMap<RelationId, u32> = relations.iter().enumerate().map(|(i, r)| (r.clone(), i as u32)).collect();

    let edges: BTreeSet<(u32, u32, u32)> = triples
        .iter()
        .map(|t| (entity_index[&t.head], relation_index[&t.relation], entity_index[&t.tail]))
        .collect();
    let mut forward = vec![Vec::new(); entities.len()];
    let mut inverse = vec![Vec::new(); entities.len()];
    for &(h, r, t) in &edges {
        forward[h as usize].push((r, t));
        inverse[t as usize].push((r, h));
    }
    for list in inverse.iter_mut() {
        list.sort_unstable();
    }
    KbGraph {
        entities,
        entity_index,
        relations,
        relation_index,
        forward,
        inverse,
        n_edges: edges.len(),
    }
}

/// Drops triples whose relation starts with any blocked prefix.
pub fn filter_relations(triples: Vec<KgTriple>, blocked_prefixes: &[String]) -> Vec<KgTriple> {
    if blocked_prefixes.is_empty() {
        return triples;
    }
    triples
        .into_iter()
        .filter(|t| !blocked_prefixes.iter().any(|p| t.relation.as_str().starts_with(p.as_str())))
        .collect()
}

impl KbGraph {
    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn entity(&self, id: &EntityId) -> Option<u32> {
        self.entity_index.get(id).copied()
    }

    pub fn relation(&self, id: &RelationId) -> Option<u32> {
        self.relation_index.get(id).copied()
    }

    pub fn entity_id(&self, index: u32) -> &EntityId {
        &self.entities[index as usize]
    }

    pub fn relation_id(&self, index: u32) -> &RelationId {
        &self.relations[index as usize]
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    /// Outgoing `(relation, tail)` pairs.
    pub fn forward(&self, entity: u32) -> &[(u32, u32)] {
        &self.forward[entity as usize]
    }

    /// Incoming `(relation, head)` pairs.
    pub fn inverse(&self, entity: u32) -> &[(u32, u32)] {
        &self.inverse[entity as usize]
    }

    /// Number of triples the entity takes part in, as head or tail.
    pub fn degree(&self, entity: u32) -> usize {
        self.forward[entity as usize].len() + self.inverse[entity as usize].len()
    }

    pub fn has_edge(&self, head: &EntityId, relation: &RelationId, tail: &EntityId) -> bool {
        match (self.entity(head), self.relation(relation), self.entity(tail)) {
            (Some(h), Some(r), Some(t)) => self.forward[h as usize].binary_search(&(r, t)).is_ok(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn triple(h: &str, r: &str, t: &str) -> KgTriple {
        KgTriple {
            head: h.into(),
            relation: r.into(),
            tail: t.into(),
        }
    }

    #[test]
    fn single_edge_indexes() {
        let g = build_graph(&[triple("a", "r", "b")]);
        let (a, b, r) = (
            g.entity(&"a".into()).unwrap(),
            g.entity(&"b".into()).unwrap(),
            g.relation(&"r".into()).unwrap(),
        );
        assert_eq!(g.forward(a), &[(r, b)]);
        assert_eq!(g.inverse(b), &[(r, a)]);
        assert!(g.forward(b).is_empty());
        assert!(g.has_edge(&"a".into(), &"r".into(), &"b".into()));
        assert!(!g.has_edge(&"b".into(), &"r".into(), &"a".into()));
    }

    #[test]
    fn duplicates_collapse() {
        let g = build_graph(&[triple("a", "r", "b"), triple("a", "r", "b")]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(g.entity(&"a".into()).unwrap()), 1);
    }

    #[test]
    fn blocklist_filters_by_prefix() {
        let kept = filter_relations(
            vec![
                triple("a", "/base/x", "b"),
                triple("a", "/people/y", "b"),
                triple("a", "/common/z", "b"),
            ],
            &["/base/".to_string(), "/common/".to_string()],
        );
        assert_eq!(kept, vec![triple("a", "/people/y", "b")]);
    }

    proptest! {
        #[test]
        fn inverse_is_transpose(edges in prop::collection::vec((0u8..8, 0u8..3, 0u8..8), 0..40)) {
            let triples: Vec<KgTriple> = edges.iter()
                .map(|(h, r, t)| triple(&format!("e{h}"), &format!("r{r}"), &format!("e{t}")))
                .collect();
            let g = build_graph(&triples);
            let naive: BTreeSet<(String, String, String)> = triples.iter()
                .map(|t| (t.head.to_string(), t.relation.to_string(), t.tail.to_string()))
                .collect();
            let mut fwd = BTreeSet::new();
            let mut inv = BTreeSet::new();
            for e in 0..g.entity_count() as u32 {
                for &(r, t) in g.forward(e) {
                    prop_assert!(fwd.insert((g.entity_id(e).to_string(), g.relation_id(r).to_string(), g.entity_id(t).to_string())));
                }
                for &(r, h) in g.inverse(e) {
                    prop_assert!(inv.insert((g.entity_id(h).to_string(), g.relation_id(r).to_string(), g.entity_id(e).to_string())));
                }
            }
            prop_assert_eq!(&fwd, &naive);
            prop_assert_eq!(&inv, &naive);
        }
    }
}
