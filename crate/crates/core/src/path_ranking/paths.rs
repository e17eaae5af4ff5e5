//! Path-type features: counts of simple ground paths between two entities,
//! grouped by their relation/direction sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::KbGraph;
use crate::ids::{EntityId, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "inv")]
    Inverse,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub relation: RelationId,
    pub direction: Direction,
}

/// A sequence of 1..=max_len steps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathType(pub Vec<Step>);

impl PathType {
    pub fn new(steps: &[(&str, Direction)]) -> Self {
        PathType(
            steps
                .iter()
                .map(|&(r, d)| Step {
                    relation: RelationId::new(r),
                    direction: d,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PathType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" / ")?;
            }
            match s.direction {
                Direction::Forward => write!(f, "{}", s.relation)?,
                Direction::Inverse => write!(f, "{}^-1", s.relation)?,
            }
        }
        Ok(())
    }
}

pub type PathFeatureVector = BTreeMap<PathType, u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathOptions {
    pub max_len: usize,
    /// Allow traversing edges against their direction.
    pub inverse_edges: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            max_len: 3,
            inverse_edges: true,
        }
    }
}

struct Search<'g> {
    graph: &'g KbGraph,
    tail: u32,
    opts: PathOptions,
    visited: Vec<u32>,
    steps: Vec<(u32, bool)>,
    counts: HashMap<Vec<(u32, bool)>, u32>,
}

impl Search<'_> {
    fn dfs(&mut self, at: u32) {
        if self.steps.len() == self.opts.max_len {
            return;
        }
        let graph = self.graph;
        let use_inverse = self.opts.inverse_edges;
        let fwd = graph.forward(at).iter().map(|&(r, n)| (r, n, false));
        let inv = graph.inverse(at).iter().filter(|_| use_inverse).map(|&(r, n)| (r, n, true));
        for (r, next, inverse) in fwd.chain(inv) {
            if next == self.tail {
                self.steps.push((r, inverse));
                *self.counts.entry(self.steps.clone()).or_insert(0) += 1;
                self.steps.pop();
            } else if !self.visited.contains(&next) {
                self.visited.push(next);
                self.steps.push((r, inverse));
                self.dfs(next);
                self.steps.pop();
                self.visited.pop();
            }
        }
    }
}

/// Counts every simple path of length <= `max_len` from `head` to `tail`
/// (no entity repeated; head and tail only at the ends). Unknown entities,
/// or `head == tail`, give an empty vector.
pub fn extract_paths(graph: &KbGraph, head: &EntityId, tail: &EntityId, opts: PathOptions) -> PathFeatureVector {
    let (Some(h), Some(t)) = (graph.entity(head), graph.entity(tail)) else {
        return PathFeatureVector::new();
    };
    if h == t {
        return PathFeatureVector::new();
    }
    let mut search = Search {
        graph,
        tail: t,
        opts,
        visited: vec![h],
        steps: Vec::with_capacity(opts.max_len),
        counts: HashMap::new(),
    };
    search.dfs(h);
    search
        .counts
        .into_iter()
        .map(|(steps, n)| {
            let path = PathType(
                steps
                    .into_iter()
                    .map(|(r, inv)| Step {
                        relation: graph.relation_id(r).clone(),
                        direction: if inv { Direction::Inverse } else { Direction::Forward },
                    })
                    .collect(),
            );
            (path, n)
        })
        .collect()
}
