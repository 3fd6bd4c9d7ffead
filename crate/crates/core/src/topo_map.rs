//! The agent's topological map: visited nodes, the frontier of observed but
//! unvisited nodes, their features, and the edges seen so far.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env_model::Point;
use crate::graph::{self, NodeId};
use crate::sos_features::SosFeature;
use crate::{Error, Result};

/// What the agent records about one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeObservation {
    pub position: Point,
    pub feature: SosFeature,
    /// Visible boxes per category.
    pub histogram: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopoMap {
    start: Option<NodeId>,
    visited: BTreeMap<NodeId, usize>,
    frontier: BTreeSet<NodeId>,
    chosen: BTreeSet<NodeId>,
    nodes: BTreeMap<NodeId, NodeObservation>,
    edges: BTreeMap<NodeId, BTreeMap<NodeId, f64>>,
}

impl TopoMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record an arrival at `current` at timestep `t` together with what is
    /// seen from there. The current node becomes visited, unseen neighbors
    /// join the frontier, and edges to every neighbor are recorded. Stored
    /// observations are overwritten by the latest ones.
    pub fn update(
        &mut self,
        current: NodeId,
        here: NodeObservation,
        neighbors: impl IntoIterator<Item = (NodeId, NodeObservation)>,
        t: usize,
    ) {
        if self.start.is_none() {
            self.start = Some(current);
        }
        let origin = here.position;
        self.frontier.remove(&current);
        self.visited.insert(current, t);
        self.nodes.insert(current, here);
        for (n, obs) in neighbors {
            if n == current {
                continue;
            }
            let w = origin.distance(obs.position);
            self.edges.entry(current).or_default().insert(n, w);
            self.edges.entry(n).or_default().insert(current, w);
            if !self.visited.contains_key(&n) {
                self.frontier.insert(n);
            }
            self.nodes.insert(n, obs);
        }
    }

    pub fn start(&self) -> Option<NodeId> {
        self.start
    }

    pub fn is_visited(&self, n: NodeId) -> bool {
        self.visited.contains_key(&n)
    }

    pub fn last_visit(&self, n: NodeId) -> Option<usize> {
        self.visited.get(&n).copied()
    }

    pub fn visited(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.visited.keys().copied()
    }

    pub fn frontier(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.frontier.iter().copied()
    }

    pub fn chosen(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.chosen.iter().copied()
    }

    pub fn is_chosen(&self, n: NodeId) -> bool {
        self.chosen.contains(&n)
    }

    pub fn mark_chosen(&mut self, n: NodeId) {
        self.chosen.insert(n);
    }

    pub fn knows(&self, n: NodeId) -> bool {
        self.nodes.contains_key(&n)
    }

    pub fn observation(&self, n: NodeId) -> Option<&NodeObservation> {
        self.nodes.get(&n)
    }

    pub fn feature(&self, n: NodeId) -> Option<&SosFeature> {
        self.nodes.get(&n).map(|o| &o.feature)
    }

    pub fn neighbors(&self, n: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.edges.get(&n).into_iter().flat_map(|m| m.iter().map(|(&k, &w)| (k, w)))
    }

    /// Frontier nodes never selected as a local goal, ascending.
    pub fn frontier_candidates(&self) -> Vec<NodeId> {
        self.frontier.difference(&self.chosen).copied().collect()
    }

    /// Shortest path over observed edges, ties to the lexicographically
    /// smallest node sequence.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<(Vec<NodeId>, f64)> {
        for n in [from, to] {
            if !self.knows(n) {
                return Err(Error::UnknownNode(n));
            }
        }
        graph::shortest_path(from, to, |n| self.neighbors(n).collect::<Vec<_>>())
    }

    /// Check disjointness, frontier adjacency and feature coverage.
    pub fn check_invariants(&self) -> core::result::Result<(), &'static str> {
        if self.frontier.iter().any(|n| self.visited.contains_key(n)) {
            return Err("visited and frontier overlap");
        }
        for f in &self.frontier {
            if !self.neighbors(*f).any(|(n, _)| self.visited.contains_key(&n)) {
                return Err("frontier node without a visited neighbor");
            }
        }
        if self
            .visited
            .keys()
            .chain(self.frontier.iter())
            .any(|n| !self.nodes.contains_key(n))
        {
            return Err("missing node feature");
        }
        Ok(())
    }

    pub fn snapshot(&self) -> MapSnapshot {
        let nodes = self
            .nodes
            .iter()
            .map(|(&id, obs)| SnapshotNode {
                id,
                position: obs.position,
                status: if self.visited.contains_key(&id) {
                    NodeStatus::Visited
                } else {
                    NodeStatus::Frontier
                },
                chosen: self.chosen.contains(&id),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .flat_map(|(&a, m)| m.keys().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect();
        MapSnapshot { nodes, edges }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Visited,
    Frontier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotNode {
    pub id: NodeId,
    pub position: Point,
    pub status: NodeStatus,
    pub chosen: bool,
}

/// Map state for trajectory visualization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub nodes: Vec<SnapshotNode>,
    pub edges: Vec<(NodeId, NodeId)>,
}
