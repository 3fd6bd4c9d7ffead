//! Node identifiers and weighted shortest paths.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Relative slack used when deciding whether two path lengths are equal.
pub const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest distances over the graph described by `neighbors`.
///
/// Only nodes reachable from `source` appear in the returned map.
pub fn dijkstra<F, I>(source: NodeId, mut neighbors: F) -> BTreeMap<NodeId, f64>
where
    F: FnMut(NodeId) -> I,
    I: IntoIterator<Item = (NodeId, f64)>,
{
    let mut dist: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, 0.0);
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[&node] {
            continue;
        }
        for (next, w) in neighbors(node) {
            let nd = d + w;
            let better = match dist.get(&next) {
                Some(&old) => nd < old,
                None => true,
            };
            if better {
                dist.insert(next, nd);
                heap.push(Entry {
                    dist: nd,
                    node: next,
                });
            }
        }
    }
    dist
}

/// Shortest path from `from` to `to` on an undirected graph.
///
/// Among paths whose lengths agree within [`LENGTH_TOLERANCE`] the one with
/// the lexicographically smallest node sequence is returned. The returned
/// length is the sum of edge weights along that path.
pub fn shortest_path<F, I>(from: NodeId, to: NodeId, mut neighbors: F) -> Result<(Vec<NodeId>, f64)>
where
    F: FnMut(NodeId) -> I,
    I: IntoIterator<Item = (NodeId, f64)>,
{
    if from == to {
        return Ok((alloc::vec![from], 0.0));
    }
    let to_target = dijkstra(to, &mut neighbors);
    let total = match to_target.get(&from) {
        Some(&d) => d,
        None => return Err(Error::NoPath { from, to }),
    };
    let tol = LENGTH_TOLERANCE * total.max(1.0);

    let mut path = alloc::vec![from];
    let mut spent = 0.0;
    let mut current = from;
    while current != to {
        let remaining = to_target[&current];
        let mut best: Option<(NodeId, f64)> = None;
        for (next, w) in neighbors(current) {
            let Some(&rest) = to_target.get(&next) else {
                continue;
            };
            if rest >= remaining {
                continue;
            }
            if (spent + w + rest - total).abs() <= tol && best.is_none_or(|(b, _)| next < b) {
                best = Some((next, w));
            }
        }
        let (next, w) = best.ok_or(Error::NoPath { from, to })?;
        spent += w;
        path.push(next);
        current = next;
    }
    Ok((path, spent))
}
