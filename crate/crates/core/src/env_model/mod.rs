//! Simulated environments: navigation graphs, placed objects, panoramic
//! object masks, and procedurally generated episodes.

mod episode;
mod generate;
mod render;

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{self, NodeId};
use crate::{Error, Result};

pub use episode::{generate_episode, generate_episode_with, Episode, EpisodeParams, Instruction};
pub use generate::{generate_env, GeneratorParams};
pub use render::{
    dominant_category, project_object, render_boxes, render_pano, render_pano_rotated, BinaryMask,
    PanoObservation, PixelBox, CAMERA_HEIGHT_M,
};

/// Tolerance for edge weights against Euclidean distance.
pub const EDGE_WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanoDims {
    pub width: usize,
    pub height: usize,
}

impl Default for PanoDims {
    fn default() -> Self {
        PanoDims {
            width: 256,
            height: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedObject {
    pub category: usize,
    pub position: Point,
    pub width_m: f64,
    pub height_m: f64,
    pub visibility_radius: f64,
}

/// Undirected navigation graph with object placements.
///
/// Edge weights are always the Euclidean distance between endpoints; the
/// serialized form stores only the endpoint pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvGraphRepr", into = "EnvGraphRepr")]
pub struct EnvGraph {
    id: u64,
    positions: Vec<Point>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
    rooms: Vec<u32>,
    objects: Vec<PlacedObject>,
    category_count: usize,
    pano: PanoDims,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnvGraphRepr {
    id: u64,
    category_count: usize,
    pano: PanoDims,
    positions: Vec<Point>,
    #[serde(default)]
    rooms: Vec<u32>,
    edges: Vec<(NodeId, NodeId)>,
    objects: Vec<PlacedObject>,
}

impl TryFrom<EnvGraphRepr> for EnvGraph {
    type Error = Error;

    fn try_from(r: EnvGraphRepr) -> Result<Self> {
        EnvGraph::from_parts(r.id, r.positions, &r.edges, r.rooms, r.objects, r.category_count, r.pano)
    }
}

impl From<EnvGraph> for EnvGraphRepr {
    fn from(env: EnvGraph) -> Self {
        let edges = env.edges().collect();
        EnvGraphRepr {
            id: env.id,
            category_count: env.category_count,
            pano: env.pano,
            positions: env.positions,
            rooms: env.rooms,
            edges,
            objects: env.objects,
        }
    }
}

impl EnvGraph {
    /// Build and validate an environment.
    ///
    /// `rooms` may be empty (no room annotation) or give one room index per
    /// node. Connectivity is not required here; see [`EnvGraph::is_connected`].
    pub fn from_parts(
        id: u64,
        positions: Vec<Point>,
        edges: &[(NodeId, NodeId)],
        rooms: Vec<u32>,
        objects: Vec<PlacedObject>,
        category_count: usize,
        pano: PanoDims,
    ) -> Result<Self> {
        let n = positions.len();
        if category_count == 0 {
            return Err(Error::InvalidEnv("category count must be positive".into()));
        }
        if pano.width == 0 || pano.height == 0 {
            return Err(Error::InvalidEnv("panorama dimensions must be positive".into()));
        }
        if !rooms.is_empty() && rooms.len() != n {
            return Err(Error::InvalidEnv(format!(
                "{} room labels for {} nodes",
                rooms.len(),
                n
            )));
        }
        let mut adjacency: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a.index() >= n || b.index() >= n {
                return Err(Error::InvalidEnv(format!("edge ({a}, {b}) references a missing node")));
            }
            if a == b {
                return Err(Error::InvalidEnv(format!("self loop at {a}")));
            }
            if adjacency[a.index()].iter().any(|&(x, _)| x == b) {
                return Err(Error::InvalidEnv(format!("duplicate edge ({a}, {b})")));
            }
            let w = positions[a.index()].distance(positions[b.index()]);
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidEnv(format!("edge ({a}, {b}) has non-positive length")));
            }
            adjacency[a.index()].push((b, w));
            adjacency[b.index()].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(id, _)| id);
        }
        for (i, obj) in objects.iter().enumerate() {
            if obj.category >= category_count {
                return Err(Error::InvalidEnv(format!(
                    "object {i} has category {} outside [0, {category_count})",
                    obj.category
                )));
            }
            if !(obj.width_m > 0.0 && obj.height_m > 0.0 && obj.visibility_radius > 0.0) {
                return Err(Error::InvalidEnv(format!("object {i} has non-positive extent")));
            }
        }
        Ok(EnvGraph {
            id,
            positions,
            adjacency,
            rooms,
            objects,
            category_count,
            pano,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.positions.len()).map(NodeId::from)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.positions.len()
    }

    pub fn position(&self, node: NodeId) -> Point {
        self.positions[node.index()]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Neighbors of `node` with edge weights, sorted by id.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[node.index()]
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency
            .get(a.index())?
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, w)| w)
    }

    /// Undirected edges with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            let a = NodeId::from(a);
            list.iter().filter(move |&&(b, _)| a < b).map(move |&(b, _)| (a, b))
        })
    }

    pub fn room_of(&self, node: NodeId) -> Option<u32> {
        self.rooms.get(node.index()).copied()
    }

    pub fn objects(&self) -> &[PlacedObject] {
        &self.objects
    }

    pub fn category_count(&self) -> usize {
        self.category_count
    }

    pub fn pano_dims(&self) -> PanoDims {
        self.pano
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    count += 1;
                    queue.push_back(v.index());
                }
            }
        }
        count == n
    }

    fn check(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    /// Lexicographically tie-broken shortest path between two nodes.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<(Vec<NodeId>, f64)> {
        self.check(from)?;
        self.check(to)?;
        graph::shortest_path(from, to, |n| self.neighbors(n).iter().copied())
    }
}

/// Shortest weighted path length between `a` and `b`.
pub fn geodesic_distance(env: &EnvGraph, a: NodeId, b: NodeId) -> Result<f64> {
    env.check(a)?;
    env.check(b)?;
    if a == b {
        return Ok(0.0);
    }
    let dist = graph::dijkstra(a, |n| env.neighbors(n).iter().copied());
    dist.get(&b).copied().ok_or(Error::NoPath { from: a, to: b })
}

/// All-pairs geodesic distances, `f64::INFINITY` for disconnected pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoTable {
    n: usize,
    dist: Vec<f64>,
}

impl GeoTable {
    pub fn new(env: &EnvGraph) -> Self {
        let n = env.node_count();
        let mut dist = vec![f64::INFINITY; n * n];
        for a in env.nodes() {
            for (b, d) in graph::dijkstra(a, |x| env.neighbors(x).iter().copied()) {
                dist[a.index() * n + b.index()] = d;
            }
        }
        GeoTable { n, dist }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> Result<f64> {
        if a.index() >= self.n {
            return Err(Error::UnknownNode(a));
        }
        if b.index() >= self.n {
            return Err(Error::UnknownNode(b));
        }
        let d = self.dist[a.index() * self.n + b.index()];
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::NoPath { from: a, to: b })
        }
    }
}
