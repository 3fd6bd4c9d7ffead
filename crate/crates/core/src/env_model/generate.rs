//! Procedural room-and-corridor environments.
//!
//! Rooms sit on a jittered grid. Each room holds a cluster of nodes wired
//! by a local spanning tree plus short extra links, and adjacent rooms are
//! joined through their closest node pair. Every room gets a dominant object
//! category of its own (categories repeat only when rooms outnumber them),
//! a few objects of that category, and occasionally a small clutter object.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{EnvGraph, PanoDims, PlacedObject, Point};
use crate::graph::NodeId;
use crate::rng::{self, scope, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub node_count: usize,
    pub room_count: usize,
    pub category_count: usize,
    pub pano: PanoDims,
    /// Distance between neighbouring room centres.
    pub room_spacing_m: f64,
    /// Radius of a room holding five nodes; larger rooms scale with sqrt(n/5).
    pub room_radius_m: f64,
    pub objects_per_room: usize,
    pub clutter_probability: f64,
    /// Probability of keeping each non-tree room adjacency as an extra corridor.
    pub extra_corridor_probability: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            node_count: 40,
            room_count: 8,
            category_count: 12,
            pano: PanoDims::default(),
            room_spacing_m: 8.0,
            room_radius_m: 1.8,
            objects_per_room: 3,
            clutter_probability: 0.3,
            extra_corridor_probability: 0.3,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        if self.node_count < 4 {
            return fail("node count must be at least 4");
        }
        if self.category_count < 3 {
            return fail("category count must be at least 3");
        }
        if self.room_count < 2 {
            return fail("room count must be at least 2");
        }
        if self.room_count > self.node_count {
            return fail("room count cannot exceed node count");
        }
        if self.pano.width < 2 || self.pano.height < 2 {
            return fail("panorama must be at least 2x2");
        }
        if !(self.room_spacing_m > 0.0 && self.room_radius_m > 0.0) {
            return fail("room geometry must be positive");
        }
        if self.objects_per_room == 0 {
            return fail("rooms need at least one object");
        }
        for p in [self.clutter_probability, self.extra_corridor_probability] {
            if !(0.0..=1.0).contains(&p) {
                return fail("probabilities must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

const MIN_NODE_SEPARATION_M: f64 = 0.8;

struct Room {
    center: Point,
    radius: f64,
    nodes: Vec<usize>,
    cell: (i64, i64),
}

fn sample_in_disc(rng: &mut Rng, center: Point, radius: f64) -> Point {
    let r = radius * libm::sqrt(rng.gen::<f64>());
    let a = rng.gen::<f64>() * core::f64::consts::TAU;
    Point::new(center.x + r * libm::cos(a), center.y + r * libm::sin(a))
}

/// Prim's minimum spanning tree over `points`, ties to the smallest index pair.
fn spanning_tree(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, usize::MAX); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return edges;
    }
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (points[0].distance(points[j]), 0);
    }
    for _ in 1..n {
        let mut pick = None;
        for j in 0..n {
            if !in_tree[j] && pick.is_none_or(|p: usize| best[j].0 < best[p].0) {
                pick = Some(j);
            }
        }
        let j = pick.expect("tree still growing");
        in_tree[j] = true;
        edges.push((best[j].1, j));
        for k in 0..n {
            if !in_tree[k] {
                let d = points[j].distance(points[k]);
                if d < best[k].0 {
                    best[k] = (d, j);
                }
            }
        }
    }
    edges
}

/// Generate a connected environment. Deterministic for a fixed seed.
pub fn generate_env(seed: u64, params: &GeneratorParams) -> Result<EnvGraph> {
    params.validate()?;
    let mut rng = rng::rng_from(seed, &[scope::GENERATE]);
    let room_count = params.room_count;

    // node counts per room: one each, remainder spread at random
    let mut sizes = vec![1usize; room_count];
    for _ in room_count..params.node_count {
        sizes[rng.gen_range(0..room_count)] += 1;
    }
    let radii: Vec<f64> = sizes
        .iter()
        .map(|&s| params.room_radius_m * libm::sqrt((s as f64 / 5.0).max(1.0)))
        .collect();
    let max_radius = radii.iter().copied().fold(0.0, f64::max);
    let spacing = params.room_spacing_m.max(2.0 * max_radius + 4.0);

    // room cells on a grid
    let side = libm::ceil(libm::sqrt(room_count as f64)) as i64 + 1;
    let mut cells: Vec<(i64, i64)> = (0..side).flat_map(|r| (0..side).map(move |c| (r, c))).collect();
    cells.shuffle(&mut rng);
    // keep the chosen cells grid-contiguous: grow from the first cell
    let mut chosen = vec![cells[0]];
    while chosen.len() < room_count {
        let frontier: Vec<(i64, i64)> = cells
            .iter()
            .copied()
            .filter(|c| !chosen.contains(c))
            .filter(|c| chosen.iter().any(|d| (c.0 - d.0).abs() + (c.1 - d.1).abs() == 1))
            .collect();
        chosen.push(frontier[rng.gen_range(0..frontier.len())]);
    }

    let mut positions: Vec<Point> = Vec::with_capacity(params.node_count);
    let mut room_labels: Vec<u32> = Vec::with_capacity(params.node_count);
    let mut rooms: Vec<Room> = Vec::with_capacity(room_count);
    for (ri, &cell) in chosen.iter().enumerate() {
        let jitter = 0.1 * spacing;
        let center = Point::new(
            cell.1 as f64 * spacing + rng.gen_range(-jitter..jitter),
            cell.0 as f64 * spacing + rng.gen_range(-jitter..jitter),
        );
        let radius = radii[ri];
        let mut nodes = Vec::with_capacity(sizes[ri]);
        for _ in 0..sizes[ri] {
            let mut p = sample_in_disc(&mut rng, center, radius);
            let mut tries = 0;
            while nodes.iter().any(|&n: &usize| positions[n].distance(p) < MIN_NODE_SEPARATION_M) {
                tries += 1;
                if tries > 200 {
                    return Err(Error::Generation(format!("room {ri} too crowded for {} nodes", sizes[ri])));
                }
                p = sample_in_disc(&mut rng, center, radius);
            }
            nodes.push(positions.len());
            positions.push(p);
            room_labels.push(ri as u32);
        }
        rooms.push(Room {
            center,
            radius,
            nodes,
            cell,
        });
    }

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let add_edge = |a: usize, b: usize, edges: &mut Vec<(NodeId, NodeId)>| {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let e = (NodeId::from(a), NodeId::from(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    };

    for room in &rooms {
        let pts: Vec<Point> = room.nodes.iter().map(|&n| positions[n]).collect();
        for (i, j) in spanning_tree(&pts) {
            add_edge(room.nodes[i], room.nodes[j], &mut edges);
        }
        let link = 1.4 * room.radius;
        for (i, &a) in room.nodes.iter().enumerate() {
            for &b in &room.nodes[i + 1..] {
                if positions[a].distance(positions[b]) <= link && rng.gen_bool(0.5) {
                    add_edge(a, b, &mut edges);
                }
            }
        }
    }

    // corridors: spanning tree over room centres, plus some extra grid neighbours
    let centers: Vec<Point> = rooms.iter().map(|r| r.center).collect();
    let mut corridors = spanning_tree(&centers);
    for i in 0..room_count {
        for j in i + 1..room_count {
            let (a, b) = (rooms[i].cell, rooms[j].cell);
            let grid_adjacent = (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1;
            let present = corridors.iter().any(|&(x, y)| (x, y) == (i, j) || (x, y) == (j, i));
            if grid_adjacent && !present && rng.gen_bool(params.extra_corridor_probability) {
                corridors.push((i, j));
            }
        }
    }
    for (i, j) in corridors {
        let mut best = (f64::INFINITY, 0, 0);
        for &a in &rooms[i].nodes {
            for &b in &rooms[j].nodes {
                let d = positions[a].distance(positions[b]);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        add_edge(best.1, best.2, &mut edges);
    }
    edges.sort();

    // objects
    let k = params.category_count;
    let mut base_width = Vec::with_capacity(k);
    let mut base_height = Vec::with_capacity(k);
    for _ in 0..k {
        base_width.push(rng.gen_range(0.4..2.0));
        base_height.push(rng.gen_range(0.5..2.0));
    }
    let mut palette: Vec<usize> = (0..k).collect();
    palette.shuffle(&mut rng);
    let mut objects = Vec::new();
    for (ri, room) in rooms.iter().enumerate() {
        let dominant = palette[ri % k];
        let visibility = (2.2 * room.radius).max(4.0);
        for _ in 0..params.objects_per_room {
            objects.push(PlacedObject {
                category: dominant,
                position: sample_in_disc(&mut rng, room.center, room.radius + 0.5),
                width_m: base_width[dominant] * rng.gen_range(0.8..1.2),
                height_m: base_height[dominant] * rng.gen_range(0.8..1.2),
                visibility_radius: visibility,
            });
        }
        if rng.gen_bool(params.clutter_probability) {
            let mut c = rng.gen_range(0..k);
            if c == dominant {
                c = (c + 1) % k;
            }
            objects.push(PlacedObject {
                category: c,
                position: sample_in_disc(&mut rng, room.center, room.radius),
                width_m: rng.gen_range(0.3..0.6),
                height_m: base_height[c] * rng.gen_range(0.5..0.8),
                visibility_radius: 0.6 * visibility,
            });
        }
    }

    let env = EnvGraph::from_parts(seed, positions, &edges, room_labels, objects, k, params.pano)?;
    debug_assert!(env.is_connected());
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::EDGE_WEIGHT_TOLERANCE;

    #[test]
    fn small_env_is_connected_and_symmetric() {
        let params = GeneratorParams {
            node_count: 6,
            room_count: 2,
            category_count: 4,
            ..GeneratorParams::default()
        };
        let env = generate_env(0, &params).unwrap();
        assert_eq!(env.node_count(), 6);
        assert!(env.is_connected());
        for a in env.nodes() {
            for &(b, w) in env.neighbors(a) {
                assert_ne!(a, b);
                assert_eq!(env.edge_weight(b, a), Some(w));
                assert!(w > 0.0);
                assert!((w - env.position(a).distance(env.position(b))).abs() < EDGE_WEIGHT_TOLERANCE);
            }
        }
        assert!(env.objects().iter().all(|o| o.category < 4));
    }

    #[test]
    fn rooms_have_distinct_dominant_categories() {
        let env = generate_env(3, &GeneratorParams::default()).unwrap();
        let mut per_category = vec![0usize; env.category_count()];
        for o in env.objects() {
            per_category[o.category] += 1;
        }
        // eight rooms, three dominant objects each, at most one clutter object per room
        assert!(per_category.iter().filter(|&&c| c >= 3).count() >= 8);
    }

    #[test]
    fn invalid_params_are_rejected() {
        for p in [
            GeneratorParams {
                node_count: 3,
                ..Default::default()
            },
            GeneratorParams {
                category_count: 2,
                ..Default::default()
            },
            GeneratorParams {
                room_count: 1,
                ..Default::default()
            },
        ] {
            assert!(matches!(generate_env(0, &p), Err(Error::Config(_))));
        }
    }

    #[test]
    fn same_seed_same_env() {
        let p = GeneratorParams::default();
        assert_eq!(generate_env(11, &p).unwrap(), generate_env(11, &p).unwrap());
        assert_ne!(generate_env(11, &p).unwrap(), generate_env(12, &p).unwrap());
    }
}
