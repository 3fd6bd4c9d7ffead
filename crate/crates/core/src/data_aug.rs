//! Detour demonstrations with explore/exploit supervision labels, and
//! perturbed trajectory sets for relating trajectory score to path quality.

use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env_model::{Episode, EnvGraph};
use crate::graph::NodeId;
use crate::rng::{self, scope, Rng};
use crate::{Error, Result};

pub const DEFAULT_MAX_HOPS: usize = 15;

/// One step of a demonstration. `on_path` is the selector label: 1 while
/// the node lies on the ground-truth path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledStep {
    pub node: NodeId,
    pub on_path: bool,
}

/// Walk `depth` nodes away from `at` without stepping onto the ground-truth
/// path or straight back, then retrace. Returns the excursion including the
/// return to `at` (excluded), or nothing when no off-path neighbor exists.
fn excursion(env: &EnvGraph, gt: &[NodeId], at: NodeId, depth: usize, rng: &mut Rng) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut prev = at;
    let mut here = at;
    for _ in 0..depth {
        let options: Vec<NodeId> = env
            .neighbors(here)
            .iter()
            .map(|&(n, _)| n)
            .filter(|&n| n != prev && n != at && !gt.contains(&n) && !out.contains(&n))
            .collect();
        if options.is_empty() {
            break;
        }
        let next = options[rng.gen_range(0..options.len())];
        out.push(next);
        prev = here;
        here = next;
    }
    if out.is_empty() {
        return out;
    }
    let back: Vec<NodeId> = out.iter().rev().skip(1).copied().chain([at]).collect();
    out.extend(back);
    out
}

/// Follow the ground-truth path, inserting at each node except the goal an
/// excursion of `depth` nodes with probability `detour_rate`.
pub fn generate_detour_demo_with_depth(
    env: &EnvGraph,
    episode: &Episode,
    seed: u64,
    detour_rate: f64,
    depth: usize,
) -> Result<Vec<LabeledStep>> {
    if !(0.0..=1.0).contains(&detour_rate) {
        return Err(Error::Config(alloc::format!("detour_rate must lie in [0, 1], got {detour_rate}")));
    }
    let gt = &episode.gt_path;
    if gt.is_empty() {
        return Err(Error::EmptyInput("ground-truth path"));
    }
    if let Some(&bad) = gt.iter().find(|&&v| !env.contains(v)) {
        return Err(Error::UnknownNode(bad));
    }
    let mut rng = rng::rng_from(seed, &[scope::AUGMENT, episode.id, 0]);
    let mut nodes = Vec::new();
    for (i, &v) in gt.iter().enumerate() {
        nodes.push(v);
        if i + 1 < gt.len() && depth > 0 && rng.gen_bool(detour_rate) {
            nodes.extend(excursion(env, gt, v, depth, &mut rng));
        }
    }
    Ok(nodes
        .into_iter()
        .map(|node| LabeledStep {
            node,
            on_path: gt.contains(&node),
        })
        .collect())
}

/// Depth-1 detours: one node out, one back.
pub fn generate_detour_demo(
    env: &EnvGraph,
    episode: &Episode,
    seed: u64,
    detour_rate: f64,
) -> Result<Vec<LabeledStep>> {
    generate_detour_demo_with_depth(env, episode, seed, detour_rate, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    GroundTruth,
    Prefix,
    RandomWalk,
    Detour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedTrajectory {
    /// Index into the episode list the trajectory was derived from.
    pub episode_index: usize,
    pub kind: Perturbation,
    pub nodes: Vec<NodeId>,
}

fn random_walk(env: &EnvGraph, start: NodeId, len: usize, rng: &mut Rng) -> Vec<NodeId> {
    let mut walk = alloc::vec![start];
    while walk.len() < len {
        let here = *walk.last().expect("nonempty");
        let prev = walk.len().checked_sub(2).map(|i| walk[i]);
        let nb = env.neighbors(here);
        let options: Vec<NodeId> = nb.iter().map(|&(n, _)| n).filter(|&n| Some(n) != prev).collect();
        let pool: Vec<NodeId> = if options.is_empty() {
            nb.iter().map(|&(n, _)| n).collect()
        } else {
            options
        };
        if pool.is_empty() {
            break;
        }
        walk.push(pool[rng.gen_range(0..pool.len())]);
    }
    walk
}

/// `per_episode` trajectories per episode, each of 1 to `max_hops` nodes.
/// The first is the ground-truth path itself (truncated to `max_hops`); the
/// rest cycle through ground-truth prefixes, random walks from the start and
/// detoured ground-truth paths.
pub fn augment_trajectories(
    env: &EnvGraph,
    episodes: &[Episode],
    seed: u64,
    per_episode: usize,
    max_hops: usize,
) -> Result<Vec<AugmentedTrajectory>> {
    if per_episode == 0 {
        return Err(Error::Config("per_episode must be at least 1".into()));
    }
    if max_hops == 0 {
        return Err(Error::Config("max_hops must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(episodes.len() * per_episode);
    for (index, ep) in episodes.iter().enumerate() {
        if ep.gt_path.is_empty() {
            return Err(Error::EmptyInput("ground-truth path"));
        }
        let mut rng = rng::rng_from(seed, &[scope::AUGMENT, ep.id, 1 + index as u64]);
        let truncated = |mut v: Vec<NodeId>| {
            v.truncate(max_hops);
            v
        };
        for j in 0..per_episode {
            let (kind, nodes) = if j == 0 {
                (Perturbation::GroundTruth, truncated(ep.gt_path.clone()))
            } else {
                match rng.gen_range(0..3) {
                    0 => {
                        let len = rng.gen_range(1..=ep.gt_path.len().min(max_hops));
                        (Perturbation::Prefix, ep.gt_path[..len].to_vec())
                    }
                    1 => {
                        let len = rng.gen_range(1..=max_hops);
                        (Perturbation::RandomWalk, random_walk(env, ep.start, len, &mut rng))
                    }
                    _ => {
                        let rate = rng.gen_range(0.2..=1.0);
                        let depth = rng.gen_range(1..=2);
                        let demo = generate_detour_demo_with_depth(env, ep, rng.gen(), rate, depth)?;
                        let nodes = demo.into_iter().map(|s| s.node).collect();
                        (Perturbation::Detour, truncated(nodes))
                    }
                }
            };
            out.push(AugmentedTrajectory {
                episode_index: index,
                kind,
                nodes,
            });
        }
    }
    Ok(out)
}

/// All prefixes of `traj`, shortest first.
pub fn expand_prefixes<T: Clone>(traj: &[T]) -> Vec<Vec<T>> {
    (1..=traj.len()).map(|n| traj[..n].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{Instruction, Point};
    use alloc::vec;

    // path 0-1-2 with a single spur 3 hanging off 1
    fn spur_env() -> (EnvGraph, Episode) {
        let env = EnvGraph::from_parts(
            0,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 1.0)],
            &[(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2)), (NodeId(1), NodeId(3))],
            Vec::new(),
            Vec::new(),
            2,
            Default::default(),
        )
        .unwrap();
        let ep = Episode {
            id: 7,
            env_id: 0,
            start: NodeId(0),
            goal: NodeId(2),
            instruction: Instruction { tokens: vec![0], target: 0 },
            gt_path: vec![NodeId(0), NodeId(1), NodeId(2)],
            d_success: 0.5,
            max_steps: 10,
        };
        (env, ep)
    }

    #[test]
    fn no_detours_at_rate_zero() {
        let (env, ep) = spur_env();
        let demo = generate_detour_demo(&env, &ep, 3, 0.0).unwrap();
        assert_eq!(demo.iter().map(|s| s.node).collect::<Vec<_>>(), ep.gt_path);
        assert!(demo.iter().all(|s| s.on_path));
    }

    #[test]
    fn rate_one_inserts_out_and_back() {
        let (env, ep) = spur_env();
        let demo = generate_detour_demo(&env, &ep, 3, 1.0).unwrap();
        let nodes: Vec<u32> = demo.iter().map(|s| s.node.0).collect();
        // node 0 has no off-path neighbor; node 1 detours to 3 and back
        assert_eq!(nodes, vec![0, 1, 3, 1, 2]);
        let labels: Vec<bool> = demo.iter().map(|s| s.on_path).collect();
        assert_eq!(labels, vec![true, true, false, true, true]);
    }

    #[test]
    fn bad_rate_rejected() {
        let (env, ep) = spur_env();
        assert!(generate_detour_demo(&env, &ep, 0, 1.1).is_err());
    }

    #[test]
    fn prefixes() {
        assert_eq!(expand_prefixes(&['a']), vec![vec!['a']]);
        assert_eq!(
            expand_prefixes(&['a', 'b', 'c']),
            vec![vec!['a'], vec!['a', 'b'], vec!['a', 'b', 'c']]
        );
    }

    #[test]
    fn first_augmented_is_ground_truth() {
        let (env, ep) = spur_env();
        let set = augment_trajectories(&env, core::slice::from_ref(&ep), 1, 5, 15).unwrap();
        assert_eq!(set.len(), 5);
        assert_eq!(set[0].nodes, ep.gt_path);
        assert!(set.iter().all(|t| (1..=15).contains(&t.nodes.len())));
        assert_eq!(set, augment_trajectories(&env, &[ep], 1, 5, 15).unwrap());
    }
}
