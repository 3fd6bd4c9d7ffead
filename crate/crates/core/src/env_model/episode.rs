use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{dominant_category, render_pano, EnvGraph};
use crate::graph::NodeId;
use crate::rng::{self, scope};
use crate::{Error, Result};

/// Ordered object tokens plus the target category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub tokens: Vec<usize>,
    pub target: usize,
}

impl Instruction {
    /// Tokens from per-node categories in path order, collapsing consecutive
    /// repeats. At most `max_tokens` of the most recent tokens are kept.
    pub fn from_path_categories<I>(categories: I, max_tokens: usize) -> Option<Self>
    where
        I: IntoIterator<Item = Option<usize>>,
    {
        let mut tokens: Vec<usize> = Vec::new();
        for c in categories.into_iter().flatten() {
            if tokens.last() != Some(&c) {
                tokens.push(c);
            }
        }
        if tokens.len() > max_tokens {
            tokens.drain(..tokens.len() - max_tokens);
        }
        let target = *tokens.last()?;
        Some(Instruction { tokens, target })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: u64,
    pub env_id: u64,
    pub start: NodeId,
    pub goal: NodeId,
    pub instruction: Instruction,
    pub gt_path: Vec<NodeId>,
    pub d_success: f64,
    pub max_steps: usize,
}

impl Episode {
    pub fn gt_edges(&self) -> usize {
        self.gt_path.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeParams {
    pub d_success: f64,
    pub min_edges: usize,
    /// Step budget is `ceil(factor · gt_edges) + slack`.
    pub step_budget_factor: f64,
    pub step_budget_slack: usize,
    /// Require start and goal in different rooms when room labels exist.
    pub distinct_rooms: bool,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        EpisodeParams {
            d_success: 3.0,
            min_edges: 2,
            step_budget_factor: 2.0,
            step_budget_slack: 4,
            distinct_rooms: true,
        }
    }
}

const MAX_ATTEMPTS: usize = 2000;

/// Sample an episode with default parameters.
pub fn generate_episode(env: &EnvGraph, seed: u64) -> Result<Episode> {
    generate_episode_with(env, seed, &EpisodeParams::default())
}

/// Sample start and goal, take the shortest path between them as ground
/// truth, and read the instruction off the dominant category at each path
/// node. The target is the goal's dominant category.
pub fn generate_episode_with(env: &EnvGraph, seed: u64, params: &EpisodeParams) -> Result<Episode> {
    let n = env.node_count();
    if n < 2 {
        return Err(Error::Generation("environment needs at least two nodes".into()));
    }
    if !env.is_connected() {
        return Err(Error::Generation("environment is not connected".into()));
    }
    let mut rng = rng::rng_from(seed, &[scope::EPISODE, env.id()]);
    for attempt in 0..MAX_ATTEMPTS {
        let start = NodeId::from(rng.gen_range(0..n));
        let goal = NodeId::from(rng.gen_range(0..n));
        if start == goal {
            continue;
        }
        // relax the room constraint for the second half of the attempts
        let want_rooms = params.distinct_rooms && attempt < MAX_ATTEMPTS / 2;
        if want_rooms {
            if let (Some(a), Some(b)) = (env.room_of(start), env.room_of(goal)) {
                if a == b {
                    continue;
                }
            }
        }
        let (gt_path, _) = env.shortest_path(start, goal)?;
        if gt_path.len() - 1 < params.min_edges {
            continue;
        }
        let categories = gt_path.iter().map(|&v| dominant_category(&render_pano(env, v)));
        let Some(instruction) = Instruction::from_path_categories(categories, env.category_count()) else {
            continue;
        };
        if dominant_category(&render_pano(env, goal)) != Some(instruction.target) {
            continue;
        }
        let edges = gt_path.len() - 1;
        let max_steps =
            libm::ceil(params.step_budget_factor * edges as f64) as usize + params.step_budget_slack;
        return Ok(Episode {
            id: 0,
            env_id: env.id(),
            start,
            goal,
            instruction,
            gt_path,
            d_success: params.d_success,
            max_steps,
        });
    }
    Err(Error::Generation("no admissible start/goal pair found".into()))
}
