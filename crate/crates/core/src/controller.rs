//! Hierarchical explore/exploit control.
//!
//! Each step the agent updates its map, asks the mode selector for the
//! probability of exploring, and either takes one exploration step or picks
//! a local goal, plans a path to it over the map and walks the whole path.
//! On arrival the mode is reset to exploration. The episode ends when the
//! stop rule fires or the step budget runs out.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env_model::{render_boxes, render_pano, Episode, EnvGraph, GeoTable};
use crate::graph::{NodeId, LENGTH_TOLERANCE};
use crate::metrics::EpisodeResult;
use crate::nav_scoring::nav_score;
use crate::rng::{self, scope, Rng};
use crate::sos_features::{
    collect_category_stats, cosine, cosine_similarity, reference_sos, CategoryStats, SosFeature, SosPlanner,
};
use crate::topo_map::{NodeObservation, TopoMap};
use crate::{Error, Result};

/// Default number of retained horizontal frequencies.
pub const DEFAULT_ETA: usize = 64;
/// Default cosine threshold of the spectral stop rule.
pub const DEFAULT_STOP_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeSelector {
    /// Explore exactly while the agent is on the ground-truth path.
    Oracle,
    /// Exploit once the trajectory score has failed to rise strictly for
    /// `patience` consecutive steps.
    ScoreTrend { patience: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplorePolicy {
    GreedySos,
    Random,
    Oracle,
    NoisyOracle { p_err: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploitPolicy {
    Spectral,
    Spatial,
    Homing,
    Random,
    Oracle,
}

impl ExploitPolicy {
    pub const ALL: [ExploitPolicy; 5] = [
        ExploitPolicy::Oracle,
        ExploitPolicy::Homing,
        ExploitPolicy::Spatial,
        ExploitPolicy::Spectral,
        ExploitPolicy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExploitPolicy::Spectral => "spectral",
            ExploitPolicy::Spatial => "spatial",
            ExploitPolicy::Homing => "homing",
            ExploitPolicy::Random => "random",
            ExploitPolicy::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopRule {
    /// Stop when the cosine between the current node's target-category row
    /// and the target's reference row reaches `threshold`.
    Spectral { threshold: f64 },
    /// Stop exactly at the goal node.
    Oracle,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::Spectral {
            threshold: DEFAULT_STOP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub name: String,
    pub mode_selector: ModeSelector,
    pub explore: ExplorePolicy,
    pub exploit: ExploitPolicy,
    #[serde(default)]
    pub stop: StopRule,
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if let ExplorePolicy::NoisyOracle { p_err } = self.explore {
            if !(0.0..=1.0).contains(&p_err) {
                return Err(Error::Config(alloc::format!("p_err must lie in [0, 1], got {p_err}")));
            }
        }
        if let ModeSelector::ScoreTrend { patience } = self.mode_selector {
            if patience == 0 {
                return Err(Error::Config("patience must be at least 1".into()));
            }
        }
        if let StopRule::Spectral { threshold } = self.stop {
            if !threshold.is_finite() {
                return Err(Error::Config("stop threshold must be finite".into()));
            }
        }
        Ok(())
    }

    /// Everything oracle: selector, exploration, exploitation and stop.
    pub fn oracle(name: &str) -> Self {
        PolicyConfig {
            name: name.into(),
            mode_selector: ModeSelector::Oracle,
            explore: ExplorePolicy::Oracle,
            exploit: ExploitPolicy::Oracle,
            stop: StopRule::Oracle,
        }
    }
}

/// Environment plus everything derived from it once: distances, per-node
/// observations and category statistics.
#[derive(Debug, Clone)]
pub struct Scene {
    env: EnvGraph,
    geo: GeoTable,
    observations: Vec<NodeObservation>,
    stats: CategoryStats,
    eta: usize,
}

impl Scene {
    pub fn new(env: EnvGraph, eta: usize) -> Result<Self> {
        let planner = SosPlanner::new(env.pano_dims(), eta)?;
        let mut observations = Vec::with_capacity(env.node_count());
        for v in env.nodes() {
            let mut histogram = vec![0u32; env.category_count()];
            for b in render_boxes(&env, v) {
                histogram[b.category] += 1;
            }
            observations.push(NodeObservation {
                position: env.position(v),
                feature: planner.compute(&render_pano(&env, v))?,
                histogram,
            });
        }
        let stats = collect_category_stats(&env);
        let geo = GeoTable::new(&env);
        Ok(Scene {
            env,
            geo,
            observations,
            stats,
            eta,
        })
    }

    pub fn env(&self) -> &EnvGraph {
        &self.env
    }

    pub fn geo(&self) -> &GeoTable {
        &self.geo
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn stats(&self) -> &CategoryStats {
        &self.stats
    }

    pub fn observation(&self, v: NodeId) -> &NodeObservation {
        &self.observations[v.index()]
    }

    pub fn feature(&self, v: NodeId) -> &SosFeature {
        &self.observations[v.index()].feature
    }

    pub fn features(&self, nodes: &[NodeId]) -> Vec<SosFeature> {
        nodes.iter().map(|&v| self.feature(v).clone()).collect()
    }

    pub fn reference(&self, category: usize) -> Result<SosFeature> {
        reference_sos(category, &self.stats, self.eta, self.env.category_count())
    }

    /// Reference spectra of an instruction's tokens, in order.
    pub fn references(&self, tokens: &[usize]) -> Result<Vec<SosFeature>> {
        tokens.iter().map(|&t| self.reference(t)).collect()
    }

    fn path_length(&self, path: &[NodeId]) -> f64 {
        path.windows(2)
            .map(|w| self.env.edge_weight(w[0], w[1]).unwrap_or(f64::NAN))
            .sum()
    }
}

/// `1 - d(v, goal) / d(start, goal)`, or 1 when start and goal coincide.
pub fn progress(geo: &GeoTable, episode: &Episode, v: NodeId) -> Result<f64> {
    if episode.start == episode.goal {
        return Ok(1.0);
    }
    let total = geo.distance(episode.start, episode.goal)?;
    Ok(1.0 - geo.distance(v, episode.goal)? / total)
}

/// Score-trend selector signal: 0 once the last `patience` steps all failed
/// to raise the score strictly, 1 otherwise.
pub fn score_trend_signal(scores: &[f64], patience: usize) -> f64 {
    let stalled = scores
        .windows(2)
        .rev()
        .take_while(|w| w[1] <= w[0])
        .count();
    if stalled >= patience {
        0.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Move(NodeId),
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlMode {
    Explore,
    Exploit { goal: NodeId, pending: Vec<NodeId> },
}

#[derive(Debug, Clone)]
pub struct ControllerState {
    pub current: NodeId,
    pub t: usize,
    pub trajectory: Vec<NodeId>,
    pub modes: Vec<Mode>,
    pub mode: ControlMode,
    pub p_explore: f64,
    pub map: TopoMap,
    /// Score of every trajectory prefix, aligned with `trajectory`.
    pub prefix_scores: Vec<f64>,
    trend_start: usize,
    force_explore: bool,
    stopped: bool,
}

/// One agent running one episode.
pub struct Agent<'a> {
    scene: &'a Scene,
    episode: &'a Episode,
    cfg: &'a PolicyConfig,
    refs: Vec<SosFeature>,
    target_ref: SosFeature,
    explore_rng: Rng,
    exploit_rng: Rng,
    state: ControllerState,
}

impl<'a> Agent<'a> {
    pub fn new(scene: &'a Scene, episode: &'a Episode, cfg: &'a PolicyConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let env = scene.env();
        for v in [episode.start, episode.goal] {
            if !env.contains(v) {
                return Err(Error::UnknownNode(v));
            }
        }
        if episode.instruction.tokens.is_empty() {
            return Err(Error::EmptyInput("instruction tokens"));
        }
        let refs = scene.references(&episode.instruction.tokens)?;
        let target_ref = scene.reference(episode.instruction.target)?;
        let mut agent = Agent {
            scene,
            episode,
            cfg,
            refs,
            target_ref,
            explore_rng: rng::rng_from(seed, &[scope::EXPLORE, episode.id]),
            exploit_rng: rng::rng_from(seed, &[scope::EXPLOIT, episode.id]),
            state: ControllerState {
                current: episode.start,
                t: 0,
                trajectory: vec![episode.start],
                modes: Vec::new(),
                mode: ControlMode::Explore,
                p_explore: 1.0,
                map: TopoMap::new(),
                prefix_scores: Vec::new(),
                trend_start: 0,
                force_explore: true,
                stopped: false,
            },
        };
        agent.observe();
        Ok(agent)
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn references(&self) -> &[SosFeature] {
        &self.refs
    }

    fn observe(&mut self) {
        let v = self.state.current;
        let scene = self.scene;
        let neighbors = scene
            .env()
            .neighbors(v)
            .iter()
            .map(|&(n, _)| (n, scene.observation(n).clone()));
        self.state
            .map
            .update(v, scene.observation(v).clone(), neighbors, self.state.t);
        let score = self.trajectory_score(&self.state.trajectory, None);
        self.state.prefix_scores.push(score);
    }

    fn trajectory_score(&self, nodes: &[NodeId], extra: Option<NodeId>) -> f64 {
        let feats: Vec<SosFeature> = nodes
            .iter()
            .chain(extra.as_ref())
            .map(|&v| self.scene.feature(v).clone())
            .collect();
        nav_score(&self.refs, &feats).unwrap_or(0.0)
    }

    fn move_to(&mut self, next: NodeId, mode: Mode) {
        self.state.current = next;
        self.state.t += 1;
        self.state.trajectory.push(next);
        self.state.modes.push(mode);
        self.observe();
    }

    /// Probability of exploring at the current state.
    pub fn select_mode(&self) -> f64 {
        if self.state.t == 0 || self.state.force_explore {
            return 1.0;
        }
        match self.cfg.mode_selector {
            ModeSelector::Oracle => {
                if self.episode.gt_path.contains(&self.state.current) {
                    1.0
                } else {
                    0.0
                }
            }
            ModeSelector::ScoreTrend { patience } => {
                score_trend_signal(&self.state.prefix_scores[self.state.trend_start..], patience)
            }
        }
    }

    /// Whether the stop rule fires at the current node.
    pub fn should_stop(&self) -> bool {
        match self.cfg.stop {
            StopRule::Oracle => self.state.current == self.episode.goal,
            StopRule::Spectral { threshold } => {
                let target = self.episode.instruction.target;
                let row = self.scene.feature(self.state.current).row(target);
                cosine(row, self.target_ref.row(target)) >= threshold
            }
        }
    }

    /// Next hop toward the goal: along the ground-truth path when on it,
    /// otherwise the smallest-id neighbor on some shortest path.
    fn oracle_next(&self, v: NodeId) -> Option<NodeId> {
        let ep = self.episode;
        if v == ep.goal {
            return None;
        }
        if let Some(i) = ep.gt_path.iter().position(|&x| x == v) {
            return ep.gt_path.get(i + 1).copied();
        }
        let geo = self.scene.geo();
        let remaining = geo.distance(v, ep.goal).ok()?;
        let tol = LENGTH_TOLERANCE * remaining.max(1.0);
        self.scene
            .env()
            .neighbors(v)
            .iter()
            .find(|&&(n, w)| {
                geo.distance(n, ep.goal)
                    .is_ok_and(|d| d < remaining && (w + d - remaining).abs() <= tol)
            })
            .map(|&(n, _)| n)
    }

    fn least_recently_visited(&self, neighbors: &[(NodeId, f64)]) -> Option<NodeId> {
        neighbors
            .iter()
            .map(|&(n, _)| n)
            .min_by_key(|&n| (self.state.map.last_visit(n).unwrap_or(0), n))
    }

    /// One exploration action from the current node.
    pub fn explore_step(&mut self) -> Result<Action> {
        let v = self.state.current;
        let neighbors = self.scene.env().neighbors(v);
        if neighbors.is_empty() {
            return Err(Error::Control(alloc::format!("node {v} has no neighbors")));
        }
        let unvisited: Vec<NodeId> = neighbors
            .iter()
            .map(|&(n, _)| n)
            .filter(|&n| !self.state.map.is_visited(n))
            .collect();
        let action = match self.cfg.explore {
            ExplorePolicy::GreedySos => match unvisited.len() {
                0 => Action::Move(self.least_recently_visited(neighbors).expect("nonempty")),
                1 => Action::Move(unvisited[0]),
                _ => {
                    let mut best = (f64::NEG_INFINITY, unvisited[0]);
                    for &n in &unvisited {
                        let s = self.trajectory_score(&self.state.trajectory, Some(n));
                        if s > best.0 {
                            best = (s, n);
                        }
                    }
                    Action::Move(best.1)
                }
            },
            ExplorePolicy::Random => {
                if unvisited.is_empty() {
                    Action::Move(neighbors[self.explore_rng.gen_range(0..neighbors.len())].0)
                } else {
                    Action::Move(unvisited[self.explore_rng.gen_range(0..unvisited.len())])
                }
            }
            ExplorePolicy::Oracle => self.oracle_next(v).map_or(Action::Stop, Action::Move),
            ExplorePolicy::NoisyOracle { p_err } => {
                let deviate = self.explore_rng.gen_bool(p_err);
                let next = self.oracle_next(v);
                let wrong: Vec<NodeId> = neighbors
                    .iter()
                    .map(|&(n, _)| n)
                    .filter(|&n| Some(n) != next)
                    .collect();
                if deviate && !wrong.is_empty() {
                    Action::Move(wrong[self.explore_rng.gen_range(0..wrong.len())])
                } else {
                    next.map_or(Action::Stop, Action::Move)
                }
            }
        };
        Ok(action)
    }

    /// Visited node (other than the current one) where the trajectory score
    /// peaked; the earliest such position wins ties.
    pub fn homing_target(&self) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for (&v, &s) in self.state.trajectory.iter().zip(&self.state.prefix_scores) {
            if v != self.state.current && best.is_none_or(|(b, _)| s > b) {
                best = Some((s, v));
            }
        }
        best.map(|(_, v)| v)
    }

    /// Score of the start-rooted corrected trajectory ending at `candidate`.
    pub fn candidate_score(&self, candidate: NodeId) -> Result<f64> {
        let start = self.state.map.start().expect("map initialised at construction");
        let (path, _) = self.state.map.shortest_path(start, candidate)?;
        nav_score(&self.refs, &self.scene.features(&path))
    }

    /// Choose the local goal for the next exploitation, or `None` to stop.
    pub fn local_goal_search(&mut self) -> Result<Option<NodeId>> {
        if self.cfg.exploit == ExploitPolicy::Homing {
            return Ok(self.homing_target());
        }
        let candidates = self.state.map.frontier_candidates();
        if candidates.is_empty() {
            return Ok(self.homing_target());
        }
        if candidates.len() == 1 {
            return Ok(Some(candidates[0]));
        }
        let pick = match self.cfg.exploit {
            ExploitPolicy::Spectral => {
                let mut best = (f64::NEG_INFINITY, candidates[0]);
                for &c in &candidates {
                    let s = self.candidate_score(c)?;
                    if s > best.0 {
                        best = (s, c);
                    }
                }
                best.1
            }
            ExploitPolicy::Spatial => {
                let mut bag = vec![0.0; self.scene.env().category_count()];
                for &t in &self.episode.instruction.tokens {
                    bag[t] += 1.0;
                }
                let mut best = (f64::NEG_INFINITY, candidates[0]);
                for &c in &candidates {
                    let hist: Vec<f64> = self.scene.observation(c).histogram.iter().map(|&h| h as f64).collect();
                    let s = cosine(&hist, &bag);
                    if s > best.0 {
                        best = (s, c);
                    }
                }
                best.1
            }
            ExploitPolicy::Random => candidates[self.exploit_rng.gen_range(0..candidates.len())],
            ExploitPolicy::Oracle => {
                let geo = self.scene.geo();
                let mut best = (f64::INFINITY, candidates[0]);
                for &c in &candidates {
                    let d = geo.distance(c, self.episode.goal)?;
                    if d < best.0 {
                        best = (d, c);
                    }
                }
                best.1
            }
            ExploitPolicy::Homing => unreachable!("handled above"),
        };
        Ok(Some(pick))
    }

    /// Advance by one decision. Returns `false` once the episode is over.
    pub fn step(&mut self) -> Result<bool> {
        if self.state.stopped || self.state.t >= self.episode.max_steps {
            return Ok(false);
        }
        if self.should_stop() {
            self.state.stopped = true;
            return Ok(false);
        }
        let p_explore = self.select_mode();
        self.state.p_explore = p_explore;
        if p_explore >= 0.5 {
            self.state.force_explore = false;
            match self.explore_step()? {
                Action::Stop => {
                    self.state.stopped = true;
                    return Ok(false);
                }
                Action::Move(n) => self.move_to(n, Mode::Explore),
            }
            return Ok(true);
        }

        let Some(goal) = self.local_goal_search()? else {
            self.state.stopped = true;
            return Ok(false);
        };
        if goal == self.state.current {
            return Err(Error::Control("local goal equals the current node".into()));
        }
        self.state.map.mark_chosen(goal);
        let (path, _) = self.state.map.shortest_path(self.state.current, goal)?;
        let mut pending: Vec<NodeId> = path[1..].to_vec();
        pending.reverse();
        self.state.mode = ControlMode::Exploit { goal, pending };
        loop {
            if self.state.t >= self.episode.max_steps {
                break;
            }
            let next = match &mut self.state.mode {
                ControlMode::Exploit { pending, .. } => pending.pop(),
                ControlMode::Explore => None,
            };
            let Some(next) = next else { break };
            self.move_to(next, Mode::Exploit);
        }
        self.state.mode = ControlMode::Explore;
        self.state.force_explore = true;
        self.state.trend_start = self.state.prefix_scores.len() - 1;
        Ok(true)
    }

    /// Whether the target category is picked out at `v`: among the visible
    /// categories, the one whose reference is most similar to the target's
    /// reference must be the target itself.
    pub fn grounding_at(&self, v: NodeId) -> bool {
        let target = self.episode.instruction.target;
        let obs = self.scene.observation(v);
        let mut best: Option<(f64, usize)> = None;
        for (c, &count) in obs.histogram.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let Ok(r) = self.scene.reference(c) else { continue };
            let s = cosine_similarity(&r, &self.target_ref).unwrap_or(0.0);
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, c));
            }
        }
        best.map(|(_, c)| c) == Some(target)
    }

    pub fn finish(self) -> Result<EpisodeResult> {
        let geo = self.scene.geo();
        let ep = self.episode;
        let final_node = self.state.current;
        let final_distance = geo.distance(final_node, ep.goal)?;
        let shortest_length = geo.distance(ep.start, ep.goal)?;
        let mut oracle_success = false;
        for &v in &self.state.trajectory {
            if geo.distance(v, ep.goal)? <= ep.d_success {
                oracle_success = true;
                break;
            }
        }
        let success = self.state.stopped && final_distance <= ep.d_success;
        Ok(EpisodeResult {
            episode_id: ep.id,
            path_length: self.scene.path_length(&self.state.trajectory),
            grounding_success: self.grounding_at(final_node),
            trajectory: self.state.trajectory,
            modes: self.state.modes,
            stopped: self.state.stopped,
            success,
            oracle_success,
            shortest_length,
            final_distance,
        })
    }

    pub fn run(mut self) -> Result<EpisodeResult> {
        while self.step()? {}
        self.finish()
    }
}

/// Run one episode under `cfg`. Randomness derives from `(seed, episode.id)`.
pub fn run_episode(scene: &Scene, episode: &Episode, cfg: &PolicyConfig, seed: u64) -> Result<EpisodeResult> {
    Agent::new(scene, episode, cfg, seed)?.run()
}
