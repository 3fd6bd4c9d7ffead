//! Episode outcomes and the aggregate navigation metrics.
//!
//! Path-efficiency weights put the shortest length in the numerator:
//! an episode contributes `S · p / max(p, l)`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::controller::Mode;
use crate::graph::NodeId;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode_id: u64,
    pub trajectory: Vec<NodeId>,
    /// Mode under which each move was taken; one entry per move.
    pub modes: Vec<Mode>,
    pub stopped: bool,
    pub success: bool,
    pub oracle_success: bool,
    /// Travelled distance, meters.
    pub path_length: f64,
    /// Geodesic start-to-goal distance, meters.
    pub shortest_length: f64,
    /// Geodesic distance from the final node to the goal, meters.
    pub final_distance: f64,
    pub grounding_success: bool,
}

impl EpisodeResult {
    pub fn steps(&self) -> usize {
        self.trajectory.len().saturating_sub(1)
    }
}

/// Success: the agent stopped within `d_success` of the goal (inclusive).
pub fn success(result: &EpisodeResult, d_success: f64) -> bool {
    result.stopped && result.final_distance <= d_success
}

fn efficiency(shortest: f64, actual: f64) -> f64 {
    let denom = shortest.max(actual);
    if denom > 0.0 {
        shortest / denom
    } else {
        1.0
    }
}

fn mean_of(results: &[EpisodeResult], f: impl Fn(&EpisodeResult) -> f64) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyInput("episode results"));
    }
    Ok(results.iter().map(f).sum::<f64>() / results.len() as f64)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn sr(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| indicator(r.success))
}

pub fn spl(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| indicator(r.success) * efficiency(r.shortest_length, r.path_length))
}

pub fn osr(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| indicator(r.oracle_success))
}

/// Mean travelled distance.
pub fn tl(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| r.path_length)
}

/// Mean final distance to the goal.
pub fn ne(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| r.final_distance)
}

/// Fraction of episodes with both navigation and grounding success.
pub fn fsr(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| indicator(r.success && r.grounding_success))
}

pub fn fspl(results: &[EpisodeResult]) -> Result<f64> {
    mean_of(results, |r| {
        indicator(r.success && r.grounding_success) * efficiency(r.shortest_length, r.path_length)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub episodes: usize,
    pub sr: f64,
    pub spl: f64,
    pub osr: f64,
    pub tl: f64,
    pub ne: f64,
    pub fsr: f64,
    pub fspl: f64,
}

impl MetricSummary {
    pub fn from_results(results: &[EpisodeResult]) -> Result<Self> {
        Ok(MetricSummary {
            episodes: results.len(),
            sr: sr(results)?,
            spl: spl(results)?,
            osr: osr(results)?,
            tl: tl(results)?,
            ne: ne(results)?,
            fsr: fsr(results)?,
            fspl: fspl(results)?,
        })
    }
}
