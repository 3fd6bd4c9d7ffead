//! Relation between the navigation score and trajectory quality (nDS) on
//! perturbed, prefix-expanded trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sosnav_core::controller::Scene;
use sosnav_core::data_aug::{augment_trajectories, expand_prefixes, Perturbation};
use sosnav_core::env_model::Episode;
use sosnav_core::nav_scoring::{nav_score_with, nds, VarianceScale};
use sosnav_core::stats::spearman;

use crate::formats::SCHEMA_VERSION;
use crate::svg;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub env_id: u64,
    pub episode_id: u64,
    pub kind: Perturbation,
    /// Prefix length in nodes.
    pub nodes: usize,
    pub score: f64,
    /// Score with the inverted variance ratio.
    pub score_alt: f64,
    pub nds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub seed: u64,
    pub spearman: f64,
    pub spearman_alt: f64,
    pub points: Vec<StudyPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyParams {
    pub per_episode: usize,
    pub max_hops: usize,
}

impl Default for StudyParams {
    fn default() -> Self {
        StudyParams {
            per_episode: 10,
            max_hops: sosnav_core::data_aug::DEFAULT_MAX_HOPS,
        }
    }
}

/// Score and nDS (against the ground truth) of every prefix of every
/// augmented trajectory.
pub fn score_nds_points(scene: &Scene, episodes: &[Episode], seed: u64, params: StudyParams) -> Result<Vec<StudyPoint>, Error> {
    let augmented = augment_trajectories(scene.env(), episodes, seed, params.per_episode, params.max_hops)?;
    let env_id = scene.env().id();
    let per_trajectory = augmented
        .par_iter()
        .map(|aug| {
            let ep = &episodes[aug.episode_index];
            let refs = scene.references(&ep.instruction.tokens)?;
            expand_prefixes(&aug.nodes)
                .into_iter()
                .map(|prefix| {
                    let feats = scene.features(&prefix);
                    Ok(StudyPoint {
                        env_id,
                        episode_id: ep.id,
                        kind: aug.kind,
                        nodes: prefix.len(),
                        score: nav_score_with(&refs, &feats, VarianceScale::TrajectoryOverTokens)?,
                        score_alt: nav_score_with(&refs, &feats, VarianceScale::TokensOverTrajectory)?,
                        nds: nds(&ep.gt_path, &prefix, scene.geo(), ep.d_success)?,
                    })
                })
                .collect::<Result<Vec<_>, sosnav_core::Error>>()
        })
        .collect::<Result<Vec<_>, sosnav_core::Error>>()?;
    Ok(per_trajectory.into_iter().flatten().collect())
}

pub fn report(points: Vec<StudyPoint>, seed: u64) -> Result<StudyReport, Error> {
    if points.is_empty() {
        return Err(sosnav_core::Error::EmptyInput("score-nDS points").into());
    }
    let nds: Vec<f64> = points.iter().map(|p| p.nds).collect();
    let score: Vec<f64> = points.iter().map(|p| p.score).collect();
    let alt: Vec<f64> = points.iter().map(|p| p.score_alt).collect();
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        seed,
        spearman: spearman(&score, &nds)?,
        spearman_alt: spearman(&alt, &nds)?,
        points,
    })
}

pub fn scatter_svg(report: &StudyReport) -> String {
    let pairs: Vec<(f64, f64)> = report.points.iter().map(|p| (p.score, p.nds)).collect();
    svg::scatter(
        &pairs,
        &format!("navigation score vs nDS (Spearman {:.3})", report.spearman),
        "navigation score",
        "nDS",
    )
}
