//! Two-candidate scenarios for checking that the score prefers the
//! candidate continuing the instruction's object order.
//!
//! The walked prefix shows the first `m` tokens in order, one per node.
//! Candidate A shows token `m + 1`. Candidate B breaks the order: it shows
//! either an object category absent from the instruction or one of the
//! tokens already passed.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{nav_score, similarity_matrix, SimilarityMatrix};
use crate::env_model::{PanoDims, PanoObservation, PixelBox};
use crate::rng;
use crate::sos_features::{reference_sos, CategoryStats, SosPlanner, SosFeature};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub category_count: usize,
    pub pano: PanoDims,
    pub eta: usize,
    pub token_count: usize,
    /// Probability that a node also shows a small non-instruction object.
    pub clutter_probability: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        ToyParams {
            category_count: 12,
            pano: PanoDims {
                width: 128,
                height: 32,
            },
            eta: 32,
            token_count: 3,
            clutter_probability: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakKind {
    /// B shows a category the instruction never mentions.
    Distractor,
    /// B shows a token that was already passed.
    Repeat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyScenario {
    pub tokens: Vec<usize>,
    pub refs: Vec<SosFeature>,
    pub prefix: Vec<SosFeature>,
    pub candidate_a: SosFeature,
    pub candidate_b: SosFeature,
    pub break_kind: BreakKind,
}

impl ToyScenario {
    fn with(&self, last: &SosFeature) -> Vec<SosFeature> {
        let mut t = self.prefix.clone();
        t.push(last.clone());
        t
    }

    pub fn trajectory_a(&self) -> Vec<SosFeature> {
        self.with(&self.candidate_a)
    }

    pub fn trajectory_b(&self) -> Vec<SosFeature> {
        self.with(&self.candidate_b)
    }

    pub fn score_a(&self) -> Result<f64> {
        nav_score(&self.refs, &self.trajectory_a())
    }

    pub fn score_b(&self) -> Result<f64> {
        nav_score(&self.refs, &self.trajectory_b())
    }

    pub fn similarity_a(&self) -> Result<SimilarityMatrix> {
        similarity_matrix(&self.refs, &self.trajectory_a())
    }

    pub fn similarity_b(&self) -> Result<SimilarityMatrix> {
        similarity_matrix(&self.refs, &self.trajectory_b())
    }
}

fn random_box(rng: &mut rng::Rng, category: usize, dims: PanoDims, max_frac: f64) -> PixelBox {
    let max_w = ((dims.width as f64 * max_frac) as usize).max(3);
    let col_len = rng.gen_range(2..=max_w);
    let rows = rng.gen_range(dims.height / 4..=dims.height * 3 / 4).max(1);
    let row_start = rng.gen_range(0..=dims.height - rows);
    PixelBox {
        category,
        col_start: rng.gen_range(0..dims.width),
        col_len,
        row_start,
        row_end: row_start + rows,
    }
}

/// Build one seeded scenario.
pub fn build_toy_scenario(seed: u64, params: &ToyParams) -> Result<ToyScenario> {
    let k = params.category_count;
    if params.token_count < 2 || params.token_count >= k {
        return Err(Error::Config("toy scenarios need 2 <= tokens < categories".into()));
    }
    let planner = SosPlanner::new(params.pano, params.eta)?;
    let mut rng = rng::rng_from(seed, &[0x0074_6f79]);

    let mut categories: Vec<usize> = (0..k).collect();
    categories.shuffle(&mut rng);
    let tokens: Vec<usize> = categories[..params.token_count].to_vec();
    let others: Vec<usize> = categories[params.token_count..].to_vec();
    let walked = rng.gen_range(1..params.token_count);

    let mut samples = Vec::new();
    let mut node = |rng: &mut rng::Rng, category: usize| -> Result<SosFeature> {
        let mut boxes = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            boxes.push(random_box(rng, category, params.pano, 0.25));
        }
        if rng.gen_bool(params.clutter_probability) {
            let c = others[rng.gen_range(0..others.len())];
            boxes.push(random_box(rng, c, params.pano, 0.06));
        }
        for b in &boxes {
            samples.push((b.category, b.col_len as f64, b.height() as f64));
        }
        planner.compute(&PanoObservation::from_boxes(k, params.pano, &boxes))
    };

    let prefix = tokens[..walked]
        .iter()
        .map(|&c| node(&mut rng, c))
        .collect::<Result<Vec<_>>>()?;
    let candidate_a = node(&mut rng, tokens[walked])?;
    let (break_kind, b_category) = if rng.gen_bool(0.5) {
        (BreakKind::Distractor, others[rng.gen_range(0..others.len())])
    } else {
        (BreakKind::Repeat, tokens[rng.gen_range(0..walked)])
    };
    let candidate_b = node(&mut rng, b_category)?;

    // every token appears at least once, so stats exist for all of them
    let mut stats_samples = samples;
    for &t in &tokens[walked + 1..] {
        let b = random_box(&mut rng, t, params.pano, 0.25);
        stats_samples.push((t, b.col_len as f64, b.height() as f64));
    }
    let stats = CategoryStats::from_samples(k, stats_samples);
    let refs = tokens
        .iter()
        .map(|&t| reference_sos(t, &stats, params.eta, k))
        .collect::<Result<Vec<_>>>()?;

    Ok(ToyScenario {
        tokens,
        refs,
        prefix,
        candidate_a,
        candidate_b,
        break_kind,
    })
}
