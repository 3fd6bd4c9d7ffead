//! Trajectory scoring against an instruction's reference spectra.

mod toy;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env_model::GeoTable;
use crate::graph::NodeId;
use crate::sos_features::{cosine, dot, SosFeature};
use crate::{Error, Result};

pub use toy::{build_toy_scenario, BreakKind, ToyParams, ToyScenario};

/// Added to the score denominator so degenerate inputs score 0.
pub const SCORE_EPSILON: f64 = 1e-12;

/// Which ratio multiplies the variance product under the square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceScale {
    /// `t'/B`, trajectory length over token count.
    #[default]
    TrajectoryOverTokens,
    /// `B/t'`.
    TokensOverTrajectory,
}

fn check_inputs(refs: &[SosFeature], traj: &[SosFeature]) -> Result<()> {
    let first = refs.first().ok_or(Error::EmptyInput("reference features"))?;
    if traj.is_empty() {
        return Err(Error::EmptyInput("trajectory features"));
    }
    for f in refs.iter().chain(traj) {
        first.check_shape(f)?;
    }
    Ok(())
}

fn mean(features: &[SosFeature]) -> Vec<f64> {
    let mut m = vec![0.0; features[0].as_slice().len()];
    for f in features {
        for (acc, v) in m.iter_mut().zip(f.as_slice()) {
            *acc += v;
        }
    }
    let n = features.len() as f64;
    for v in &mut m {
        *v /= n;
    }
    m
}

fn deviations(features: &[SosFeature], center: &[f64]) -> Vec<Vec<f64>> {
    features
        .iter()
        .map(|f| f.as_slice().iter().zip(center).map(|(v, c)| v - c).collect())
        .collect()
}

/// Navigation score of a trajectory given the instruction's reference spectra.
///
/// A correlation of the centred reference and trajectory features in which
/// every (token, node) product is weighted by the cosine similarity of the
/// raw pair:
///
/// ```text
///            Σ_i Σ_j cos(δ_i, S_j) ⟨δ_i - δ̄, S_j - S̄⟩
/// score = ─────────────────────────────────────────────────── 
///         sqrt(t'/B · Σ_i ‖δ_i - δ̄‖² · Σ_j ‖S_j - S̄‖²) + ε
/// ```
pub fn nav_score(refs: &[SosFeature], traj: &[SosFeature]) -> Result<f64> {
    nav_score_with(refs, traj, VarianceScale::TrajectoryOverTokens)
}

pub fn nav_score_with(refs: &[SosFeature], traj: &[SosFeature], scale: VarianceScale) -> Result<f64> {
    check_inputs(refs, traj)?;
    let ref_dev = deviations(refs, &mean(refs));
    let traj_dev = deviations(traj, &mean(traj));

    let mut numerator = 0.0;
    for (r, rd) in refs.iter().zip(&ref_dev) {
        for (s, sd) in traj.iter().zip(&traj_dev) {
            numerator += cosine(r.as_slice(), s.as_slice()) * dot(rd, sd);
        }
    }
    let ref_var: f64 = ref_dev.iter().map(|d| dot(d, d)).sum();
    let traj_var: f64 = traj_dev.iter().map(|d| dot(d, d)).sum();
    let (b, t) = (refs.len() as f64, traj.len() as f64);
    let ratio = match scale {
        VarianceScale::TrajectoryOverTokens => t / b,
        VarianceScale::TokensOverTrajectory => b / t,
    };
    Ok(numerator / (libm::sqrt(ratio * ref_var * traj_var) + SCORE_EPSILON))
}

/// `t' × B` matrix of raw dot products between node and token spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.values[t * self.cols + j]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.cols..(t + 1) * self.cols]
    }
}

/// Entry `(t, j)` is `δ_j · S_t`.
pub fn similarity_matrix(refs: &[SosFeature], traj: &[SosFeature]) -> Result<SimilarityMatrix> {
    check_inputs(refs, traj)?;
    let values = traj
        .iter()
        .flat_map(|s| refs.iter().map(move |r| dot(r.as_slice(), s.as_slice())))
        .collect();
    Ok(SimilarityMatrix {
        rows: traj.len(),
        cols: refs.len(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrajectory {
    pub nodes: Vec<NodeId>,
    pub features: Vec<SosFeature>,
    pub score: f64,
    pub similarity: SimilarityMatrix,
}

pub fn score_trajectory(nodes: Vec<NodeId>, features: Vec<SosFeature>, refs: &[SosFeature]) -> Result<ScoredTrajectory> {
    if nodes.len() != features.len() {
        return Err(Error::Shape {
            expected: (nodes.len(), 1),
            found: (features.len(), 1),
        });
    }
    let score = nav_score(refs, &features)?;
    let similarity = similarity_matrix(refs, &features)?;
    Ok(ScoredTrajectory {
        nodes,
        features,
        score,
        similarity,
    })
}

/// Normalized distance sum between a reference and a query trajectory:
///
/// `exp(-(Σ_{v∈R} min_{u∈Q} d(v,u) + Σ_{u∈Q} min_{v∈R} d(u,v)) / ((|R|+|Q|)/2 · d_success))`
pub fn nds(reference: &[NodeId], query: &[NodeId], geo: &GeoTable, d_success: f64) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyInput("reference trajectory"));
    }
    if query.is_empty() {
        return Err(Error::EmptyInput("query trajectory"));
    }
    if !(d_success > 0.0) {
        return Err(Error::Config("success distance must be positive".into()));
    }
    let nearest = |v: NodeId, set: &[NodeId]| -> Result<f64> {
        let mut best = f64::INFINITY;
        for &u in set {
            best = best.min(geo.distance(v, u)?);
        }
        Ok(best)
    };
    let mut total = 0.0;
    for &v in reference {
        total += nearest(v, query)?;
    }
    for &u in query {
        total += nearest(u, reference)?;
    }
    let scale = (reference.len() + query.len()) as f64 / 2.0 * d_success;
    Ok(libm::exp(-total / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{EnvGraph, PanoDims, Point};

    fn feat(values: &[f64]) -> SosFeature {
        SosFeature::from_values(1, values.len(), values.to_vec()).unwrap()
    }

    #[test]
    fn single_token_scores_zero() {
        let refs = [feat(&[1.0, 0.5])];
        let traj = [feat(&[1.0, 0.0]), feat(&[0.0, 1.0])];
        assert_eq!(nav_score(&refs, &traj).unwrap(), 0.0);
        // single node, too
        let refs = [feat(&[1.0, 0.0]), feat(&[0.0, 1.0])];
        assert_eq!(nav_score(&refs, &traj[..1]).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_identity_case() {
        // hand evaluation: means [.5,.5]; deviations ±[.5,-.5];
        // numerator = 1·0.5 + 0·(-0.5) + 0·(-0.5) + 1·0.5 = 1; summed squared
        // deviations 1 on each side; denominator sqrt(2/2 · 1 · 1) = 1
        let refs = [feat(&[1.0, 0.0]), feat(&[0.0, 1.0])];
        let s = nav_score(&refs, &refs).unwrap();
        assert!((s - 1.0 / (1.0 + SCORE_EPSILON)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = [feat(&[1.0, 0.0])];
        assert_eq!(nav_score(&[], &a), Err(Error::EmptyInput("reference features")));
        assert_eq!(nav_score(&a, &[]), Err(Error::EmptyInput("trajectory features")));
        assert!(matches!(nav_score(&a, &[feat(&[1.0])]), Err(Error::Shape { .. })));
        assert!(matches!(similarity_matrix(&a, &[feat(&[1.0])]), Err(Error::Shape { .. })));
    }

    #[test]
    fn similarity_base_case_and_orthogonality() {
        let m = similarity_matrix(&[feat(&[2.0, 1.0])], &[feat(&[3.0, 4.0])]).unwrap();
        assert_eq!((m.rows, m.cols), (1, 1));
        assert_eq!(m.get(0, 0), 10.0);
        let refs = [feat(&[1.0, 0.0, 0.0]), feat(&[0.0, 1.0, 0.0]), feat(&[0.0, 0.0, 1.0])];
        let m = similarity_matrix(&refs, &refs).unwrap();
        for t in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(t, j), if t == j { 1.0 } else { 0.0 });
            }
        }
    }

    fn line_env() -> (EnvGraph, GeoTable) {
        let positions = (0..4).map(|i| Point::new(3.0 * i as f64, 0.0)).collect();
        let edges = [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2)), (NodeId(2), NodeId(3))];
        let env = EnvGraph::from_parts(0, positions, &edges, Vec::new(), Vec::new(), 3, PanoDims::default()).unwrap();
        let geo = GeoTable::new(&env);
        (env, geo)
    }

    #[test]
    fn nds_cases() {
        let (_, geo) = line_env();
        let r = [NodeId(0), NodeId(1), NodeId(2)];
        assert_eq!(nds(&r, &r, &geo, 3.0).unwrap(), 1.0);
        // d(a,b) = 3, d_success = 3: exp(-(3+3)/(1·3))
        let v = nds(&[NodeId(0)], &[NodeId(1)], &geo, 3.0).unwrap();
        assert!((v - libm::exp(-2.0)).abs() < 1e-12);
        let far = nds(&[NodeId(0)], &[NodeId(3)], &geo, 3.0).unwrap();
        let near = nds(&[NodeId(0)], &[NodeId(2)], &geo, 3.0).unwrap();
        assert!(far < near && near < v && far > 0.0);
        assert!(nds(&[], &r, &geo, 3.0).is_err());
    }
}
