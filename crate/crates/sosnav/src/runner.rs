//! Batch execution of (episode × policy) pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sosnav_core::controller::{Agent, Scene};
use sosnav_core::env_model::Episode;
use sosnav_core::metrics::{EpisodeResult, MetricSummary};
use sosnav_core::topo_map::MapSnapshot;

use crate::config::RunConfig;
use crate::formats::{to_line, SCHEMA_VERSION};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub policy: String,
    #[serde(flatten)]
    pub result: EpisodeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub schema_version: u32,
    pub policy: String,
    pub episode_id: u64,
    pub map: MapSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    #[serde(flatten)]
    pub metrics: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub episodes: usize,
    pub policies: Vec<PolicySummary>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Ordered by episode id, then by policy order in the configuration.
    pub records: Vec<RunRecord>,
    pub snapshots: Vec<SnapshotRecord>,
    pub summary: RunSummary,
}

impl RunOutput {
    /// The results stream: one JSON line per record.
    pub fn results_jsonl(&self) -> Result<String, Error> {
        lines(&self.records)
    }

    pub fn snapshots_jsonl(&self) -> Result<String, Error> {
        lines(&self.snapshots)
    }
}

fn lines<T: Serialize>(items: &[T]) -> Result<String, Error> {
    let mut out = String::new();
    for item in items {
        out.push_str(&to_line(item)?);
        out.push('\n');
    }
    Ok(out)
}

/// Thread pool with `jobs` workers, or rayon's default when `jobs` is 0.
pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Run every configured policy on every episode. Output order does not
/// depend on scheduling.
pub fn run_suite(
    scene: &Scene,
    episodes: &[Episode],
    cfg: &RunConfig,
    seed: u64,
    keep_snapshots: bool,
) -> Result<RunOutput, Error> {
    cfg.validate()?;
    if episodes.is_empty() {
        return Err(sosnav_core::Error::EmptyInput("episodes").into());
    }
    let mut order: Vec<&Episode> = episodes.iter().collect();
    order.sort_by_key(|ep| ep.id);
    let pairs: Vec<(&Episode, usize)> = order
        .iter()
        .flat_map(|&ep| (0..cfg.policies.len()).map(move |p| (ep, p)))
        .collect();

    let outcomes = pairs
        .par_iter()
        .map(|&(ep, p)| {
            let policy = &cfg.policies[p];
            let mut agent = Agent::new(scene, ep, policy, seed)?;
            while agent.step()? {}
            let map = keep_snapshots.then(|| agent.state().map.snapshot());
            Ok((agent.finish()?, map))
        })
        .collect::<Result<Vec<_>, sosnav_core::Error>>()?;

    let mut records = Vec::with_capacity(outcomes.len());
    let mut snapshots = Vec::new();
    for (&(ep, p), (result, map)) in pairs.iter().zip(outcomes) {
        let policy = cfg.policies[p].name.clone();
        if let Some(map) = map {
            snapshots.push(SnapshotRecord {
                schema_version: SCHEMA_VERSION,
                policy: policy.clone(),
                episode_id: ep.id,
                map,
            });
        }
        records.push(RunRecord {
            schema_version: SCHEMA_VERSION,
            policy,
            result,
        });
    }

    let policies = cfg
        .policies
        .iter()
        .map(|p| {
            let results: Vec<EpisodeResult> = records
                .iter()
                .filter(|r| r.policy == p.name)
                .map(|r| r.result.clone())
                .collect();
            Ok(PolicySummary {
                policy: p.name.clone(),
                metrics: MetricSummary::from_results(&results)?,
            })
        })
        .collect::<Result<Vec<_>, sosnav_core::Error>>()?;

    Ok(RunOutput {
        records,
        snapshots,
        summary: RunSummary {
            schema_version: SCHEMA_VERSION,
            seed,
            episodes: episodes.len(),
            policies,
        },
    })
}

/// Plain-text comparison table, rates in percent.
pub fn comparison_table(summary: &RunSummary) -> String {
    let width = summary
        .policies
        .iter()
        .map(|p| p.policy.len())
        .max()
        .unwrap_or(0)
        .max("policy".len());
    let mut out = format!(
        "{:<width$}  {:>6}  {:>6}  {:>6}  {:>7}  {:>6}  {:>6}  {:>6}\n",
        "policy", "SR", "SPL", "OSR", "TL", "NE", "FSR", "FSPL"
    );
    for p in &summary.policies {
        let m = &p.metrics;
        out.push_str(&format!(
            "{:<width$}  {:>6.2}  {:>6.2}  {:>6.2}  {:>7.2}  {:>6.2}  {:>6.2}  {:>6.2}\n",
            p.policy,
            100.0 * m.sr,
            100.0 * m.spl,
            100.0 * m.osr,
            m.tl,
            m.ne,
            100.0 * m.fsr,
            100.0 * m.fspl
        ));
    }
    out
}
