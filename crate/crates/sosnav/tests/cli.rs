//! The `sosnav` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sosnav::runner::{RunRecord, RunSummary};
use sosnav::study::StudyReport;

const BIN: &str = env!("CARGO_BIN_EXE_sosnav");

fn sosnav(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SOSNAV_SEED").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sosnav(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Environment plus `count` episodes in a fresh directory.
fn workspace(count: usize) -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen-env", "--seed", "21", "--out-dir", s(d)]);
    let env = d.join("env.json");
    ok(&["gen-episodes", "--env", s(&env), "--seed", "4", "--count", &count.to_string(), "--out-dir", s(d)]);
    let eps = d.join("episodes.json");
    (dir, env, eps)
}

#[test]
fn run_writes_records_summary_and_table() {
    let (dir, env, eps) = workspace(12);
    let out = dir.path().join("out");
    let table = ok(&["run", "--env", s(&env), "--episodes", s(&eps), "--seed", "1", "--out-dir", s(&out), "--snapshots"]);
    for name in ["oracle", "homing", "spatial", "spectral", "random"] {
        assert!(table.contains(name), "{table}");
    }
    let text = std::fs::read_to_string(out.join("results.jsonl")).unwrap();
    let records: Vec<RunRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 12 * 5);
    // episode-major order, policies in configuration order
    let ids: Vec<u64> = records.iter().map(|r| r.result.episode_id).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(records[0].policy, "oracle");
    assert!(records.iter().all(|r| r.schema_version == 1));

    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.policies.len(), 5);
    assert_eq!(summary.episodes, 12);
    assert_eq!(std::fs::read_to_string(out.join("snapshots.jsonl")).unwrap().lines().count(), 60);
    assert_eq!(std::fs::read_to_string(out.join("comparison.txt")).unwrap(), table);
}

#[test]
fn oracle_configuration_always_succeeds() {
    let (dir, env, eps) = workspace(25);
    let cfg = dir.path().join("oracle.toml");
    std::fs::write(
        &cfg,
        r#"schema_version = 1
[[policy]]
name = "all-oracle"
mode_selector = { kind = "oracle" }
explore = { kind = "oracle" }
exploit = "oracle"
stop = { kind = "oracle" }
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&["run", "--env", s(&env), "--episodes", s(&eps), "--config", s(&cfg), "--seed", "8", "--out-dir", s(&out)]);
    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.policies[0].metrics.sr, 1.0);
    assert_eq!(summary.policies[0].metrics.spl, 1.0);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let (dir, env, eps) = workspace(3);
    let out = sosnav(&["run", "--env", s(&env), "--episodes", s(&eps), "--seed", "1", "--policies", "spectral,warp"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warp") && err.contains("oracle, homing, spatial, spectral, random"), "{err}");

    // the seed is mandatory
    let out = sosnav(&["run", "--env", s(&env), "--episodes", s(&eps)]);
    assert_eq!(out.status.code(), Some(2));

    let text = std::fs::read_to_string(&env).unwrap();
    let old = dir.path().join("old.json");
    std::fs::write(&old, text.replacen("\"schema_version\": 1", "\"schema_version\": 0", 1)).unwrap();
    let out = sosnav(&["run", "--env", s(&old), "--episodes", s(&eps), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema version 0"));
}

#[test]
fn seed_can_come_from_the_environment() {
    let (dir, env, eps) = workspace(4);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["run", "--env", s(&env), "--episodes", s(&eps), "--seed", "6", "--out-dir", s(&a), "--policies", "random"]);
    let out = Command::new(BIN)
        .args(["run", "--env", s(&env), "--episodes", s(&eps), "--out-dir", s(&b)])
        .env("SOSNAV_SEED", "6")
        .env("SOSNAV_POLICIES", "random")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(a.join("results.jsonl")).unwrap(), std::fs::read(b.join("results.jsonl")).unwrap());
}

/// Average ranks by direct counting, then Pearson correlation of the ranks.
fn naive_spearman(x: &[f64], y: &[f64]) -> f64 {
    let ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let less = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn score_nds_study_outputs() {
    let (dir, env, eps) = workspace(15);
    let out = dir.path().join("study");
    ok(&["study-score-nds", "--env", s(&env), "--episodes", s(&eps), "--seed", "2", "--per-episode", "8", "--out-dir", s(&out)]);
    let rep: StudyReport = serde_json::from_str(&std::fs::read_to_string(out.join("score_nds.json")).unwrap()).unwrap();
    assert!(rep.points.iter().any(|p| p.nds == 1.0));
    let score: Vec<f64> = rep.points.iter().map(|p| p.score).collect();
    let nds: Vec<f64> = rep.points.iter().map(|p| p.nds).collect();
    assert!((rep.spearman - naive_spearman(&score, &nds)).abs() < 1e-9);

    let svg = std::fs::read_to_string(out.join("score_nds.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
    assert_eq!(circles, rep.points.len());
}

#[test]
fn similarity_heatmaps() {
    let (dir, env, eps) = workspace(3);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        ok(&["plot-simmatrix", "--env", s(&env), "--episodes", s(&eps), "--episode-id", "1", "--out-dir", s(d)]);
    }
    let svg = std::fs::read_to_string(a.join("simmatrix.svg")).unwrap();
    assert_eq!(svg.as_bytes(), std::fs::read(b.join("simmatrix.svg")).unwrap());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let cells = doc.descendants().find(|n| n.attribute("id") == Some("cells")).unwrap();
    assert!(cells.children().filter(|n| n.has_tag_name("rect")).count() > 0);

    ok(&["plot-simmatrix", "--env", s(&env), "--episodes", s(&eps), "--episode-id", "1", "--trajectory", "0,1", "--out-dir", s(&a)]);
    let out = sosnav(&["plot-simmatrix", "--env", s(&env), "--episodes", s(&eps), "--episode-id", "1", "--trajectory=", "--out-dir", s(&a)]);
    assert!(!out.status.success());
    let out = sosnav(&["plot-simmatrix", "--env", s(&env), "--episodes", s(&eps), "--episode-id", "999", "--out-dir", s(&a)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toy_heatmap_is_banded() {
    // the walked prefix shows tokens 1..m in order: node i's strongest
    // similarity is with token i
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["plot-simmatrix", "--toy-seed", "3", "--out-dir", s(d)]);
    let svg = std::fs::read_to_string(d.join("simmatrix.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let cells: Vec<(f64, f64, f64)> = doc
        .descendants()
        .filter(|n| n.has_tag_name("rect") && n.parent().and_then(|p| p.attribute("id")) == Some("cells"))
        .map(|n| {
            let v: f64 = n.children().find(|c| c.has_tag_name("title")).unwrap().text().unwrap().parse().unwrap();
            (n.attribute("y").unwrap().parse().unwrap(), n.attribute("x").unwrap().parse().unwrap(), v)
        })
        .collect();
    let mut rows: Vec<f64> = cells.iter().map(|c| c.0).collect();
    rows.dedup();
    let mut cols: Vec<f64> = cells.iter().map(|c| c.1).collect();
    cols.sort_by(f64::total_cmp);
    cols.dedup();
    assert!(rows.len() >= 2);
    for (i, &y) in rows.iter().enumerate() {
        let row: Vec<&(f64, f64, f64)> = cells.iter().filter(|c| c.0 == y).collect();
        let best = row.iter().max_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
        assert_eq!(best.1, cols[i], "row {i} peaks off the diagonal");
    }
}
