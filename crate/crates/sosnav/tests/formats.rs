//! On-disk format round trips and validation.

use sosnav::formats::{to_line, EnvFile, EpisodeFile, SCHEMA_VERSION};
use sosnav::runner::RunRecord;
use sosnav::Error;
use sosnav_core::env_model::{generate_env, generate_episode, EnvGraph, GeneratorParams, PanoDims, Point};
use sosnav_core::NodeId;

fn env(seed: u64) -> EnvGraph {
    generate_env(seed, &GeneratorParams::default()).unwrap()
}

#[test]
fn env_round_trip_is_lossless_and_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    EnvFile::new(env(4)).save(&a).unwrap();
    EnvFile::new(env(4)).save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(EnvFile::load(&a).unwrap(), env(4));
}

#[test]
fn episodes_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eps.json");
    let e = env(2);
    let eps: Vec<_> = (0..5).map(|i| generate_episode(&e, i).unwrap()).collect();
    EpisodeFile::new(e.id(), eps.clone()).save(&path).unwrap();
    assert_eq!(EpisodeFile::load(&path, &e).unwrap(), eps);
    // episodes belong to one environment only
    assert!(matches!(EpisodeFile::load(&path, &env(3)), Err(Error::Invalid { .. })));
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    EnvFile::new(env(1)).save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let number = regex_free_first_float(&text);
    let mantissa = number.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.replace('.', "").len(), 17, "{number}");
}

fn regex_free_first_float(text: &str) -> &str {
    let start = text.find("\"x\": ").unwrap() + 5;
    let end = start + text[start..].find([',', '\n']).unwrap();
    &text[start..end]
}

#[test]
fn schema_version_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    EnvFile::new(env(1)).save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"schema_version\": 1", "\"schema_version\": 9", 1)).unwrap();
    let err = EnvFile::load(&path).unwrap_err();
    assert!(matches!(err, Error::SchemaVersion { found: Some(9), expected: SCHEMA_VERSION, .. }));
    assert!(err.to_string().contains("schema version 9"));

    std::fs::write(&path, text.replacen("\"schema_version\": 1,", "", 1)).unwrap();
    assert!(matches!(EnvFile::load(&path), Err(Error::SchemaVersion { found: None, .. })));
}

#[test]
fn disconnected_environment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    let split = EnvGraph::from_parts(
        9,
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(5.0, 0.0)],
        &[(NodeId(0), NodeId(1))],
        Vec::new(),
        Vec::new(),
        2,
        PanoDims::default(),
    )
    .unwrap();
    EnvFile::new(split).save(&path).unwrap();
    let err = EnvFile::load(&path).unwrap_err();
    assert!(err.to_string().contains("not connected"), "{err}");
}

#[test]
fn result_records_carry_their_schema_version() {
    use sosnav_core::controller::{run_episode, PolicyConfig, Scene};
    let e = env(5);
    let mut ep = generate_episode(&e, 0).unwrap();
    ep.id = 3;
    let scene = Scene::new(e, 64).unwrap();
    let result = run_episode(&scene, &ep, &PolicyConfig::oracle("o"), 1).unwrap();
    let line = to_line(&RunRecord {
        schema_version: SCHEMA_VERSION,
        policy: "o".into(),
        result,
    })
    .unwrap();
    assert!(line.starts_with("{\"schema_version\":1,\"policy\":\"o\",\"episode_id\":3,"), "{line}");
    let back: RunRecord = serde_json::from_str(&line).unwrap();
    assert_eq!(to_line(&back).unwrap(), line);
}

#[test]
fn shipped_configurations_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = sosnav::config::RunConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
        assert!(!cfg.policies.is_empty());
        seen += 1;
    }
    assert_eq!(seen, 3);
    let cmp = sosnav::config::RunConfig::load(&dir.join("exploit_comparison.toml")).unwrap();
    assert_eq!(cmp, sosnav::config::RunConfig::exploit_comparison(0.3));
}
