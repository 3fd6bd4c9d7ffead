//! Run configuration: a TOML document listing the policies to compare.
//!
//! ```toml
//! schema_version = 1
//! eta = 64
//!
//! [[policy]]
//! name = "spectral"
//! mode_selector = { kind = "oracle" }
//! explore = { kind = "noisy_oracle", p_err = 0.3 }
//! exploit = "spectral"
//! stop = { kind = "oracle" }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sosnav_core::controller::{
    ExploitPolicy, ExplorePolicy, ModeSelector, PolicyConfig, StopRule, DEFAULT_ETA,
};

use crate::formats::SCHEMA_VERSION;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_eta")]
    pub eta: usize,
    #[serde(rename = "policy")]
    pub policies: Vec<PolicyConfig>,
}

fn default_eta() -> usize {
    DEFAULT_ETA
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, Error> {
        #[derive(Deserialize)]
        struct Probe {
            schema_version: Option<u32>,
        }
        let probe: Probe = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        if probe.schema_version != Some(SCHEMA_VERSION) {
            return Err(Error::SchemaVersion {
                path: origin.to_path_buf(),
                found: probe.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.policies.is_empty() {
            return Err(Error::Config("at least one [[policy]] is required".into()));
        }
        for (i, p) in self.policies.iter().enumerate() {
            if p.name.is_empty() {
                return Err(Error::Config(format!("policy #{} has an empty name", i + 1)));
            }
            if self.policies[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Config(format!("policy name `{}` appears twice", p.name)));
            }
            p.validate()?;
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.policies.iter().map(|p| p.name.clone()).collect()
    }

    /// Keep only the named policies, in the order given.
    pub fn select(&self, names: &[String]) -> Result<RunConfig, Error> {
        let mut policies = Vec::with_capacity(names.len());
        for name in names {
            let p = self
                .policies
                .iter()
                .find(|p| &p.name == name)
                .ok_or_else(|| Error::UnknownPolicy {
                    name: name.clone(),
                    valid: self.names(),
                })?;
            policies.push(p.clone());
        }
        let out = RunConfig {
            policies,
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }

    /// Every exploitation strategy behind a noisy oracle explorer, with the
    /// mode selector and stop rule held at their oracle settings.
    pub fn exploit_comparison(p_err: f64) -> Self {
        let policies = ExploitPolicy::ALL
            .iter()
            .map(|&exploit| PolicyConfig {
                name: exploit.name().to_string(),
                mode_selector: ModeSelector::Oracle,
                explore: ExplorePolicy::NoisyOracle { p_err },
                exploit,
                stop: StopRule::Oracle,
            })
            .collect();
        RunConfig {
            schema_version: SCHEMA_VERSION,
            eta: DEFAULT_ETA,
            policies,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::exploit_comparison(0.3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
schema_version = 1

[[policy]]
name = "meta"
mode_selector = { kind = "score_trend", patience = 2 }
explore = { kind = "greedy_sos" }
exploit = "spectral"

[[policy]]
name = "home"
mode_selector = { kind = "oracle" }
explore = { kind = "noisy_oracle", p_err = 0.3 }
exploit = "homing"
stop = { kind = "spectral", threshold = 0.5 }
"#;

    #[test]
    fn parses_sample() {
        let cfg = RunConfig::parse(SAMPLE, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.eta, DEFAULT_ETA);
        assert_eq!(cfg.names(), ["meta", "home"]);
        assert_eq!(cfg.policies[0].stop, StopRule::default());
        assert_eq!(cfg.policies[0].mode_selector, ModeSelector::ScoreTrend { patience: 2 });
    }

    #[test]
    fn unknown_selection_lists_valid_names() {
        let cfg = RunConfig::parse(SAMPLE, Path::new("x.toml")).unwrap();
        let msg = cfg.select(&["nope".into()]).unwrap_err().to_string();
        assert!(msg.contains("nope") && msg.contains("meta, home"), "{msg}");
        assert_eq!(cfg.select(&["home".into()]).unwrap().names(), ["home"]);
    }

    #[test]
    fn unknown_exploit_lists_variants() {
        let text = SAMPLE.replace("\"homing\"", "\"teleport\"");
        let msg = RunConfig::parse(&text, Path::new("x.toml")).unwrap_err().to_string();
        assert!(msg.contains("teleport") && msg.contains("spectral"), "{msg}");
    }

    #[test]
    fn wrong_version_refused() {
        let text = SAMPLE.replace("schema_version = 1", "schema_version = 7");
        let err = RunConfig::parse(&text, Path::new("x.toml")).unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { found: Some(7), .. }));
    }

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text, Path::new("d.toml")).unwrap(), cfg);
    }
}
