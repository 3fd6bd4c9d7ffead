//! Versioned on-disk formats.
//!
//! Environment and episode files are single JSON documents; results are
//! JSON lines. Every document and record carries `schema_version`. Floats
//! are written in scientific notation with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sosnav_core::env_model::{EnvGraph, Episode};

use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// serde_json formatter writing every `f64` as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedDigits<F = serde_json::ser::CompactFormatter>(pub F);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {$(
        fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        }
    )*};
}

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for FixedDigits<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward! {
        begin_array(), end_array(),
        begin_array_value(first: bool), end_array_value(),
        begin_object(), end_object(),
        begin_object_key(first: bool), end_object_key(),
        begin_object_value(), end_object_value(),
    }
}

/// Serialize `value` as one compact line.
pub fn to_line<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(serde_json::ser::CompactFormatter));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Serialize `value` as an indented document.
pub fn to_document<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut buf = Vec::new();
    let fmt = FixedDigits(serde_json::ser::PrettyFormatter::with_indent(b"  "));
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

fn read_versioned<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let probe: VersionProbe = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    match probe.schema_version {
        Some(SCHEMA_VERSION) => serde_json::from_str(&text).map_err(|e| Error::parse(path, e)),
        found => Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            found,
            expected: SCHEMA_VERSION,
        }),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvFile {
    pub schema_version: u32,
    pub env: EnvGraph,
}

impl EnvFile {
    pub fn new(env: EnvGraph) -> Self {
        EnvFile {
            schema_version: SCHEMA_VERSION,
            env,
        }
    }

    /// Load and validate; disconnected environments are rejected.
    pub fn load(path: &Path) -> Result<EnvGraph, Error> {
        let file: EnvFile = read_versioned(path)?;
        if !file.env.is_connected() {
            return Err(Error::Invalid {
                path: path.to_path_buf(),
                reason: "environment graph is not connected".into(),
            });
        }
        Ok(file.env)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        write_text(path, &to_document(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeFile {
    pub schema_version: u32,
    pub env_id: u64,
    pub episodes: Vec<Episode>,
}

impl EpisodeFile {
    pub fn new(env_id: u64, episodes: Vec<Episode>) -> Self {
        EpisodeFile {
            schema_version: SCHEMA_VERSION,
            env_id,
            episodes,
        }
    }

    /// Load and check every episode against `env`.
    pub fn load(path: &Path, env: &EnvGraph) -> Result<Vec<Episode>, Error> {
        let file: EpisodeFile = read_versioned(path)?;
        let invalid = |reason: String| Error::Invalid {
            path: path.to_path_buf(),
            reason,
        };
        if file.env_id != env.id() {
            return Err(invalid(format!(
                "episodes were generated for environment {}, not {}",
                file.env_id,
                env.id()
            )));
        }
        for ep in &file.episodes {
            let nodes_ok = ep.gt_path.iter().all(|&v| env.contains(v))
                && ep.gt_path.first() == Some(&ep.start)
                && ep.gt_path.last() == Some(&ep.goal)
                && ep.gt_path.windows(2).all(|w| env.edge_weight(w[0], w[1]).is_some());
            if !nodes_ok {
                return Err(invalid(format!("episode {} has an invalid ground-truth path", ep.id)));
            }
            let k = env.category_count();
            if ep.instruction.tokens.is_empty() || ep.instruction.tokens.iter().any(|&t| t >= k) {
                return Err(invalid(format!("episode {} has invalid instruction tokens", ep.id)));
            }
        }
        Ok(file.episodes)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        write_text(path, &to_document(self)?)
    }
}

/// Default file names inside an output directory.
pub fn env_path(dir: &Path) -> PathBuf {
    dir.join("env.json")
}

pub fn episodes_path(dir: &Path) -> PathBuf {
    dir.join("episodes.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(to_line(&0.1f64).unwrap(), "1.0000000000000001e-1");
        assert_eq!(to_line(&vec![1.0f64, -2.5]).unwrap(), "[1.0000000000000000e0,-2.5000000000000000e0]");
        let x = std::f64::consts::PI / 7.0;
        let back: f64 = serde_json::from_str(&to_line(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }
}
