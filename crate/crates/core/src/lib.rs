//! Navigation-graph simulation with spectral object features.
//!
//! The crate covers procedural environments and panoramic object masks
//! ([`env_model`]), scene object spectra ([`sos_features`]), trajectory
//! scoring against an instruction ([`nav_scoring`]), the agent-side map
//! ([`topo_map`]), the explore/exploit control loop ([`controller`]),
//! evaluation metrics ([`metrics`]) and trajectory augmentation
//! ([`data_aug`]).
//!
//! Everything here is `no_std` with `alloc`; file formats, configuration
//! and the command-line surface live in the `sosnav` crate.
#![no_std]

extern crate alloc;

pub mod controller;
pub mod data_aug;
pub mod env_model;
mod error;
pub mod fft;
pub mod graph;
pub mod metrics;
pub mod nav_scoring;
pub mod rng;
pub mod sos_features;
pub mod stats;
pub mod topo_map;

pub use error::{Error, Result};
pub use graph::NodeId;

/// `x` reduced to `[0, 2π)`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let r = libm::fmod(x, core::f64::consts::TAU);
    if r < 0.0 {
        r + core::f64::consts::TAU
    } else {
        r
    }
}
