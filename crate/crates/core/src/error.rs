use alloc::string::String;

use crate::graph::NodeId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no path between {from} and {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("no statistics for category {0}")]
    MissingStats(usize),
    #[error("bounding box has zero area")]
    DegenerateBox,
    #[error("bounding box lies outside the image")]
    BoxOutOfBounds,
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("control error: {0}")]
    Control(String),
    #[error("invalid environment: {0}")]
    InvalidEnv(String),
}
