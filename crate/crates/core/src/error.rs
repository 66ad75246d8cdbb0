use thiserror::Error;

use crate::tracker::TrackResult;

/// Errors produced by the geometry primitives and the RLE codec.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("run lengths sum to {actual}, expected grid_w*grid_h = {expected}")]
    RunSumMismatch { expected: u64, actual: u64 },
    #[error("malformed RLE text: {0}")]
    RleSyntax(String),
    #[error("bitmap has {actual} pixels, expected {expected}")]
    BitmapSize { expected: usize, actual: usize },
    #[error("distance is undefined for an empty box")]
    EmptyBox,
    #[error("reference box must have positive width and height")]
    DegenerateReference,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("cannot initialize a Kalman state from an empty box")]
    EmptyBox,
    #[error("measurement is not finite: {0:?}")]
    NonFiniteMeasurement([f64; 4]),
    #[error("innovation covariance is not positive definite")]
    SingularInnovation,
    #[error("invalid motion config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("{candidates} candidates but {scores} KF-IoU scores")]
    LengthMismatch { candidates: usize, scores: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MemoryError {
    #[error("frame {frame} already recorded or out of order (last recorded frame {last})")]
    DuplicateFrame { frame: usize, last: usize },
    #[error("history must start with the prompt frame")]
    MissingPrompt,
    #[error("invalid memory gate: {0}")]
    InvalidGate(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// Every violation found while validating a scenario, one per entry.
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    InvalidScenario(Vec<String>),
    #[error("frame {frame} is outside the sequence (num_frames = {num_frames})")]
    FrameOutOfRange { frame: usize, num_frames: usize },
    #[error("memory bank is empty")]
    EmptyBank,
}

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("first-frame box is empty")]
    EmptyPrompt,
    #[error("invalid tracker config: {0}")]
    InvalidConfig(String),
    /// The proposal source stopped before the last frame. Carries every frame
    /// processed so far.
    #[error("proposal source exhausted at frame {frame} of {expected}")]
    Truncated {
        frame: usize,
        expected: usize,
        partial: Box<TrackResult>,
    },
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot evaluate an empty frame list")]
    Empty,
    #[error("sequence {sequence}: {results} result frames but {gt} ground-truth frames")]
    FrameCountMismatch {
        sequence: String,
        results: usize,
        gt: usize,
    },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
}
