//! Segmenter-agnostic single-object tracking core.
//!
//! A proposer emits candidate masks with affinity and object scores each
//! frame. The tracker picks one using a weighted mix of affinity and the IoU
//! with a Kalman-predicted box, and conditions the proposer on a memory bank
//! that only admits frames whose scores pass a three-way gate. A synthetic
//! world with a memory-conditioned proposer exercises the whole loop, and
//! [`eval`] scores results with the usual one-pass benchmark metrics.

pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod memory;
pub mod motion;
pub mod selection;
pub mod simworld;
pub mod tracker;

pub use error::{EvalError, GeometryError, IoError, MemoryError, MotionError, SelectionError, SimError, TrackError};
pub use geometry::{iou, mask_to_bbox, BBox, RleMask};
pub use tracker::{track, TrackResult, TrackerConfig};
