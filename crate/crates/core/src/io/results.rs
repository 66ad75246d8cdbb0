//! Per-frame result files and the run manifest.
//!
//! A result file is JSON lines: a header with the sequence id and tracker
//! config, then one line per frame. Boxes are stored in center format as
//! `[cx, cy, w, h]`, or `null` when the tracker reported the target absent.
//! Timing is kept out of result files so reruns compare byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::geometry::BBox;
use crate::tracker::{FrameRecord, TrackResult, TrackerConfig};

use super::{canonical_json, config_hash, read_text, write_text};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultHeader {
    pub sequence_id: String,
    /// Ablation cell label, or `run` outside an ablation.
    pub label: String,
    pub config: TrackerConfig,
    pub config_hash: String,
    pub num_frames: usize,
}

impl ResultHeader {
    pub fn new(result: &TrackResult, label: &str) -> Self {
        ResultHeader {
            sequence_id: result.sequence_id.clone(),
            label: label.to_string(),
            config: result.config,
            config_hash: config_hash(&result.config),
            num_frames: result.frames.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameLine {
    frame: usize,
    #[serde(rename = "box")]
    bbox: Option<[f64; 4]>,
    target_absent: bool,
    s_mask: f64,
    s_obj: f64,
    s_kf: f64,
    hybrid_score: f64,
    bank: Vec<usize>,
}

impl From<&FrameRecord> for FrameLine {
    fn from(r: &FrameRecord) -> Self {
        let b = r.chosen_box;
        FrameLine {
            frame: r.frame,
            bbox: (!b.empty).then_some([b.cx, b.cy, b.w, b.h]),
            target_absent: r.target_absent,
            s_mask: r.s_mask,
            s_obj: r.s_obj,
            s_kf: r.s_kf,
            hybrid_score: r.hybrid_score,
            bank: r.bank_frames.clone(),
        }
    }
}

impl From<FrameLine> for FrameRecord {
    fn from(l: FrameLine) -> Self {
        FrameRecord {
            frame: l.frame,
            chosen_box: l.bbox.map_or(BBox::EMPTY, |[cx, cy, w, h]| BBox::new(cx, cy, w, h)),
            target_absent: l.target_absent,
            s_mask: l.s_mask,
            s_obj: l.s_obj,
            s_kf: l.s_kf,
            hybrid_score: l.hybrid_score,
            bank_frames: l.bank,
        }
    }
}

pub fn format_result(result: &TrackResult, label: &str) -> String {
    let mut out = canonical_json(&ResultHeader::new(result, label));
    out.push('\n');
    for r in &result.frames {
        out.push_str(&canonical_json(&FrameLine::from(r)));
        out.push('\n');
    }
    out
}

pub fn write_result(path: &Path, result: &TrackResult, label: &str) -> Result<(), IoError> {
    write_text(path, &format_result(result, label))
}

/// Reads a result file back. Wall times are not stored, so the returned
/// result has none.
pub fn read_result(path: &Path) -> Result<(ResultHeader, TrackResult), IoError> {
    let label = path.display().to_string();
    let text = read_text(path)?;
    let parse_err = |line: usize, e: serde_json::Error| IoError::Parse {
        path: label.clone(),
        line,
        msg: e.to_string(),
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, first)) = lines.next() else {
        return Err(IoError::Schema {
            path: label,
            msg: "empty result file".into(),
        });
    };
    let header: ResultHeader = serde_json::from_str(first).map_err(|e| parse_err(1, e))?;
    let frames = lines
        .map(|(i, l)| {
            serde_json::from_str::<FrameLine>(l)
                .map(FrameRecord::from)
                .map_err(|e| parse_err(i + 1, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if frames.len() != header.num_frames {
        return Err(IoError::Schema {
            path: label,
            msg: format!("header declares {} frames, file has {}", header.num_frames, frames.len()),
        });
    }
    let result = TrackResult {
        sequence_id: header.sequence_id.clone(),
        config: header.config,
        frames,
        wall_time_ns: Vec::new(),
    };
    Ok((header, result))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One (sequence, seed, cell) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    /// Scenario file, suite member or replay id the run came from.
    pub source: String,
    pub sequence_id: Option<String>,
    pub seed: Option<u64>,
    pub config_hash: String,
    /// Result file relative to the manifest's directory.
    pub result: Option<String>,
    pub status: RunStatus,
    pub error: Option<String>,
}

/// Wall-clock figures. The only part of a run's output that varies between
/// identical reruns.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub frames: usize,
    pub frames_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Hash of the whole run config.
    pub config_hash: String,
    pub entries: Vec<ManifestEntry>,
    pub timing: Timing,
}

impl Manifest {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.status == RunStatus::Failed).count()
    }
}
