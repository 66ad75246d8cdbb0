//! Replays candidate masks precomputed by an external segmenter.
//!
//! The file is JSON lines, one object per frame:
//!
//! ```text
//! {"frame": 1, "candidates": [{"rle": "64 48: 100 12 52 12 ...", "s_mask": 0.9, "s_obj": 3.1}]}
//! ```
//!
//! `rle` uses the text form of [`RleMask`]. Frames without a line get no
//! candidates; frames past the last line end the sequence. A replayed source
//! cannot react to the memory bank, so only selection and the recorded bank
//! contents differ between configurations.

use std::path::Path;

use serde::Deserialize;

use crate::error::{IoError, TrackError};
use crate::geometry::RleMask;
use crate::memory::MemoryBank;
use crate::selection::CandidateMask;
use crate::simworld::FrameProposals;
use crate::tracker::ProposalSource;

use super::read_text;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateLine {
    rle: String,
    s_mask: f64,
    s_obj: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameLine {
    frame: usize,
    candidates: Vec<CandidateLine>,
}

#[derive(Debug, Clone)]
pub struct ReplaySource {
    frames: Vec<Vec<CandidateMask>>,
    num_frames: usize,
}

impl ReplaySource {
    /// Parses candidate text for a sequence of `num_frames` frames.
    pub fn parse(text: &str, path: &str, num_frames: usize) -> Result<Self, IoError> {
        let err = |line: usize, msg: String| IoError::Parse {
            path: path.to_string(),
            line,
            msg,
        };
        let mut frames: Vec<Vec<CandidateMask>> = Vec::new();
        let mut last: Option<usize> = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fl: FrameLine = serde_json::from_str(line).map_err(|e| err(i + 1, e.to_string()))?;
            if last.is_some_and(|l| fl.frame <= l) {
                return Err(err(i + 1, format!("frame {} out of order", fl.frame)));
            }
            if fl.frame >= num_frames {
                return Err(err(i + 1, format!("frame {} beyond the {num_frames}-frame sequence", fl.frame)));
            }
            last = Some(fl.frame);
            let cands = fl
                .candidates
                .into_iter()
                .map(|c| {
                    let mask: RleMask = c.rle.parse().map_err(|e| err(i + 1, format!("{e}")))?;
                    if !(c.s_mask.is_finite() && c.s_obj.is_finite()) {
                        return Err(err(i + 1, "non-finite score".into()));
                    }
                    Ok(CandidateMask::new(mask, c.s_mask, c.s_obj))
                })
                .collect::<Result<Vec<_>, _>>()?;
            frames.resize(fl.frame, Vec::new());
            frames.push(cands);
        }
        Ok(ReplaySource { frames, num_frames })
    }

    pub fn load(path: &Path, num_frames: usize) -> Result<Self, IoError> {
        Self::parse(&read_text(path)?, &path.display().to_string(), num_frames)
    }
}

impl ProposalSource for ReplaySource {
    fn num_frames(&self) -> usize {
        self.num_frames
    }

    fn prompt_appearance(&self) -> Vec<f64> {
        Vec::new()
    }

    fn propose(&mut self, frame: usize, _bank: &MemoryBank<'_>) -> Result<Option<FrameProposals>, TrackError> {
        Ok(self.frames.get(frame).map(|c| FrameProposals { candidates: c.clone() }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::tracker::{track, TrackerConfig};

    fn rect_line(frame: usize, x0: i64, score: f64) -> String {
        let m = RleMask::from_rect(32, 32, x0, 4, x0 + 5, 9);
        format!(r#"{{"frame": {frame}, "candidates": [{{"rle": "{m}", "s_mask": {score}, "s_obj": 2.0}}]}}"#)
    }

    #[test]
    fn replays_and_tracks() {
        let text: String = (1..6).map(|t| rect_line(t, 2 + t as i64, 0.9) + "\n").collect();
        let mut src = ReplaySource::parse(&text, "c", 6).unwrap();
        let first = BBox::from_pixel_bounds(2, 4, 7, 9);
        let res = track(&mut src, first, &TrackerConfig::full(), "r").unwrap();
        assert_eq!(res.frames.len(), 6);
        assert_eq!(res.frames[5].chosen_box, BBox::from_pixel_bounds(7, 4, 12, 9));
    }

    #[test]
    fn gaps_mean_no_candidates_and_short_file_truncates() {
        let text = format!("{}\n{}\n", rect_line(1, 3, 0.9), rect_line(3, 5, 0.9));
        let mut src = ReplaySource::parse(&text, "c", 4).unwrap();
        let first = BBox::from_pixel_bounds(2, 4, 7, 9);
        let res = track(&mut src, first, &TrackerConfig::full(), "r").unwrap();
        assert!(res.frames[2].target_absent);
        let mut src = ReplaySource::parse(&text, "c", 6).unwrap();
        assert!(matches!(
            track(&mut src, first, &TrackerConfig::full(), "r"),
            Err(TrackError::Truncated { frame: 4, .. })
        ));
    }

    #[test]
    fn rejects_bad_lines() {
        let bad_order = format!("{}\n{}\n", rect_line(2, 3, 0.9), rect_line(1, 3, 0.9));
        assert!(matches!(ReplaySource::parse(&bad_order, "c", 5), Err(IoError::Parse { line: 2, .. })));
        assert!(ReplaySource::parse(&rect_line(9, 3, 0.9), "c", 5).is_err());
        let bad_rle = r#"{"frame": 1, "candidates": [{"rle": "4 4: 3", "s_mask": 1, "s_obj": 1}]}"#;
        assert!(ReplaySource::parse(bad_rle, "c", 5).is_err());
    }
}
