//! Benchmark-style ground-truth files.
//!
//! One `x,y,w,h` line per frame in top-left pixel format. A line with zero
//! width or height marks the target absent. An optional companion file holds
//! one `0`/`1` flag per frame, where `1` marks the frame absent regardless of
//! the box on that line.

use std::path::Path;

use crate::error::IoError;
use crate::eval::FramePair;
use crate::geometry::BBox;

use super::{read_text, write_text};

/// Ground truth of one sequence. Absent frames hold [`BBox::EMPTY`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub boxes: Vec<BBox>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn is_absent(&self, t: usize) -> bool {
        self.boxes[t].empty
    }

    /// Pairs predictions with this ground truth frame by frame.
    pub fn pairs(&self, predictions: &[BBox]) -> Option<Vec<FramePair>> {
        if predictions.len() != self.boxes.len() {
            return None;
        }
        Some(
            predictions
                .iter()
                .zip(&self.boxes)
                .map(|(&pred, &gt)| FramePair {
                    pred,
                    gt,
                    gt_absent: gt.empty,
                })
                .collect(),
        )
    }
}

/// Non-empty lines, with blank lines allowed only at the end of the file.
fn content_lines<'a>(text: &'a str, path: &str) -> Result<Vec<&'a str>, IoError> {
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    let end = lines.iter().rposition(|l| !l.is_empty()).map_or(0, |i| i + 1);
    if let Some(i) = lines[..end].iter().position(|l| l.is_empty()) {
        return Err(IoError::Parse {
            path: path.to_string(),
            line: i + 1,
            msg: "blank line".into(),
        });
    }
    Ok(lines[..end].to_vec())
}

/// Parses ground-truth text. `path` only labels errors.
pub fn parse_gt_str(text: &str, path: &str) -> Result<Vec<BBox>, IoError> {
    let err = |line: usize, msg: String| IoError::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    content_lines(text, path)?
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(err(i + 1, format!("expected 4 comma-separated fields, found {}", fields.len())));
            }
            let mut v = [0.0; 4];
            for (k, f) in fields.iter().enumerate() {
                let f = f.trim();
                v[k] = f
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(i + 1, format!("field {}: not a number: {f:?}", k + 1)))?;
            }
            let [x, y, w, h] = v;
            if w < 0.0 || h < 0.0 {
                return Err(err(i + 1, format!("negative size {w}x{h}")));
            }
            Ok(if w == 0.0 || h == 0.0 {
                BBox::EMPTY
            } else {
                BBox::from_top_left(x, y, w, h)
            })
        })
        .collect()
}

/// Parses absence flags, one `0` or `1` per line.
pub fn parse_absent_str(text: &str, path: &str) -> Result<Vec<bool>, IoError> {
    content_lines(text, path)?
        .iter()
        .enumerate()
        .map(|(i, line)| match line.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(IoError::Parse {
                path: path.to_string(),
                line: i + 1,
                msg: format!("expected 0 or 1, found {other:?}"),
            }),
        })
        .collect()
}

/// Writes boxes in top-left format; empty boxes become `0,0,0,0`.
pub fn format_gt(boxes: &[BBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        let [x, y, w, h] = b.to_top_left();
        out.push_str(&format!("{x},{y},{w},{h}\n"));
    }
    out
}

pub fn format_absent(flags: &[bool]) -> String {
    flags.iter().map(|&a| if a { "1\n" } else { "0\n" }).collect()
}

/// Reads a ground-truth file and, if given, its absence flags.
pub fn load_gt(gt_path: &Path, absent_path: Option<&Path>) -> Result<GroundTruth, IoError> {
    let label = gt_path.display().to_string();
    let mut boxes = parse_gt_str(&read_text(gt_path)?, &label)?;
    if let Some(ap) = absent_path {
        let flags = parse_absent_str(&read_text(ap)?, &ap.display().to_string())?;
        if flags.len() != boxes.len() {
            return Err(IoError::Schema {
                path: ap.display().to_string(),
                msg: format!("{} absence flags for {} ground-truth lines", flags.len(), boxes.len()),
            });
        }
        for (b, a) in boxes.iter_mut().zip(flags) {
            if a {
                *b = BBox::EMPTY;
            }
        }
    }
    Ok(GroundTruth { boxes })
}

pub const GT_FILE: &str = "gt.txt";
pub const ABSENT_FILE: &str = "absent.txt";
pub const META_FILE: &str = "meta.json";

/// Reads `gt.txt` from a sequence directory, plus `absent.txt` when present.
pub fn load_sequence_dir(dir: &Path) -> Result<GroundTruth, IoError> {
    let absent = dir.join(ABSENT_FILE);
    load_gt(&dir.join(GT_FILE), absent.exists().then_some(absent.as_path()))
}

/// Writes `gt.txt` with every box (occluded ones included) and `absent.txt`.
pub fn write_sequence_files(dir: &Path, boxes: &[BBox], absent: &[bool]) -> Result<(), IoError> {
    write_text(&dir.join(GT_FILE), &format_gt(boxes))?;
    write_text(&dir.join(ABSENT_FILE), &format_absent(absent))
}
