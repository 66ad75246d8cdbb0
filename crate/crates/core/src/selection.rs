//! Per-frame choice of the output mask among the proposer's candidates.

use crate::error::SelectionError;
use crate::geometry::{mask_to_bbox, BBox, RleMask};

/// One proposer output.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMask {
    pub mask: RleMask,
    /// Affinity (predicted mask quality) in `[0, 1]`.
    pub s_mask: f64,
    /// Object-presence logit; positive means present.
    pub s_obj: f64,
    /// Latent appearance of the source object. Empty for external proposers.
    pub appearance: Vec<f64>,
}

impl CandidateMask {
    pub fn new(mask: RleMask, s_mask: f64, s_obj: f64) -> Self {
        CandidateMask {
            mask,
            s_mask,
            s_obj,
            appearance: Vec::new(),
        }
    }

    pub fn with_appearance(mut self, appearance: Vec<f64>) -> Self {
        self.appearance = appearance;
        self
    }

    fn present(&self) -> bool {
        self.s_obj > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub chosen_index: Option<usize>,
    pub chosen_box: BBox,
    pub s_mask: f64,
    pub s_obj: f64,
    pub s_kf: f64,
    pub hybrid_score: f64,
    pub target_absent: bool,
}

impl SelectionOutcome {
    /// Absent outcome carrying the scores of the most object-like candidate
    /// that was seen, or zeros when there were no candidates at all.
    fn absent(candidates: &[CandidateMask], kf_scores: Option<&[f64]>) -> Self {
        let best = candidates
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |acc, (i, c)| match acc {
                Some((_, s)) if s >= c.s_obj => acc,
                _ => Some((i, c.s_obj)),
            });
        let (s_mask, s_obj, s_kf) = match best {
            Some((i, _)) => (
                candidates[i].s_mask,
                candidates[i].s_obj,
                kf_scores.map_or(0.0, |k| k[i]),
            ),
            None => (0.0, 0.0, 0.0),
        };
        SelectionOutcome {
            chosen_index: None,
            chosen_box: BBox::EMPTY,
            s_mask,
            s_obj,
            s_kf,
            hybrid_score: 0.0,
            target_absent: true,
        }
    }
}

/// Index of the gated candidate with the highest score; ties go to the lowest
/// index.
fn gated_argmax(candidates: &[CandidateMask], score: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if !c.present() {
            continue;
        }
        let s = score(i);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}

/// Highest affinity among candidates whose object logit is positive.
pub fn select_baseline(candidates: &[CandidateMask]) -> SelectionOutcome {
    match gated_argmax(candidates, |i| candidates[i].s_mask) {
        Some((i, s)) => SelectionOutcome {
            chosen_index: Some(i),
            chosen_box: mask_to_bbox(&candidates[i].mask),
            s_mask: candidates[i].s_mask,
            s_obj: candidates[i].s_obj,
            s_kf: 0.0,
            hybrid_score: s,
            target_absent: false,
        },
        None => SelectionOutcome::absent(candidates, None),
    }
}

/// Weighted motion/affinity selection. When `motion_is_active` is false the
/// weight collapses to zero.
pub fn select_hybrid(
    candidates: &[CandidateMask],
    kf_scores: &[f64],
    alpha_kf: f64,
    motion_is_active: bool,
) -> Result<SelectionOutcome, SelectionError> {
    if candidates.len() != kf_scores.len() {
        return Err(SelectionError::LengthMismatch {
            candidates: candidates.len(),
            scores: kf_scores.len(),
        });
    }
    let alpha = if motion_is_active { alpha_kf } else { 0.0 };
    let score = |i: usize| alpha * kf_scores[i] + (1.0 - alpha) * candidates[i].s_mask;
    Ok(match gated_argmax(candidates, score) {
        Some((i, s)) => SelectionOutcome {
            chosen_index: Some(i),
            chosen_box: mask_to_bbox(&candidates[i].mask),
            s_mask: candidates[i].s_mask,
            s_obj: candidates[i].s_obj,
            s_kf: kf_scores[i],
            hybrid_score: s,
            target_absent: false,
        },
        None => SelectionOutcome::absent(candidates, Some(kf_scores)),
    })
}
