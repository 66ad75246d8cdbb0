//! Per-frame memory history and the two bank builders: a FIFO window of the
//! latest frames, and a motion-aware scan that keeps only frames whose
//! affinity, object, and KF-IoU scores all pass their thresholds.
//!
//! Frames where the target was declared absent are kept in the history for
//! auditing but are never admitted to a bank by either builder.

use serde::{Deserialize, Serialize};

use crate::error::MemoryError;
use crate::selection::SelectionOutcome;

/// Scores recorded for the prompt frame so it passes every gate.
pub const PROMPT_S_MASK: f64 = 1.0;
pub const PROMPT_S_OBJ: f64 = 4.0;
pub const PROMPT_S_KF: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub frame_index: usize,
    pub appearance: Vec<f64>,
    pub s_mask: f64,
    pub s_obj: f64,
    pub s_kf: f64,
    pub is_prompt_frame: bool,
    pub target_absent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryGate {
    pub tau_mask: f64,
    pub tau_obj: f64,
    pub tau_kf_mem: f64,
    pub n_mem: usize,
    pub n_max: usize,
}

impl Default for MemoryGate {
    fn default() -> Self {
        MemoryGate {
            tau_mask: 0.6,
            tau_obj: 0.0,
            tau_kf_mem: 0.3,
            n_mem: 7,
            n_max: 64,
        }
    }
}

impl MemoryGate {
    /// Gate with every threshold at negative infinity.
    pub fn open(n_mem: usize, n_max: usize) -> Self {
        MemoryGate {
            tau_mask: f64::NEG_INFINITY,
            tau_obj: f64::NEG_INFINITY,
            tau_kf_mem: f64::NEG_INFINITY,
            n_mem,
            n_max,
        }
    }

    pub fn validate(&self) -> Result<(), MemoryError> {
        if self.n_mem < 1 || self.n_mem > self.n_max {
            return Err(MemoryError::InvalidGate(format!(
                "need 1 <= n_mem <= n_max, got n_mem = {}, n_max = {}",
                self.n_mem, self.n_max
            )));
        }
        for (name, v) in [
            ("tau_mask", self.tau_mask),
            ("tau_obj", self.tau_obj),
            ("tau_kf_mem", self.tau_kf_mem),
        ] {
            if v.is_nan() {
                return Err(MemoryError::InvalidGate(format!("{name} is NaN")));
            }
        }
        Ok(())
    }
}

/// All three scores meet their thresholds. The prompt frame always passes and
/// absent-target frames never do.
pub fn gate(entry: &MemoryEntry, g: &MemoryGate) -> bool {
    if entry.is_prompt_frame {
        return true;
    }
    !entry.target_absent
        && entry.s_mask >= g.tau_mask
        && entry.s_obj >= g.tau_obj
        && entry.s_kf >= g.tau_kf_mem
}

/// The entries conditioning one frame, in increasing frame order.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBank<'a> {
    pub entries: Vec<&'a MemoryEntry>,
}

impl<'a> MemoryBank<'a> {
    pub fn frames(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.frame_index).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Prompt first (if present), then the rest sorted by frame.
    fn assemble(prompt: Option<&'a MemoryEntry>, mut rest: Vec<&'a MemoryEntry>) -> Self {
        rest.sort_by_key(|e| e.frame_index);
        let mut entries = Vec::with_capacity(rest.len() + 1);
        entries.extend(prompt);
        entries.extend(rest);
        MemoryBank { entries }
    }
}

/// The `n_mem` most recent admissible entries plus the prompt frame.
pub fn build_bank_fifo(history: &[MemoryEntry], n_mem: usize) -> MemoryBank<'_> {
    let prompt = history.iter().find(|e| e.is_prompt_frame);
    let recent: Vec<&MemoryEntry> = history
        .iter()
        .rev()
        .filter(|e| !e.is_prompt_frame && !e.target_absent)
        .take(n_mem)
        .collect();
    MemoryBank::assemble(prompt, recent)
}

/// Scans back at most `n_max` frames from the frame after the last recorded
/// one, collecting up to `n_mem` entries that pass the gate. When none
/// qualify, the most recent admissible entry is used instead.
pub fn build_bank_motion_aware<'a>(history: &'a [MemoryEntry], g: &MemoryGate) -> MemoryBank<'a> {
    let prompt = history.iter().find(|e| e.is_prompt_frame);
    let current = history.last().map_or(0, |e| e.frame_index + 1);
    let horizon = current.saturating_sub(g.n_max);
    let picked: Vec<&MemoryEntry> = history
        .iter()
        .rev()
        .take_while(|e| e.frame_index >= horizon)
        .filter(|e| !e.is_prompt_frame && gate(e, g))
        .take(g.n_mem)
        .collect();
    if picked.is_empty() {
        let fallback = history
            .iter()
            .rev()
            .find(|e| !e.is_prompt_frame && !e.target_absent);
        return MemoryBank::assemble(prompt, fallback.into_iter().collect());
    }
    MemoryBank::assemble(prompt, picked)
}

/// Append-only per-frame record of what the tracker produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryHistory {
    entries: Vec<MemoryEntry>,
}

impl MemoryHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn record_prompt(&mut self, appearance: Vec<f64>) -> Result<(), MemoryError> {
        if let Some(last) = self.entries.last() {
            return Err(MemoryError::DuplicateFrame {
                frame: 0,
                last: last.frame_index,
            });
        }
        self.entries.push(MemoryEntry {
            frame_index: 0,
            appearance,
            s_mask: PROMPT_S_MASK,
            s_obj: PROMPT_S_OBJ,
            s_kf: PROMPT_S_KF,
            is_prompt_frame: true,
            target_absent: false,
        });
        Ok(())
    }

    /// Records the outcome of frame `frame`. Absent-target outcomes are kept
    /// with their observed scores and no appearance.
    pub fn record(
        &mut self,
        frame: usize,
        outcome: &SelectionOutcome,
        appearance: Vec<f64>,
    ) -> Result<(), MemoryError> {
        let last = self.entries.last().ok_or(MemoryError::MissingPrompt)?;
        if frame <= last.frame_index {
            return Err(MemoryError::DuplicateFrame {
                frame,
                last: last.frame_index,
            });
        }
        self.entries.push(MemoryEntry {
            frame_index: frame,
            appearance: if outcome.target_absent {
                Vec::new()
            } else {
                appearance
            },
            s_mask: outcome.s_mask,
            s_obj: outcome.s_obj,
            s_kf: outcome.s_kf,
            is_prompt_frame: false,
            target_absent: outcome.target_absent,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use proptest::prelude::*;

    fn entry(frame: usize, pass: bool) -> MemoryEntry {
        MemoryEntry {
            frame_index: frame,
            appearance: vec![1.0],
            s_mask: if pass { 0.9 } else { 0.1 },
            s_obj: 2.0,
            s_kf: 0.8,
            is_prompt_frame: frame == 0,
            target_absent: false,
        }
    }

    fn outcome(absent: bool, s_mask: f64, s_obj: f64, s_kf: f64) -> SelectionOutcome {
        SelectionOutcome {
            chosen_index: if absent { None } else { Some(0) },
            chosen_box: if absent { BBox::EMPTY } else { BBox::new(5.0, 5.0, 2.0, 2.0) },
            s_mask,
            s_obj,
            s_kf,
            hybrid_score: s_mask,
            target_absent: absent,
        }
    }

    #[test]
    fn gate_conjunction_grid() {
        let g = MemoryGate::default();
        for bits in 0..8u8 {
            let e = MemoryEntry {
                frame_index: 3,
                appearance: vec![],
                s_mask: if bits & 1 != 0 { 0.7 } else { 0.5 },
                s_obj: if bits & 2 != 0 { 1.0 } else { -1.0 },
                s_kf: if bits & 4 != 0 { 0.4 } else { 0.2 },
                is_prompt_frame: false,
                target_absent: false,
            };
            assert_eq!(gate(&e, &g), bits == 7, "cell {bits:03b}");
        }
        let inf = MemoryEntry {
            frame_index: 1,
            appearance: vec![],
            s_mask: f64::INFINITY,
            s_obj: f64::INFINITY,
            s_kf: f64::INFINITY,
            is_prompt_frame: false,
            target_absent: false,
        };
        assert!(gate(&inf, &g));
        let prompt = MemoryEntry {
            s_mask: 0.0,
            is_prompt_frame: true,
            frame_index: 0,
            ..inf
        };
        assert!(gate(&prompt, &g));
    }

    #[test]
    fn fifo_windows() {
        let h: Vec<_> = (0..3).map(|f| entry(f, true)).collect();
        assert_eq!(build_bank_fifo(&h, 7).frames(), vec![0, 1, 2]);
        let h: Vec<_> = (0..20).map(|f| entry(f, true)).collect();
        let expect: Vec<usize> = std::iter::once(0).chain(13..20).collect();
        assert_eq!(build_bank_fifo(&h, 7).frames(), expect);
        assert_eq!(build_bank_fifo(&h, 1).frames(), vec![0, 19]);
    }

    #[test]
    fn motion_aware_backward_scan() {
        let h: Vec<_> = (0..10).map(|f| entry(f, f < 5)).collect();
        let g = MemoryGate {
            n_mem: 3,
            ..MemoryGate::default()
        };
        assert_eq!(build_bank_motion_aware(&h, &g).frames(), vec![0, 2, 3, 4]);

        let all: Vec<_> = (0..20).map(|f| entry(f, true)).collect();
        let g7 = MemoryGate::default();
        assert_eq!(
            build_bank_motion_aware(&all, &g7).frames(),
            build_bank_fifo(&all, 7).frames()
        );

        let none: Vec<_> = (0..10).map(|f| entry(f, f == 0)).collect();
        assert_eq!(build_bank_motion_aware(&none, &g7).frames(), vec![0, 9]);

        // passing entries exist but lie beyond the lookback horizon
        let old: Vec<_> = (0..100).map(|f| entry(f, f < 20)).collect();
        assert_eq!(build_bank_motion_aware(&old, &g7).frames(), vec![0, 99]);

        let only_prompt = vec![entry(0, true)];
        assert_eq!(build_bank_motion_aware(&only_prompt, &g7).frames(), vec![0]);
        assert_eq!(build_bank_fifo(&only_prompt, 7).frames(), vec![0]);
    }

    #[test]
    fn record_semantics() {
        let mut h = MemoryHistory::new();
        assert_eq!(
            h.record(1, &outcome(false, 0.9, 1.0, 0.9), vec![1.0]),
            Err(MemoryError::MissingPrompt)
        );
        h.record_prompt(vec![1.0, 0.0]).unwrap();
        assert_eq!(h.len(), 1);
        assert!(h.entries()[0].is_prompt_frame);
        for f in 1..5 {
            h.record(f, &outcome(false, 0.9, 2.0, 0.9), vec![1.0, 0.0]).unwrap();
        }
        assert!(h.entries().windows(2).all(|w| w[0].frame_index < w[1].frame_index));
        assert!(matches!(
            h.record(4, &outcome(false, 0.9, 2.0, 0.9), vec![]),
            Err(MemoryError::DuplicateFrame { frame: 4, last: 4 })
        ));
        // absent frame: recorded, but excluded from both banks
        h.record(5, &outcome(true, 0.2, -2.0, 0.0), vec![0.0, 1.0]).unwrap();
        let last = h.entries().last().unwrap();
        assert!(last.target_absent && last.appearance.is_empty() && last.s_obj == -2.0);
        let g = MemoryGate::default();
        assert!(!build_bank_motion_aware(h.entries(), &g).frames().contains(&5));
        assert!(!build_bank_fifo(h.entries(), 7).frames().contains(&5));
        // an absent outcome with marginal observed scores still never passes
        h.record(6, &outcome(true, 0.9, 0.0, 0.9), vec![]).unwrap();
        assert!(!gate(h.entries().last().unwrap(), &MemoryGate::open(7, 64)));
    }

    fn history_strategy() -> impl Strategy<Value = Vec<MemoryEntry>> {
        proptest::collection::vec((1usize..4, 0.0..1.0f64, -3.0..3.0f64, 0.0..1.0f64, any::<bool>()), 0..120)
            .prop_map(|rows| {
                let mut h = vec![entry(0, true)];
                let mut frame = 0;
                for (step, m, o, k, absent) in rows {
                    frame += step;
                    h.push(MemoryEntry {
                        frame_index: frame,
                        appearance: vec![],
                        s_mask: m,
                        s_obj: o,
                        s_kf: k,
                        is_prompt_frame: false,
                        target_absent: absent && step == 1,
                    });
                }
                h
            })
    }

    proptest! {
        #[test]
        fn bank_invariants(h in history_strategy(), n_mem in 1usize..10, extra in 0usize..40) {
            let g = MemoryGate { n_mem, n_max: n_mem + extra, ..MemoryGate::default() };
            let fifo = build_bank_fifo(&h, n_mem);
            let aware = build_bank_motion_aware(&h, &g);
            let fallback = h.iter().rev().find(|e| !e.is_prompt_frame && !e.target_absent).map(|e| e.frame_index);
            for bank in [&fifo, &aware] {
                prop_assert!(bank.len() <= n_mem + 1);
                prop_assert_eq!(bank.entries[0].frame_index, 0);
                prop_assert!(bank.entries.windows(2).all(|w| w[0].frame_index < w[1].frame_index));
                prop_assert!(bank.entries.iter().all(|e| !e.target_absent));
            }
            for e in &aware.entries {
                prop_assert!(gate(e, &g) || e.is_prompt_frame || Some(e.frame_index) == fallback);
            }
            prop_assert_eq!(aware, build_bank_motion_aware(&h, &g));
        }
    }
}
