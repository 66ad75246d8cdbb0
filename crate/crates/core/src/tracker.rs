//! Per-frame tracking loop and the ablation driver.
//!
//! Within a frame the order is fixed: predict the motion state, build the
//! memory bank, ask the proposer for candidates conditioned on that bank,
//! score the candidates against the prediction, select, correct the filter,
//! and record the frame into memory.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, TrackError};
use crate::eval::{self, FramePair, MetricReport};
use crate::geometry::BBox;
use crate::memory::{
    build_bank_fifo, build_bank_motion_aware, MemoryBank, MemoryGate, MemoryHistory, PROMPT_S_KF,
    PROMPT_S_MASK, PROMPT_S_OBJ,
};
use crate::motion::{kf_iou_scores, KalmanBoxFilter, MotionConfig};
use crate::selection::{select_baseline, select_hybrid};
use crate::simworld::{generate_sequence, FrameProposals, Scenario, SimProposer};

/// Anything that can produce candidate masks for a frame given the memory
/// bank conditioning it.
pub trait ProposalSource {
    fn num_frames(&self) -> usize;

    /// Latent recorded for the prompt frame. Empty when the source has none.
    fn prompt_appearance(&self) -> Vec<f64>;

    /// `Ok(None)` means the source has no more frames.
    fn propose(&mut self, frame: usize, bank: &MemoryBank<'_>) -> Result<Option<FrameProposals>, TrackError>;
}

impl ProposalSource for SimProposer<'_> {
    fn num_frames(&self) -> usize {
        self.sequence().num_frames()
    }

    fn prompt_appearance(&self) -> Vec<f64> {
        self.scenario().target.appearance.clone()
    }

    fn propose(&mut self, frame: usize, bank: &MemoryBank<'_>) -> Result<Option<FrameProposals>, TrackError> {
        match self.propose_frame(frame, bank) {
            Ok(p) => Ok(Some(p)),
            Err(SimError::FrameOutOfRange { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    Fifo,
    MotionAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    pub motion_enabled: bool,
    pub memory_mode: MemoryMode,
    #[serde(default)]
    pub motion: MotionConfig,
    #[serde(default)]
    pub gate: MemoryGate,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig::full()
    }
}

impl TrackerConfig {
    /// Affinity-only selection with a FIFO bank.
    pub fn baseline() -> Self {
        TrackerConfig {
            motion_enabled: false,
            memory_mode: MemoryMode::Fifo,
            motion: MotionConfig::default(),
            gate: MemoryGate::default(),
        }
    }

    pub fn motion_only() -> Self {
        TrackerConfig {
            motion_enabled: true,
            ..Self::baseline()
        }
    }

    pub fn memory_only() -> Self {
        TrackerConfig {
            memory_mode: MemoryMode::MotionAware,
            ..Self::baseline()
        }
    }

    pub fn full() -> Self {
        TrackerConfig {
            motion_enabled: true,
            memory_mode: MemoryMode::MotionAware,
            ..Self::baseline()
        }
    }

    pub fn with_alpha(mut self, alpha_kf: f64) -> Self {
        self.motion.alpha_kf = alpha_kf;
        self
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        self.motion
            .validate()
            .map_err(|e| TrackError::InvalidConfig(e.to_string()))?;
        self.gate
            .validate()
            .map_err(|e| TrackError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: usize,
    pub chosen_box: BBox,
    pub target_absent: bool,
    pub s_mask: f64,
    pub s_obj: f64,
    pub s_kf: f64,
    pub hybrid_score: f64,
    /// Frames of the bank that conditioned this frame's proposals.
    pub bank_frames: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub sequence_id: String,
    pub config: TrackerConfig,
    pub frames: Vec<FrameRecord>,
    /// Per-frame processing time. Not part of the persisted result.
    pub wall_time_ns: Vec<u64>,
}

impl TrackResult {
    pub fn boxes(&self) -> Vec<BBox> {
        self.frames.iter().map(|f| f.chosen_box).collect()
    }
}

/// Runs one pass over `source`, initialized from `first_frame_box`.
pub fn track<S: ProposalSource + ?Sized>(
    source: &mut S,
    first_frame_box: BBox,
    cfg: &TrackerConfig,
    sequence_id: &str,
) -> Result<TrackResult, TrackError> {
    if first_frame_box.empty {
        return Err(TrackError::EmptyPrompt);
    }
    cfg.validate()?;
    let filter = KalmanBoxFilter::new(cfg.motion);
    let n = source.num_frames();

    let start = Instant::now();
    let mut state = filter.init(&first_frame_box)?;
    let mut history = MemoryHistory::new();
    history.record_prompt(source.prompt_appearance())?;
    let mut result = TrackResult {
        sequence_id: sequence_id.to_string(),
        config: *cfg,
        frames: Vec::with_capacity(n),
        wall_time_ns: Vec::with_capacity(n),
    };
    result.frames.push(FrameRecord {
        frame: 0,
        chosen_box: first_frame_box,
        target_absent: false,
        s_mask: PROMPT_S_MASK,
        s_obj: PROMPT_S_OBJ,
        s_kf: PROMPT_S_KF,
        hybrid_score: 1.0,
        bank_frames: Vec::new(),
    });
    result.wall_time_ns.push(start.elapsed().as_nanos() as u64);

    for t in 1..n {
        let start = Instant::now();
        let (predicted, predicted_box) = filter.predict(&state);
        let bank = match cfg.memory_mode {
            MemoryMode::Fifo => build_bank_fifo(history.entries(), cfg.gate.n_mem),
            MemoryMode::MotionAware => build_bank_motion_aware(history.entries(), &cfg.gate),
        };
        let bank_frames = bank.frames();
        let Some(proposals) = source.propose(t, &bank)? else {
            return Err(TrackError::Truncated {
                frame: t,
                expected: n,
                partial: Box::new(result),
            });
        };
        let candidates = &proposals.candidates;
        let kf_scores = kf_iou_scores(&predicted_box, candidates);
        let outcome = if cfg.motion_enabled {
            select_hybrid(
                candidates,
                &kf_scores,
                cfg.motion.alpha_kf,
                filter.is_active(&predicted),
            )?
        } else {
            let mut o = select_baseline(candidates);
            if let Some(i) = o.chosen_index {
                o.s_kf = kf_scores[i];
            }
            o
        };

        state = match outcome.chosen_index {
            Some(_) => filter.update(&predicted, &outcome.chosen_box)?,
            None => filter.miss(&predicted),
        };
        let appearance = outcome
            .chosen_index
            .map(|i| candidates[i].appearance.clone())
            .unwrap_or_default();
        history.record(t, &outcome, appearance)?;
        result.frames.push(FrameRecord {
            frame: t,
            chosen_box: outcome.chosen_box,
            target_absent: outcome.target_absent,
            s_mask: outcome.s_mask,
            s_obj: outcome.s_obj,
            s_kf: outcome.s_kf,
            hybrid_score: outcome.hybrid_score,
            bank_frames,
        });
        result.wall_time_ns.push(start.elapsed().as_nanos() as u64);
    }
    Ok(result)
}

/// Generates the scenario's sequence and tracks its target from the
/// ground-truth first-frame box.
pub fn track_scenario(sc: &Scenario, cfg: &TrackerConfig) -> Result<(crate::simworld::Sequence, TrackResult), TrackError> {
    let seq = generate_sequence(sc)?;
    let mut source = SimProposer::new(sc, &seq);
    let result = track(&mut source, seq.target_box(0), cfg, &seq.id)?;
    Ok((seq, result))
}

/// Pairs a result with the sequence's ground truth.
pub fn frame_pairs(seq: &crate::simworld::Sequence, result: &TrackResult) -> Vec<FramePair> {
    result
        .frames
        .iter()
        .map(|r| FramePair {
            pred: r.chosen_box,
            gt: seq.target_gt(r.frame),
            gt_absent: seq.target_absent(r.frame),
        })
        .collect()
}

/// One named configuration in an ablation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub label: String,
    pub config: TrackerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationGrid {
    pub cells: Vec<AblationCell>,
}

impl AblationGrid {
    pub fn single(label: &str, config: TrackerConfig) -> Self {
        AblationGrid {
            cells: vec![AblationCell {
                label: label.to_string(),
                config,
            }],
        }
    }

    /// The four motion x memory toggles, keeping every other field of `base`.
    pub fn modules(base: &TrackerConfig) -> Self {
        let cell = |label: &str, motion_enabled, memory_mode| AblationCell {
            label: label.to_string(),
            config: TrackerConfig {
                motion_enabled,
                memory_mode,
                ..*base
            },
        };
        AblationGrid {
            cells: vec![
                cell("baseline", false, MemoryMode::Fifo),
                cell("motion", true, MemoryMode::Fifo),
                cell("memory", false, MemoryMode::MotionAware),
                cell("full", true, MemoryMode::MotionAware),
            ],
        }
    }

    /// One cell per motion weight, all with motion enabled.
    pub fn alpha(base: &TrackerConfig, alphas: &[f64]) -> Self {
        AblationGrid {
            cells: alphas
                .iter()
                .map(|&a| AblationCell {
                    label: format!("alpha={a:.2}"),
                    config: TrackerConfig {
                        motion_enabled: true,
                        ..*base
                    }
                    .with_alpha(a),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub label: String,
    pub config: TrackerConfig,
    pub mean_auc: f64,
    pub mean_iou: f64,
    pub runs: usize,
    pub failures: Vec<String>,
}

/// Outcome of one (scenario, seed, cell) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub cell: usize,
    pub sequence_id: String,
    pub report: Result<MetricReport, String>,
}

/// Runs every (scenario, seed, cell) combination, optionally in parallel, and
/// averages success AUC and mean overlap per cell (unweighted over runs).
/// A failing run is listed in its cell's `failures` and does not stop the grid.
pub fn ablate(scenarios: &[Scenario], grid: &AblationGrid, seeds: &[u64], parallel: bool) -> Vec<CellAggregate> {
    let mut jobs = Vec::new();
    for cell in 0..grid.cells.len() {
        for sc in scenarios {
            if seeds.is_empty() {
                jobs.push((cell, sc.clone()));
            } else {
                for &seed in seeds {
                    jobs.push((cell, sc.clone().with_seed(seed)));
                }
            }
        }
    }
    let run = |(cell, sc): &(usize, Scenario)| -> RunSummary {
        let cfg = &grid.cells[*cell].config;
        let report = track_scenario(sc, cfg)
            .map_err(|e| e.to_string())
            .and_then(|(seq, res)| MetricReport::compute(&frame_pairs(&seq, &res)).map_err(|e| e.to_string()));
        RunSummary {
            cell: *cell,
            sequence_id: format!("{}-s{}", sc.name, sc.seed),
            report,
        }
    };
    let runs: Vec<RunSummary> = if parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    aggregate_runs(grid, &runs)
}

pub fn aggregate_runs(grid: &AblationGrid, runs: &[RunSummary]) -> Vec<CellAggregate> {
    grid.cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut reports = Vec::new();
            let mut failures = Vec::new();
            for r in runs.iter().filter(|r| r.cell == i) {
                match &r.report {
                    Ok(m) => reports.push(m.clone()),
                    Err(e) => failures.push(format!("{}: {e}", r.sequence_id)),
                }
            }
            let (mean_auc, mean_iou) = if reports.is_empty() {
                (0.0, 0.0)
            } else {
                let n = reports.len() as f64;
                (
                    reports.iter().map(|m| m.auc).sum::<f64>() / n,
                    reports.iter().map(|m| m.ao).sum::<f64>() / n,
                )
            };
            CellAggregate {
                label: cell.label.clone(),
                config: cell.config,
                mean_auc,
                mean_iou,
                runs: reports.len(),
                failures,
            }
        })
        .collect()
}

/// Mean overlap over the frames of `result` from `from` onward.
pub fn mean_overlap_from(seq: &crate::simworld::Sequence, result: &TrackResult, from: usize) -> f64 {
    let pairs = frame_pairs(seq, result);
    let tail = &pairs[from.min(pairs.len())..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter().map(eval::frame_overlap).sum::<f64>() / tail.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::iou;
    use crate::simworld::{basis, BoxSpec, MotionSegment, NoiseSpec, ObjectSpec};

    fn single_object(noise: NoiseSpec) -> Scenario {
        Scenario {
            schema_version: 1,
            name: "single".into(),
            grid_w: 128,
            grid_h: 128,
            num_frames: 60,
            seed: 1,
            d_app: 8,
            target: ObjectSpec {
                initial_box: BoxSpec { cx: 30.5, cy: 40.5, w: 16.0, h: 12.0 },
                appearance: basis(8, 0),
                motion: vec![
                    MotionSegment { velocity: [1.5, 0.5], duration: 30 },
                    MotionSegment { velocity: [-1.0, 1.0], duration: 30 },
                ],
                occlusion_intervals: vec![],
            },
            distractors: vec![],
            noise,
            hallucination_rate: 0.0,
        }
    }

    #[test]
    fn noise_free_single_object_tracks_exactly_in_every_cell() {
        let sc = single_object(NoiseSpec::default());
        let mut trajectories = Vec::new();
        for cell in AblationGrid::modules(&TrackerConfig::default()).cells {
            let (seq, res) = track_scenario(&sc, &cell.config).unwrap();
            assert_eq!(res.frames.len(), 60);
            assert_eq!(res.frames[0].chosen_box, seq.target_box(0));
            for r in &res.frames[1..] {
                assert!(iou(&r.chosen_box, &seq.target_gt(r.frame)) >= 0.9);
            }
            trajectories.push(res.boxes());
        }
        assert!(trajectories.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn baseline_wiring_matches_direct_calls() {
        let mut sc = single_object(NoiseSpec { affinity_sigma: 0.1, jitter_sigma: 1.0 });
        sc.hallucination_rate = 0.3;
        let cfg = TrackerConfig::baseline();
        let (seq, res) = track_scenario(&sc, &cfg).unwrap();
        // replay with an independent loop over the building blocks
        let proposer = SimProposer::new(&sc, &seq);
        let mut history = MemoryHistory::new();
        history.record_prompt(sc.target.appearance.clone()).unwrap();
        for t in 1..seq.num_frames() {
            let bank = build_bank_fifo(history.entries(), cfg.gate.n_mem);
            assert_eq!(bank.frames(), res.frames[t].bank_frames);
            let props = proposer.propose_frame(t, &bank).unwrap();
            let out = select_baseline(&props.candidates);
            assert_eq!(out.chosen_box, res.frames[t].chosen_box);
            let app = out.chosen_index.map(|i| props.candidates[i].appearance.clone()).unwrap_or_default();
            history.record(t, &out, app).unwrap();
        }
    }

    struct Short(usize);

    impl ProposalSource for Short {
        fn num_frames(&self) -> usize {
            10
        }
        fn prompt_appearance(&self) -> Vec<f64> {
            Vec::new()
        }
        fn propose(&mut self, frame: usize, _: &MemoryBank<'_>) -> Result<Option<FrameProposals>, TrackError> {
            Ok((frame < self.0).then(|| FrameProposals { candidates: vec![] }))
        }
    }

    #[test]
    fn truncated_source_returns_partial() {
        let err = track(&mut Short(4), BBox::new(5.0, 5.0, 3.0, 3.0), &TrackerConfig::full(), "short").unwrap_err();
        match err {
            TrackError::Truncated { frame, expected, partial } => {
                assert_eq!((frame, expected), (4, 10));
                assert_eq!(partial.frames.len(), 4);
                assert!(partial.frames[1..].iter().all(|f| f.target_absent));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            track(&mut Short(4), BBox::EMPTY, &TrackerConfig::full(), "x"),
            Err(TrackError::EmptyPrompt)
        ));
        let mut bad = TrackerConfig::full();
        bad.gate.n_mem = 0;
        assert!(matches!(
            track(&mut Short(4), BBox::new(5.0, 5.0, 3.0, 3.0), &bad, "x"),
            Err(TrackError::InvalidConfig(_))
        ));
    }

    #[test]
    fn single_cell_ablation_equals_direct_run() {
        let sc = single_object(NoiseSpec { affinity_sigma: 0.05, jitter_sigma: 1.0 });
        let cfg = TrackerConfig::full();
        let agg = ablate(std::slice::from_ref(&sc), &AblationGrid::single("full", cfg), &[], false);
        let (seq, res) = track_scenario(&sc, &cfg).unwrap();
        let m = MetricReport::compute(&frame_pairs(&seq, &res)).unwrap();
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].mean_auc, m.auc);
        assert_eq!(agg[0].mean_iou, m.ao);
        assert_eq!(ablate(std::slice::from_ref(&sc), &AblationGrid::single("full", cfg), &[], true), agg);
    }

    #[test]
    fn ablation_records_failures_without_aborting() {
        let good = single_object(NoiseSpec::default());
        let mut bad = good.clone();
        bad.name = "broken".into();
        bad.target.appearance = vec![1.0; 8];
        let agg = ablate(&[good, bad], &AblationGrid::modules(&TrackerConfig::default()), &[], false);
        for cell in &agg {
            assert_eq!(cell.runs, 1);
            assert_eq!(cell.failures.len(), 1);
            assert!(cell.failures[0].starts_with("broken"));
        }
    }
}
