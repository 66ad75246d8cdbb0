//! Expands a run config into sequences and tracks them.

use std::collections::HashSet;
use std::path::Path;

use anyhow::Context;
use memtrack::io::config::ReplaySpec;
use memtrack::io::gt::{write_sequence_files, META_FILE};
use memtrack::io::{load_gt, load_run_config, load_scenario, write_json, GroundTruth, ReplaySource, RunConfig};
use memtrack::simworld::{generate_sequence, Scenario, Sequence, SimProposer};
use memtrack::tracker::{AblationGrid, TrackResult, TrackerConfig};
use memtrack::{track, BBox};
use serde_json::json;

use crate::AblateKind;

/// One sequence to track, or the reason it could not be prepared.
pub enum Source {
    Simulated { origin: String, scenario: Scenario },
    Replay(ReplaySpec),
    Broken { origin: String, error: String },
}

impl Source {
    pub fn origin(&self) -> String {
        match self {
            Source::Simulated { origin, .. } | Source::Broken { origin, .. } => origin.clone(),
            Source::Replay(r) => r.candidates.display().to_string(),
        }
    }

    /// Id the tracked sequence will get, known before running it.
    pub fn sequence_id(&self) -> Option<String> {
        match self {
            Source::Simulated { scenario, .. } => Some(format!("{}-s{}", scenario.name, scenario.seed)),
            Source::Replay(r) => Some(r.id.clone()),
            Source::Broken { .. } => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Source::Simulated { scenario, .. } => Some(scenario.seed),
            _ => None,
        }
    }
}

/// A tracked sequence with its ground truth.
pub struct Tracked {
    pub result: TrackResult,
    pub gt: GroundTruth,
    pub sequence: Option<Sequence>,
}

/// Loads the run config and applies command-line overrides.
pub fn load_config(path: &Path, seeds: &[u64], out: Option<std::path::PathBuf>) -> anyhow::Result<RunConfig> {
    let mut cfg = load_run_config(path)?;
    if !seeds.is_empty() {
        cfg.seeds = seeds.to_vec();
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    Ok(cfg)
}

/// Every sequence of the config, in a fixed order: scenario files, then
/// suites, each crossed with the seeds, then replayed sequences.
pub fn expand(cfg: &RunConfig) -> Vec<Source> {
    let with_seeds = |origin: String, sc: Scenario| -> Vec<Source> {
        if cfg.seeds.is_empty() {
            vec![Source::Simulated { origin, scenario: sc }]
        } else {
            cfg.seeds
                .iter()
                .map(|&s| Source::Simulated {
                    origin: origin.clone(),
                    scenario: sc.clone().with_seed(s),
                })
                .collect()
        }
    };
    let mut out = Vec::new();
    for p in &cfg.scenarios {
        let origin = p.display().to_string();
        match load_scenario(p) {
            Ok(sc) => out.extend(with_seeds(origin, sc)),
            Err(e) => out.push(Source::Broken {
                origin,
                error: e.to_string(),
            }),
        }
    }
    for suite in &cfg.suites {
        for sc in suite.scenarios() {
            let origin = format!("suite:{:?}/{}", suite.kind, sc.name).to_lowercase();
            out.extend(with_seeds(origin, sc));
        }
    }
    out.extend(cfg.replay.iter().cloned().map(Source::Replay));
    let mut seen = HashSet::new();
    for src in &mut out {
        if let Some(id) = src.sequence_id() {
            if !seen.insert(id.clone()) {
                *src = Source::Broken {
                    origin: src.origin(),
                    error: format!("duplicate sequence id {id}"),
                };
            }
        }
    }
    out
}

pub fn grid(cfg: &RunConfig, kind: Option<AblateKind>) -> AblationGrid {
    match kind {
        None => AblationGrid::single("run", cfg.tracker),
        Some(AblateKind::Modules) => AblationGrid::modules(&cfg.tracker),
        Some(AblateKind::Alpha) => AblationGrid::alpha(&cfg.tracker, &cfg.alphas),
    }
}

pub fn run_source(source: &Source, tracker: &TrackerConfig) -> Result<Tracked, String> {
    match source {
        Source::Broken { error, .. } => Err(error.clone()),
        Source::Simulated { scenario, .. } => {
            let seq = generate_sequence(scenario).map_err(|e| e.to_string())?;
            let mut proposer = SimProposer::new(scenario, &seq);
            let result = track(&mut proposer, seq.target_box(0), tracker, &seq.id).map_err(|e| e.to_string())?;
            let gt = GroundTruth {
                boxes: (0..seq.num_frames()).map(|t| seq.target_gt(t)).collect(),
            };
            Ok(Tracked {
                result,
                gt,
                sequence: Some(seq),
            })
        }
        Source::Replay(replay) => {
            let gt = load_gt(&replay.gt, replay.absent.as_deref()).map_err(|e| e.to_string())?;
            let first = gt.boxes.first().copied().unwrap_or(BBox::EMPTY);
            let mut src = ReplaySource::load(&replay.candidates, gt.len()).map_err(|e| e.to_string())?;
            let result = track(&mut src, first, tracker, &replay.id).map_err(|e| e.to_string())?;
            Ok(Tracked {
                result,
                gt,
                sequence: None,
            })
        }
    }
}

/// Writes `gt.txt`, `absent.txt` and `meta.json` for a simulated sequence.
pub fn write_sequence(dir: &Path, seq: &Sequence, scenario_name: &str, seed: u64) -> anyhow::Result<()> {
    let n = seq.num_frames();
    let boxes: Vec<BBox> = (0..n).map(|t| seq.target_box(t)).collect();
    let absent: Vec<bool> = (0..n).map(|t| seq.target_absent(t)).collect();
    write_sequence_files(dir, &boxes, &absent).with_context(|| format!("writing {}", seq.id))?;
    let meta = json!({
        "sequence_id": seq.id,
        "scenario": scenario_name,
        "seed": seed,
        "grid_w": seq.grid_w,
        "grid_h": seq.grid_h,
        "num_frames": n,
        "absent_frames": absent.iter().filter(|&&a| a).count(),
    });
    write_json(&dir.join(META_FILE), &meta)?;
    Ok(())
}
