use std::path::{Path, PathBuf};
use std::time::Instant;

use memtrack::io::results::{Manifest, ManifestEntry, RunStatus, Timing};
use memtrack::io::{config_hash, write_json, write_result};
use memtrack::simworld::Sequence;
use rayon::prelude::*;
use serde_json::json;

use crate::jobs::{expand, grid, load_config, run_source, write_sequence, Source};
use crate::{AblateKind, Outcome};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Tracks every (cell, sequence) pair. Results go to
/// `<out>/results/<label>/<sequence id>.jsonl`, simulated ground truth to
/// `<out>/gt/<sequence id>/`, and `<out>/manifest.json` lists every run.
pub fn run(config: &Path, seeds: &[u64], out: Option<PathBuf>, ablate: Option<AblateKind>) -> anyhow::Result<Outcome> {
    let cfg = load_config(config, seeds, out)?;
    let grid = grid(&cfg, ablate);
    let sources = expand(&cfg);
    let out_dir = cfg.out_dir.clone();
    let mut hashed = cfg.clone();
    hashed.out_dir = PathBuf::new();
    hashed.emit_plots = false;
    let run_hash = config_hash(&json!({
        "run": hashed,
        "ablate": ablate.map(|k| format!("{k:?}").to_lowercase()),
    }));

    let start = Instant::now();
    let pairs: Vec<(usize, usize)> = (0..grid.cells.len())
        .flat_map(|c| (0..sources.len()).map(move |s| (c, s)))
        .collect();
    let runs: Vec<(usize, ManifestEntry, usize, Option<Sequence>)> = pairs
        .par_iter()
        .map(|&(c, s)| {
            let cell = &grid.cells[c];
            let source = &sources[s];
            let mut entry = ManifestEntry {
                label: cell.label.clone(),
                source: source.origin(),
                sequence_id: None,
                seed: source.seed(),
                config_hash: config_hash(&cell.config),
                result: None,
                status: RunStatus::Failed,
                error: None,
            };
            match run_source(source, &cell.config) {
                Ok(t) => {
                    let rel = format!("results/{}/{}.jsonl", cell.label, t.result.sequence_id);
                    entry.sequence_id = Some(t.result.sequence_id.clone());
                    match write_result(&out_dir.join(&rel), &t.result, &cell.label) {
                        Ok(()) => {
                            entry.result = Some(rel);
                            entry.status = RunStatus::Ok;
                        }
                        Err(e) => entry.error = Some(e.to_string()),
                    }
                    let frames = t.result.frames.len();
                    (s, entry, frames, if c == 0 { t.sequence } else { None })
                }
                Err(e) => {
                    entry.error = Some(e);
                    (s, entry, 0, None)
                }
            }
        })
        .collect();

    let mut entries = Vec::with_capacity(runs.len());
    let mut frames = 0;
    for (s, entry, n, seq) in runs {
        frames += n;
        if let (Some(seq), Source::Simulated { scenario, .. }) = (seq, &sources[s]) {
            write_sequence(&out_dir.join("gt").join(&seq.id), &seq, &scenario.name, scenario.seed)?;
        }
        entries.push(entry);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let manifest = Manifest {
        config_hash: run_hash,
        entries,
        timing: Timing {
            elapsed_ms: elapsed * 1e3,
            frames,
            frames_per_second: if elapsed > 0.0 { frames as f64 / elapsed } else { 0.0 },
        },
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    let failed = manifest.failures();
    println!(
        "{} runs, {} failed, {} frames in {:.2} s -> {}",
        manifest.entries.len(),
        failed,
        frames,
        elapsed,
        out_dir.join(MANIFEST_FILE).display()
    );
    for e in manifest.entries.iter().filter(|e| e.status == RunStatus::Failed) {
        eprintln!("failed: [{}] {}: {}", e.label, e.source, e.error.as_deref().unwrap_or(""));
    }
    Ok(if failed > 0 { Outcome::PartialFailure } else { Outcome::Success })
}
