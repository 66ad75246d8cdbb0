use std::path::{Path, PathBuf};
use std::time::Instant;

use memtrack::eval::{success_thresholds, MetricReport};
use memtrack::io::plot::{line_plot_svg, Curve};
use memtrack::io::{config_hash, write_json};
use memtrack::tracker::{aggregate_runs, RunSummary};
use rayon::prelude::*;
use serde_json::json;

use crate::jobs::{expand, grid, load_config, run_source};
use crate::{AblateKind, Outcome};

pub const ABLATION_FILE: &str = "ablation.json";

/// Runs every cell of the grid over every sequence and writes per-cell means
/// to `<out>/ablation.json` and `<out>/ablation.csv`.
pub fn run(config: &Path, seeds: &[u64], out: Option<PathBuf>, kind: AblateKind, plots: bool) -> anyhow::Result<Outcome> {
    let cfg = load_config(config, seeds, out)?;
    let plots = plots || cfg.emit_plots;
    let grid = grid(&cfg, Some(kind));
    let sources = expand(&cfg);
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = (0..grid.cells.len())
        .flat_map(|c| (0..sources.len()).map(move |s| (c, s)))
        .collect();
    let runs: Vec<RunSummary> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let source = &sources[s];
            let report = run_source(source, &grid.cells[c].config).and_then(|t| {
                let pairs = t.gt.pairs(&t.result.boxes()).ok_or_else(|| {
                    format!(
                        "frame-count mismatch: {} result frames, {} ground-truth frames",
                        t.result.frames.len(),
                        t.gt.len()
                    )
                })?;
                MetricReport::compute(&pairs).map_err(|e| e.to_string())
            });
            RunSummary {
                cell: c,
                sequence_id: source.sequence_id().unwrap_or_else(|| source.origin()),
                report,
            }
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let cells = aggregate_runs(&grid, &runs);
    let mut rows = Vec::new();
    let mut csv = String::from("label,motion_enabled,memory_mode,alpha_kf,mean_auc,mean_iou,runs,failures\n");
    let mut curves = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let ok: Vec<MetricReport> = runs
            .iter()
            .filter(|r| r.cell == i)
            .filter_map(|r| r.report.as_ref().ok().cloned())
            .collect();
        let agg = MetricReport::aggregate(&ok).ok();
        if let Some(a) = &agg {
            curves.push(Curve {
                name: cell.label.clone(),
                points: success_thresholds().into_iter().zip(a.success_curve.iter().copied()).collect(),
            });
        }
        csv += &format!(
            "{},{},{},{},{},{},{},{}\n",
            cell.label,
            cell.config.motion_enabled,
            serde_json::to_value(cell.config.memory_mode)?.as_str().unwrap_or_default(),
            cell.config.motion.alpha_kf,
            cell.mean_auc,
            cell.mean_iou,
            cell.runs,
            cell.failures.len()
        );
        println!(
            "{:<12} AUC {:.4}  mean IoU {:.4}  ({} runs, {} failed)",
            cell.label,
            cell.mean_auc,
            cell.mean_iou,
            cell.runs,
            cell.failures.len()
        );
        rows.push(json!({
            "label": cell.label,
            "config": cell.config,
            "config_hash": config_hash(&cell.config),
            "mean_auc": cell.mean_auc,
            "mean_iou": cell.mean_iou,
            "runs": cell.runs,
            "failures": cell.failures,
            "aggregate": agg,
        }));
    }
    let out_dir = &cfg.out_dir;
    write_json(
        &out_dir.join(ABLATION_FILE),
        &json!({ "kind": format!("{kind:?}").to_lowercase(), "cells": rows }),
    )?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("ablation.csv"), csv)?;
    if plots {
        std::fs::write(
            out_dir.join("ablation.success.svg"),
            line_plot_svg("success", "overlap threshold", &curves),
        )?;
    }
    println!("{} runs in {:.2} s -> {}", runs.len(), elapsed, out_dir.join(ABLATION_FILE).display());
    let failed: usize = cells.iter().map(|c| c.failures.len()).sum();
    for c in &cells {
        for f in &c.failures {
            eprintln!("failed: [{}] {f}", c.label);
        }
    }
    Ok(if failed > 0 { Outcome::PartialFailure } else { Outcome::Success })
}
