use std::collections::BTreeMap;
use std::path::Path;

use anyhow::bail;
use memtrack::eval::MetricReport;
use memtrack::io::plot::write_report_curves;
use memtrack::io::{load_sequence_dir, read_result, write_json};
use serde_json::json;
use walkdir::WalkDir;

use crate::Outcome;

pub const SUMMARY_FILE: &str = "summary.json";

/// Scores every result file under `results` against `<gt>/<sequence id>/`.
///
/// Results are grouped by the label in their header. Each group gets
/// `<out>/<label>/` with per-sequence metrics and curves plus an
/// `aggregate.*` set, the unweighted mean over its sequences.
/// `<out>/summary.json` collects the aggregates and lists results without
/// ground truth (`unmatched`) and frame-count mismatches (`mismatched`).
pub fn run(results: &Path, gt: &Path, out: &Path, plots: bool) -> anyhow::Result<Outcome> {
    let mut files: Vec<_> = WalkDir::new(results)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "jsonl"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no *.jsonl result files under {}", results.display());
    }

    let mut groups: BTreeMap<String, Vec<(String, MetricReport)>> = BTreeMap::new();
    let mut unmatched = Vec::new();
    let mut mismatched = Vec::new();
    let mut unreadable = Vec::new();
    for f in &files {
        let (header, result) = match read_result(f) {
            Ok(r) => r,
            Err(e) => {
                unreadable.push(e.to_string());
                continue;
            }
        };
        let id = header.sequence_id.clone();
        let seq_dir = gt.join(&id);
        if !seq_dir.is_dir() {
            unmatched.push(json!({ "sequence_id": id, "result": f.display().to_string() }));
            continue;
        }
        let truth = match load_sequence_dir(&seq_dir) {
            Ok(t) => t,
            Err(e) => {
                unreadable.push(e.to_string());
                continue;
            }
        };
        let Some(pairs) = truth.pairs(&result.boxes()) else {
            mismatched.push(json!({
                "sequence_id": id,
                "result_frames": result.frames.len(),
                "gt_frames": truth.len(),
            }));
            continue;
        };
        let report = MetricReport::compute(&pairs)?;
        groups.entry(header.label).or_default().push((id, report));
    }

    let mut labels = BTreeMap::new();
    for (label, reports) in &groups {
        let dir = out.join(label);
        for (id, r) in reports {
            write_json(&dir.join(format!("{id}.metrics.json")), r)?;
            write_report_curves(&dir, id, r, plots)?;
        }
        let all: Vec<MetricReport> = reports.iter().map(|(_, r)| r.clone()).collect();
        let agg = MetricReport::aggregate(&all)?;
        write_json(&dir.join("aggregate.json"), &agg)?;
        write_report_curves(&dir, "aggregate", &agg, plots)?;
        println!(
            "[{label}] {} sequences  AUC {:.4}  P@20 {:.4}  Pnorm {:.4}  AO {:.4}",
            reports.len(),
            agg.auc,
            agg.p_at_20,
            agg.p_norm_auc,
            agg.ao
        );
        let per_seq: BTreeMap<&str, f64> = reports.iter().map(|(id, r)| (id.as_str(), r.auc)).collect();
        labels.insert(label.clone(), json!({ "aggregate": agg, "sequence_auc": per_seq }));
    }
    write_json(
        &out.join(SUMMARY_FILE),
        &json!({
            "labels": labels,
            "unmatched": unmatched,
            "mismatched": mismatched,
            "unreadable": unreadable,
        }),
    )?;

    for u in &unmatched {
        eprintln!("unmatched: no ground truth for {}", u["sequence_id"]);
    }
    for e in &unreadable {
        eprintln!("unreadable: {e}");
    }
    if !mismatched.is_empty() {
        let names: Vec<String> = mismatched
            .iter()
            .map(|m| {
                format!(
                    "{} ({} result frames, {} ground-truth frames)",
                    m["sequence_id"].as_str().unwrap_or_default(),
                    m["result_frames"],
                    m["gt_frames"]
                )
            })
            .collect();
        bail!("frame-count mismatch: {}", names.join(", "));
    }
    if !unreadable.is_empty() {
        bail!("{} input file(s) could not be read", unreadable.len());
    }
    Ok(if unmatched.is_empty() {
        Outcome::Success
    } else {
        Outcome::PartialFailure
    })
}
