use std::path::Path;

use anyhow::{bail, Context};
use memtrack::eval::{op_key, success_thresholds, MetricReport};
use memtrack::io::plot::{line_plot_svg, Curve};
use serde_json::Value;

use crate::ablate::ABLATION_FILE;
use crate::eval::SUMMARY_FILE;
use crate::Outcome;

struct Row {
    run: String,
    label: String,
    report: MetricReport,
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn rows_from(dir: &Path) -> anyhow::Result<Vec<Row>> {
    let run = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut rows = Vec::new();
    let summary = dir.join(SUMMARY_FILE);
    let ablation = dir.join(ABLATION_FILE);
    if summary.exists() {
        let v = read_json(&summary)?;
        for (label, entry) in v["labels"].as_object().into_iter().flatten() {
            rows.push(Row {
                run: run.clone(),
                label: label.clone(),
                report: serde_json::from_value(entry["aggregate"].clone())
                    .with_context(|| format!("{}: label {label}", summary.display()))?,
            });
        }
    } else if ablation.exists() {
        let v = read_json(&ablation)?;
        for cell in v["cells"].as_array().into_iter().flatten() {
            if cell["aggregate"].is_null() {
                continue;
            }
            rows.push(Row {
                run: run.clone(),
                label: cell["label"].as_str().unwrap_or_default().to_string(),
                report: serde_json::from_value(cell["aggregate"].clone())
                    .with_context(|| format!("{}: cell {}", ablation.display(), cell["label"]))?,
            });
        }
    } else {
        bail!("{} has neither {SUMMARY_FILE} nor {ABLATION_FILE}", dir.display());
    }
    Ok(rows)
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// Markdown table of the aggregate reports found in `inputs`, in percent.
pub fn run(inputs: &[std::path::PathBuf], out: Option<&Path>, plots: bool) -> anyhow::Result<Outcome> {
    if plots && out.is_none() {
        bail!("--emit-plots needs --out");
    }
    let mut rows = Vec::new();
    for dir in inputs {
        rows.extend(rows_from(dir)?);
    }
    let (k50, k75) = (op_key(0.5), op_key(0.75));
    let mut table = String::from("| run | label | AUC | P@20 | P_norm | AO | OP50 | OP75 | frames |\n");
    table += "|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for r in &rows {
        let m = &r.report;
        let op = |k: &str| m.op.get(k).map_or_else(|| "-".to_string(), |&v| pct(v));
        table += &format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.run,
            r.label,
            pct(m.auc),
            pct(m.p_at_20),
            pct(m.p_norm_auc),
            pct(m.ao),
            op(&k50),
            op(&k75),
            m.n_frames
        );
    }
    print!("{table}");
    if let Some(path) = out {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &table)?;
        if plots {
            let curves: Vec<Curve> = rows
                .iter()
                .map(|r| Curve {
                    name: if inputs.len() > 1 {
                        format!("{}/{}", r.run, r.label)
                    } else {
                        r.label.clone()
                    },
                    points: success_thresholds()
                        .into_iter()
                        .zip(r.report.success_curve.iter().copied())
                        .collect(),
                })
                .collect();
            std::fs::write(
                path.with_extension("success.svg"),
                line_plot_svg("success", "overlap threshold", &curves),
            )?;
        }
    }
    Ok(Outcome::Success)
}
