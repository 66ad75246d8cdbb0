//! Curve CSVs and minimal SVG line plots of them.

use std::path::Path;

use crate::error::IoError;
use crate::eval::{norm_precision_thresholds, success_thresholds, MetricReport};

use super::write_text;

/// A named curve as `(x, y)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// The three curves of a report: success over IoU threshold, precision over
/// pixel radius, normalized precision over normalized radius.
pub fn report_curves(r: &MetricReport) -> [(&'static str, &'static str, Vec<(f64, f64)>); 3] {
    let zip = |xs: Vec<f64>, ys: &[f64]| xs.into_iter().zip(ys.iter().copied()).collect::<Vec<_>>();
    [
        ("success", "overlap threshold", zip(success_thresholds().to_vec(), &r.success_curve)),
        (
            "precision",
            "location error threshold (px)",
            zip((0..r.precision_curve.len()).map(|k| k as f64).collect(), &r.precision_curve),
        ),
        (
            "norm_precision",
            "normalized location error threshold",
            zip(norm_precision_thresholds().to_vec(), &r.norm_precision_curve),
        ),
    ]
}

pub fn curve_csv(points: &[(f64, f64)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["threshold", "value"]).expect("in-memory write");
    for (x, y) in points {
        w.write_record([x.to_string(), y.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Line plot with the y axis fixed to [0, 1].
pub fn line_plot_svg(title: &str, x_label: &str, curves: &[Curve]) -> String {
    let (w, h) = (480.0, 360.0);
    let (left, right, top, bottom) = (56.0, 150.0, 32.0, 48.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let xs = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - y.clamp(0.0, 1.0)) * ph;

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    s += &format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
    s += &format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        left + pw / 2.0,
        escape(title)
    );
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = sy(v);
        s += &format!(
            "<line x1=\"{left}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#ddd\"/>\n<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{v:.2}</text>\n",
            left + pw,
            left - 6.0,
            y + 4.0
        );
        let xv = x0 + v * (x1 - x0);
        s += &format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            sx(xv),
            top + ph + 16.0,
            trim_num(xv)
        );
    }
    s += &format!(
        "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333\"/>\n"
    );
    s += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        left + pw / 2.0,
        h - 10.0,
        escape(x_label)
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = c.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        s += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        );
        let ly = top + 14.0 + 16.0 * i as f64;
        s += &format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n<text x=\"{}\" y=\"{}\">{}</text>\n",
            left + pw + 10.0,
            left + pw + 28.0,
            left + pw + 32.0,
            ly + 4.0,
            escape(&c.name)
        );
    }
    s += "</svg>\n";
    s
}

fn trim_num(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Writes `<stem>.<curve>.csv` for each curve of `report`, and the matching
/// `.svg` plots when `plots` is set.
pub fn write_report_curves(dir: &Path, stem: &str, report: &MetricReport, plots: bool) -> Result<(), IoError> {
    for (name, x_label, points) in report_curves(report) {
        write_text(&dir.join(format!("{stem}.{name}.csv")), &curve_csv(&points))?;
        if plots {
            let curve = Curve {
                name: stem.to_string(),
                points,
            };
            write_text(
                &dir.join(format!("{stem}.{name}.svg")),
                &line_plot_svg(&format!("{name}: {stem}"), x_label, &[curve]),
            )?;
        }
    }
    Ok(())
}
