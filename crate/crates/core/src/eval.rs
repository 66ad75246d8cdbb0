//! One-pass evaluation metrics.
//!
//! Conventions:
//! - success and OP thresholds use strict `>`, so an overlap equal to a
//!   threshold counts as a failure;
//! - a frame whose ground truth is marked absent scores overlap 1 when the
//!   prediction is empty and 0 otherwise, and is skipped by the centre
//!   distance metrics;
//! - an empty prediction on a present target has infinite centre distance;
//! - several sequences aggregate by unweighted mean of per-sequence reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::geometry::{center_distance, iou, normalized_center_distance, BBox};

pub const SUCCESS_POINTS: usize = 21;
pub const NORM_PRECISION_POINTS: usize = 101;
pub const PRECISION_RADIUS: f64 = 20.0;
pub const OP_THRESHOLDS: [f64; 2] = [0.5, 0.75];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePair {
    pub pred: BBox,
    pub gt: BBox,
    pub gt_absent: bool,
}

/// Thresholds `0.00, 0.05, ..., 1.00`.
pub fn success_thresholds() -> [f64; SUCCESS_POINTS] {
    std::array::from_fn(|k| k as f64 * 0.05)
}

/// Thresholds `0.000, 0.005, ..., 0.500`.
pub fn norm_precision_thresholds() -> [f64; NORM_PRECISION_POINTS] {
    std::array::from_fn(|k| k as f64 * 0.005)
}

pub fn frame_overlap(p: &FramePair) -> f64 {
    if p.gt_absent {
        return if p.pred.empty { 1.0 } else { 0.0 };
    }
    iou(&p.pred, &p.gt)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Success curve over the 21 overlap thresholds and its mean.
pub fn success_auc(pairs: &[FramePair]) -> Result<(Vec<f64>, f64), EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let overlaps = sorted(pairs.iter().map(frame_overlap).collect());
    let n = overlaps.len() as f64;
    let curve: Vec<f64> = success_thresholds()
        .iter()
        .map(|&t| (overlaps.len() - overlaps.partition_point(|&o| o <= t)) as f64 / n)
        .collect();
    let auc = curve.iter().sum::<f64>() / curve.len() as f64;
    Ok((curve, auc))
}

fn distances(pairs: &[FramePair], dist: impl Fn(&BBox, &BBox) -> f64) -> Vec<f64> {
    sorted(
        pairs
            .iter()
            .filter(|p| !p.gt_absent)
            .map(|p| dist(&p.pred, &p.gt))
            .collect(),
    )
}

fn center_or_inf(pred: &BBox, gt: &BBox) -> f64 {
    center_distance(pred, gt).unwrap_or(f64::INFINITY)
}

fn normalized_or_inf(pred: &BBox, gt: &BBox) -> f64 {
    normalized_center_distance(pred, gt).unwrap_or(f64::INFINITY)
}

/// Fraction of present-target frames whose centre error is within `radius`.
/// 0 when no frame has a present target.
pub fn precision_at(pairs: &[FramePair], radius: f64) -> f64 {
    let d = distances(pairs, center_or_inf);
    if d.is_empty() {
        return 0.0;
    }
    d.partition_point(|&x| x <= radius) as f64 / d.len() as f64
}

/// Precision curve over the centre error normalized by the ground-truth
/// size, at thresholds `0..=0.5`, and its mean.
pub fn norm_precision_curve(pairs: &[FramePair]) -> (Vec<f64>, f64) {
    let d = distances(pairs, normalized_or_inf);
    if d.is_empty() {
        return (vec![0.0; NORM_PRECISION_POINTS], 0.0);
    }
    let n = d.len() as f64;
    let curve: Vec<f64> = norm_precision_thresholds()
        .iter()
        .map(|&t| d.partition_point(|&x| x <= t) as f64 / n)
        .collect();
    let mean = curve.iter().sum::<f64>() / curve.len() as f64;
    (curve, mean)
}

pub fn norm_precision_auc(pairs: &[FramePair]) -> f64 {
    norm_precision_curve(pairs).1
}

/// Centre-error precision curve at integer radii `0..=50` px.
pub fn precision_curve(pairs: &[FramePair]) -> Vec<(f64, f64)> {
    let d = distances(pairs, center_or_inf);
    (0..=50)
        .map(|r| {
            let r = r as f64;
            let v = if d.is_empty() {
                0.0
            } else {
                d.partition_point(|&x| x <= r) as f64 / d.len() as f64
            };
            (r, v)
        })
        .collect()
}

/// Average overlap and the fraction of frames above each OP threshold.
pub fn ao_and_op(pairs: &[FramePair]) -> Result<(f64, BTreeMap<String, f64>), EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let overlaps: Vec<f64> = pairs.iter().map(frame_overlap).collect();
    let n = overlaps.len() as f64;
    let ao = overlaps.iter().sum::<f64>() / n;
    let overlaps = sorted(overlaps);
    let op = OP_THRESHOLDS
        .iter()
        .map(|&t| {
            let above = overlaps.len() - overlaps.partition_point(|&o| o <= t);
            (op_key(t), above as f64 / n)
        })
        .collect();
    Ok((ao, op))
}

pub fn op_key(threshold: f64) -> String {
    format!("{threshold:.2}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub auc: f64,
    pub p_at_20: f64,
    pub p_norm_auc: f64,
    pub ao: f64,
    pub op: BTreeMap<String, f64>,
    pub success_curve: Vec<f64>,
    pub norm_precision_curve: Vec<f64>,
    pub precision_curve: Vec<f64>,
    pub n_frames: usize,
}

impl MetricReport {
    pub fn compute(pairs: &[FramePair]) -> Result<Self, EvalError> {
        let (success_curve, auc) = success_auc(pairs)?;
        let (ao, op) = ao_and_op(pairs)?;
        let (norm_curve, p_norm_auc) = norm_precision_curve(pairs);
        Ok(MetricReport {
            auc,
            p_at_20: precision_at(pairs, PRECISION_RADIUS),
            p_norm_auc,
            ao,
            op,
            success_curve,
            norm_precision_curve: norm_curve,
            precision_curve: precision_curve(pairs).into_iter().map(|(_, v)| v).collect(),
            n_frames: pairs.len(),
        })
    }

    /// Unweighted mean of per-sequence reports, curves averaged pointwise.
    pub fn aggregate(reports: &[MetricReport]) -> Result<Self, EvalError> {
        let first = reports.first().ok_or(EvalError::Empty)?;
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let mean_curve = |f: &dyn Fn(&MetricReport) -> &Vec<f64>| -> Vec<f64> {
            (0..f(first).len())
                .map(|k| reports.iter().map(|r| f(r)[k]).sum::<f64>() / n)
                .collect()
        };
        Ok(MetricReport {
            auc: mean(&|r| r.auc),
            p_at_20: mean(&|r| r.p_at_20),
            p_norm_auc: mean(&|r| r.p_norm_auc),
            ao: mean(&|r| r.ao),
            op: first
                .op
                .keys()
                .map(|k| (k.clone(), mean(&|r| r.op.get(k).copied().unwrap_or(0.0))))
                .collect(),
            success_curve: mean_curve(&|r| &r.success_curve),
            norm_precision_curve: mean_curve(&|r| &r.norm_precision_curve),
            precision_curve: mean_curve(&|r| &r.precision_curve),
            n_frames: reports.iter().map(|r| r.n_frames).sum(),
        })
    }
}
