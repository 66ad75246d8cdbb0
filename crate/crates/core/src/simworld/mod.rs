//! Deterministic synthetic world and the memory-conditioned proposer that
//! stands in for a promptable video segmenter.
//!
//! Each object carries a unit appearance latent. The proposer scores every
//! visible object by the cosine similarity between its latent and the mean
//! latent of the memory bank, so what the tracker admits to memory directly
//! shapes the affinity scores it sees next.

pub mod suites;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::geometry::{BBox, RleMask};
use crate::memory::MemoryBank;
use crate::selection::CandidateMask;

pub const SCHEMA_VERSION: u32 = 1;
/// Frames over which visibility ramps in and out around an occlusion.
pub const OCCLUSION_RAMP: usize = 3;

fn default_d_app() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxSpec {
    pub fn to_bbox(self) -> BBox {
        BBox::new(self.cx, self.cy, self.w, self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSegment {
    /// Pixels per frame.
    pub velocity: [f64; 2],
    pub duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub initial_box: BoxSpec,
    pub appearance: Vec<f64>,
    /// Piecewise-constant velocity; the last segment's velocity persists.
    #[serde(default)]
    pub motion: Vec<MotionSegment>,
    /// Half-open `[start, end)` frame ranges of full occlusion.
    #[serde(default)]
    pub occlusion_intervals: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub affinity_sigma: f64,
    pub jitter_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "schema-version")]
    pub schema_version: u32,
    pub name: String,
    pub grid_w: u32,
    pub grid_h: u32,
    pub num_frames: usize,
    pub seed: u64,
    #[serde(default = "default_d_app")]
    pub d_app: usize,
    pub target: ObjectSpec,
    #[serde(default)]
    pub distractors: Vec<ObjectSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub hallucination_rate: f64,
}

impl Scenario {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Target first, then distractors.
    pub fn objects(&self) -> impl Iterator<Item = &ObjectSpec> {
        std::iter::once(&self.target).chain(self.distractors.iter())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut bad = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            bad.push(format!(
                "schema-version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.grid_w == 0 || self.grid_h == 0 {
            bad.push("grid_w/grid_h: must be positive".to_string());
        }
        if self.num_frames == 0 {
            bad.push("num_frames: must be positive".to_string());
        }
        if self.d_app == 0 {
            bad.push("d_app: must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.hallucination_rate) {
            bad.push(format!(
                "hallucination_rate: {} outside [0, 1]",
                self.hallucination_rate
            ));
        }
        if !(self.noise.affinity_sigma >= 0.0) || !(self.noise.jitter_sigma >= 0.0) {
            bad.push("noise: sigmas must be non-negative".to_string());
        }
        for (i, obj) in self.objects().enumerate() {
            let name = if i == 0 {
                "target".to_string()
            } else {
                format!("distractors[{}]", i - 1)
            };
            let b = obj.initial_box;
            if !(b.w >= 1.0 && b.h >= 1.0) {
                bad.push(format!("{name}.initial_box: w and h must be >= 1"));
            } else if b.cx - b.w / 2.0 < -0.5
                || b.cy - b.h / 2.0 < -0.5
                || b.cx + b.w / 2.0 > self.grid_w as f64 - 0.5
                || b.cy + b.h / 2.0 > self.grid_h as f64 - 0.5
            {
                bad.push(format!("{name}.initial_box: outside the grid"));
            }
            if obj.appearance.len() != self.d_app {
                bad.push(format!(
                    "{name}.appearance: dimension {} != d_app {}",
                    obj.appearance.len(),
                    self.d_app
                ));
            } else {
                let norm = obj.appearance.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-6 {
                    bad.push(format!("{name}.appearance: norm {norm} is not 1"));
                }
            }
            for (k, seg) in obj.motion.iter().enumerate() {
                if !seg.velocity.iter().all(|v| v.is_finite()) {
                    bad.push(format!("{name}.motion[{k}].velocity: not finite"));
                }
            }
            for (k, [a, e]) in obj.occlusion_intervals.iter().enumerate() {
                if a >= e || *e > self.num_frames {
                    bad.push(format!(
                        "{name}.occlusion_intervals[{k}]: [{a}, {e}) not within [0, {})",
                        self.num_frames
                    ));
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidScenario(bad))
        }
    }
}

/// Ground truth of one frame. Index 0 is the target.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTruth {
    /// Pixel-aligned box of every object, occluded or not.
    pub boxes: Vec<BBox>,
    pub visibility: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub grid_w: u32,
    pub grid_h: u32,
    pub frames: Vec<FrameTruth>,
}

impl Sequence {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn target_absent(&self, t: usize) -> bool {
        self.frames[t].visibility[0] == 0.0
    }

    /// Target box for evaluation; empty while fully occluded.
    pub fn target_gt(&self, t: usize) -> BBox {
        if self.target_absent(t) {
            BBox::EMPTY
        } else {
            self.frames[t].boxes[0]
        }
    }

    pub fn target_box(&self, t: usize) -> BBox {
        self.frames[t].boxes[0]
    }
}

fn visibility_at(intervals: &[[usize; 2]], t: usize) -> f64 {
    let ramp = (OCCLUSION_RAMP + 1) as f64;
    intervals
        .iter()
        .map(|&[a, e]| {
            if t >= a && t < e {
                0.0
            } else if t < a && a - t <= OCCLUSION_RAMP {
                (a - t) as f64 / ramp
            } else if t >= e && t - e < OCCLUSION_RAMP {
                (t - e + 1) as f64 / ramp
            } else {
                1.0
            }
        })
        .fold(1.0, f64::min)
}

/// Integrates each object's motion with reflection at the grid border.
pub fn generate_sequence(sc: &Scenario) -> Result<Sequence, SimError> {
    sc.validate()?;
    let n_obj = 1 + sc.distractors.len();
    let (lo_x, hi_x) = (-0.5, sc.grid_w as f64 - 0.5);
    let (lo_y, hi_y) = (-0.5, sc.grid_h as f64 - 0.5);

    let mut centers: Vec<[f64; 2]> = sc.objects().map(|o| [o.initial_box.cx, o.initial_box.cy]).collect();
    let mut signs = vec![[1.0f64, 1.0f64]; n_obj];
    let mut frames = Vec::with_capacity(sc.num_frames);
    for t in 0..sc.num_frames {
        if t > 0 {
            for (i, obj) in sc.objects().enumerate() {
                let v = velocity_at(&obj.motion, t - 1);
                let half = [obj.initial_box.w / 2.0, obj.initial_box.h / 2.0];
                for axis in 0..2 {
                    let (lo, hi) = if axis == 0 { (lo_x, hi_x) } else { (lo_y, hi_y) };
                    let mut c = centers[i][axis] + signs[i][axis] * v[axis];
                    let (min_c, max_c) = (lo + half[axis], hi - half[axis]);
                    if max_c <= min_c {
                        c = (lo + hi) / 2.0;
                    } else {
                        // fold back until inside; large steps may bounce more than once
                        while c < min_c || c > max_c {
                            if c < min_c {
                                c = 2.0 * min_c - c;
                            } else {
                                c = 2.0 * max_c - c;
                            }
                            signs[i][axis] = -signs[i][axis];
                        }
                    }
                    centers[i][axis] = c;
                }
            }
        }
        let boxes = sc
            .objects()
            .zip(&centers)
            .map(|(o, c)| {
                let b = BBox::new(c[0], c[1], o.initial_box.w, o.initial_box.h);
                let (x0, y0, x1, y1) = b.pixel_bounds().expect("non-empty by validation");
                BBox::from_pixel_bounds(
                    x0.max(0),
                    y0.max(0),
                    x1.min(sc.grid_w as i64 - 1),
                    y1.min(sc.grid_h as i64 - 1),
                )
            })
            .collect();
        let visibility = sc
            .objects()
            .map(|o| visibility_at(&o.occlusion_intervals, t))
            .collect();
        frames.push(FrameTruth { boxes, visibility });
    }
    Ok(Sequence {
        id: format!("{}-s{}", sc.name, sc.seed),
        grid_w: sc.grid_w,
        grid_h: sc.grid_h,
        frames,
    })
}

fn velocity_at(motion: &[MotionSegment], step: usize) -> [f64; 2] {
    let mut start = 0;
    for seg in motion {
        if step < start + seg.duration {
            return seg.velocity;
        }
        start += seg.duration;
    }
    motion.last().map_or([0.0, 0.0], |s| s.velocity)
}

/// Candidate set for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProposals {
    pub candidates: Vec<CandidateMask>,
}

const HALLUCINATION_STREAM: u64 = u64::MAX - 1;
const SHUFFLE_STREAM: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for the `(seed, frame, stream)` triple.
pub fn stream_rng(seed: u64, frame: usize, stream: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64((frame as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ splitmix64(stream)));
    ChaCha8Rng::seed_from_u64(key)
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * sigma
}

/// Mean of the bank latents, normalized. `None` when the bank carries no
/// usable appearance.
pub fn bank_direction(bank: &MemoryBank<'_>, d_app: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; d_app];
    let mut used = 0;
    for e in &bank.entries {
        if e.appearance.len() == d_app {
            for (s, v) in sum.iter_mut().zip(&e.appearance) {
                *s += v;
            }
            used += 1;
        }
    }
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    if used == 0 || norm == 0.0 {
        return None;
    }
    sum.iter_mut().for_each(|v| *v /= norm);
    Some(sum)
}

fn cosine(unit: &[f64], direction: Option<&[f64]>) -> f64 {
    match direction {
        None => 0.0,
        Some(d) => {
            let norm = unit.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = unit.iter().zip(d).map(|(a, b)| a * b).sum();
            (dot / norm).clamp(-1.0, 1.0)
        }
    }
}

/// Logit that crosses zero at half visibility.
pub fn object_logit(visibility: f64) -> f64 {
    4.0 * (visibility - 0.5)
}

/// Memory-conditioned proposer over a generated sequence.
#[derive(Debug, Clone)]
pub struct SimProposer<'a> {
    scenario: &'a Scenario,
    sequence: &'a Sequence,
}

impl<'a> SimProposer<'a> {
    pub fn new(scenario: &'a Scenario, sequence: &'a Sequence) -> Self {
        SimProposer { scenario, sequence }
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn sequence(&self) -> &Sequence {
        self.sequence
    }

    fn jittered_mask(&self, b: &BBox, rng: &mut ChaCha8Rng) -> RleMask {
        let (gw, gh) = (self.sequence.grid_w, self.sequence.grid_h);
        let (x0, y0, x1, y1) = b.pixel_bounds().expect("object boxes are non-empty");
        let sigma = self.scenario.noise.jitter_sigma;
        let mut j = || gaussian(rng, sigma).round() as i64;
        let (mut x0, mut y0, mut x1, mut y1) = (x0 + j(), y0 + j(), x1 + j(), y1 + j());
        x0 = x0.clamp(0, gw as i64 - 1);
        y0 = y0.clamp(0, gh as i64 - 1);
        x1 = x1.clamp(x0, gw as i64 - 1);
        y1 = y1.clamp(y0, gh as i64 - 1);
        RleMask::from_rect(gw, gh, x0, y0, x1, y1)
    }

    /// Candidates for frame `t` given the bank conditioning it.
    pub fn propose_frame(&self, t: usize, bank: &MemoryBank<'_>) -> Result<FrameProposals, SimError> {
        let n = self.sequence.num_frames();
        if t >= n {
            return Err(SimError::FrameOutOfRange {
                frame: t,
                num_frames: n,
            });
        }
        if bank.is_empty() {
            return Err(SimError::EmptyBank);
        }
        let sc = self.scenario;
        let direction = bank_direction(bank, sc.d_app);
        let truth = &self.sequence.frames[t];
        let mut candidates = Vec::with_capacity(truth.boxes.len() + 1);
        for (i, obj) in sc.objects().enumerate() {
            let vis = truth.visibility[i];
            if vis <= 0.0 {
                continue;
            }
            let mut rng = stream_rng(sc.seed, t, i as u64);
            let mask = self.jittered_mask(&truth.boxes[i], &mut rng);
            let affinity = cosine(&obj.appearance, direction.as_deref()) * vis
                + gaussian(&mut rng, sc.noise.affinity_sigma);
            candidates.push(
                CandidateMask::new(mask, affinity.clamp(0.0, 1.0), object_logit(vis))
                    .with_appearance(obj.appearance.clone()),
            );
        }
        if sc.hallucination_rate > 0.0 {
            let mut rng = stream_rng(sc.seed, t, HALLUCINATION_STREAM);
            if rng.random_bool(sc.hallucination_rate) {
                candidates.push(self.hallucination(&mut rng, direction.as_deref()));
            }
        }
        candidates.shuffle(&mut stream_rng(sc.seed, t, SHUFFLE_STREAM));
        Ok(FrameProposals { candidates })
    }

    fn hallucination(&self, rng: &mut ChaCha8Rng, direction: Option<&[f64]>) -> CandidateMask {
        let (gw, gh) = (self.sequence.grid_w as i64, self.sequence.grid_h as i64);
        let w = rng.random_range(1..=(gw / 4).max(1));
        let h = rng.random_range(1..=(gh / 4).max(1));
        let x0 = rng.random_range(0..=(gw - w));
        let y0 = rng.random_range(0..=(gh - h));
        let mut appearance: Vec<f64> = (0..self.scenario.d_app)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = appearance.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        appearance.iter_mut().for_each(|v| *v /= norm);
        let vis = rng.random_range(0.5..1.0);
        let affinity = cosine(&appearance, direction) * vis
            + gaussian(rng, self.scenario.noise.affinity_sigma);
        let mask = RleMask::from_rect(
            self.sequence.grid_w,
            self.sequence.grid_h,
            x0,
            y0,
            x0 + w - 1,
            y0 + h - 1,
        );
        CandidateMask::new(mask, affinity.clamp(0.0, 1.0), object_logit(vis)).with_appearance(appearance)
    }
}

/// Unit vector `e_axis` in `d` dimensions.
pub fn basis(d: usize, axis: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[axis % d] = 1.0;
    v
}

/// Unit vector with cosine `similarity` to `e_0`, lying in the `e_0, e_axis`
/// plane.
pub fn similar_to_first(d: usize, axis: usize, similarity: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = similarity;
    v[axis % d] += (1.0 - similarity * similarity).max(0.0).sqrt();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mask_to_bbox;
    use crate::memory::{build_bank_fifo, MemoryEntry};

    fn object(cx: f64, cy: f64, appearance: Vec<f64>) -> ObjectSpec {
        ObjectSpec {
            initial_box: BoxSpec { cx, cy, w: 8.0, h: 8.0 },
            appearance,
            motion: vec![],
            occlusion_intervals: vec![],
        }
    }

    fn scenario(target: ObjectSpec, distractors: Vec<ObjectSpec>) -> Scenario {
        Scenario {
            schema_version: 1,
            name: "unit".into(),
            grid_w: 64,
            grid_h: 64,
            num_frames: 20,
            seed: 9,
            d_app: 4,
            target,
            distractors,
            noise: NoiseSpec::default(),
            hallucination_rate: 0.0,
        }
    }

    fn entry(frame: usize, appearance: Vec<f64>) -> MemoryEntry {
        MemoryEntry {
            frame_index: frame,
            appearance,
            s_mask: 1.0,
            s_obj: 4.0,
            s_kf: 1.0,
            is_prompt_frame: frame == 0,
            target_absent: false,
        }
    }

    #[test]
    fn static_object_never_moves() {
        let sc = scenario(object(20.5, 20.5, basis(4, 0)), vec![]);
        let seq = generate_sequence(&sc).unwrap();
        assert_eq!(seq.num_frames(), 20);
        assert!(seq.frames.iter().all(|f| f.boxes[0] == seq.frames[0].boxes[0]));
        assert!(seq.frames.iter().all(|f| f.visibility[0] == 1.0));
    }

    #[test]
    fn constant_velocity_kinematics() {
        let mut t = object(10.5, 20.5, basis(4, 0));
        t.motion = vec![MotionSegment { velocity: [2.0, 0.0], duration: 10 }];
        let seq = generate_sequence(&scenario(t, vec![])).unwrap();
        assert_eq!(seq.frames[10].boxes[0].cx, 30.5);
        assert_eq!(seq.frames[10].boxes[0].cy, 20.5);
    }

    #[test]
    fn reflects_at_border() {
        let mut t = object(56.5, 20.5, basis(4, 0));
        t.motion = vec![MotionSegment { velocity: [3.0, 0.0], duration: 20 }];
        let seq = generate_sequence(&scenario(t, vec![])).unwrap();
        for f in &seq.frames {
            let [l, _, r, _] = f.boxes[0].edges();
            assert!(l >= -0.5 && r <= 63.5);
        }
        assert!(seq.frames[19].boxes[0].cx < seq.frames[5].boxes[0].cx);
    }

    #[test]
    fn occlusion_ramps() {
        let mut t = object(20.5, 20.5, basis(4, 0));
        t.occlusion_intervals = vec![[8, 12]];
        let seq = generate_sequence(&scenario(t, vec![])).unwrap();
        let vis: Vec<f64> = seq.frames.iter().map(|f| f.visibility[0]).collect();
        assert_eq!(&vis[4..16], &[1.0, 0.75, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(seq.target_absent(9) && seq.target_gt(9).empty);
        assert!(!seq.target_absent(7));
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut sc = scenario(object(2.0, 20.5, vec![1.0, 1.0, 0.0, 0.0]), vec![]);
        sc.schema_version = 2;
        sc.target.occlusion_intervals = vec![[5, 50]];
        let Err(SimError::InvalidScenario(v)) = sc.validate() else {
            panic!("expected validation failure")
        };
        assert_eq!(v.len(), 4, "{v:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let mut sc = scenario(object(20.5, 20.5, basis(4, 0)), vec![object(40.5, 40.5, basis(4, 1))]);
        sc.noise = NoiseSpec { affinity_sigma: 0.1, jitter_sigma: 1.0 };
        sc.hallucination_rate = 0.5;
        let seq = generate_sequence(&sc).unwrap();
        let history = vec![entry(0, basis(4, 0))];
        let bank = build_bank_fifo(&history, 7);
        let p = SimProposer::new(&sc, &seq);
        for t in 0..20 {
            assert_eq!(p.propose_frame(t, &bank).unwrap(), p.propose_frame(t, &bank).unwrap());
        }
        assert_eq!(generate_sequence(&sc).unwrap(), seq);
        let other = sc.clone().with_seed(10);
        let q = SimProposer::new(&other, &seq);
        assert!((0..20).any(|t| q.propose_frame(t, &bank).unwrap() != p.propose_frame(t, &bank).unwrap()));
    }

    #[test]
    fn clean_single_target_scores() {
        let sc = scenario(object(20.5, 20.5, basis(4, 0)), vec![]);
        let seq = generate_sequence(&sc).unwrap();
        let history = vec![entry(0, basis(4, 0))];
        let bank = build_bank_fifo(&history, 7);
        let out = SimProposer::new(&sc, &seq).propose_frame(3, &bank).unwrap();
        assert_eq!(out.candidates.len(), 1);
        let c = &out.candidates[0];
        assert_eq!((c.s_mask, c.s_obj), (1.0, 2.0));
        assert_eq!(mask_to_bbox(&c.mask), seq.frames[3].boxes[0]);
        assert!(SimProposer::new(&sc, &seq).propose_frame(20, &bank).is_err());
        let empty = MemoryBank { entries: vec![] };
        assert_eq!(SimProposer::new(&sc, &seq).propose_frame(1, &empty), Err(SimError::EmptyBank));
    }

    #[test]
    fn occluded_target_fails_object_gate() {
        let mut t = object(20.5, 20.5, basis(4, 0));
        t.occlusion_intervals = vec![[5, 10]];
        // during the ramp the logit is observable
        let sc = scenario(t, vec![]);
        let seq = generate_sequence(&sc).unwrap();
        let history = vec![entry(0, basis(4, 0))];
        let bank = build_bank_fifo(&history, 7);
        let p = SimProposer::new(&sc, &seq);
        assert!(p.propose_frame(7, &bank).unwrap().candidates.is_empty());
        assert_eq!(object_logit(0.0), -2.0);
        assert_eq!(p.propose_frame(4, &bank).unwrap().candidates[0].s_obj, -1.0);
    }

    #[test]
    fn poisoned_bank_reverses_ranking() {
        // orthogonal latents: cos(target, target-bank) = 1, cos(distractor, target-bank) = 0
        let sc = scenario(object(16.5, 16.5, basis(4, 0)), vec![object(44.5, 44.5, basis(4, 1))]);
        let seq = generate_sequence(&sc).unwrap();
        let p = SimProposer::new(&sc, &seq);
        let clean: Vec<_> = (0..8).map(|f| entry(f, basis(4, 0))).collect();
        let poisoned: Vec<_> = std::iter::once(entry(0, basis(4, 0)))
            .chain((1..8).map(|f| entry(f, basis(4, 1))))
            .collect();
        let pure_distractor: Vec<_> = (1..8).map(|f| entry(f, basis(4, 1))).collect();
        for t in 0..20 {
            let score = |h: &[MemoryEntry]| {
                let bank = build_bank_fifo(h, 7);
                let c = p.propose_frame(t, &bank).unwrap().candidates;
                let target = c.iter().find(|c| c.appearance == basis(4, 0)).unwrap().s_mask;
                let distractor = c.iter().find(|c| c.appearance == basis(4, 1)).unwrap().s_mask;
                (target, distractor)
            };
            let (a, b) = score(&clean);
            assert!(a > b);
            // bank mean (e0 + 7 e1)/|.|: cos to e0 = 1/sqrt(50), to e1 = 7/sqrt(50)
            let (a, b) = score(&poisoned);
            assert!((a - 1.0 / 50f64.sqrt()).abs() < 1e-12 && (b - 7.0 / 50f64.sqrt()).abs() < 1e-12);
            let (a, b) = score(&pure_distractor);
            assert!(b > a);
        }
    }

    #[test]
    fn masks_stay_in_grid() {
        let mut t = object(4.5, 4.5, basis(4, 0));
        t.motion = vec![MotionSegment { velocity: [5.0, 7.0], duration: 100 }];
        let mut sc = scenario(t, vec![object(59.5, 59.5, basis(4, 1))]);
        sc.noise.jitter_sigma = 4.0;
        sc.hallucination_rate = 1.0;
        let seq = generate_sequence(&sc).unwrap();
        let history = vec![entry(0, basis(4, 0))];
        let bank = build_bank_fifo(&history, 7);
        let p = SimProposer::new(&sc, &seq);
        for t in 0..20 {
            for c in p.propose_frame(t, &bank).unwrap().candidates {
                assert_eq!(c.mask.decode().len(), 64 * 64);
                assert!(c.mask.area() > 0);
                assert!((0.0..=1.0).contains(&c.s_mask));
            }
        }
    }
}
