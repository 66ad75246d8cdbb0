//! Seeded scenario suites used by the ablation harness and its tests.
//!
//! - [`crossing_suite`]: alternates two failure cases. In an *occlusion*
//!   scenario the target disappears for a while next to a loosely similar
//!   distractor that is the only visible object. In a *lookalike* scenario a
//!   near-identical distractor shares the scene and affinity noise alone can
//!   flip the choice.
//! - [`fast_motion_suite`]: fast targets with abrupt direction changes among
//!   lookalike distractors.
//! - [`poisoning_scenario`]: one fixed occlusion case with a loosely similar
//!   distractor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{basis, similar_to_first, BoxSpec, MotionSegment, NoiseSpec, ObjectSpec, Scenario, SCHEMA_VERSION};

const D_APP: usize = 8;

fn object(cx: f64, cy: f64, w: f64, h: f64, appearance: Vec<f64>, motion: Vec<MotionSegment>) -> ObjectSpec {
    ObjectSpec {
        initial_box: BoxSpec { cx, cy, w, h },
        appearance,
        motion,
        occlusion_intervals: Vec::new(),
    }
}

fn constant(vx: f64, vy: f64, frames: usize) -> Vec<MotionSegment> {
    vec![MotionSegment {
        velocity: [vx, vy],
        duration: frames,
    }]
}

fn random_velocity(rng: &mut ChaCha8Rng, speed: (f64, f64)) -> [f64; 2] {
    let s = rng.random_range(speed.0..speed.1);
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    [s * a.cos(), s * a.sin()]
}

/// Target occluded for a stretch while a loosely similar distractor is the
/// only visible object.
pub fn occlusion_scenario(name: String, rng: &mut ChaCha8Rng) -> Scenario {
    let num_frames = 150;
    let (gw, gh) = (160u32, 160u32);
    let size = rng.random_range(14..24) as f64;
    let target_v = random_velocity(rng, (0.3, 1.2));
    let mut target = object(
        rng.random_range(40.0..60.0),
        rng.random_range(40.0..120.0),
        size,
        size,
        basis(D_APP, 0),
        constant(target_v[0], target_v[1], num_frames),
    );
    let start = rng.random_range(40..70);
    let len = rng.random_range(8..16);
    target.occlusion_intervals = vec![[start, start + len]];
    let similarity = rng.random_range(0.3..0.5);
    let distractor_v = random_velocity(rng, (0.3, 1.2));
    let distractor = object(
        rng.random_range(100.0..130.0),
        rng.random_range(30.0..130.0),
        size,
        size,
        similar_to_first(D_APP, 1, similarity),
        constant(distractor_v[0], distractor_v[1], num_frames),
    );
    Scenario {
        schema_version: SCHEMA_VERSION,
        name,
        grid_w: gw,
        grid_h: gh,
        num_frames,
        seed: rng.random(),
        d_app: D_APP,
        target,
        distractors: vec![distractor],
        noise: NoiseSpec {
            affinity_sigma: 0.05,
            jitter_sigma: 0.7,
        },
        hallucination_rate: 0.02,
    }
}

/// Near-identical distractor that stays in view next to the target.
pub fn lookalike_scenario(name: String, rng: &mut ChaCha8Rng) -> Scenario {
    let num_frames = 150;
    let (gw, gh) = (160u32, 160u32);
    let size = rng.random_range(14..24) as f64;
    let tv = random_velocity(rng, (0.5, 1.5));
    let target = object(
        rng.random_range(30.0..70.0),
        rng.random_range(30.0..130.0),
        size,
        size,
        basis(D_APP, 0),
        constant(tv[0], tv[1], num_frames),
    );
    let similarity = rng.random_range(0.85..0.95);
    let dv = random_velocity(rng, (0.5, 1.5));
    let distractor = object(
        rng.random_range(90.0..130.0),
        rng.random_range(30.0..130.0),
        size,
        size,
        similar_to_first(D_APP, 1, similarity),
        constant(dv[0], dv[1], num_frames),
    );
    Scenario {
        schema_version: SCHEMA_VERSION,
        name,
        grid_w: gw,
        grid_h: gh,
        num_frames,
        seed: rng.random(),
        d_app: D_APP,
        target,
        distractors: vec![distractor],
        noise: NoiseSpec {
            affinity_sigma: 0.08,
            jitter_sigma: 0.7,
        },
        hallucination_rate: 0.02,
    }
}

/// `n` scenarios alternating occlusion and lookalike cases.
pub fn crossing_suite(n: usize, seed: u64) -> Vec<Scenario> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            if i % 2 == 0 {
                occlusion_scenario(format!("occlusion-{i:03}"), &mut rng)
            } else {
                lookalike_scenario(format!("lookalike-{i:03}"), &mut rng)
            }
        })
        .collect()
}

fn zigzag(rng: &mut ChaCha8Rng, num_frames: usize, speed: (f64, f64), segment: (usize, usize)) -> Vec<MotionSegment> {
    let mut out = Vec::new();
    let mut total = 0;
    while total < num_frames {
        let duration = rng.random_range(segment.0..segment.1);
        out.push(MotionSegment {
            velocity: random_velocity(rng, speed),
            duration,
        });
        total += duration;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct FastMotionParams {
    pub grid: u32,
    pub target_speed: (f64, f64),
    pub target_segment: (usize, usize),
    pub distractors: usize,
    pub distractor_speed: (f64, f64),
    pub similarity: (f64, f64),
    pub affinity_sigma: f64,
}

impl Default for FastMotionParams {
    fn default() -> Self {
        FastMotionParams {
            grid: 128,
            target_speed: (2.0, 5.0),
            target_segment: (8, 20),
            distractors: 3,
            distractor_speed: (2.0, 5.0),
            similarity: (0.8, 0.9),
            affinity_sigma: 0.05,
        }
    }
}

/// Fast target with abrupt direction changes and lookalike distractors.
pub fn fast_motion_scenario(name: String, rng: &mut ChaCha8Rng) -> Scenario {
    fast_motion_scenario_with(name, rng, &FastMotionParams::default())
}

pub fn fast_motion_scenario_with(name: String, rng: &mut ChaCha8Rng, p: &FastMotionParams) -> Scenario {
    let num_frames = 150;
    let (gw, gh) = (p.grid, p.grid);
    let g = p.grid as f64;
    let size = rng.random_range(14..22) as f64;
    let target = object(
        rng.random_range(30.0..g - 30.0),
        rng.random_range(30.0..g - 30.0),
        size,
        size,
        basis(D_APP, 0),
        zigzag(rng, num_frames, p.target_speed, p.target_segment),
    );
    let distractors = (0..p.distractors)
        .map(|k| {
            object(
                rng.random_range(20.0..g - 20.0),
                rng.random_range(20.0..g - 20.0),
                size,
                size,
                similar_to_first(D_APP, 1 + k, rng.random_range(p.similarity.0..p.similarity.1)),
                zigzag(rng, num_frames, p.distractor_speed, (10, 30)),
            )
        })
        .collect();
    Scenario {
        schema_version: SCHEMA_VERSION,
        name,
        grid_w: gw,
        grid_h: gh,
        num_frames,
        seed: rng.random(),
        d_app: D_APP,
        target,
        distractors,
        noise: NoiseSpec {
            affinity_sigma: p.affinity_sigma,
            jitter_sigma: 0.7,
        },
        hallucination_rate: 0.02,
    }
}

pub fn fast_motion_suite(n: usize, seed: u64) -> Vec<Scenario> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            fast_motion_scenario(format!("fast-{i:03}"), &mut rng)
        })
        .collect()
}

/// Frames during which the target of [`poisoning_scenario`] is fully hidden.
pub const POISONING_OCCLUSION: [usize; 2] = [40, 52];

/// Slow target hidden for twelve frames while a distractor with cosine
/// similarity 0.45 to it stays in view.
pub fn poisoning_scenario() -> Scenario {
    let num_frames = 120;
    let mut target = object(40.5, 64.5, 16.0, 16.0, basis(D_APP, 0), constant(0.5, 0.0, num_frames));
    target.occlusion_intervals = vec![POISONING_OCCLUSION];
    let distractor = object(
        100.5,
        64.5,
        16.0,
        16.0,
        similar_to_first(D_APP, 1, 0.45),
        constant(0.0, 0.5, num_frames),
    );
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "poisoning".into(),
        grid_w: 128,
        grid_h: 128,
        num_frames,
        seed: 2024,
        d_app: D_APP,
        target,
        distractors: vec![distractor],
        noise: NoiseSpec {
            affinity_sigma: 0.02,
            jitter_sigma: 0.5,
        },
        hallucination_rate: 0.0,
    }
}
