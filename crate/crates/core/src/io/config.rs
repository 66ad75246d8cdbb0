//! Run configuration for the `track` and `ablate` commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::simworld::suites::{crossing_suite, fast_motion_suite, poisoning_scenario};
use crate::simworld::Scenario;
use crate::tracker::TrackerConfig;

use super::{json_error, read_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Crossing,
    FastMotion,
    Poisoning,
}

/// A built-in scenario suite. `n` and `seed` are ignored for `poisoning`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub kind: SuiteKind,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl SuiteSpec {
    pub fn scenarios(&self) -> Vec<Scenario> {
        match self.kind {
            SuiteKind::Crossing => crossing_suite(self.n, self.seed),
            SuiteKind::FastMotion => fast_motion_suite(self.n, self.seed),
            SuiteKind::Poisoning => vec![poisoning_scenario()],
        }
    }
}

/// Precomputed candidates for one sequence, replayed instead of simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplaySpec {
    pub id: String,
    /// JSON-lines candidate file, see [`super::replay`].
    pub candidates: PathBuf,
    pub gt: PathBuf,
    #[serde(default)]
    pub absent: Option<PathBuf>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_alphas() -> Vec<f64> {
    vec![0.0, 0.15, 0.25, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenarios: Vec<PathBuf>,
    #[serde(default)]
    pub suites: Vec<SuiteSpec>,
    #[serde(default)]
    pub replay: Vec<ReplaySpec>,
    #[serde(default)]
    pub tracker: TrackerConfig,
    /// Empty means each scenario's own seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub emit_plots: bool,
    /// Motion weights swept by the alpha ablation.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenarios: Vec::new(),
            suites: Vec::new(),
            replay: Vec::new(),
            tracker: TrackerConfig::default(),
            seeds: Vec::new(),
            out_dir: default_out_dir(),
            emit_plots: false,
            alphas: default_alphas(),
        }
    }
}

impl RunConfig {
    /// Makes every relative path relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.scenarios.iter_mut().for_each(fix);
        for r in &mut self.replay {
            fix(&mut r.candidates);
            fix(&mut r.gt);
            if let Some(a) = r.absent.as_mut() {
                fix(a);
            }
        }
        fix(&mut self.out_dir);
    }
}

/// Parses a run config and resolves its paths against the file's directory.
/// Referenced files are not opened here; a missing one fails only its own
/// sequence at run time.
pub fn load_run_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = read_text(path)?;
    let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
    let schema = |msg: String| IoError::Schema {
        path: path.display().to_string(),
        msg,
    };
    cfg.tracker.validate().map_err(|e| schema(e.to_string()))?;
    if cfg.scenarios.is_empty() && cfg.suites.is_empty() && cfg.replay.is_empty() {
        return Err(schema("no scenarios, suites or replay sequences".into()));
    }
    if let Some(a) = cfg.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(schema(format!("alphas: {a} outside [0, 1]")));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    Ok(cfg)
}
