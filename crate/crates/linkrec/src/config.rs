//! Run configuration: every tunable of the pipeline in one validated struct.
//!
//! A [`RunConfig`] is built from defaults, then optionally overlaid with a
//! key-value config file, then with command-line flags — later sources win.
//! Both the file parser and the flag handlers funnel through
//! [`RunConfig::apply_entry`], so the two surfaces accept exactly the same
//! keys and values. Reports echo the effective config, which is why all the
//! pieces serialize.
//!
//! File format: one `key = value` per line; `#` starts a comment; blank
//! lines are ignored; keys are dotted paths such as `simrank.c` or
//! `eval.list_sizes` (whose value is a comma-separated list).

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::RatingScale;
use crate::error::{Error, Result};
use crate::items::{ItemMethod, MiningParams};
use crate::num::{real, Real};
use crate::scoring::FusionWeights;
use crate::simrank::SimRankParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRankConfig {
    /// Damping factor C, in (0,1).
    pub c: f64,
    pub max_iters: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateConfig {
    /// How many most-similar users feed the candidate seller pool.
    pub n: usize,
}

/// Convex combination coefficients for the three partial scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemsConfig {
    pub method: ItemMethod,
    pub min_support: f64,
    pub min_confidence: f64,
}

/// Which evaluation series to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Full pipeline and ablated baseline.
    Both,
    /// Full pipeline only (user level plus the three item-level series).
    M1,
    /// Ablated baseline only (user level).
    M2,
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(EvalMode::Both),
            "m1" => Ok(EvalMode::M1),
            "m2" => Ok(EvalMode::M2),
            other => {
                Err(Error::Config(format!("unknown eval mode {other:?}; expected both, m1, or m2")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Cross-validation fold count.
    pub k: usize,
    /// Target users sampled per fold.
    pub samples: usize,
    /// Prediction-list sizes to sweep, strictly increasing.
    pub list_sizes: Vec<usize>,
    pub mode: EvalMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub simrank: SimRankConfig,
    pub candidates: CandidateConfig,
    pub fusion: FusionConfig,
    pub items: ItemsConfig,
    pub eval: EvalConfig,
    pub seed: u64,
    pub rating_scale: RatingScale,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            simrank: SimRankConfig { c: 0.8, max_iters: 10, tol: 1e-4 },
            candidates: CandidateConfig { n: 10 },
            fusion: FusionConfig { alpha: 1.0 / 3.0, beta: 1.0 / 3.0, gamma: 1.0 / 3.0 },
            items: ItemsConfig { method: ItemMethod::BestSelling, min_support: 0.01, min_confidence: 0.5 },
            eval: EvalConfig {
                k: 10,
                samples: 50,
                list_sizes: (1..=25).collect(),
                mode: EvalMode::Both,
            },
            seed: 42,
            rating_scale: RatingScale::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad value {value:?} for {key}: {e}")))
}

fn parse_sizes(key: &str, value: &str) -> Result<Vec<usize>> {
    let mut sizes = value
        .split(',')
        .map(|part| parse::<usize>(key, part))
        .collect::<Result<Vec<usize>>>()?;
    sizes.sort_unstable();
    sizes.dedup();
    Ok(sizes)
}

impl RunConfig {
    /// Sets one dotted-path key from its textual value.
    pub fn apply_entry(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "simrank.c" => self.simrank.c = parse(key, value)?,
            "simrank.max_iters" => self.simrank.max_iters = parse(key, value)?,
            "simrank.tol" => self.simrank.tol = parse(key, value)?,
            "candidates.n" => self.candidates.n = parse(key, value)?,
            "fusion.alpha" => self.fusion.alpha = parse(key, value)?,
            "fusion.beta" => self.fusion.beta = parse(key, value)?,
            "fusion.gamma" => self.fusion.gamma = parse(key, value)?,
            "items.method" => self.items.method = value.trim().parse()?,
            "items.min_support" => self.items.min_support = parse(key, value)?,
            "items.min_confidence" => self.items.min_confidence = parse(key, value)?,
            "eval.k" => self.eval.k = parse(key, value)?,
            "eval.samples" => self.eval.samples = parse(key, value)?,
            "eval.list_sizes" => self.eval.list_sizes = parse_sizes(key, value)?,
            "eval.mode" => self.eval.mode = value.trim().parse()?,
            "seed" => self.seed = parse(key, value)?,
            "rating_scale.min" | "rating_scale.max" => {
                let v: f64 = parse(key, value)?;
                let (mut min, mut max) = (self.rating_scale.min(), self.rating_scale.max());
                if key.ends_with("min") {
                    min = v;
                } else {
                    max = v;
                }
                self.rating_scale = RatingScale::new(min, max)?;
            }
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Default config overlaid with entries from a key-value file.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut config = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            config.apply_entry(key.trim(), value)?;
        }
        Ok(config)
    }

    /// Checks every invariant; call after all overrides are applied.
    pub fn validate(&self) -> Result<()> {
        let s = &self.simrank;
        if !(s.c > 0.0 && s.c < 1.0) {
            return Err(Error::Config(format!("simrank.c must lie in (0,1), got {}", s.c)));
        }
        if s.max_iters == 0 {
            return Err(Error::Config("simrank.max_iters must be at least 1".to_string()));
        }
        if !(s.tol.is_finite() && s.tol > 0.0) {
            return Err(Error::Config(format!("simrank.tol must be positive, got {}", s.tol)));
        }
        if self.candidates.n == 0 {
            return Err(Error::Config("candidates.n must be at least 1".to_string()));
        }
        self.fusion_weights::<f64>()?;
        self.mining_params().validate()?;
        let e = &self.eval;
        if e.k < 2 {
            return Err(Error::Config(format!("eval.k must be at least 2, got {}", e.k)));
        }
        if e.samples == 0 {
            return Err(Error::Config("eval.samples must be at least 1".to_string()));
        }
        if e.list_sizes.is_empty() {
            return Err(Error::Config("eval.list_sizes must not be empty".to_string()));
        }
        if e.list_sizes[0] == 0 {
            return Err(Error::Config("eval.list_sizes entries must be at least 1".to_string()));
        }
        if !e.list_sizes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "eval.list_sizes must be strictly increasing".to_string(),
            ));
        }
        Ok(())
    }

    pub fn simrank_params<F: Real>(&self) -> SimRankParams<F> {
        SimRankParams {
            damping: real(self.simrank.c),
            max_iters: self.simrank.max_iters,
            tol: real(self.simrank.tol),
        }
    }

    /// Validated fusion coefficients; the Eq.-style convexity constraint
    /// (each in [0,1], summing to 1) is enforced here.
    pub fn fusion_weights<F: Real>(&self) -> Result<FusionWeights<F>> {
        FusionWeights::new(real(self.fusion.alpha), real(self.fusion.beta), real(self.fusion.gamma))
    }

    /// Mining thresholds with the fixed absolute floor of 2 baskets.
    pub fn mining_params(&self) -> MiningParams {
        MiningParams {
            min_support: self.items.min_support,
            min_confidence: self.items.min_confidence,
            min_count: 2,
        }
    }
}
