//! A run configuration that can round-trip through JSON, so experiments can
//! be frozen to a file and replayed exactly.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// Descent with deterministic bisection probes (needs a smoothness bound).
    IngdDet,
    /// Descent with one uniform probe per inner iteration.
    IngdRand,
    /// Averaged subgradient descent, then bisection-probe descent.
    GdIngdDet,
    /// Averaged subgradient descent, then random-probe descent.
    GdIngdRand,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::IngdDet => "ingd-det",
            Algo::IngdRand => "ingd-rand",
            Algo::GdIngdDet => "gd-ingd-det",
            Algo::GdIngdRand => "gd-ingd-rand",
        }
    }

    pub fn deterministic(&self) -> bool {
        matches!(self, Algo::IngdDet | Algo::GdIngdDet)
    }

    pub fn uses_gd_phase(&self) -> bool {
        matches!(self, Algo::GdIngdDet | Algo::GdIngdRand)
    }
}

/// Everything a `run` needs. Optional fields fall back to instance metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: String,
    pub algo: Algo,
    pub delta: f64,
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inner: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<usize>,
    /// Start point; omitted means the instance default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            bail!("delta must be positive and finite, got {}", self.delta);
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            bail!("eps must be positive and finite, got {}", self.eps);
        }
        if let Some(h) = self.smoothness {
            if !(h >= 0.0 && h.is_finite()) {
                bail!("smoothness must be nonnegative and finite, got {h}");
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
