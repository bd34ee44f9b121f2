use std::path::{Path, PathBuf};

use altqa_core::metrics::RewardParams;
use altqa_judge::JudgeEndpointConfig;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub trajectories: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub alpha: f64,
    /// Subset size for @k estimates.
    pub k: usize,
    /// Rollouts sampled per question for @k estimates.
    pub k_prime: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            alpha: RewardParams::DEFAULT_ALPHA,
            k: 3,
            k_prime: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationConfig {
    /// Use rule-based offline judges. Must be chosen explicitly.
    pub mock: Option<bool>,
    pub eta: usize,
    pub k: usize,
    /// Mock verifiers only: share of supported verdicts each demotes.
    pub demotion_rate: f64,
    /// Exit with code 4 when more than this share of candidates lost a
    /// judge call to transport failure.
    pub max_judge_failure_fraction: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            mock: None,
            eta: 3,
            k: 4,
            demotion_rate: 0.0,
            max_judge_failure_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgesConfig {
    pub equivalence: Option<JudgeEndpointConfig>,
    pub verifiers: Vec<JudgeEndpointConfig>,
    pub grouping: Option<JudgeEndpointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrieverConfig {
    pub top_k: usize,
    pub addr: String,
}

impl Default for RetrieverConfig {
    fn default() -> Self {
        Self {
            top_k: altqa_retriever::DEFAULT_TOP_K,
            addr: "127.0.0.1:8080".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub metrics: MetricsConfig,
    pub verification: VerificationConfig,
    pub judges: JudgesConfig,
    pub retriever: RetrieverConfig,
    /// Worker threads; all cores when unset.
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Read a TOML file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .context(Failure::Config)?;
        toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .context(Failure::Config)
    }

    /// Checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        let m = &self.metrics;
        let v = &self.verification;
        let check = || -> Result<()> {
            if !(0.0..=1.0).contains(&m.alpha) {
                bail!("metrics.alpha must lie in [0, 1], got {}", m.alpha);
            }
            if m.k == 0 || m.k > m.k_prime {
                bail!("metrics.k must satisfy 1 <= k <= k_prime, got k = {}, k_prime = {}", m.k, m.k_prime);
            }
            if v.k == 0 || v.eta == 0 || v.eta > v.k {
                bail!("verification.eta must satisfy 1 <= eta <= K, got eta = {}, K = {}", v.eta, v.k);
            }
            if !(0.0..=1.0).contains(&v.max_judge_failure_fraction) {
                bail!("verification.max_judge_failure_fraction must lie in [0, 1]");
            }
            if !(0.0..=1.0).contains(&v.demotion_rate) {
                bail!("verification.demotion_rate must lie in [0, 1]");
            }
            if self.retriever.top_k == 0 {
                bail!("retriever.top_k must be at least 1");
            }
            if self.jobs == Some(0) {
                bail!("jobs must be at least 1");
            }
            Ok(())
        };
        check().context(Failure::Config)
    }

    /// Endpoints for live judging; errors unless all three roles are
    /// configured and there are exactly K verifiers.
    pub fn live_judges(&self) -> Result<(JudgeEndpointConfig, Vec<JudgeEndpointConfig>, JudgeEndpointConfig)> {
        let j = &self.judges;
        let found = || -> Result<_> {
            let (Some(eq), Some(gr)) = (&j.equivalence, &j.grouping) else {
                bail!("live judging needs [judges.equivalence] and [judges.grouping]; set verification.mock = true for offline runs");
            };
            if j.verifiers.len() != self.verification.k {
                bail!(
                    "verification.k = {} but {} [[judges.verifiers]] are configured",
                    self.verification.k,
                    j.verifiers.len()
                );
            }
            Ok((eq.clone(), j.verifiers.clone(), gr.clone()))
        };
        found().context(Failure::Config)
    }
}

/// Resolve a path from a flag, then the config, naming the setting when
/// neither is present.
pub fn require_path(flag: Option<PathBuf>, configured: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| configured.clone())
        .with_context(|| format!("missing {name}: pass it as a flag or set paths.{name}"))
        .context(Failure::Config)
}
