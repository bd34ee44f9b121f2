//! Token entropy and the adaptive entropy-bonus controller.

use serde::{Deserialize, Serialize};

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EntropyError {
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("rollout has no token distributions")]
    EmptyRollout,
    #[error("invalid controller state: {0}")]
    InvalidState(String),
}

/// Shannon entropy in nats. Zero entries contribute nothing.
pub fn token_entropy(dist: &[f64]) -> Result<f64, EntropyError> {
    if dist.is_empty() {
        return Err(EntropyError::NotADistribution("empty vector".into()));
    }
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(EntropyError::NotADistribution(format!("entry {p}")));
    }
    let mass: f64 = dist.iter().sum();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(EntropyError::NotADistribution(format!("mass {mass}")));
    }
    Ok(dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum())
}

/// Arithmetic mean of the per-token entropies.
pub fn mean_rollout_entropy<D: AsRef<[f64]>>(dists: &[D]) -> Result<f64, EntropyError> {
    if dists.is_empty() {
        return Err(EntropyError::EmptyRollout);
    }
    let mut total = 0.0;
    for d in dists {
        total += token_entropy(d.as_ref())?;
    }
    Ok(total / dists.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyControllerState {
    pub lambda: f64,
    pub target: f64,
    pub step: f64,
    pub lambda_max: f64,
}

impl EntropyControllerState {
    pub fn new(lambda: f64, target: f64, step: f64, lambda_max: f64) -> Result<Self, EntropyError> {
        let state = Self {
            lambda,
            target,
            step,
            lambda_max,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<(), EntropyError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(EntropyError::InvalidState(format!("step {}", self.step)));
        }
        if !(self.lambda_max > 0.0 && self.lambda_max.is_finite()) {
            return Err(EntropyError::InvalidState(format!("lambda_max {}", self.lambda_max)));
        }
        if !(0.0..=self.lambda_max).contains(&self.lambda) {
            return Err(EntropyError::InvalidState(format!("lambda {}", self.lambda)));
        }
        if !self.target.is_finite() {
            return Err(EntropyError::InvalidState(format!("target {}", self.target)));
        }
        Ok(())
    }
}

/// Raise `lambda` by one step when the observed entropy is below target,
/// lower it when above, and keep it within `[0, lambda_max]`.
pub fn step_entropy_controller(state: EntropyControllerState, observed: f64) -> EntropyControllerState {
    let lambda = if observed < state.target {
        (state.lambda + state.step).min(state.lambda_max)
    } else if observed > state.target {
        (state.lambda - state.step).max(0.0)
    } else {
        state.lambda
    };
    EntropyControllerState { lambda, ..state }
}
