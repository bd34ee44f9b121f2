//! Group-relative advantages and the clipped surrogate term.

use serde::{Deserialize, Serialize};

/// Standard deviations below this are treated as zero.
pub const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrpoError {
    #[error("rollout group is empty")]
    EmptyGroup,
    #[error("reward {index} is not finite")]
    NonFiniteReward { index: usize },
}

/// Rewards of the `G` rollouts sampled for one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RolloutGroup {
    rewards: Vec<f64>,
}

impl RolloutGroup {
    pub fn new(rewards: Vec<f64>) -> Result<Self, GrpoError> {
        if rewards.is_empty() {
            return Err(GrpoError::EmptyGroup);
        }
        if let Some(index) = rewards.iter().position(|r| !r.is_finite()) {
            return Err(GrpoError::NonFiniteReward { index });
        }
        Ok(Self { rewards })
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.rewards.iter().sum::<f64>() / self.len() as f64
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        let mean = self.mean();
        let var = self.rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / self.len() as f64;
        var.sqrt()
    }
}

impl TryFrom<Vec<f64>> for RolloutGroup {
    type Error = GrpoError;

    fn try_from(rewards: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(rewards)
    }
}

impl From<RolloutGroup> for Vec<f64> {
    fn from(group: RolloutGroup) -> Self {
        group.rewards
    }
}

/// `(r_i - mean) / std` with population statistics. A group whose rewards
/// are all equal gets all-zero advantages.
pub fn normalize_advantages(group: &RolloutGroup) -> Vec<f64> {
    let mean = group.mean();
    let std = group.std();
    if std < STD_FLOOR {
        return vec![0.0; group.len()];
    }
    group.rewards.iter().map(|r| (r - mean) / std).collect()
}

/// `min(ratio * A, clamp(ratio, 1 - eps, 1 + eps) * A)`.
pub fn clipped_surrogate_term(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}

/// Mean clipped surrogate over a group given per-rollout probability ratios.
/// No KL term.
pub fn group_surrogate(ratios: &[f64], advantages: &[f64], epsilon: f64) -> f64 {
    assert_eq!(ratios.len(), advantages.len(), "one ratio per advantage");
    if ratios.is_empty() {
        return 0.0;
    }
    let total: f64 = ratios
        .iter()
        .zip(advantages)
        .map(|(&r, &a)| clipped_surrogate_term(r, a, epsilon))
        .sum();
    total / ratios.len() as f64
}
