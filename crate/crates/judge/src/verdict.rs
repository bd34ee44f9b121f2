use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::JudgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgement {
    Correct,
    Incorrect,
}

impl Judgement {
    pub fn parse(label: &str) -> Option<Self> {
        match label.trim().to_ascii_lowercase().as_str() {
            "correct" => Some(Self::Correct),
            "incorrect" => Some(Self::Incorrect),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub judgement: Judgement,
    pub rationale: String,
}

impl EquivalenceVerdict {
    pub fn is_correct(&self) -> bool {
        self.judgement == Judgement::Correct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceLabel {
    Supported,
    PartiallySupported,
    NotSupported,
}

impl EvidenceLabel {
    pub const ALL: [EvidenceLabel; 3] = [Self::Supported, Self::PartiallySupported, Self::NotSupported];

    /// Accepts the upper-case wire labels and the snake-case names.
    pub fn parse(label: &str) -> Option<Self> {
        match label.trim().to_ascii_uppercase().as_str() {
            "SUPPORTED" => Some(Self::Supported),
            "PARTIALLY_SUPPORTED" => Some(Self::PartiallySupported),
            "NOT_SUPPORTED" => Some(Self::NotSupported),
            _ => None,
        }
    }

    pub fn wire(self) -> &'static str {
        match self {
            Self::Supported => "SUPPORTED",
            Self::PartiallySupported => "PARTIALLY_SUPPORTED",
            Self::NotSupported => "NOT_SUPPORTED",
        }
    }
}

impl fmt::Display for EvidenceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire())
    }
}

/// One entry of the judge's per-claim analysis, kept as returned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimAnalysis {
    #[serde(default)]
    pub claim: String,
    #[serde(default)]
    pub status: String,
    #[serde(default)]
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceVerdict {
    pub verdict: EvidenceLabel,
    #[serde(default)]
    pub claims: Vec<ClaimAnalysis>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingResult {
    pub groups: Vec<Vec<String>>,
}

impl GroupingResult {
    /// Check that `groups` uses every input answer exactly as often as it
    /// occurs in `answers`, verbatim, with no empty group.
    pub fn validate_partition(&self, answers: &[String]) -> Result<(), JudgeError> {
        let mut remaining: HashMap<&str, usize> = HashMap::new();
        for a in answers {
            *remaining.entry(a.as_str()).or_default() += 1;
        }
        for (i, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                return Err(JudgeError::PartitionViolation(format!("group {i} is empty")));
            }
            for a in group {
                match remaining.get_mut(a.as_str()) {
                    Some(n) if *n > 0 => *n -= 1,
                    Some(_) => return Err(JudgeError::PartitionViolation(format!("{a:?} appears too often"))),
                    None => return Err(JudgeError::PartitionViolation(format!("{a:?} is not an input answer"))),
                }
            }
        }
        let mut missing: Vec<&str> = remaining.into_iter().filter(|(_, n)| *n > 0).map(|(a, _)| a).collect();
        if !missing.is_empty() {
            missing.sort();
            return Err(JudgeError::PartitionViolation(format!("missing {missing:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn grouping(groups: &[&[&str]]) -> GroupingResult {
        GroupingResult {
            groups: groups.iter().map(|g| strings(g)).collect(),
        }
    }

    #[test]
    fn partition_checks() {
        let input = strings(&["a", "b", "a"]);
        assert!(grouping(&[&["a", "b"], &["a"]]).validate_partition(&input).is_ok());
        for bad in [
            grouping(&[&["a", "b"]]),
            grouping(&[&["a", "b", "a", "a"]]),
            grouping(&[&["a", "B", "a"]]),
            grouping(&[&["a", "b", "a"], &[]]),
        ] {
            assert!(matches!(bad.validate_partition(&input), Err(JudgeError::PartitionViolation(_))));
        }
    }

    #[test]
    fn labels() {
        assert_eq!(EvidenceLabel::parse(" partially_supported "), Some(EvidenceLabel::PartiallySupported));
        assert_eq!(EvidenceLabel::parse("MAYBE"), None);
        assert_eq!(Judgement::parse("Correct"), Some(Judgement::Correct));
        assert_eq!(Judgement::parse("maybe"), None);
    }
}
