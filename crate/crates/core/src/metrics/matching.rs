use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::normalize::normalize_answer;
use super::MetricsError;

/// A reference answer and the surface forms that count as the same answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub canonical: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl AnswerKey {
    /// Build a key, dropping aliases that normalize to nothing, to the
    /// canonical form, or to an earlier alias.
    pub fn new<S: Into<String>>(
        canonical: impl Into<String>,
        aliases: impl IntoIterator<Item = S>,
    ) -> Result<Self, MetricsError> {
        let canonical = canonical.into();
        let canonical_norm = normalize_answer(&canonical);
        if canonical_norm.is_empty() {
            return Err(MetricsError::EmptyAnswerKey(canonical));
        }
        let mut seen = HashSet::from([canonical_norm]);
        let aliases = aliases
            .into_iter()
            .map(Into::into)
            .filter(|alias: &String| {
                let norm = normalize_answer(alias);
                !norm.is_empty() && seen.insert(norm)
            })
            .collect();
        Ok(Self { canonical, aliases })
    }

    pub fn single(canonical: impl Into<String>) -> Result<Self, MetricsError> {
        Self::new(canonical, Vec::<String>::new())
    }

    /// Re-apply the constructor's invariants to a deserialized key.
    pub fn validated(self) -> Result<Self, MetricsError> {
        Self::new(self.canonical, self.aliases)
    }

    /// All surface forms, canonical first.
    pub fn forms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.canonical.as_str()).chain(self.aliases.iter().map(String::as_str))
    }

    /// Normalized forms; never contains the empty string.
    pub fn normalized_forms(&self) -> BTreeSet<String> {
        self.forms()
            .map(normalize_answer)
            .filter(|n| !n.is_empty())
            .collect()
    }

    pub fn matches(&self, prediction: &str) -> bool {
        let norm = normalize_answer(prediction);
        !norm.is_empty() && self.forms().any(|f| normalize_answer(f) == norm)
    }
}

/// Per-prediction key assignments and the counts derived from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub assignments: Vec<Option<usize>>,
    pub preds: usize,
    pub refs: usize,
    pub hits: usize,
}

impl MatchOutcome {
    /// Counts implied by an assignment list over `refs` keys.
    pub fn from_assignments(assignments: Vec<Option<usize>>, refs: usize) -> Self {
        let hits = assignments.iter().flatten().collect::<HashSet<_>>().len();
        Self {
            preds: assignments.len(),
            refs,
            hits,
            assignments,
        }
    }
}

/// Exact match with aliases. Each prediction goes to the lowest-index key
/// it matches; `hits` counts distinct keys, so repeated synonyms of one key
/// add predictions but not hits.
pub fn match_predictions<S: AsRef<str>>(preds: &[S], keys: &[AnswerKey]) -> Result<MatchOutcome, MetricsError> {
    if keys.is_empty() {
        return Err(MetricsError::EmptyReferenceSet);
    }
    let key_forms: Vec<BTreeSet<String>> = keys.iter().map(AnswerKey::normalized_forms).collect();
    let assignments = preds
        .iter()
        .map(|p| {
            let norm = normalize_answer(p.as_ref());
            if norm.is_empty() {
                return None;
            }
            key_forms.iter().position(|forms| forms.contains(&norm))
        })
        .collect();
    Ok(MatchOutcome::from_assignments(assignments, keys.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alias_match() {
        let keys = [AnswerKey::new("NDZ", ["Nkosazana Dlamini-Zuma"]).unwrap()];
        let m = match_predictions(&["Nkosazana Dlamini-Zuma"], &keys).unwrap();
        assert_eq!((m.hits, m.preds, m.refs), (1, 1, 1));
    }

    #[test]
    fn duplicate_synonyms_hit_once() {
        let keys = [AnswerKey::single("x").unwrap()];
        let m = match_predictions(&["x", "X  !"], &keys).unwrap();
        assert_eq!((m.hits, m.preds), (1, 2));
        assert_eq!(m.assignments, vec![Some(0), Some(0)]);
    }

    #[test]
    fn empty_predictions() {
        let keys = [AnswerKey::single("x").unwrap()];
        let m = match_predictions::<&str>(&[], &keys).unwrap();
        assert_eq!((m.hits, m.preds, m.refs), (0, 0, 1));
    }

    #[test]
    fn empty_reference_set() {
        assert_eq!(match_predictions(&["x"], &[]), Err(MetricsError::EmptyReferenceSet));
    }

    #[test]
    fn lowest_index_wins_and_empty_never_matches() {
        let keys = [
            AnswerKey::single("Paris").unwrap(),
            AnswerKey::new("Paris, France", ["paris"]).unwrap(),
        ];
        let m = match_predictions(&["PARIS", "...", "paris france"], &keys).unwrap();
        assert_eq!(m.assignments, vec![Some(0), None, Some(1)]);
        assert_eq!(m.hits, 2);
    }

    #[test]
    fn key_constructor_dedups() {
        let k = AnswerKey::new("Five", ["5", "five!", "", "5."]).unwrap();
        assert_eq!(k.aliases, vec!["5"]);
        assert!(AnswerKey::single("?!").is_err());
    }

    proptest! {
        #[test]
        fn hits_bounded(preds in proptest::collection::vec("[abc ]{0,3}", 0..8),
                        keys in proptest::collection::vec("[abc]{1,3}", 1..5)) {
            let keys: Vec<_> = keys.into_iter().map(|k| AnswerKey::single(k).unwrap()).collect();
            let m = match_predictions(&preds, &keys).unwrap();
            prop_assert!(m.hits <= m.preds.min(m.refs));
            let distinct: HashSet<_> = m.assignments.iter().flatten().collect();
            prop_assert_eq!(m.hits, distinct.len());
        }

        #[test]
        fn alias_swap_invariant(canon in "[a-z]{1,5}", alias in "[A-Z]{1,5}", pred in "[a-zA-Z]{1,5}") {
            let a = AnswerKey::new(canon.clone(), [alias.clone()]).unwrap();
            let b = AnswerKey::new(alias, [canon]).unwrap();
            let ma = match_predictions(&[pred.clone()], &[a]).unwrap();
            let mb = match_predictions(&[pred], &[b]).unwrap();
            prop_assert_eq!(ma, mb);
        }
    }
}
