use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::text::normalize;
use crate::error::{Error, Result};

/// Ordered, duplicate-free answer list; an answer's position is its id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct AnswerVocabulary {
    entries: Vec<String>,
    index: HashMap<String, usize>,
}

impl AnswerVocabulary {
    pub fn new<S: AsRef<str>>(entries: &[S]) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::invalid(format!(
                "answer vocabulary needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        let entries: Vec<String> = entries.iter().map(|e| normalize(e.as_ref())).collect();
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate answer {e:?} in vocabulary")));
            }
        }
        Ok(AnswerVocabulary { entries, index })
    }

    /// The `k` most frequent answers, ties broken lexicographically.
    pub fn most_frequent<'a, I>(answers: I, k: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for a in answers {
            *counts.entry(a).or_default() += 1;
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(k);
        let entries: Vec<&str> = ranked.into_iter().map(|(a, _)| a).collect();
        Self::new(&entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Id of an already normalized answer.
    pub fn id(&self, answer: &str) -> Option<usize> {
        self.index.get(answer).copied()
    }

    pub fn answer(&self, id: usize) -> Option<&str> {
        self.entries.get(id).map(String::as_str)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }
}

impl TryFrom<Vec<String>> for AnswerVocabulary {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<AnswerVocabulary> for Vec<String> {
    fn from(v: AnswerVocabulary) -> Self {
        v.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_after_normalization() {
        assert!(AnswerVocabulary::new(&["Yes", "yes "]).is_err());
        assert!(AnswerVocabulary::new(&["yes"]).is_err());
        let v = AnswerVocabulary::new(&["Yes", "no"]).unwrap();
        assert_eq!(v.id("yes"), Some(0));
        assert_eq!(v.answer(1), Some("no"));
    }

    #[test]
    fn most_frequent_breaks_ties_lexicographically() {
        let answers = ["b", "a", "c", "c", "b", "a", "d"];
        let v = AnswerVocabulary::most_frequent(answers.iter().copied(), 3).unwrap();
        assert_eq!(v.entries(), &["a", "b", "c"]);
    }
}
