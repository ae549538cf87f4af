use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::text::{normalize, tokenize};
use crate::error::{Error, Result};

/// The packaged 65-prefix question-type list, one prefix per line, followed
/// by the empty catch-all line.
pub const DEFAULT_QUESTION_TYPES: &str = include_str!("../../data/question_types.txt");

/// How a prefix is compared against the start of a question.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchMode {
    /// Prefix must cover whole tokens: `"is"` matches `"is it"` but not `"isnt it"`.
    #[default]
    TokenBoundary,
    /// Plain character prefix of the normalized question.
    RawCharacter,
}

/// Ordered question-type prefixes with a trailing catch-all.
///
/// Index `len() - 1` is always the catch-all (empty prefix), which matches
/// every question. Prefixes are stored normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct QuestionTypeTable {
    prefixes: Vec<String>,
    by_tokens: HashMap<Vec<String>, usize>,
    max_tokens: usize,
}

impl QuestionTypeTable {
    /// Builds a table from prefixes. An empty trailing entry is taken as the
    /// catch-all; if none is given one is appended.
    pub fn new<S: AsRef<str>>(prefixes: &[S]) -> Result<Self> {
        let mut normalized: Vec<String> = prefixes.iter().map(|p| normalize(p.as_ref())).collect();
        if normalized.last().is_some_and(|p| p.is_empty()) {
            normalized.pop();
        }
        let mut by_tokens = HashMap::with_capacity(normalized.len());
        let mut max_tokens = 0;
        for (i, p) in normalized.iter().enumerate() {
            if p.is_empty() {
                return Err(Error::invalid(format!(
                    "question type table: empty prefix at line {} (only the last line may be empty)",
                    i + 1
                )));
            }
            let toks = tokenize(p);
            max_tokens = max_tokens.max(toks.len());
            if by_tokens.insert(toks, i).is_some() {
                return Err(Error::invalid(format!("question type table: duplicate prefix {p:?}")));
            }
        }
        normalized.push(String::new());
        Ok(QuestionTypeTable {
            prefixes: normalized,
            by_tokens,
            max_tokens,
        })
    }

    /// The packaged table (65 prefixes + catch-all).
    pub fn packaged() -> Self {
        Self::parse(DEFAULT_QUESTION_TYPES).expect("packaged question type table is valid")
    }

    /// Parses the text format: UTF-8, one prefix per line, trailing empty
    /// line for the catch-all.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines: Vec<&str> = text.split('\n').map(|l| l.trim_end_matches('\r')).collect();
        // `split` yields a final "" after the last newline; that is the line
        // terminator, not the catch-all.
        if text.ends_with('\n') {
            lines.pop();
        }
        Self::new(&lines)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Serializes to the text format. `parse(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.prefixes {
            out.push_str(p);
            out.push('\n');
        }
        out
    }

    /// Number of types including the catch-all.
    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn catch_all(&self) -> usize {
        self.prefixes.len() - 1
    }

    pub fn prefix(&self, type_id: usize) -> Option<&str> {
        self.prefixes.get(type_id).map(String::as_str)
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    /// Index of a prefix given by name (as found in annotation files).
    ///
    /// `"none of the above"` resolves to that entry when the table has it.
    pub fn index_of(&self, prefix: &str) -> Option<usize> {
        let n = normalize(prefix);
        if n.is_empty() {
            return Some(self.catch_all());
        }
        self.prefixes[..self.catch_all()].iter().position(|p| *p == n)
    }

    /// Longest matching prefix of `question`; the catch-all when none matches.
    pub fn match_prefix(&self, question: &str, mode: MatchMode) -> usize {
        match mode {
            MatchMode::TokenBoundary => self.match_tokens(&tokenize(question)),
            MatchMode::RawCharacter => {
                let q = normalize(question);
                let mut best: Option<(usize, usize)> = None;
                for (i, p) in self.prefixes[..self.catch_all()].iter().enumerate() {
                    if q.starts_with(p.as_str()) && best.is_none_or(|(len, _)| p.len() > len) {
                        best = Some((p.len(), i));
                    }
                }
                best.map_or(self.catch_all(), |(_, i)| i)
            }
        }
    }

    /// Token-boundary match over already normalized tokens.
    pub fn match_tokens(&self, tokens: &[String]) -> usize {
        let longest = self.max_tokens.min(tokens.len());
        for n in (1..=longest).rev() {
            if let Some(&i) = self.by_tokens.get(&tokens[..n]) {
                return i;
            }
        }
        self.catch_all()
    }
}

impl TryFrom<Vec<String>> for QuestionTypeTable {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<QuestionTypeTable> for Vec<String> {
    fn from(t: QuestionTypeTable) -> Self {
        t.prefixes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> QuestionTypeTable {
        QuestionTypeTable::new(&["is", "is there", "is there a", "what", "what color is the"]).unwrap()
    }

    #[test]
    fn packaged_table_has_65_prefixes_and_catch_all() {
        let t = QuestionTypeTable::packaged();
        assert_eq!(t.len(), 66);
        assert_eq!(t.prefix(t.catch_all()), Some(""));
        assert!(t.index_of("is there a").is_some());
        assert!(t.index_of("none of the above").is_some());
    }

    #[test]
    fn longest_prefix_wins() {
        let t = table();
        assert_eq!(t.match_prefix("Is there a dog?", MatchMode::TokenBoundary), 2);
        assert_eq!(t.match_prefix("Is there any dog?", MatchMode::TokenBoundary), 1);
        assert_eq!(t.match_prefix("What color is the car?", MatchMode::TokenBoundary), 4);
        assert_eq!(t.match_prefix("What color are the cars?", MatchMode::TokenBoundary), 3);
    }

    #[test]
    fn unmatched_goes_to_catch_all() {
        let t = table();
        assert_eq!(t.match_prefix("Zzz unusual phrasing?", MatchMode::TokenBoundary), t.catch_all());
        assert_eq!(t.match_prefix("", MatchMode::TokenBoundary), t.catch_all());
        assert_eq!(t.match_prefix("Zzz", MatchMode::RawCharacter), t.catch_all());
    }

    #[test]
    fn exact_prefix_question() {
        let t = table();
        assert_eq!(t.match_prefix("is there a", MatchMode::TokenBoundary), 2);
        assert_eq!(t.match_prefix("is there a", MatchMode::RawCharacter), 2);
    }

    #[test]
    fn raw_mode_ignores_token_boundaries() {
        let t = table();
        assert_eq!(t.match_prefix("Isnt it?", MatchMode::TokenBoundary), t.catch_all());
        assert_eq!(t.match_prefix("Isnt it?", MatchMode::RawCharacter), 0);
        assert_eq!(t.match_prefix("Whatever", MatchMode::RawCharacter), 3);
    }

    #[test]
    fn text_format_round_trip() {
        let t = table();
        let text = t.to_text();
        assert!(text.ends_with("what color is the\n\n"));
        assert_eq!(QuestionTypeTable::parse(&text).unwrap(), t);
        // Missing catch-all line is tolerated.
        let t2 = QuestionTypeTable::parse("is\nis there\nis there a\nwhat\nwhat color is the\n").unwrap();
        assert_eq!(t2, t);
    }

    #[test]
    fn rejects_duplicates_and_inner_blank_lines() {
        assert!(QuestionTypeTable::parse("is\nIs\n\n").is_err());
        assert!(QuestionTypeTable::parse("is\n\nwhat\n\n").is_err());
    }
}
