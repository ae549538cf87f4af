//! Soft answer accuracy.
//!
//! A candidate answer scores `min(count / 3, 1)` against ten human answers.
//! For multisets of another size `n`, the agreement threshold is scaled to
//! `0.3 · n` so that three out of ten keeps meaning full credit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::vocab::AnswerVocabulary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreMode {
    /// `min(count / (0.3·n), 1)`.
    #[default]
    Simple,
    /// Mean over the `n` leave-one-out sub-multisets of the simple score.
    Official,
}

/// Score of a candidate that occurs `count` times among `n` human answers.
pub fn score_from_count(count: usize, n: usize, mode: ScoreMode) -> f64 {
    debug_assert!(count <= n && n > 0);
    let threshold = 0.3 * n as f64;
    let clip = |c: usize| (c as f64 / threshold).min(1.0);
    match mode {
        ScoreMode::Simple => clip(count),
        ScoreMode::Official => {
            // Dropping one of the `count` matching answers leaves count - 1;
            // dropping any of the other n - count leaves count.
            let with_drop = if count > 0 { count as f64 * clip(count - 1) } else { 0.0 };
            (with_drop + (n - count) as f64 * clip(count)) / n as f64
        }
    }
}

/// Soft score of `candidate` against `human_answers` (both normalized).
pub fn soft_score(human_answers: &[String], candidate: &str, mode: ScoreMode) -> Result<f64> {
    if human_answers.is_empty() {
        return Err(Error::invalid("soft score of an empty answer multiset"));
    }
    let count = human_answers.iter().filter(|a| *a == candidate).count();
    Ok(score_from_count(count, human_answers.len(), mode))
}

/// Sparse ground-truth score vector over the vocabulary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SoftScoreVector {
    scores: BTreeMap<usize, f64>,
}

impl SoftScoreVector {
    /// Scores every distinct in-vocabulary human answer.
    pub fn from_answers(human_answers: &[String], vocab: &AnswerVocabulary, mode: ScoreMode) -> Self {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for a in human_answers {
            if let Some(id) = vocab.id(a) {
                *counts.entry(id).or_default() += 1;
            }
        }
        let n = human_answers.len();
        let scores = counts
            .into_iter()
            .map(|(id, c)| (id, score_from_count(c, n, mode)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        SoftScoreVector { scores }
    }

    pub fn get(&self, answer_id: usize) -> f64 {
        self.scores.get(&answer_id).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.scores.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Dense copy of length `k`.
    pub fn to_dense(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; k];
        for (&id, &s) in &self.scores {
            if id < k {
                out[id] = s;
            }
        }
        out
    }

    /// Highest-scoring answer id, lowest id on ties; `None` when empty.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (&id, &s) in &self.scores {
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((id, s));
            }
        }
        best.map(|(id, _)| id)
    }
}
