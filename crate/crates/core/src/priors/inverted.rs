use std::collections::BTreeSet;

use super::table::PriorTable;
use crate::error::{Error, Result};

/// Per-type reciprocal-count distributions.
///
/// Bins with a training count below `min_count` (including empty bins) get
/// zero probability; the rest are proportional to `1 / count`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedPriorTable {
    n_types: usize,
    n_answers: usize,
    min_count: u64,
    probabilities: Vec<f64>,
    row_nonzero: Vec<bool>,
    retained: BTreeSet<usize>,
    flagged_rows: Vec<usize>,
    marginal: Option<Vec<f64>>,
}

/// Reciprocal weights of the bins at or above `min_count`, normalized.
fn invert_row(row: &[u64], min_count: u64) -> Option<Vec<f64>> {
    let weights: Vec<f64> = row
        .iter()
        .map(|&c| if c >= min_count && c > 0 { 1.0 / c as f64 } else { 0.0 })
        .collect();
    let z: f64 = weights.iter().sum();
    if z == 0.0 {
        return None;
    }
    Some(weights.into_iter().map(|w| w / z).collect())
}

impl InvertedPriorTable {
    /// Inverts every row of `table`. The fallback marginal is the inverse of
    /// the column sums under the same threshold.
    pub fn invert(table: &PriorTable, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::invalid("inversion threshold must be at least 1"));
        }
        let (n_types, k) = (table.n_types(), table.n_answers());
        let mut probabilities = vec![0.0; n_types * k];
        let mut row_nonzero = vec![false; n_types];
        let mut retained = BTreeSet::new();
        let mut flagged_rows = Vec::new();
        for t in 0..n_types {
            let row = table.row(t);
            match invert_row(row, min_count) {
                Some(p) => {
                    for (a, &x) in p.iter().enumerate() {
                        if x > 0.0 {
                            retained.insert(a);
                        }
                    }
                    probabilities[t * k..(t + 1) * k].copy_from_slice(&p);
                    row_nonzero[t] = true;
                }
                None if row.iter().any(|&c| c > 0) => flagged_rows.push(t),
                None => {}
            }
        }
        if !flagged_rows.is_empty() {
            log::warn!(
                "{} question types have no answer with count >= {min_count}; their inverted rows are empty",
                flagged_rows.len()
            );
        }
        let marginal = invert_row(&table.marginal_counts(), min_count);
        Ok(InvertedPriorTable {
            n_types,
            n_answers: k,
            min_count,
            probabilities,
            row_nonzero,
            retained,
            flagged_rows,
            marginal,
        })
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn n_answers(&self) -> usize {
        self.n_answers
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Inverted distribution of a type; `None` when the row is empty.
    pub fn row(&self, type_id: usize) -> Option<&[f64]> {
        if *self.row_nonzero.get(type_id)? {
            Some(&self.probabilities[type_id * self.n_answers..(type_id + 1) * self.n_answers])
        } else {
            None
        }
    }

    pub fn marginal(&self) -> Option<&[f64]> {
        self.marginal.as_deref()
    }

    /// Answer ids with nonzero probability in at least one row.
    pub fn retained_answers(&self) -> &BTreeSet<usize> {
        &self.retained
    }

    /// Types with training data whose every bin fell below the threshold.
    pub fn flagged_rows(&self) -> &[usize] {
        &self.flagged_rows
    }
}

/// Number of answers that survive inversion at `min_count`: those with a
/// count of at least `min_count` under some type.
pub fn retained_count(table: &PriorTable, min_count: u64) -> usize {
    max_bin_counts(table).into_iter().filter(|&m| m >= min_count && m > 0).count()
}

fn max_bin_counts(table: &PriorTable) -> Vec<u64> {
    let mut max = vec![0u64; table.n_answers()];
    for t in 0..table.n_types() {
        for (m, &c) in max.iter_mut().zip(table.row(t)) {
            *m = (*m).max(c);
        }
    }
    max
}

/// Threshold whose retained-answer count is closest to `target`
/// (smallest threshold on ties).
pub fn calibrate_min_count(table: &PriorTable, target: usize) -> u64 {
    let mut maxes: Vec<u64> = max_bin_counts(table).into_iter().filter(|&m| m > 0).collect();
    maxes.sort_unstable_by(|a, b| b.cmp(a));
    if maxes.is_empty() {
        return 1;
    }
    // The smallest threshold keeping the top r answers is one above the
    // (r+1)-th largest max count, or 1 when all are kept.
    let mut best = (usize::MAX, u64::MAX);
    for r in 0..=maxes.len() {
        let m = if r == maxes.len() { 1 } else { maxes[r] + 1 };
        let retained = maxes.partition_point(|&x| x >= m);
        let gap = retained.abs_diff(target);
        if gap < best.0 || (gap == best.0 && m < best.1) {
            best = (gap, m);
        }
    }
    best.1
}
