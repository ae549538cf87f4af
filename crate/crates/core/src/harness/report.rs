use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{soft_score, CategoryFilter, ScoreMode, SplitTag};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::predictors::Predictor;
use crate::priors::expected_score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// One seeded draw per instance.
    Sampled,
    /// Closed-form expectation over the predictor's draws.
    Expected,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Sampled => "sampled",
            EvalMode::Expected => "expected",
        })
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampled" => Ok(EvalMode::Sampled),
            "expected" => Ok(EvalMode::Expected),
            _ => Err(Error::invalid(format!("unknown evaluation mode {s:?}"))),
        }
    }
}

/// Accuracy (percent) over `n` instances; `None` when `n == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub n: usize,
    pub accuracy: Option<f64>,
}

/// Accuracy per answer category for one predictor on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub predictor: String,
    pub dataset: String,
    pub split: SplitTag,
    pub mode: EvalMode,
    pub seed: u64,
    pub lambda: Option<f64>,
    /// In [`CategoryFilter::COLUMNS`] order: All, YesNo, Nb, Other.
    pub cells: [Cell; 4],
}

impl EvalReport {
    pub fn cell(&self, filter: CategoryFilter) -> Cell {
        let i = CategoryFilter::COLUMNS.iter().position(|&c| c == filter).unwrap_or(0);
        self.cells[i]
    }

    pub fn accuracy(&self, filter: CategoryFilter) -> Option<f64> {
        self.cell(filter).accuracy
    }

    pub fn is_empty(&self) -> bool {
        self.cells[0].n == 0
    }

    /// Largest gap between the All cell and the count-weighted mean of the
    /// three category cells.
    pub fn weighted_mean_gap(&self) -> f64 {
        let (mut sum, mut n) = (0.0, 0usize);
        for c in &self.cells[1..] {
            if let Some(a) = c.accuracy {
                sum += a * c.n as f64;
                n += c.n;
            }
        }
        match self.cells[0].accuracy {
            Some(all) if n > 0 => (all - sum / n as f64).abs(),
            Some(_) => f64::INFINITY,
            None if n == 0 => 0.0,
            None => f64::INFINITY,
        }
    }

    pub fn check_invariants(&self) -> Result<()> {
        let counts: usize = self.cells[1..].iter().map(|c| c.n).sum();
        if counts != self.cells[0].n {
            return Err(Error::integrity(format!(
                "category counts sum to {counts}, All has {}",
                self.cells[0].n
            )));
        }
        for c in &self.cells {
            if c.accuracy.is_some() != (c.n > 0) || c.accuracy.is_some_and(|a| !(0.0..=100.0).contains(&a)) {
                return Err(Error::integrity(format!("invalid report cell {c:?}")));
            }
        }
        let gap = self.weighted_mean_gap();
        if gap > 1e-9 {
            return Err(Error::integrity(format!("All differs from the weighted category mean by {gap}")));
        }
        Ok(())
    }
}

/// Metadata shared by the reports of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalContext {
    pub mode: EvalMode,
    pub score_mode: ScoreMode,
    pub seed: u64,
    pub lambda: Option<f64>,
}

impl Default for EvalContext {
    fn default() -> Self {
        EvalContext {
            mode: EvalMode::Sampled,
            score_mode: ScoreMode::Simple,
            seed: 0,
            lambda: None,
        }
    }
}

fn cells_from_scores(data: &Dataset, scores: &[f64]) -> [Cell; 4] {
    CategoryFilter::COLUMNS.map(|filter| {
        let (mut sum, mut n) = (0.0, 0usize);
        for (inst, s) in data.instances.iter().zip(scores) {
            if filter.matches(inst.category) {
                sum += s;
                n += 1;
            }
        }
        Cell {
            n,
            accuracy: (n > 0).then(|| 100.0 * sum / n as f64),
        }
    })
}

/// Scores `p` on `data`. Sampled mode draws once per instance from a
/// generator seeded with `ctx.seed`; expected mode needs an unmasked prior
/// predictor.
pub fn evaluate(p: &Predictor, data: &Dataset, ctx: &EvalContext) -> Result<EvalReport> {
    let cells = match ctx.mode {
        EvalMode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut scores = Vec::with_capacity(data.len());
            for inst in &data.instances {
                let id = if p.is_sampler() {
                    p.answer(inst, Some(&mut rng))?
                } else {
                    p.answer(inst, None)?
                };
                let answer = data
                    .vocabulary
                    .answer(id)
                    .ok_or_else(|| Error::invalid(format!("predicted answer id {id} is outside the vocabulary")))?;
                scores.push(soft_score(&inst.human_answers, answer, ctx.score_mode)?);
            }
            cells_from_scores(data, &scores)
        }
        EvalMode::Expected => {
            let sampler = p.sampler().ok_or_else(|| {
                Error::invalid(format!("expected mode needs a prior-based predictor, got {}", p.describe()))
            })?;
            let mut cells = [Cell::default(); 4];
            for (cell, filter) in cells.iter_mut().zip(CategoryFilter::COLUMNS) {
                let n = data.instances.iter().filter(|i| filter.matches(i.category)).count();
                if n > 0 {
                    let s = expected_score(sampler, data, filter, ctx.score_mode)?;
                    *cell = Cell { n, accuracy: Some(s.accuracy) };
                }
            }
            cells
        }
    };
    let report = EvalReport {
        predictor: p.describe(),
        dataset: data.name.clone(),
        split: data.tag,
        mode: ctx.mode,
        seed: ctx.seed,
        lambda: ctx.lambda,
        cells,
    };
    Ok(report)
}
