use rand::Rng;

use super::inverted::InvertedPriorTable;
use super::table::{normalize_counts, PriorTable};
use crate::domain::{score_from_count, CategoryFilter, Instance, ScoreMode};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Per-type answer distributions with a type-independent fallback.
pub trait AnswerPrior {
    fn n_types(&self) -> usize;
    fn n_answers(&self) -> usize;
    /// Normalized distribution of a type, `None` when the row is empty.
    fn row_distribution(&self, type_id: usize) -> Option<Vec<f64>>;
    /// Distribution used for types whose row is empty.
    fn marginal_distribution(&self) -> Option<Vec<f64>>;
}

impl AnswerPrior for PriorTable {
    fn n_types(&self) -> usize {
        PriorTable::n_types(self)
    }
    fn n_answers(&self) -> usize {
        PriorTable::n_answers(self)
    }
    fn row_distribution(&self, type_id: usize) -> Option<Vec<f64>> {
        self.probabilities(type_id)
    }
    fn marginal_distribution(&self) -> Option<Vec<f64>> {
        normalize_counts(&self.marginal_counts())
    }
}

impl AnswerPrior for InvertedPriorTable {
    fn n_types(&self) -> usize {
        InvertedPriorTable::n_types(self)
    }
    fn n_answers(&self) -> usize {
        InvertedPriorTable::n_answers(self)
    }
    fn row_distribution(&self, type_id: usize) -> Option<Vec<f64>> {
        self.row(type_id).map(<[f64]>::to_vec)
    }
    fn marginal_distribution(&self) -> Option<Vec<f64>> {
        self.marginal().map(<[f64]>::to_vec)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    probs: Vec<f64>,
    ids: Vec<usize>,
    cdf: Vec<f64>,
}

impl Row {
    fn new(probs: Vec<f64>) -> Row {
        let mut ids = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                ids.push(k);
                cdf.push(acc);
            }
        }
        Row { probs, ids, cdf }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let i = self.cdf.partition_point(|&c| c <= u).min(self.ids.len() - 1);
        self.ids[i]
    }
}

/// Precomputed sampling tables for an [`AnswerPrior`].
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSampler {
    n_answers: usize,
    rows: Vec<Option<Row>>,
    marginal: Option<Row>,
}

impl PriorSampler {
    pub fn new<P: AnswerPrior + ?Sized>(prior: &P) -> Self {
        PriorSampler {
            n_answers: prior.n_answers(),
            rows: (0..prior.n_types()).map(|t| prior.row_distribution(t).map(Row::new)).collect(),
            marginal: prior.marginal_distribution().map(Row::new),
        }
    }

    /// Uniform over `n_answers` for every type.
    pub fn uniform(n_types: usize, n_answers: usize) -> Self {
        let row = Row::new(vec![1.0 / n_answers as f64; n_answers]);
        PriorSampler {
            n_answers,
            rows: vec![Some(row.clone()); n_types],
            marginal: Some(row),
        }
    }

    pub fn n_answers(&self) -> usize {
        self.n_answers
    }

    fn row(&self, type_id: usize) -> Result<&Row> {
        self.rows
            .get(type_id)
            .and_then(Option::as_ref)
            .or(self.marginal.as_ref())
            .ok_or_else(|| Error::invalid("prior table is empty: no row and no marginal to sample from"))
    }

    /// Distribution used for `type_id`, after the unseen-type fallback.
    pub fn distribution(&self, type_id: usize) -> Result<&[f64]> {
        self.row(type_id).map(|r| r.probs.as_slice())
    }

    pub fn sample_answer<R: Rng + ?Sized>(&self, type_id: usize, rng: &mut R) -> Result<usize> {
        Ok(self.row(type_id)?.draw(rng))
    }
}

/// One-hot score vector at an answer drawn from the type's distribution.
pub fn sample_prediction<R: Rng + ?Sized>(sampler: &PriorSampler, type_id: usize, rng: &mut R) -> Result<Vec<f64>> {
    let k = sampler.sample_answer(type_id, rng)?;
    let mut v = vec![0.0; sampler.n_answers];
    v[k] = 1.0;
    Ok(v)
}

/// First two moments of an instance's score under the sampler.
fn score_moments(sampler: &PriorSampler, data: &Dataset, inst: &Instance, mode: ScoreMode) -> Result<(f64, f64)> {
    let probs = sampler.distribution(inst.type_id)?;
    let n = inst.human_answers.len();
    if n == 0 {
        return Err(Error::invalid(format!("question {} has no human answers", inst.question_id)));
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (i, a) in inst.human_answers.iter().enumerate() {
        if inst.human_answers[..i].contains(a) {
            continue;
        }
        let Some(k) = data.vocabulary.id(a) else { continue };
        let Some(&q) = probs.get(k) else { continue };
        if q == 0.0 {
            continue;
        }
        let s = score_from_count(inst.answer_count(a), n, mode);
        m1 += q * s;
        m2 += q * s * s;
    }
    Ok((m1, m2))
}

/// Closed-form accuracy of a sampler together with its sampling spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedScore {
    /// Expected accuracy in percent.
    pub accuracy: f64,
    /// Standard deviation (percent) of a single-draw-per-instance accuracy.
    pub sampled_std: f64,
    pub n: usize,
}

pub fn expected_score(
    sampler: &PriorSampler,
    data: &Dataset,
    filter: CategoryFilter,
    mode: ScoreMode,
) -> Result<ExpectedScore> {
    let (mut sum, mut var, mut n) = (0.0, 0.0, 0usize);
    for inst in data.instances.iter().filter(|i| filter.matches(i.category)) {
        let (m1, m2) = score_moments(sampler, data, inst, mode)?;
        sum += m1;
        var += (m2 - m1 * m1).max(0.0);
        n += 1;
    }
    if n == 0 {
        return Err(Error::invalid(format!(
            "no {} instances in {:?} to score",
            filter.label(),
            data.name
        )));
    }
    Ok(ExpectedScore {
        accuracy: 100.0 * sum / n as f64,
        sampled_std: 100.0 * var.sqrt() / n as f64,
        n,
    })
}

/// `100 · mean_i Σ_k q(k | t_i) · softScore(answers_i, k)` over the
/// instances selected by `filter`.
pub fn expected_accuracy(sampler: &PriorSampler, data: &Dataset, filter: CategoryFilter, mode: ScoreMode) -> Result<f64> {
    expected_score(sampler, data, filter, mode).map(|s| s.accuracy)
}
