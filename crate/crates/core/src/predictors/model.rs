//! Single linear layer over `[hashed bag-of-tokens(q); v]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{aux_loss_grad_at, bce_loss_grad};
use crate::domain::{AnswerVocabulary, Instance, ScoreMode, SoftScoreVector};
use crate::error::{Error, Result};

pub const DEFAULT_QUESTION_DIM: usize = 2048;

/// Training hyperparameters. The defaults are ours; only the 25 BCE
/// pretraining epochs come from the method description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub seed: u64,
    pub pretrain_epochs: usize,
    pub question_dim: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            learning_rate: 0.03,
            epochs: 25,
            batch_size: 64,
            lambda: 0.0,
            seed: 0,
            pretrain_epochs: 25,
            question_dim: DEFAULT_QUESTION_DIM,
        }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be a finite non-negative number, got {}", self.lambda)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if self.question_dim == 0 {
            return Err(Error::invalid("question feature dimension must be at least 1"));
        }
        Ok(())
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sparse token counts, sorted by bucket.
pub fn hash_tokens(tokens: &[String], dim: usize) -> Vec<(usize, f64)> {
    let mut buckets: Vec<usize> = tokens.iter().map(|t| (fnv1a(t.as_bytes()) % dim as u64) as usize).collect();
    buckets.sort_unstable();
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(buckets.len());
    for b in buckets {
        match out.last_mut() {
            Some((last, c)) if *last == b => *c += 1.0,
            _ => out.push((b, 1.0)),
        }
    }
    out
}

/// A training instance in model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub question: Vec<(usize, f64)>,
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
    /// Index penalized by the auxiliary loss; `None` when no answer scores.
    pub aux_target: Option<usize>,
}

/// Question indices of a batch and, for each, the batch member whose
/// features it borrows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedBatch {
    pub originals: Vec<usize>,
    pub counterparts: Vec<usize>,
}

impl AugmentedBatch {
    pub fn new(originals: Vec<usize>, counterparts: Vec<usize>) -> Result<Self> {
        if originals.len() != counterparts.len() {
            return Err(Error::invalid("augmented batch needs one counterpart per original"));
        }
        for (o, c) in originals.iter().zip(&counterparts) {
            if o == c || !originals.contains(c) {
                return Err(Error::invalid(format!(
                    "counterpart {c} of {o} must be a different member of the batch"
                )));
            }
        }
        Ok(AugmentedBatch { originals, counterparts })
    }

    /// Pairs every question with the features of another batch member,
    /// drawing a uniform derangement by rejection.
    pub fn derange<R: Rng + ?Sized>(originals: &[usize], rng: &mut R) -> Result<Self> {
        let n = originals.len();
        if n < 2 {
            return Err(Error::invalid(format!("cannot derange a batch of size {n}")));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            if perm.iter().enumerate().all(|(i, &p)| i != p) {
                break;
            }
        }
        Ok(AugmentedBatch {
            originals: originals.to_vec(),
            counterparts: perm.iter().map(|&p| originals[p]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub(crate) n_answers: usize,
    pub(crate) question_dim: usize,
    pub(crate) feature_dim: usize,
    /// Input-major: entry `(j, k)` at `j * n_answers + k`.
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
    pub(crate) hyper: Hyper,
    pub(crate) loss_trace: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(n_answers: usize, question_dim: usize, feature_dim: usize, hyper: Hyper) -> Self {
        LinearModel {
            n_answers,
            question_dim,
            feature_dim,
            weights: vec![0.0; (question_dim + feature_dim) * n_answers],
            bias: vec![0.0; n_answers],
            hyper,
            loss_trace: Vec::new(),
        }
    }

    pub fn n_answers(&self) -> usize {
        self.n_answers
    }

    pub fn question_dim(&self) -> usize {
        self.question_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn hyper(&self) -> &Hyper {
        &self.hyper
    }

    /// Mean objective of each completed epoch.
    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn n_parameters(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Weights followed by biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.n_parameters(),
                params.len()
            )));
        }
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|x| x.is_finite())
    }

    /// Features of `inst`, or zeros when absent. The flag reports the substitution.
    pub fn instance_features(&self, inst: &Instance) -> Result<(Vec<f64>, bool)> {
        match &inst.features {
            Some(v) if v.len() == self.feature_dim => Ok((v.clone(), false)),
            Some(v) => Err(Error::invalid(format!(
                "question {} has {} features, model expects {}",
                inst.question_id,
                v.len(),
                self.feature_dim
            ))),
            None => Ok((vec![0.0; self.feature_dim], true)),
        }
    }

    /// Converts an instance to model coordinates with soft-score targets.
    pub fn encode(&self, inst: &Instance, vocab: &AnswerVocabulary) -> Result<Example> {
        let (features, _) = self.instance_features(inst)?;
        let targets = SoftScoreVector::from_answers(&inst.human_answers, vocab, ScoreMode::Simple).to_dense(self.n_answers);
        let aux_target = targets
            .iter()
            .any(|&t| t > 0.0)
            .then(|| super::loss::aux_target(&targets));
        Ok(Example {
            question: hash_tokens(&inst.tokens, self.question_dim),
            features,
            targets,
            aux_target,
        })
    }

    /// `W·[φ(q); v] + b`.
    pub fn logits(&self, question: &[(usize, f64)], features: &[f64]) -> Vec<f64> {
        let k = self.n_answers;
        let mut z = self.bias.clone();
        let mut add_row = |row: usize, x: f64| {
            if x != 0.0 {
                let w = &self.weights[row * k..(row + 1) * k];
                for (zi, wi) in z.iter_mut().zip(w) {
                    *zi += x * wi;
                }
            }
        };
        for &(j, x) in question {
            add_row(j, x);
        }
        for (j, &x) in features.iter().enumerate() {
            add_row(self.question_dim + j, x);
        }
        z
    }

    pub fn predict_instance(&self, inst: &Instance) -> Result<Vec<f64>> {
        let (features, substituted) = self.instance_features(inst)?;
        if substituted {
            log::debug!("question {} has no features; using zeros", inst.question_id);
        }
        Ok(self.logits(&hash_tokens(&inst.tokens, self.question_dim), &features))
    }

    /// Per-member logit gradients of the batch objective
    /// `mean_i ΣBCE(f(q_i,v_i)) + λ · mean_i aux(f(q_i,ṽ_i))`, already scaled
    /// by 1/B. ΣBCE is the elementwise BCE summed over answers, i.e.
    /// `K · bce_loss`.
    fn logit_terms(
        &self,
        examples: &[Example],
        originals: &[usize],
        aux: Option<(&AugmentedBatch, f64)>,
    ) -> Result<(f64, Vec<Term>)> {
        if originals.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        let scale = 1.0 / originals.len() as f64;
        let mut objective = 0.0;
        let mut terms = Vec::with_capacity(originals.len() * 2);
        for &i in originals {
            let ex = &examples[i];
            let z = self.logits(&ex.question, &ex.features);
            let mut g = vec![0.0; self.n_answers];
            let k = self.n_answers as f64;
            objective += scale * k * bce_loss_grad(&z, &ex.targets, &mut g)?;
            g.iter_mut().for_each(|x| *x *= scale * k);
            terms.push(Term { question: i, features: i, grad: g });
        }
        if let Some((batch, lambda)) = aux {
            for (&i, &c) in batch.originals.iter().zip(&batch.counterparts) {
                let Some(k) = examples[i].aux_target else { continue };
                let z = self.logits(&examples[i].question, &examples[c].features);
                if z.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("non-finite logits"));
                }
                let mut g = vec![0.0; self.n_answers];
                objective += lambda * scale * aux_loss_grad_at(&z, k, &mut g);
                g.iter_mut().for_each(|x| *x *= lambda * scale);
                terms.push(Term { question: i, features: c, grad: g });
            }
        }
        Ok((objective, terms))
    }

    /// Adds `factor · ∂objective/∂θ` into `weights` / `bias` buffers.
    fn scatter(&self, examples: &[Example], terms: &[Term], factor: f64, weights: &mut [f64], bias: &mut [f64]) {
        let k = self.n_answers;
        let mut add_row = |row: usize, x: f64, g: &[f64]| {
            if x != 0.0 {
                for (w, gi) in weights[row * k..(row + 1) * k].iter_mut().zip(g) {
                    *w += factor * x * gi;
                }
            }
        };
        for t in terms {
            for &(j, x) in &examples[t.question].question {
                add_row(j, x, &t.grad);
            }
            for (j, &x) in examples[t.features].features.iter().enumerate() {
                add_row(self.question_dim + j, x, &t.grad);
            }
        }
        for t in terms {
            for (b, gi) in bias.iter_mut().zip(&t.grad) {
                *b += factor * gi;
            }
        }
    }

    /// Batch objective; `aux` adds the random-feature term with weight λ.
    pub fn objective(&self, examples: &[Example], originals: &[usize], aux: Option<(&AugmentedBatch, f64)>) -> Result<f64> {
        self.logit_terms(examples, originals, aux).map(|(o, _)| o)
    }

    /// Objective and its gradient, laid out like [`LinearModel::parameters`].
    pub fn gradient(
        &self,
        examples: &[Example],
        originals: &[usize],
        aux: Option<(&AugmentedBatch, f64)>,
    ) -> Result<(f64, Vec<f64>)> {
        let (objective, terms) = self.logit_terms(examples, originals, aux)?;
        let mut gw = vec![0.0; self.weights.len()];
        let mut gb = vec![0.0; self.bias.len()];
        self.scatter(examples, &terms, 1.0, &mut gw, &mut gb);
        gw.extend(gb);
        Ok((objective, gw))
    }

    /// One gradient-descent step; returns the pre-step objective.
    pub(crate) fn step(
        &mut self,
        examples: &[Example],
        originals: &[usize],
        aux: Option<(&AugmentedBatch, f64)>,
    ) -> Result<f64> {
        let (objective, terms) = self.logit_terms(examples, originals, aux)?;
        let mut weights = std::mem::take(&mut self.weights);
        let mut bias = std::mem::take(&mut self.bias);
        // scatter only reads dimensions, so the emptied buffers are fine here.
        self.scatter(examples, &terms, -self.hyper.learning_rate, &mut weights, &mut bias);
        self.weights = weights;
        self.bias = bias;
        Ok(objective)
    }
}

struct Term {
    question: usize,
    features: usize,
    grad: Vec<f64>,
}
