//! Desk-scale biased datasets with controllable per-type answer priors.
//!
//! Types cycle through the three categories: `t % 3 == 0` asks yes/no
//! questions, `t % 3 == 1` counting questions with answers `"1".."m"`, and
//! the rest open questions with answers private to the type. Question text
//! is the type token `q<t>` followed by distractor words, so prefix matching
//! recovers the type. Features are a noisy one-hot of the answer id.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::domain::{category_of, AnswerVocabulary, Instance, QuestionTypeTable, SplitTag};
use crate::error::{Error, Result};

const DISTRACTOR_POOL: usize = 40;
const DISTRACTORS_PER_QUESTION: usize = 3;
/// Floor applied to prior probabilities before taking reciprocals.
const MIN_PRIOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiasProfile {
    /// Train and test both follow a Dirichlet(α) prior per type.
    Skewed { alpha: f64 },
    /// Train follows Dirichlet(α); test follows its normalized reciprocal.
    Inverse { alpha: f64 },
    /// Train and test both uniform over each type's answers.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_types: usize,
    pub answers_per_type: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub bias_profile: BiasProfile,
    /// Feature dimension; `0` means "vocabulary size".
    pub feature_dim: usize,
    /// Weight of the one-hot answer signal against unit Gaussian noise.
    pub feature_signal: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_types: 9,
            answers_per_type: 4,
            n_train: 4000,
            n_test: 2000,
            bias_profile: BiasProfile::Inverse { alpha: 0.5 },
            feature_dim: 0,
            feature_signal: 0.5,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_types == 0 || self.n_train == 0 || self.n_test == 0 {
            return Err(Error::invalid("synthetic config: counts must be positive"));
        }
        if self.answers_per_type < 2 {
            return Err(Error::invalid("synthetic config: answers_per_type must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.feature_signal) {
            return Err(Error::invalid("synthetic config: feature_signal must lie in [0, 1]"));
        }
        match self.bias_profile {
            BiasProfile::Skewed { alpha } | BiasProfile::Inverse { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::invalid("synthetic config: concentration must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Answer strings of type `t`.
    fn answers_of(&self, t: usize) -> Vec<String> {
        match t % 3 {
            0 => vec!["yes".into(), "no".into()],
            1 => (1..=self.answers_per_type).map(|k| k.to_string()).collect(),
            _ => (0..self.answers_per_type).map(|k| format!("ans{t}x{k}")).collect(),
        }
    }
}

/// Per-type answer distributions used by the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPriors {
    /// For each type, vocabulary ids of its answers.
    pub answer_ids: Vec<Vec<usize>>,
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

/// Normalized reciprocal of a probability vector.
pub fn reciprocal_normalized(p: &[f64]) -> Vec<f64> {
    let inv: Vec<f64> = p.iter().map(|&x| 1.0 / x.max(MIN_PRIOR)).collect();
    let z: f64 = inv.iter().sum();
    inv.into_iter().map(|x| x / z).collect()
}

/// Symmetric Dirichlet(α) sample of length `m` via normalized Gamma draws.
fn dirichlet(rng: &mut impl Rng, alpha: f64, m: usize) -> Result<Vec<f64>> {
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    loop {
        let g: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
        let z: f64 = g.iter().sum();
        if z > 0.0 {
            return Ok(g.into_iter().map(|x| x / z).collect());
        }
    }
}

fn draw(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Generates `(train, test)`; deterministic given `config.seed`.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<(Dataset, Dataset)> {
    let (train, test, _) = generate_with_priors(config)?;
    Ok((train, test))
}

/// As [`generate_synthetic`], also returning the sampled priors.
pub fn generate_with_priors(config: &SyntheticConfig) -> Result<(Dataset, Dataset, SyntheticPriors)> {
    config.validate()?;
    let per_type: Vec<Vec<String>> = (0..config.n_types).map(|t| config.answers_of(t)).collect();

    let mut entries: Vec<String> = Vec::new();
    let mut answer_ids = Vec::with_capacity(config.n_types);
    for answers in &per_type {
        let mut ids = Vec::with_capacity(answers.len());
        for a in answers {
            let id = match entries.iter().position(|e| e == a) {
                Some(id) => id,
                None => {
                    entries.push(a.clone());
                    entries.len() - 1
                }
            };
            ids.push(id);
        }
        answer_ids.push(ids);
    }
    let vocabulary = AnswerVocabulary::new(&entries)?;
    let k = vocabulary.len();
    let feature_dim = if config.feature_dim == 0 { k } else { config.feature_dim };
    if feature_dim < k {
        return Err(Error::invalid(format!(
            "synthetic config: feature_dim {feature_dim} is smaller than the vocabulary ({k})"
        )));
    }
    let prefixes: Vec<String> = (0..config.n_types).map(|t| format!("q{t}")).collect();
    let type_table = QuestionTypeTable::new(&prefixes)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut train_p = Vec::with_capacity(config.n_types);
    let mut test_p = Vec::with_capacity(config.n_types);
    for ids in &answer_ids {
        let m = ids.len();
        let (tr, te) = match config.bias_profile {
            BiasProfile::Uniform => (vec![1.0 / m as f64; m], vec![1.0 / m as f64; m]),
            BiasProfile::Skewed { alpha } | BiasProfile::Inverse { alpha } => {
                let p = dirichlet(&mut rng, alpha, m)?;
                let q = if matches!(config.bias_profile, BiasProfile::Inverse { .. }) {
                    reciprocal_normalized(&p)
                } else {
                    p.clone()
                };
                (p, q)
            }
        };
        train_p.push(tr);
        test_p.push(te);
    }

    let distractors: Vec<String> = (0..DISTRACTOR_POOL).map(|i| format!("w{i}")).collect();
    let make = |n: usize, first_id: u64, probs: &[Vec<f64>], rng: &mut ChaCha8Rng| -> Vec<Instance> {
        (0..n)
            .map(|i| {
                let t = rng.random_range(0..config.n_types);
                let local = draw(rng, &probs[t]);
                let answer_id = answer_ids[t][local];
                let answer = entries[answer_id].clone();
                let mut tokens = vec![prefixes[t].clone()];
                for _ in 0..DISTRACTORS_PER_QUESTION {
                    tokens.push(distractors.choose(rng).expect("nonempty pool").clone());
                }
                let features: Vec<f64> = (0..feature_dim)
                    .map(|d| {
                        let noise: f64 = rng.sample(StandardNormal);
                        let hot = if d == answer_id { 1.0 } else { 0.0 };
                        config.feature_signal * hot + (1.0 - config.feature_signal) * noise
                    })
                    .collect();
                let qid = first_id + i as u64;
                Instance {
                    question_id: qid,
                    image_id: qid,
                    tokens,
                    type_id: t,
                    category: category_of(None, &answer),
                    human_answers: vec![answer.clone(); 10],
                    top_answer: answer,
                    features: Some(features),
                }
            })
            .collect()
    };
    let train_instances = make(config.n_train, 1, &train_p, &mut rng);
    let test_instances = make(config.n_test, 1 + config.n_train as u64, &test_p, &mut rng);

    let train = Dataset::new(
        "synthetic-train",
        SplitTag::Train,
        vocabulary.clone(),
        type_table.clone(),
        train_instances,
    )?;
    let test = Dataset::new("synthetic-test", SplitTag::Test, vocabulary, type_table, test_instances)?;
    Ok((
        train,
        test,
        SyntheticPriors {
            answer_ids,
            train: train_p,
            test: test_p,
        },
    ))
}
