//! Baseline predictors: prior samplers, top-answer masking and a linear
//! learner with an optional random-feature regularizer.

mod checkpoint;
mod loss;
mod model;
mod train;

use rand::RngCore;

pub use checkpoint::{load_model, read_model, save_model, write_model};
pub use loss::{argmax, aux_loss, aux_loss_grad, aux_target, bce_loss, bce_loss_grad, mask_top, sigmoid, softmax};
pub use model::{fnv1a, hash_tokens, AugmentedBatch, Example, Hyper, LinearModel, DEFAULT_QUESTION_DIM};
pub use train::{batch_schedule, train_learned, train_regularized};

use crate::domain::Instance;
use crate::error::{Error, Result};
use crate::priors::{sample_prediction, PriorSampler};

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    RandomPrior(PriorSampler),
    InvertedPrior(PriorSampler),
    Learned(LinearModel),
    Masked(Box<Predictor>),
}

impl Predictor {
    pub fn masked(inner: Predictor) -> Self {
        Predictor::Masked(Box::new(inner))
    }

    pub fn n_answers(&self) -> usize {
        match self {
            Predictor::RandomPrior(s) | Predictor::InvertedPrior(s) => s.n_answers(),
            Predictor::Learned(m) => m.n_answers(),
            Predictor::Masked(inner) => inner.n_answers(),
        }
    }

    /// Whether predictions need a random source.
    pub fn is_sampler(&self) -> bool {
        match self {
            Predictor::RandomPrior(_) | Predictor::InvertedPrior(_) => true,
            Predictor::Learned(_) => false,
            Predictor::Masked(inner) => inner.is_sampler(),
        }
    }

    /// The sampler behind a prior-based predictor, unmasked.
    pub fn sampler(&self) -> Option<&PriorSampler> {
        match self {
            Predictor::RandomPrior(s) | Predictor::InvertedPrior(s) => Some(s),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Predictor::RandomPrior(_) => "random".to_string(),
            Predictor::InvertedPrior(_) => "inverted".to_string(),
            Predictor::Learned(m) if m.hyper().lambda > 0.0 => format!("regularized(lambda={})", m.hyper().lambda),
            Predictor::Learned(_) => "learned".to_string(),
            Predictor::Masked(inner) => format!("masked-{}", inner.describe()),
        }
    }

    /// Score vector over the vocabulary: a one-hot draw for samplers,
    /// logits for the learned model.
    pub fn predict(&self, inst: &Instance, rng: Option<&mut dyn RngCore>) -> Result<Vec<f64>> {
        match self {
            Predictor::RandomPrior(s) | Predictor::InvertedPrior(s) => {
                let rng = rng.ok_or_else(|| Error::invalid(format!("{} predictor needs a random source", self.describe())))?;
                sample_prediction(s, inst.type_id, rng)
            }
            Predictor::Learned(m) => m.predict_instance(inst),
            Predictor::Masked(inner) => mask_top(&inner.predict(inst, rng)?),
        }
    }

    /// Predicted answer id: the argmax of [`Predictor::predict`].
    pub fn answer(&self, inst: &Instance, rng: Option<&mut dyn RngCore>) -> Result<usize> {
        self.predict(inst, rng).map(|s| argmax(&s))
    }
}
