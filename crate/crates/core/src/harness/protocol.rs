use serde::{Deserialize, Serialize};

use super::report::{evaluate, EvalContext, EvalMode, EvalReport};
use crate::domain::{Category, ScoreMode, SplitTag};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::predictors::{train_learned, train_regularized, Hyper, Predictor};
use crate::priors::{calibrate_min_count, InvertedPriorTable, PriorSampler, PriorTable, DEFAULT_RETAINED_ANSWERS};
use crate::splitter::sample_ids;

pub const DEFAULT_VAL_SIZE: usize = 8000;

/// How to build a predictor from a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictorSpec {
    Random,
    /// Explicit `min_count`, or the threshold retaining about
    /// `target_retained` answers.
    Inverted { min_count: Option<u64>, target_retained: usize },
    Learned(Hyper),
    Regularized(Hyper),
    Masked(Box<PredictorSpec>),
}

impl PredictorSpec {
    pub fn inverted_default() -> Self {
        PredictorSpec::Inverted {
            min_count: None,
            target_retained: DEFAULT_RETAINED_ANSWERS,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            PredictorSpec::Regularized(h) => Some(h.lambda),
            PredictorSpec::Masked(inner) => inner.lambda(),
            _ => None,
        }
    }
}

/// Inverted prior of `train` at an explicit or calibrated threshold.
pub fn inverted_sampler(train: &Dataset, min_count: Option<u64>, target_retained: usize) -> Result<(PriorSampler, u64)> {
    let table = PriorTable::accumulate(train);
    let m = min_count.unwrap_or_else(|| calibrate_min_count(&table, target_retained));
    let inverted = InvertedPriorTable::invert(&table, m)?;
    Ok((PriorSampler::new(&inverted), m))
}

pub fn build_predictor(spec: &PredictorSpec, train: &Dataset) -> Result<Predictor> {
    Ok(match spec {
        PredictorSpec::Random => Predictor::RandomPrior(PriorSampler::new(&PriorTable::accumulate(train))),
        PredictorSpec::Inverted { min_count, target_retained } => {
            let (sampler, m) = inverted_sampler(train, *min_count, *target_retained)?;
            log::info!("inverted prior uses min_count {m}");
            Predictor::InvertedPrior(sampler)
        }
        PredictorSpec::Learned(h) => Predictor::Learned(train_learned(train, h)?),
        PredictorSpec::Regularized(h) => Predictor::Learned(train_regularized(train, h)?),
        PredictorSpec::Masked(inner) => Predictor::masked(build_predictor(inner, train)?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOptions {
    pub n_val: usize,
    pub other_only: bool,
    pub seed: u64,
    pub mode: EvalMode,
    pub score_mode: ScoreMode,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            n_val: DEFAULT_VAL_SIZE,
            other_only: false,
            seed: 0,
            mode: EvalMode::Sampled,
            score_mode: ScoreMode::Simple,
        }
    }
}

/// Holds `n_val` training instances out as an in-domain validation split.
pub fn carve_validation(train: &Dataset, n_val: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut ids: Vec<u64> = train.instances.iter().map(|i| i.question_id).collect();
    ids.sort_unstable();
    let val_ids = sample_ids(&ids, n_val, seed)?;
    let rest = train.filtered(train.name.clone(), SplitTag::Train, |i| !val_ids.contains(&i.question_id));
    let val = train.filtered(format!("{}-val", train.name), SplitTag::Val, |i| val_ids.contains(&i.question_id));
    Ok((rest, val))
}

/// Builds the predictor on the reduced training split and reports it on the
/// held-out validation split and on `test`, in that order.
pub fn run_protocol(
    train: &Dataset,
    test: &Dataset,
    spec: &PredictorSpec,
    opts: &ProtocolOptions,
) -> Result<(EvalReport, EvalReport)> {
    train.ensure_compatible(test)?;
    let (mut train, mut val) = carve_validation(train, opts.n_val, opts.seed)?;
    let mut test = test.clone();
    if opts.other_only {
        train = train.only_category(Category::Other);
        val = val.only_category(Category::Other);
        test = test.only_category(Category::Other);
    }
    if train.is_empty() {
        return Err(Error::invalid("no training instances left after the validation holdout and filtering"));
    }
    let predictor = build_predictor(spec, &train)?;
    let ctx = EvalContext {
        mode: opts.mode,
        score_mode: opts.score_mode,
        seed: opts.seed,
        lambda: spec.lambda(),
    };
    Ok((evaluate(&predictor, &val, &ctx)?, evaluate(&predictor, &test, &ctx)?))
}
