//! Mini-batch gradient descent for the linear model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{AugmentedBatch, Example, Hyper, LinearModel};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Seed offset separating the derangement stream from the shuffle stream.
const DERANGE_STREAM: u64 = 1 << 32;

/// Batches of epoch `epoch`: a seeded shuffle cut into `batch_size` chunks,
/// with a trailing singleton folded into the previous batch.
pub fn batch_schedule(n: usize, batch_size: usize, seed: u64, epoch: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
        let last = batches.pop().unwrap_or_default();
        if let Some(prev) = batches.last_mut() {
            prev.extend(last);
        }
    }
    batches
}

fn feature_dim(train: &Dataset) -> Result<usize> {
    let mut dim: Option<usize> = None;
    let mut missing = 0usize;
    for inst in &train.instances {
        match (&inst.features, dim) {
            (None, _) => missing += 1,
            (Some(v), None) => dim = Some(v.len()),
            (Some(v), Some(d)) if v.len() != d => {
                return Err(Error::invalid(format!(
                    "question {} has {} features, expected {d}",
                    inst.question_id,
                    v.len()
                )))
            }
            _ => {}
        }
    }
    if missing > 0 {
        log::warn!("{missing} of {} training instances lack features; zeros substituted", train.len());
    }
    Ok(dim.unwrap_or(0))
}

fn prepare(train: &Dataset, hyper: &Hyper) -> Result<(LinearModel, Vec<Example>)> {
    hyper.validate()?;
    if train.is_empty() {
        return Err(Error::invalid(format!("training set {:?} is empty", train.name)));
    }
    let model = LinearModel::zeros(train.n_answers(), hyper.question_dim, feature_dim(train)?, hyper.clone());
    let examples = train
        .instances
        .iter()
        .map(|inst| model.encode(inst, &train.vocabulary))
        .collect::<Result<Vec<_>>>()?;
    Ok((model, examples))
}

/// Runs epochs `first..first + count`; `lambda = None` is plain BCE.
fn run_epochs(model: &mut LinearModel, examples: &[Example], first: usize, count: usize, lambda: Option<f64>) -> Result<()> {
    let hyper = model.hyper.clone();
    for epoch in first..first + count {
        let mut derange_rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        derange_rng.set_stream(DERANGE_STREAM + epoch as u64);
        let batches = batch_schedule(examples.len(), hyper.batch_size, hyper.seed, epoch);
        let mut total = 0.0;
        for batch in &batches {
            let objective = match lambda {
                None => model.step(examples, batch, None),
                Some(l) => {
                    let augmented = AugmentedBatch::derange(batch, &mut derange_rng)?;
                    let aux = (l > 0.0).then_some((&augmented, l));
                    model.step(examples, batch, aux)
                }
            }
            .map_err(|_| Error::Divergence { epoch })?;
            if !objective.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            total += objective;
        }
        if !model.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let mean = total / batches.len() as f64;
        log::debug!("epoch {epoch}: objective {mean:.6}");
        model.loss_trace.push(mean);
    }
    Ok(())
}

/// Plain BCE training for `hyper.epochs` epochs.
pub fn train_learned(train: &Dataset, hyper: &Hyper) -> Result<LinearModel> {
    let (mut model, examples) = prepare(train, hyper)?;
    run_epochs(&mut model, &examples, 0, hyper.epochs, None)?;
    Ok(model)
}

/// `hyper.pretrain_epochs` of BCE, then `hyper.epochs` of BCE plus
/// `λ · aux` on questions paired with other batch members' features.
pub fn train_regularized(train: &Dataset, hyper: &Hyper) -> Result<LinearModel> {
    let (mut model, examples) = prepare(train, hyper)?;
    if hyper.epochs > 0 && (hyper.batch_size < 2 || examples.len() < 2) {
        return Err(Error::invalid(
            "the regularized phase needs batches of at least two instances",
        ));
    }
    run_epochs(&mut model, &examples, 0, hyper.pretrain_epochs, None)?;
    run_epochs(&mut model, &examples, hyper.pretrain_epochs, hyper.epochs, Some(hyper.lambda))?;
    Ok(model)
}
