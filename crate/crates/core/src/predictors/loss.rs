//! Losses over a logit vector and their analytic gradients.

use crate::error::{Error, Result};

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} contains non-finite values")))
    }
}

fn check_lengths(logits: &[f64], targets: &[f64]) -> Result<()> {
    if logits.len() != targets.len() || logits.is_empty() {
        return Err(Error::invalid(format!(
            "logits ({}) and targets ({}) must have the same nonzero length",
            logits.len(),
            targets.len()
        )));
    }
    Ok(())
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// −y·log σ(z) − (1−y)·log(1−σ(z)) written as max(z,0) − z·y + log(1+e^{−|z|}).
fn bce_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy averaged over answers.
pub fn bce_loss(logits: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(logits, targets)?;
    check_finite("logits", logits)?;
    check_finite("targets", targets)?;
    Ok(logits.iter().zip(targets).map(|(&z, &y)| bce_term(z, y)).sum::<f64>() / logits.len() as f64)
}

/// Loss and d loss / d logits, written into `grad`.
pub fn bce_loss_grad(logits: &[f64], targets: &[f64], grad: &mut [f64]) -> Result<f64> {
    let loss = bce_loss(logits, targets)?;
    let n = logits.len() as f64;
    for ((g, &z), &y) in grad.iter_mut().zip(logits).zip(targets) {
        *g = (sigmoid(z) - y) / n;
    }
    Ok(loss)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Ground-truth answer the auxiliary loss penalizes.
pub fn aux_target(targets: &[f64]) -> usize {
    let k = argmax(targets);
    if targets.iter().filter(|&&t| t == targets[k]).count() > 1 {
        log::debug!("auxiliary target has tied maxima; using lowest index {k}");
    }
    k
}

/// Softmax probability of the top ground-truth answer.
pub fn aux_loss(logits: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(logits, targets)?;
    check_finite("logits", logits)?;
    check_finite("targets", targets)?;
    Ok(softmax(logits)[aux_target(targets)])
}

/// Auxiliary loss for a known target index and its gradient
/// `p_k (δ_jk − p_j)`, written into `grad`.
pub fn aux_loss_grad_at(logits: &[f64], k: usize, grad: &mut [f64]) -> f64 {
    let p = softmax(logits);
    let pk = p[k];
    for (j, (g, &pj)) in grad.iter_mut().zip(&p).enumerate() {
        *g = pk * (if j == k { 1.0 } else { 0.0 } - pj);
    }
    pk
}

pub fn aux_loss_grad(logits: &[f64], targets: &[f64], grad: &mut [f64]) -> Result<f64> {
    check_lengths(logits, targets)?;
    check_finite("logits", logits)?;
    check_finite("targets", targets)?;
    Ok(aux_loss_grad_at(logits, aux_target(targets), grad))
}

/// Sets the (lowest-index) maximum score to `-inf`.
pub fn mask_top(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.len() < 2 {
        return Err(Error::invalid("top-answer masking needs at least two answers"));
    }
    let mut out = scores.to_vec();
    out[argmax(scores)] = f64::NEG_INFINITY;
    Ok(out)
}
