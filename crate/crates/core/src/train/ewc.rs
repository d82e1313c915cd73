//! Elastic weight consolidation: Fisher-diagonal estimation and the
//! quadratic anchoring penalty.

use crate::error::{CnfError, Result};
use crate::field::FieldModel;
use crate::train::loss::{loss_and_grad, GradBuffer, LossBatch, RenderContext};

/// Diagonal Fisher estimate with the reference parameter snapshot it anchors.
#[derive(Debug, Clone)]
pub struct FisherDiag {
    pub diag: Vec<f64>,
    pub reference: Vec<f64>,
    pub sample_count: usize,
}

impl FisherDiag {
    /// Running accumulation across tasks: sums diagonals, re-anchors at the
    /// latest parameters.
    pub fn accumulate(&mut self, other: &FisherDiag) {
        for (d, o) in self.diag.iter_mut().zip(&other.diag) {
            *d += o;
        }
        self.reference = other.reference.clone();
        self.sample_count += other.sample_count;
    }
}

/// (lambda/2) sum_k F_k (p_k - ref_k)^2; its gradient lambda F_k (p_k - ref_k)
/// is added into `grads` when given.
pub fn ewc_penalty(
    model: &FieldModel,
    fisher: &FisherDiag,
    lambda: f64,
    mut grads: Option<&mut GradBuffer>,
) -> Result<f64> {
    if fisher.diag.len() != model.params.len() || fisher.reference.len() != model.params.len() {
        return Err(CnfError::usage("ewc: fisher not aligned with model parameters"));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let mut penalty = 0.0;
    for k in 0..model.params.len() {
        let d = model.params[k] - fisher.reference[k];
        penalty += fisher.diag[k] * d * d;
        if let Some(g) = grads.as_deref_mut() {
            g[k] += lambda * fisher.diag[k] * d;
        }
    }
    Ok(0.5 * lambda * penalty)
}

/// Per-parameter mean of squared minibatch gradients of the photometric
/// loss, with the current parameters as reference snapshot.
pub fn fisher_estimate(
    model: &FieldModel,
    ctx: &RenderContext,
    n_batches: usize,
    mut batch_fn: impl FnMut(usize) -> Result<LossBatch>,
) -> Result<FisherDiag> {
    if n_batches == 0 {
        return Err(CnfError::usage("fisher: need at least one minibatch"));
    }
    let mut diag = vec![0.0f64; model.params.len()];
    let mut grads: GradBuffer = Vec::new();
    for b in 0..n_batches {
        let batch = batch_fn(b)?;
        if batch.is_empty() {
            return Err(CnfError::usage("fisher: empty minibatch"));
        }
        let mut step_ctx = ctx.clone();
        step_ctx.seed = ctx.seed.wrapping_add(b as u64);
        loss_and_grad(&batch, model, &step_ctx, &mut grads)?;
        for (d, g) in diag.iter_mut().zip(&grads) {
            *d += g * g;
        }
    }
    for d in diag.iter_mut() {
        *d /= n_batches as f64;
    }
    Ok(FisherDiag {
        diag,
        reference: model.params.clone(),
        sample_count: n_batches,
    })
}
