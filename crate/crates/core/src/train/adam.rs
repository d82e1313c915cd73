//! Adam with bias correction and split learning rates for the feature
//! block versus the decoder block.

use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};
use crate::field::FieldModel;
use crate::train::loss::GradBuffer;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimConfig {
    pub lr_features: f64,
    pub lr_decoder: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            lr_features: 1e-2,
            lr_decoder: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimState {
    pub config: OptimConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    /// Multiplier on both learning rates, for schedules. 1 by default.
    pub lr_scale: f64,
}

impl OptimState {
    pub fn new(config: OptimConfig, param_count: usize) -> Self {
        OptimState {
            config,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
            lr_scale: 1.0,
        }
    }
}

/// One Adam update. Deterministic; errors on non-finite updates.
pub fn optim_step(model: &mut FieldModel, grads: &GradBuffer, state: &mut OptimState) -> Result<()> {
    if grads.len() != model.params.len() || state.m.len() != model.params.len() {
        return Err(CnfError::usage("optim: gradient/state length mismatch"));
    }
    let cfg = &state.config;
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - cfg.beta1.powf(t);
    let bc2 = 1.0 - cfg.beta2.powf(t);
    for (k, p) in model.params.iter_mut().enumerate() {
        let mut g = grads[k];
        if cfg.weight_decay != 0.0 {
            g += cfg.weight_decay * *p;
        }
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
        state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[k] / bc1;
        let v_hat = state.v[k] / bc2;
        let lr = state.lr_scale
            * if k < model.feature_len {
                cfg.lr_features
            } else {
                cfg.lr_decoder
            };
        let update = lr * m_hat / (v_hat.sqrt() + cfg.eps);
        if !update.is_finite() {
            return Err(CnfError::NonFinite {
                context: "optim_step".into(),
                index: Some(k),
            });
        }
        *p -= update;
    }
    Ok(())
}
