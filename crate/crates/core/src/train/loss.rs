//! Photometric loss over a batch of supervised rays and its exact
//! reverse-mode gradient through the render pipeline.
//!
//! Loss convention: per-ray sum of squared RGB error over 3 channels,
//! mean over rays.

use rayon::prelude::*;

use crate::error::{CnfError, Result};
use crate::field::{EvalCache, FieldModel};
use crate::render::{
    composite, composite_backward, ray_rng, sample_ray, Ray, RenderSettings, SampleSet, SceneBox,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceTag {
    /// Ground-truth pixel color from the current task.
    Gt,
    /// Pseudo ground truth rendered by a frozen oracle.
    Oracle,
}

#[derive(Debug, Clone)]
pub enum RayInput {
    /// 2D mode: normalized pixel coordinates in [0,1]^2.
    Pixel([f64; 2]),
    /// 3D mode: an unclipped camera ray and its stable id for RNG streams.
    Ray { ray: Ray, ray_id: u64 },
}

#[derive(Debug, Clone)]
pub struct LossRay {
    pub input: RayInput,
    pub target: [f64; 3],
    pub source: SourceTag,
}

#[derive(Debug, Clone, Default)]
pub struct LossBatch {
    pub rays: Vec<LossRay>,
}

impl LossBatch {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

/// Everything the forward/backward pass needs besides the batch.
#[derive(Debug, Clone)]
pub struct RenderContext {
    /// 3D mode scene bounds; `None` in 2D mode.
    pub aabb: Option<SceneBox>,
    pub settings: RenderSettings,
    /// Per-step seed; per-ray streams derive from it and the ray id.
    pub seed: u64,
}

/// Flat per-parameter gradient, aligned with the model's parameter order.
pub type GradBuffer = Vec<f64>;

#[derive(Debug, Clone, Copy, Default)]
pub struct LossStats {
    pub total: f64,
    pub gt: f64,
    pub oracle: f64,
    pub n_gt: usize,
    pub n_oracle: usize,
}

struct RayContribution {
    loss: f64,
    source: SourceTag,
    feat: Vec<(u32, f64)>,
    mlp: Vec<f64>,
}

fn forward_backward_ray(
    model: &FieldModel,
    ray: &LossRay,
    ctx: &RenderContext,
    inv_batch: f64,
    want_grad: bool,
) -> Result<RayContribution> {
    let mut contribution = RayContribution {
        loss: 0.0,
        source: ray.source,
        feat: Vec::new(),
        mlp: if want_grad {
            vec![0.0; model.mlp_layout.len]
        } else {
            Vec::new()
        },
    };
    match &ray.input {
        RayInput::Pixel(xy) => {
            let cache = model.eval_cached(xy, None)?;
            let mut d_color = [0.0f64; 3];
            for ch in 0..3 {
                let r = cache.color[ch] - ray.target[ch];
                contribution.loss += r * r;
                d_color[ch] = 2.0 * r * inv_batch;
            }
            if want_grad {
                model.eval_backward(&cache, 0.0, &d_color, &mut contribution.feat, &mut contribution.mlp);
            }
        }
        RayInput::Ray { ray: cam_ray, ray_id } => {
            let aabb = ctx
                .aabb
                .as_ref()
                .ok_or_else(|| CnfError::usage("loss: 3D ray without scene bounds"))?;
            let clipped = match aabb.clip(cam_ray) {
                Some(r) => r,
                None => {
                    // background pixel: constant prediction, zero gradient
                    for ch in 0..3 {
                        let r = ctx.settings.background[ch] - ray.target[ch];
                        contribution.loss += r * r;
                    }
                    return Ok(contribution);
                }
            };
            let mut rng = ray_rng(ctx.seed, *ray_id);
            let (ts, deltas) = sample_ray(&clipped, ctx.settings.n_samples, ctx.settings.jitter, &mut rng);
            let dir = [clipped.dir[0], clipped.dir[1], clipped.dir[2]];
            let dir_arg = if model.config.view_dependent {
                Some(&dir)
            } else {
                None
            };
            let mut caches: Vec<EvalCache> = Vec::with_capacity(ts.len());
            let mut samples = SampleSet {
                sigma: Vec::with_capacity(ts.len()),
                delta: deltas,
                color: Vec::with_capacity(ts.len()),
            };
            for &t in &ts {
                let p = clipped.origin + t * clipped.dir;
                let x = aabb.to_unit(&p);
                let cache = model.eval_cached(&x, dir_arg)?;
                samples.sigma.push(cache.sigma);
                samples.color.push(cache.color);
                caches.push(cache);
            }
            let result = composite(&samples)?;
            let mut d_rgb = [0.0f64; 3];
            for ch in 0..3 {
                let r = result.rgb[ch] - ray.target[ch];
                contribution.loss += r * r;
                d_rgb[ch] = 2.0 * r * inv_batch;
            }
            if want_grad {
                let (d_sigma, d_color) = composite_backward(&samples, &result, &d_rgb);
                for (i, cache) in caches.iter().enumerate() {
                    model.eval_backward(
                        cache,
                        d_sigma[i],
                        &d_color[i],
                        &mut contribution.feat,
                        &mut contribution.mlp,
                    );
                }
            }
        }
    }
    Ok(contribution)
}

fn check_batch(batch: &LossBatch) -> Result<()> {
    if batch.is_empty() {
        return Err(CnfError::usage("loss: empty batch"));
    }
    Ok(())
}

fn accumulate(
    model: &FieldModel,
    contributions: Vec<RayContribution>,
    n: usize,
    grads: Option<&mut GradBuffer>,
) -> Result<LossStats> {
    let mut stats = LossStats::default();
    if let Some(grads) = grads {
        grads.clear();
        grads.resize(model.params.len(), 0.0);
        let mlp_base = model.feature_len;
        // fixed accumulation order: batch order, features then decoder
        for c in &contributions {
            for &(idx, g) in &c.feat {
                grads[idx as usize] += g;
            }
            for (i, g) in c.mlp.iter().enumerate() {
                grads[mlp_base + i] += g;
            }
        }
        if let Some(bad) = grads.iter().position(|g| !g.is_finite()) {
            let block = if bad < model.feature_len { "features" } else { "decoder" };
            return Err(CnfError::NonFinite {
                context: format!("gradient ({block})"),
                index: Some(bad),
            });
        }
    }
    for c in &contributions {
        stats.total += c.loss;
        match c.source {
            SourceTag::Gt => {
                stats.gt += c.loss;
                stats.n_gt += 1;
            }
            SourceTag::Oracle => {
                stats.oracle += c.loss;
                stats.n_oracle += 1;
            }
        }
    }
    stats.total /= n as f64;
    if stats.n_gt > 0 {
        stats.gt /= stats.n_gt as f64;
    }
    if stats.n_oracle > 0 {
        stats.oracle /= stats.n_oracle as f64;
    }
    Ok(stats)
}

/// Mean over rays of per-ray squared RGB error (GT and ORACLE targets alike).
pub fn photometric_loss(batch: &LossBatch, model: &FieldModel, ctx: &RenderContext) -> Result<LossStats> {
    check_batch(batch)?;
    let n = batch.len();
    let contributions: Vec<RayContribution> = batch
        .rays
        .par_iter()
        .map(|ray| forward_backward_ray(model, ray, ctx, 1.0 / n as f64, false))
        .collect::<Result<_>>()?;
    accumulate(model, contributions, n, None)
}

/// Batch loss plus its exact gradient w.r.t. every model parameter.
/// Rays run in parallel; accumulation order is fixed, so results are
/// identical for any thread count.
pub fn loss_and_grad(
    batch: &LossBatch,
    model: &FieldModel,
    ctx: &RenderContext,
    grads: &mut GradBuffer,
) -> Result<LossStats> {
    check_batch(batch)?;
    let n = batch.len();
    let contributions: Vec<RayContribution> = batch
        .rays
        .par_iter()
        .map(|ray| forward_backward_ray(model, ray, ctx, 1.0 / n as f64, true))
        .collect::<Result<_>>()?;
    accumulate(model, contributions, n, Some(grads))
}
