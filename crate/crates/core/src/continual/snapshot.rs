//! Frozen model snapshots used as pseudo-ground-truth oracles.

use crate::error::Result;
use crate::field::FieldModel;
use crate::render::{ray_rng, render_ray, QueryField, SceneBox};
use crate::train::{RayInput, RenderContext};

/// Deep immutable copy of a model, frozen after `task_index`.
/// No mutable accessors exist; queries are pure.
#[derive(Debug, Clone)]
pub struct FrozenSnapshot {
    model: FieldModel,
    pub task_index: usize,
}

pub fn freeze(model: &FieldModel, task_index: usize) -> FrozenSnapshot {
    FrozenSnapshot {
        model: model.clone(),
        task_index,
    }
}

impl FrozenSnapshot {
    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn param_hash(&self) -> u64 {
        self.model.param_hash()
    }

    /// Pseudo ground truth for a ray: deterministic midpoint sampling in 3D,
    /// direct field color in 2D.
    pub fn pseudo_gt(&self, input: &RayInput, ctx: &RenderContext) -> Result<[f64; 3]> {
        match input {
            RayInput::Pixel(xy) => self.model.eval(xy, None).map(|(_, c)| c),
            RayInput::Ray { ray, ray_id } => {
                let aabb: &SceneBox = ctx
                    .aabb
                    .as_ref()
                    .expect("3D pseudo-GT needs scene bounds");
                let mut settings = ctx.settings;
                settings.jitter = false;
                let mut rng = ray_rng(ctx.seed, *ray_id);
                render_ray(&self.model, aabb, ray, &settings, &mut rng)
            }
        }
    }
}

impl QueryField for FrozenSnapshot {
    fn query(&self, x: &[f64], dir: Option<&[f64; 3]>) -> Result<(f64, [f64; 3])> {
        self.model.eval(x, dir)
    }
}
