//! Ray generation, sampling and volume rendering.

pub mod camera;
pub mod composite;
pub mod sampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::FieldModel;

pub use camera::{Camera, Intrinsics, Ray, SceneBox};
pub use composite::{composite, composite_backward, CompositeResult, SampleSet};
pub use sampler::sample_ray;

/// Anything that maps (position in [0,1]^d, optional view direction) to
/// (density, color). Implemented by trained models and by procedural
/// ground-truth scenes.
pub trait QueryField: Sync {
    fn query(&self, x: &[f64], dir: Option<&[f64; 3]>) -> Result<(f64, [f64; 3])>;
}

impl QueryField for FieldModel {
    fn query(&self, x: &[f64], dir: Option<&[f64; 3]>) -> Result<(f64, [f64; 3])> {
        self.eval(x, dir)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RenderSettings {
    pub n_samples: usize,
    pub jitter: bool,
    pub background: [f64; 3],
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            n_samples: 64,
            jitter: false,
            background: [0.0, 0.0, 0.0],
        }
    }
}

/// Per-ray RNG stream derived from (seed, ray id) so parallel and serial
/// rendering agree bit-exactly.
pub fn ray_rng(seed: u64, ray_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ray_id.wrapping_add(1));
    rng
}

/// Renders one ray through the field. Rays that miss the scene box return
/// the background color.
pub fn render_ray<F: QueryField>(
    field: &F,
    aabb: &SceneBox,
    ray: &Ray,
    settings: &RenderSettings,
    rng: &mut ChaCha8Rng,
) -> Result<[f64; 3]> {
    let clipped = match aabb.clip(ray) {
        Some(r) => r,
        None => return Ok(settings.background),
    };
    let (ts, deltas) = sample_ray(&clipped, settings.n_samples, settings.jitter, rng);
    let dir = [clipped.dir[0], clipped.dir[1], clipped.dir[2]];
    let mut samples = SampleSet {
        sigma: Vec::with_capacity(ts.len()),
        delta: deltas,
        color: Vec::with_capacity(ts.len()),
    };
    for &t in &ts {
        let p = clipped.origin + t * clipped.dir;
        let x = aabb.to_unit(&p);
        let (sigma, color) = field.query(&x, Some(&dir))?;
        samples.sigma.push(sigma);
        samples.color.push(color);
    }
    let result = composite(&samples)?;
    Ok(result.rgb)
}

/// Renders a full view, row-major top-left origin. Pixel rays go through
/// pixel centers; ray id = y * width + x keys the per-ray RNG stream.
pub fn render_image<F: QueryField>(
    field: &F,
    camera: &Camera,
    aabb: &SceneBox,
    settings: &RenderSettings,
    seed: u64,
) -> Result<Vec<[f64; 3]>> {
    let w = camera.intrinsics.width as usize;
    let h = camera.intrinsics.height as usize;
    (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (px, py) = ((i % w) as f64 + 0.5, (i / w) as f64 + 0.5);
            let ray = camera.pixel_ray(px, py);
            let mut rng = ray_rng(seed, i as u64);
            render_ray(field, aabb, &ray, settings, &mut rng)
        })
        .collect()
}

/// 2D mode: the field's color at normalized pixel coordinates is the
/// prediction; no ray marching.
pub fn render_image2d(field: &FieldModel, width: u32, height: u32) -> Result<Vec<[f64; 3]>> {
    let w = width as usize;
    let h = height as usize;
    (0..w * h)
        .into_par_iter()
        .map(|i| {
            let x = [
                ((i % w) as f64 + 0.5) / w as f64,
                ((i / w) as f64 + 0.5) / h as f64,
            ];
            field.eval(&x, None).map(|(_, c)| c)
        })
        .collect()
}
