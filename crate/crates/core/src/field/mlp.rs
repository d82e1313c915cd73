//! Decoder MLP: a ReLU trunk with a density head and a color head.
//! Raw (pre-activation) head outputs; the model applies softplus/sigmoid.

use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityActivation {
    Softplus,
    TruncExp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub density_activation: DensityActivation,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.hidden_width == 0 {
            return Err(CnfError::usage("mlp: hidden_layers and hidden_width must be >= 1"));
        }
        Ok(())
    }
}

/// Resolved parameter layout of the decoder inside its flat block.
/// Trunk layers first (W row-major out x in, then bias), then the density
/// head (1 x H), then the color head (3 x (H + dir_dim)).
#[derive(Debug, Clone)]
pub struct MlpLayout {
    pub input_dim: usize,
    pub dir_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    /// (weight_offset, bias_offset, in_dim, out_dim) per trunk layer.
    pub trunk: Vec<(usize, usize, usize, usize)>,
    pub sigma_w: usize,
    pub sigma_b: usize,
    pub color_w: usize,
    pub color_b: usize,
    pub len: usize,
}

impl MlpLayout {
    pub fn new(cfg: &MlpConfig, input_dim: usize, dir_dim: usize) -> Self {
        let h = cfg.hidden_width;
        let mut trunk = Vec::with_capacity(cfg.hidden_layers);
        let mut off = 0usize;
        let mut in_dim = input_dim;
        for _ in 0..cfg.hidden_layers {
            let w = off;
            let b = w + h * in_dim;
            trunk.push((w, b, in_dim, h));
            off = b + h;
            in_dim = h;
        }
        let sigma_w = off;
        let sigma_b = sigma_w + h;
        let color_w = sigma_b + 1;
        let color_in = h + dir_dim;
        let color_b = color_w + 3 * color_in;
        let len = color_b + 3;
        MlpLayout {
            input_dim,
            dir_dim,
            hidden_layers: cfg.hidden_layers,
            hidden_width: h,
            trunk,
            sigma_w,
            sigma_b,
            color_w,
            color_b,
            len,
        }
    }
}

/// Forward-pass record for one query point.
#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    pub input: Vec<f64>,
    /// Pre-activations per trunk layer.
    pub pre: Vec<Vec<f64>>,
    /// Post-ReLU activations per trunk layer.
    pub act: Vec<Vec<f64>>,
    pub dir: Vec<f64>,
}

fn linear(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let in_dim = x.len();
    for (o, (row, bias)) in out.iter_mut().zip(w.chunks(in_dim).zip(b)) {
        let mut acc = *bias;
        for (wi, xi) in row.iter().zip(x) {
            acc += wi * xi;
        }
        *o = acc;
    }
}

/// Raw head outputs (sigma_raw, color_raw). `dir_enc` must have length
/// `layout.dir_dim` (empty when the model has no view dependence).
pub fn mlp_forward(
    params: &[f64],
    layout: &MlpLayout,
    input: &[f64],
    dir_enc: &[f64],
    mut cache: Option<&mut MlpCache>,
) -> (f64, [f64; 3]) {
    let mut x = input.to_vec();
    if let Some(c) = cache.as_deref_mut() {
        c.input = x.clone();
        c.pre.clear();
        c.act.clear();
        c.dir = dir_enc.to_vec();
    }
    for &(w, b, in_dim, out_dim) in &layout.trunk {
        let mut z = vec![0.0; out_dim];
        linear(&params[w..w + out_dim * in_dim], &params[b..b + out_dim], &x, &mut z);
        let act: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
        if let Some(c) = cache.as_deref_mut() {
            c.pre.push(z);
            c.act.push(act.clone());
        }
        x = act;
    }
    let h = layout.hidden_width;
    let mut sigma_raw = params[layout.sigma_b];
    for (wi, xi) in params[layout.sigma_w..layout.sigma_w + h].iter().zip(&x) {
        sigma_raw += wi * xi;
    }
    let color_in_dim = h + layout.dir_dim;
    let mut color_raw = [0.0f64; 3];
    for ch in 0..3 {
        let row = &params[layout.color_w + ch * color_in_dim..layout.color_w + (ch + 1) * color_in_dim];
        let mut acc = params[layout.color_b + ch];
        for (wi, xi) in row.iter().zip(x.iter().chain(dir_enc.iter())) {
            acc += wi * xi;
        }
        color_raw[ch] = acc;
    }
    (sigma_raw, color_raw)
}

/// Backpropagates (d_sigma_raw, d_color_raw) through the decoder.
/// Accumulates into `grad` (aligned with the decoder block) and writes the
/// gradient w.r.t. the encoding into `d_input`.
pub fn mlp_backward(
    params: &[f64],
    layout: &MlpLayout,
    cache: &MlpCache,
    d_sigma_raw: f64,
    d_color_raw: &[f64; 3],
    grad: &mut [f64],
    d_input: &mut [f64],
) {
    let h = layout.hidden_width;
    let last = cache.act.last().expect("cache recorded");
    let mut d_h = vec![0.0f64; h];

    // density head
    for i in 0..h {
        grad[layout.sigma_w + i] += d_sigma_raw * last[i];
        d_h[i] += d_sigma_raw * params[layout.sigma_w + i];
    }
    grad[layout.sigma_b] += d_sigma_raw;

    // color head
    let color_in_dim = h + layout.dir_dim;
    for ch in 0..3 {
        let dc = d_color_raw[ch];
        let row = layout.color_w + ch * color_in_dim;
        for i in 0..h {
            grad[row + i] += dc * last[i];
            d_h[i] += dc * params[row + i];
        }
        for (i, di) in cache.dir.iter().enumerate() {
            grad[row + h + i] += dc * di;
        }
        grad[layout.color_b + ch] += dc;
    }

    // trunk, reversed
    let mut upstream = d_h;
    for l in (0..layout.hidden_layers).rev() {
        let (w, b, in_dim, out_dim) = layout.trunk[l];
        let pre = &cache.pre[l];
        let below: &[f64] = if l == 0 { &cache.input } else { &cache.act[l - 1] };
        let mut d_below = vec![0.0f64; in_dim];
        for o in 0..out_dim {
            if pre[o] <= 0.0 {
                continue;
            }
            let dz = upstream[o];
            let row = w + o * in_dim;
            for i in 0..in_dim {
                grad[row + i] += dz * below[i];
                d_below[i] += dz * params[row + i];
            }
            grad[b + o] += dz;
        }
        upstream = d_below;
    }
    d_input.copy_from_slice(&upstream);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layout() -> (MlpLayout, Vec<f64>) {
        let cfg = MlpConfig {
            hidden_layers: 2,
            hidden_width: 5,
            density_activation: DensityActivation::Softplus,
        };
        let layout = MlpLayout::new(&cfg, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params: Vec<f64> = (0..layout.len).map(|_| rng.gen_range(-0.7..0.7)).collect();
        (layout, params)
    }

    #[test]
    fn zero_params_forward() {
        let cfg = MlpConfig {
            hidden_layers: 1,
            hidden_width: 3,
            density_activation: DensityActivation::Softplus,
        };
        let layout = MlpLayout::new(&cfg, 2, 0);
        let params = vec![0.0; layout.len];
        let (s, c) = mlp_forward(&params, &layout, &[0.3, -0.2], &[], None);
        assert_eq!(s, 0.0);
        assert_eq!(c, [0.0; 3]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (layout, mut params) = layout();
        let input = [0.3, -0.1, 0.8, 0.2];
        let dir = [0.5, -0.5];
        // scalar objective: sigma_raw + sum(color_raw^2)
        let obj = |p: &[f64]| {
            let (s, c) = mlp_forward(p, &layout, &input, &dir, None);
            s + c.iter().map(|v| v * v).sum::<f64>()
        };
        let mut cache = MlpCache::default();
        let (_, c) = mlp_forward(&params, &layout, &input, &dir, Some(&mut cache));
        let mut grad = vec![0.0; layout.len];
        let mut d_input = vec![0.0; 4];
        let dc = [2.0 * c[0], 2.0 * c[1], 2.0 * c[2]];
        mlp_backward(&params, &layout, &cache, 1.0, &dc, &mut grad, &mut d_input);
        let h = 1e-6;
        for k in (0..layout.len).step_by(3) {
            let orig = params[k];
            params[k] = orig + h;
            let hi = obj(&params);
            params[k] = orig - h;
            let lo = obj(&params);
            params[k] = orig;
            let fd = (hi - lo) / (2.0 * h);
            assert!(
                (fd - grad[k]).abs() <= 1e-6 * (1.0 + fd.abs()),
                "param {k}: fd {fd} vs analytic {}",
                grad[k]
            );
        }
    }
}
