//! The scene field: encoding + decoder in one flat parameter vector.
//!
//! Flat ordering is stable: feature tables level 0..L-1 first (HASH
//! backbone only), then the decoder block as laid out by `MlpLayout`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};
use crate::field::freq::{freq_encode, freq_encode_len};
use crate::field::grid::{
    feature_len, grid_encode, grid_encode_backward, level_layouts, GridCache, GridConfig,
    LevelLayout,
};
use crate::field::mlp::{
    mlp_backward, mlp_forward, DensityActivation, MlpCache, MlpConfig, MlpLayout,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backbone {
    Hash,
    Freq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub backbone: Backbone,
    pub spatial_dim: usize,
    /// HASH backbone only.
    pub grid: Option<GridConfig>,
    /// FREQ backbone: positional encoding bands.
    pub n_freq: usize,
    /// FREQ backbone: append raw coordinates to the encoding.
    pub include_input: bool,
    pub mlp: MlpConfig,
    /// Encode the view direction (freq bands below) into the color head.
    pub view_dependent: bool,
    pub dir_n_freq: usize,
    pub seed: u64,
}

impl FieldConfig {
    pub fn hash(spatial_dim: usize, grid: GridConfig, seed: u64) -> Self {
        FieldConfig {
            backbone: Backbone::Hash,
            spatial_dim,
            grid: Some(grid),
            n_freq: 0,
            include_input: false,
            mlp: MlpConfig {
                hidden_layers: 2,
                hidden_width: 64,
                density_activation: DensityActivation::Softplus,
            },
            view_dependent: spatial_dim == 3,
            dir_n_freq: 4,
            seed,
        }
    }

    pub fn freq(spatial_dim: usize, n_freq: usize, seed: u64) -> Self {
        FieldConfig {
            backbone: Backbone::Freq,
            spatial_dim,
            grid: None,
            n_freq,
            include_input: true,
            mlp: MlpConfig {
                hidden_layers: 4,
                hidden_width: 128,
                density_activation: DensityActivation::Softplus,
            },
            view_dependent: spatial_dim == 3,
            dir_n_freq: 4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spatial_dim != 2 && self.spatial_dim != 3 {
            return Err(CnfError::usage("field: spatial_dim must be 2 or 3"));
        }
        self.mlp.validate()?;
        match self.backbone {
            Backbone::Hash => {
                let grid = self
                    .grid
                    .as_ref()
                    .ok_or_else(|| CnfError::usage("field: HASH backbone requires a grid config"))?;
                grid.validate()?;
                if grid.spatial_dim != self.spatial_dim {
                    return Err(CnfError::usage("field: grid and field spatial_dim differ"));
                }
            }
            Backbone::Freq => {
                if self.n_freq == 0 && !self.include_input {
                    return Err(CnfError::usage("field: FREQ backbone with empty encoding"));
                }
            }
        }
        if self.view_dependent && self.spatial_dim != 3 {
            return Err(CnfError::usage("field: view dependence requires spatial_dim 3"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        match self.backbone {
            Backbone::Hash => {
                let g = self.grid.as_ref().unwrap();
                g.levels * g.feature_dim
            }
            Backbone::Freq => {
                freq_encode_len(self.spatial_dim, self.n_freq)
                    + if self.include_input { self.spatial_dim } else { 0 }
            }
        }
    }

    pub fn dir_dim(&self) -> usize {
        if self.view_dependent {
            freq_encode_len(3, self.dir_n_freq)
        } else {
            0
        }
    }
}

#[derive(Debug, Clone)]
pub struct FieldModel {
    pub config: FieldConfig,
    pub params: Vec<f64>,
    pub level_layouts: Vec<LevelLayout>,
    pub mlp_layout: MlpLayout,
    /// Scalar count of the feature block; decoder params follow.
    pub feature_len: usize,
}

/// Forward record for one query, consumed by `eval_backward`.
#[derive(Debug, Clone, Default)]
pub struct EvalCache {
    pub grid: GridCache,
    pub mlp: MlpCache,
    pub sigma_raw: f64,
    pub color_raw: [f64; 3],
    pub sigma: f64,
    pub color: [f64; 3],
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

const TRUNC_EXP_CAP: f64 = 15.0;

impl FieldModel {
    pub fn new(config: FieldConfig) -> Result<Self> {
        config.validate()?;
        let (level_layouts, feat_len) = match (&config.backbone, &config.grid) {
            (Backbone::Hash, Some(grid)) => (level_layouts(grid), feature_len(grid)),
            _ => (Vec::new(), 0),
        };
        let mlp_layout = MlpLayout::new(&config.mlp, config.input_dim(), config.dir_dim());
        let mut params = vec![0.0f64; feat_len + mlp_layout.len];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for p in params[..feat_len].iter_mut() {
            *p = rng.gen_range(-1e-4..1e-4) as f32 as f64;
        }
        let base = feat_len;
        for &(w, b, in_dim, out_dim) in &mlp_layout.trunk {
            let bound = (6.0 / in_dim as f64).sqrt();
            for p in params[base + w..base + w + out_dim * in_dim].iter_mut() {
                *p = rng.gen_range(-bound..bound) as f32 as f64;
            }
            let _ = b; // biases stay zero
        }
        let h = mlp_layout.hidden_width;
        let bound = (6.0 / h as f64).sqrt();
        for p in params[base + mlp_layout.sigma_w..base + mlp_layout.sigma_w + h].iter_mut() {
            *p = rng.gen_range(-bound..bound) as f32 as f64;
        }
        let color_in = h + mlp_layout.dir_dim;
        let bound = (6.0 / color_in as f64).sqrt();
        for p in params[base + mlp_layout.color_w..base + mlp_layout.color_w + 3 * color_in].iter_mut()
        {
            *p = rng.gen_range(-bound..bound) as f32 as f64;
        }
        Ok(FieldModel {
            config,
            params,
            level_layouts,
            mlp_layout,
            feature_len: feat_len,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn encode(&self, x: &[f64], enc: &mut Vec<f64>, cache: Option<&mut GridCache>) -> Result<()> {
        match self.config.backbone {
            Backbone::Hash => {
                let grid = self.config.grid.as_ref().unwrap();
                enc.resize(self.config.input_dim(), 0.0);
                grid_encode(
                    x,
                    &self.params[..self.feature_len],
                    grid,
                    &self.level_layouts,
                    enc,
                    cache,
                )
            }
            Backbone::Freq => {
                for &xi in x {
                    if !(0.0..=1.0).contains(&xi) || !xi.is_finite() {
                        return Err(CnfError::OutOfDomain(x.to_vec()));
                    }
                }
                let n = freq_encode_len(self.config.spatial_dim, self.config.n_freq);
                enc.resize(n, 0.0);
                freq_encode(x, self.config.n_freq, &mut enc[..n]);
                if self.config.include_input {
                    enc.extend_from_slice(x);
                }
                Ok(())
            }
        }
    }

    fn encode_dir(&self, dir: Option<&[f64; 3]>) -> Result<Vec<f64>> {
        if !self.config.view_dependent {
            return Ok(Vec::new());
        }
        let d = dir.ok_or_else(|| {
            CnfError::usage("field: view-dependent model requires a direction")
        })?;
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(CnfError::usage(format!("field: direction not unit-norm ({norm})")));
        }
        let mut out = vec![0.0; freq_encode_len(3, self.config.dir_n_freq)];
        freq_encode(d, self.config.dir_n_freq, &mut out);
        Ok(out)
    }

    /// Density and color at `x` in [0,1]^d. Pure; never mutates the model.
    pub fn eval(&self, x: &[f64], dir: Option<&[f64; 3]>) -> Result<(f64, [f64; 3])> {
        let cache = self.eval_cached(x, dir)?;
        Ok((cache.sigma, cache.color))
    }

    /// As `eval`, recording everything the backward pass needs.
    pub fn eval_cached(&self, x: &[f64], dir: Option<&[f64; 3]>) -> Result<EvalCache> {
        let mut cache = EvalCache::default();
        let mut enc = Vec::new();
        self.encode(x, &mut enc, Some(&mut cache.grid))?;
        let dir_enc = self.encode_dir(dir)?;
        let (sigma_raw, color_raw) = mlp_forward(
            &self.params[self.feature_len..],
            &self.mlp_layout,
            &enc,
            &dir_enc,
            Some(&mut cache.mlp),
        );
        let sigma = match self.config.mlp.density_activation {
            DensityActivation::Softplus => softplus(sigma_raw),
            DensityActivation::TruncExp => sigma_raw.min(TRUNC_EXP_CAP).exp(),
        };
        let color = [
            sigmoid(color_raw[0]),
            sigmoid(color_raw[1]),
            sigmoid(color_raw[2]),
        ];
        if !sigma.is_finite() || color.iter().any(|c| !c.is_finite()) {
            let index = self.params.iter().position(|p| !p.is_finite());
            return Err(CnfError::NonFinite {
                context: "field_eval".into(),
                index,
            });
        }
        cache.sigma_raw = sigma_raw;
        cache.color_raw = color_raw;
        cache.sigma = sigma;
        cache.color = color;
        Ok(cache)
    }

    /// Backpropagates (d_sigma, d_color) through activations, decoder and
    /// encoding. Feature gradients are pushed sparsely; the decoder gradient
    /// accumulates densely into `mlp_grad` (length `mlp_layout.len`).
    pub fn eval_backward(
        &self,
        cache: &EvalCache,
        d_sigma: f64,
        d_color: &[f64; 3],
        feat_grad: &mut Vec<(u32, f64)>,
        mlp_grad: &mut [f64],
    ) {
        let d_sigma_raw = d_sigma
            * match self.config.mlp.density_activation {
                DensityActivation::Softplus => sigmoid(cache.sigma_raw),
                DensityActivation::TruncExp => {
                    if cache.sigma_raw < TRUNC_EXP_CAP {
                        cache.sigma
                    } else {
                        0.0
                    }
                }
            };
        let mut d_color_raw = [0.0f64; 3];
        for ch in 0..3 {
            let s = cache.color[ch];
            d_color_raw[ch] = d_color[ch] * s * (1.0 - s);
        }
        let mut d_enc = vec![0.0; self.config.input_dim()];
        mlp_backward(
            &self.params[self.feature_len..],
            &self.mlp_layout,
            &cache.mlp,
            d_sigma_raw,
            &d_color_raw,
            mlp_grad,
            &mut d_enc,
        );
        if self.config.backbone == Backbone::Hash {
            let grid = self.config.grid.as_ref().unwrap();
            grid_encode_backward(&cache.grid, &d_enc, grid, feat_grad);
        }
    }

    /// FNV-1a hash over the little-endian f64 bytes of the parameter vector.
    pub fn param_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for p in &self.params {
            for b in p.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::GridConfig;

    fn small_hash_2d(seed: u64) -> FieldModel {
        let grid = GridConfig::new(3, 1 << 8, 2, 2, 8, 2).unwrap();
        let mut cfg = FieldConfig::hash(2, grid, seed);
        cfg.view_dependent = false;
        cfg.mlp.hidden_layers = 1;
        cfg.mlp.hidden_width = 8;
        FieldModel::new(cfg).unwrap()
    }

    #[test]
    fn zero_decoder_forced_outputs() {
        let mut model = small_hash_2d(1);
        for p in model.params[model.feature_len..].iter_mut() {
            *p = 0.0;
        }
        let (sigma, color) = model.eval(&[0.4, 0.6], None).unwrap();
        assert!((sigma - std::f64::consts::LN_2).abs() < 1e-15);
        for c in color {
            assert_eq!(c, 0.5);
        }
    }

    #[test]
    fn eval_is_pure() {
        let model = small_hash_2d(2);
        let a = model.eval(&[0.3, 0.3], None).unwrap();
        let b = model.eval(&[0.3, 0.3], None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_ranges() {
        let model = small_hash_2d(3);
        for i in 0..50 {
            let x = [(i as f64 * 0.02) % 1.0, (i as f64 * 0.037) % 1.0];
            let (sigma, color) = model.eval(&x, None).unwrap();
            assert!(sigma >= 0.0);
            for c in color {
                assert!((0.0..=1.0).contains(&c));
            }
        }
    }

    /// Straight-line re-implementation of the full forward pass, written
    /// independently of the production path.
    fn oracle_forward(model: &FieldModel, x: &[f64]) -> (f64, [f64; 3]) {
        let grid = model.config.grid.as_ref().unwrap();
        let f_dim = grid.feature_dim;
        // encoding
        let mut enc = Vec::new();
        for layout in &model.level_layouts {
            let n = layout.resolution as f64;
            let px = x[0] * n;
            let py = x[1] * n;
            let bx = (px.floor() as i64).clamp(0, layout.resolution as i64 - 1) as u64;
            let by = (py.floor() as i64).clamp(0, layout.resolution as i64 - 1) as u64;
            let fx = px - bx as f64;
            let fy = py - by as f64;
            for f in 0..f_dim {
                let mut acc = 0.0;
                for (dx, dy, w) in [
                    (0u64, 0u64, (1.0 - fx) * (1.0 - fy)),
                    (1, 0, fx * (1.0 - fy)),
                    (0, 1, (1.0 - fx) * fy),
                    (1, 1, fx * fy),
                ] {
                    let v = [bx + dx, by + dy];
                    let row = if layout.dense {
                        (v[1] * (layout.resolution as u64 + 1) + v[0]) as usize
                    } else {
                        let h = v[0].wrapping_mul(grid.hash_primes[0])
                            ^ v[1].wrapping_mul(grid.hash_primes[1]);
                        (h % grid.table_size as u64) as usize
                    };
                    acc += w * model.params[layout.offset + row * f_dim + f];
                }
                enc.push(acc);
            }
        }
        // decoder
        let p = &model.params[model.feature_len..];
        let lay = &model.mlp_layout;
        let mut h = enc;
        for &(w, b, in_dim, out_dim) in &lay.trunk {
            let mut next = vec![0.0; out_dim];
            for o in 0..out_dim {
                let mut acc = p[b + o];
                for i in 0..in_dim {
                    acc += p[w + o * in_dim + i] * h[i];
                }
                next[o] = acc.max(0.0);
            }
            h = next;
        }
        let mut s = p[lay.sigma_b];
        for i in 0..lay.hidden_width {
            s += p[lay.sigma_w + i] * h[i];
        }
        let sigma = (1.0 + s.exp()).ln();
        let mut color = [0.0; 3];
        for ch in 0..3 {
            let mut acc = p[lay.color_b + ch];
            for i in 0..lay.hidden_width {
                acc += p[lay.color_w + ch * lay.hidden_width + i] * h[i];
            }
            color[ch] = 1.0 / (1.0 + (-acc).exp());
        }
        (sigma, color)
    }

    #[test]
    fn forward_matches_independent_oracle() {
        let model = small_hash_2d(11);
        for i in 0..20 {
            let x = [((i * 37) % 100) as f64 / 100.0, ((i * 61) % 100) as f64 / 100.0];
            let (s, c) = model.eval(&x, None).unwrap();
            let (os, oc) = oracle_forward(&model, &x);
            assert!((s - os).abs() <= 1e-12 * (1.0 + os.abs()));
            for ch in 0..3 {
                assert!((c[ch] - oc[ch]).abs() <= 1e-12);
            }
        }
    }
}
