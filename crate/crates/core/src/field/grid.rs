//! Multi-resolution feature grids: per-level resolutions, dense/hashed
//! indexing and multilinear interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};

/// Classic spatial-hashing primes; the first `spatial_dim` are used.
pub const HASH_PRIMES: [u64; 3] = [73_856_093, 19_349_663, 83_492_791];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Number of resolution levels L.
    pub levels: usize,
    /// Maximum table rows per level T (power of two).
    pub table_size: usize,
    /// Feature dimensionality F.
    pub feature_dim: usize,
    /// Coarsest per-axis resolution.
    pub n_min: u32,
    /// Finest per-axis resolution.
    pub n_max: u32,
    /// 2 or 3.
    pub spatial_dim: usize,
    pub hash_primes: [u64; 3],
}

impl GridConfig {
    pub fn new(
        levels: usize,
        table_size: usize,
        feature_dim: usize,
        n_min: u32,
        n_max: u32,
        spatial_dim: usize,
    ) -> Result<Self> {
        let cfg = GridConfig {
            levels,
            table_size,
            feature_dim,
            n_min,
            n_max,
            spatial_dim,
            hash_primes: HASH_PRIMES,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.feature_dim == 0 || self.n_min == 0 {
            return Err(CnfError::usage("grid: levels, feature_dim, n_min must be >= 1"));
        }
        if !self.table_size.is_power_of_two() {
            return Err(CnfError::usage("grid: table_size must be a power of two"));
        }
        if self.n_min > self.n_max {
            return Err(CnfError::usage("grid: n_min must be <= n_max"));
        }
        if self.levels > 1 && self.n_min == self.n_max {
            return Err(CnfError::usage("grid: L > 1 requires n_min < n_max"));
        }
        if self.spatial_dim != 2 && self.spatial_dim != 3 {
            return Err(CnfError::usage("grid: spatial_dim must be 2 or 3"));
        }
        let mut seen = self.hash_primes[..self.spatial_dim].to_vec();
        seen.dedup();
        if seen.len() != self.spatial_dim {
            return Err(CnfError::usage("grid: hash primes must be unique"));
        }
        Ok(())
    }
}

/// Geometric level spacing: N_l = floor(n_min * exp(ln(n_max/n_min) * l/(L-1))),
/// clamped non-decreasing with endpoints n_min and n_max.
pub fn level_resolutions(cfg: &GridConfig) -> Vec<u32> {
    let l_max = cfg.levels;
    if l_max == 1 {
        return vec![cfg.n_max.max(cfg.n_min)];
    }
    let ratio = (cfg.n_max as f64 / cfg.n_min as f64).ln();
    let mut out = Vec::with_capacity(l_max);
    for l in 0..l_max {
        let v = (cfg.n_min as f64 * (ratio * l as f64 / (l_max - 1) as f64).exp()).floor();
        out.push(v as u32);
    }
    out[0] = cfg.n_min;
    let last = l_max - 1;
    out[last] = cfg.n_max;
    for l in 1..l_max {
        if out[l] < out[l - 1] {
            out[l] = out[l - 1];
        }
    }
    out
}

/// Spatial hash h(v) = (xor_i v_i * p_i) mod T, with wrapping 64-bit products.
#[inline]
pub fn hash_index(vertex: &[u64], cfg: &GridConfig) -> usize {
    let mut acc: u64 = 0;
    for (i, &v) in vertex.iter().enumerate() {
        acc ^= v.wrapping_mul(cfg.hash_primes[i]);
    }
    (acc & (cfg.table_size as u64 - 1)) as usize
}

/// Row-major dense vertex index on an (N+1)^d lattice, x fastest.
#[inline]
pub fn dense_index(vertex: &[u64], resolution: u32) -> usize {
    let stride = resolution as usize + 1;
    let mut idx = 0usize;
    for &v in vertex.iter().rev() {
        idx = idx * stride + v as usize;
    }
    idx
}

/// Resolved storage layout for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLayout {
    pub resolution: u32,
    /// Table rows actually allocated for this level.
    pub rows: usize,
    /// DENSE: 1:1 vertex-to-row mapping. HASHED otherwise.
    pub dense: bool,
    /// Offset of this level's first scalar in the feature block.
    pub offset: usize,
}

/// A level is DENSE when its full vertex lattice fits in the table.
pub fn level_layouts(cfg: &GridConfig) -> Vec<LevelLayout> {
    let mut out = Vec::with_capacity(cfg.levels);
    let mut offset = 0usize;
    for res in level_resolutions(cfg) {
        let vertices = (res as usize + 1).pow(cfg.spatial_dim as u32);
        let dense = vertices <= cfg.table_size;
        let rows = if dense { vertices } else { cfg.table_size };
        out.push(LevelLayout {
            resolution: res,
            rows,
            dense,
            offset,
        });
        offset += rows * cfg.feature_dim;
    }
    out
}

/// Total scalar count of the feature block.
pub fn feature_len(cfg: &GridConfig) -> usize {
    level_layouts(cfg)
        .iter()
        .map(|l| l.rows * cfg.feature_dim)
        .sum()
}

#[inline]
fn table_row(vertex: &[u64], layout: &LevelLayout, cfg: &GridConfig) -> usize {
    if layout.dense {
        dense_index(vertex, layout.resolution)
    } else {
        hash_index(vertex, cfg)
    }
}

/// One interpolation corner: scalar offset of its feature row plus blend weight.
#[derive(Debug, Clone, Copy)]
pub struct Corner {
    pub param_offset: u32,
    pub weight: f64,
}

/// Per-query interpolation record, reused by the backward pass.
#[derive(Debug, Clone, Default)]
pub struct GridCache {
    /// 2^d corners per level, level-major.
    pub corners: Vec<Corner>,
}

/// Multilinear corner weights and vertex ids for `x` scaled to `resolution`.
/// `x` must lie in [0,1]^d.
fn cell_corners(
    x: &[f64],
    layout: &LevelLayout,
    cfg: &GridConfig,
    out: &mut Vec<Corner>,
) {
    let d = cfg.spatial_dim;
    let res = layout.resolution;
    let mut base = [0u64; 3];
    let mut frac = [0.0f64; 3];
    for i in 0..d {
        let pos = x[i] * res as f64;
        let b = (pos.floor() as i64).clamp(0, res as i64 - 1) as u64;
        base[i] = b;
        frac[i] = pos - b as f64;
    }
    let corners = 1usize << d;
    let mut vertex = [0u64; 3];
    for c in 0..corners {
        let mut w = 1.0f64;
        for i in 0..d {
            if c & (1 << i) != 0 {
                vertex[i] = base[i] + 1;
                w *= frac[i];
            } else {
                vertex[i] = base[i];
                w *= 1.0 - frac[i];
            }
        }
        let row = table_row(&vertex[..d], layout, cfg);
        out.push(Corner {
            param_offset: (layout.offset + row * cfg.feature_dim) as u32,
            weight: w,
        });
    }
}

/// Interpolates per-level features at `x`, concatenated coarse-to-fine.
/// `features` is the flat feature block; output has length L*F.
/// When `cache` is given, corner rows and weights are recorded for backprop.
pub fn grid_encode(
    x: &[f64],
    features: &[f64],
    cfg: &GridConfig,
    layouts: &[LevelLayout],
    enc: &mut [f64],
    mut cache: Option<&mut GridCache>,
) -> Result<()> {
    for &xi in x {
        if !(0.0..=1.0).contains(&xi) || !xi.is_finite() {
            return Err(CnfError::OutOfDomain(x.to_vec()));
        }
    }
    let f_dim = cfg.feature_dim;
    let corners = 1usize << cfg.spatial_dim;
    let mut scratch: Vec<Corner> = Vec::with_capacity(corners);
    for (l, layout) in layouts.iter().enumerate() {
        scratch.clear();
        cell_corners(x, layout, cfg, &mut scratch);
        let out = &mut enc[l * f_dim..(l + 1) * f_dim];
        out.fill(0.0);
        for corner in &scratch {
            let base = corner.param_offset as usize;
            for f in 0..f_dim {
                out[f] += corner.weight * features[base + f];
            }
        }
        if let Some(c) = cache.as_deref_mut() {
            c.corners.extend_from_slice(&scratch);
        }
    }
    Ok(())
}

/// Scatters `d_enc` (length L*F) back into feature gradients through the
/// corner records captured by `grid_encode`.
pub fn grid_encode_backward(
    cache: &GridCache,
    d_enc: &[f64],
    cfg: &GridConfig,
    grad_features: &mut Vec<(u32, f64)>,
) {
    let f_dim = cfg.feature_dim;
    let corners_per_level = 1usize << cfg.spatial_dim;
    for (i, corner) in cache.corners.iter().enumerate() {
        let level = i / corners_per_level;
        for f in 0..f_dim {
            grad_features.push((
                corner.param_offset + f as u32,
                corner.weight * d_enc[level * f_dim + f],
            ));
        }
    }
}

/// Number of hash collisions over the full vertex lattice of `resolution`:
/// total vertices minus distinct occupied rows (0 for dense levels).
pub fn collision_count(resolution: u32, cfg: &GridConfig) -> usize {
    let d = cfg.spatial_dim;
    let stride = resolution as u64 + 1;
    let total = (stride as usize).pow(d as u32);
    if total <= cfg.table_size {
        return 0;
    }
    let words = cfg.table_size / 64 + 1;
    let mut occupied = vec![0u64; words];
    let mut distinct = 0usize;
    let mut vertex = [0u64; 3];
    let mut visit = |v: &[u64]| {
        let h = hash_index(v, cfg);
        let (w, b) = (h / 64, h % 64);
        if occupied[w] & (1 << b) == 0 {
            occupied[w] |= 1 << b;
            distinct += 1;
        }
    };
    if d == 2 {
        for y in 0..stride {
            for x in 0..stride {
                vertex[0] = x;
                vertex[1] = y;
                visit(&vertex[..2]);
            }
        }
    } else {
        for z in 0..stride {
            for y in 0..stride {
                for x in 0..stride {
                    vertex[0] = x;
                    vertex[1] = y;
                    vertex[2] = z;
                    visit(&vertex[..3]);
                }
            }
        }
    }
    total - distinct
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_3d() -> GridConfig {
        GridConfig::new(16, 1 << 17, 2, 16, 512, 3).unwrap()
    }

    #[test]
    fn level_resolutions_reference_config() {
        let res = level_resolutions(&cfg_3d());
        assert_eq!(
            res,
            vec![16, 20, 25, 32, 40, 50, 64, 80, 101, 127, 161, 203, 255, 322, 406, 512]
        );
    }

    #[test]
    fn level_resolutions_degenerate() {
        let cfg = GridConfig::new(1, 1 << 10, 2, 16, 16, 3).unwrap();
        assert_eq!(level_resolutions(&cfg), vec![16]);
        let cfg = GridConfig::new(2, 1 << 10, 2, 4, 8, 3).unwrap();
        assert_eq!(level_resolutions(&cfg), vec![4, 8]);
    }

    #[test]
    fn hash_zero_vertex() {
        assert_eq!(hash_index(&[0, 0, 0], &cfg_3d()), 0);
    }

    #[test]
    fn hash_unit_vertices() {
        // independently computed: 73856093 mod 2^17 = 62557
        assert_eq!(hash_index(&[1, 0, 0], &cfg_3d()), 62557);
        // (73856093 xor 19349663) mod 2^17 = 111810
        assert_eq!(hash_index(&[1, 1, 0], &cfg_3d()), 111810);
    }

    #[test]
    fn dense_hashed_switch() {
        let cfg = GridConfig::new(4, 1 << 10, 2, 4, 16, 3).unwrap();
        let layouts = level_layouts(&cfg);
        // (4+1)^3 = 125 <= 1024 dense; (16+1)^3 = 4913 > 1024 hashed
        assert!(layouts[0].dense);
        assert!(!layouts[3].dense);
        assert_eq!(layouts[0].rows, 125);
        assert_eq!(layouts[3].rows, 1024);
    }

    #[test]
    fn encode_vertex_and_midpoint() {
        let cfg = GridConfig::new(1, 1 << 10, 1, 2, 2, 2).unwrap();
        let layouts = level_layouts(&cfg);
        // 3x3 dense lattice, one feature each: feature = dense index
        let features: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let mut enc = [0.0f64];
        // vertex (1,1) -> index 4
        grid_encode(&[0.5, 0.5], &features, &cfg, &layouts, &mut enc, None).unwrap();
        assert_eq!(enc[0], 4.0);
        // midpoint of edge between (0,0)=0 and (1,0)=1 -> 0.5
        grid_encode(&[0.25, 0.0], &features, &cfg, &layouts, &mut enc, None).unwrap();
        assert_eq!(enc[0], 0.5);
    }

    #[test]
    fn encode_zero_table() {
        let cfg = GridConfig::new(3, 1 << 8, 2, 2, 8, 2).unwrap();
        let layouts = level_layouts(&cfg);
        let features = vec![0.0; feature_len(&cfg)];
        let mut enc = vec![1.0; 6];
        grid_encode(&[0.3, 0.7], &features, &cfg, &layouts, &mut enc, None).unwrap();
        assert!(enc.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn encode_out_of_domain() {
        let cfg = GridConfig::new(1, 1 << 8, 1, 2, 2, 2).unwrap();
        let layouts = level_layouts(&cfg);
        let features = vec![0.0; feature_len(&cfg)];
        let mut enc = [0.0];
        assert!(grid_encode(&[1.5, 0.0], &features, &cfg, &layouts, &mut enc, None).is_err());
    }

    #[test]
    fn weights_sum_to_one_on_rational_points() {
        let cfg = GridConfig::new(1, 1 << 6, 1, 4, 4, 3).unwrap();
        let layouts = level_layouts(&cfg);
        for x in [[0.125, 0.5, 0.75], [0.0, 0.25, 0.0625], [1.0, 0.5, 0.3125]] {
            let mut out = Vec::new();
            cell_corners(&x, &layouts[0], &cfg, &mut out);
            let sum: f64 = out.iter().map(|c| c.weight).sum();
            assert_eq!(sum, 1.0, "exact sum at {:?}", x);
            assert!(out.iter().all(|c| c.weight >= 0.0));
        }
    }

    #[test]
    fn boundary_continuity() {
        let cfg = GridConfig::new(2, 1 << 12, 2, 4, 8, 2).unwrap();
        let layouts = level_layouts(&cfg);
        let features: Vec<f64> = (0..feature_len(&cfg)).map(|i| (i as f64).sin()).collect();
        // cell boundary of the coarse level at x = 0.25
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        grid_encode(&[0.25, 0.4], &features, &cfg, &layouts, &mut a, None).unwrap();
        grid_encode(&[0.25f64.next_down(), 0.4], &features, &cfg, &layouts, &mut b, None).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn collisions_grow_as_table_shrinks() {
        let big = GridConfig::new(1, 1 << 17, 2, 64, 64, 3).unwrap();
        let small = GridConfig::new(1, 1 << 10, 2, 64, 64, 3).unwrap();
        let c_big = collision_count(64, &big);
        let c_small = collision_count(64, &small);
        assert!(c_small > c_big);
    }
}
