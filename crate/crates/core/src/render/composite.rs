//! Alpha compositing of field samples along a ray (volume rendering) and
//! its exact reverse-mode derivative.

use crate::error::{CnfError, Result};

/// Field outputs along one ray, ordered by depth.
#[derive(Debug, Clone, Default)]
pub struct SampleSet {
    pub sigma: Vec<f64>,
    pub delta: Vec<f64>,
    pub color: Vec<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct CompositeResult {
    pub rgb: [f64; 3],
    pub opacity: f64,
    /// Per-sample contribution weights w_i = T_i (1 - exp(-sigma_i delta_i)).
    pub weights: Vec<f64>,
}

/// C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i, T_i = exp(-sum_{j<i} sigma_j delta_j).
pub fn composite(samples: &SampleSet) -> Result<CompositeResult> {
    let n = samples.sigma.len();
    debug_assert_eq!(samples.delta.len(), n);
    debug_assert_eq!(samples.color.len(), n);
    let mut rgb = [0.0f64; 3];
    let mut weights = Vec::with_capacity(n);
    let mut transmittance = 1.0f64;
    let mut opacity = 0.0f64;
    for i in 0..n {
        let s = samples.sigma[i];
        let d = samples.delta[i];
        if !s.is_finite() || !d.is_finite() || samples.color[i].iter().any(|c| !c.is_finite()) {
            return Err(CnfError::NonFinite {
                context: format!("composite sample {i}"),
                index: None,
            });
        }
        let alpha = 1.0 - (-s * d).exp();
        let w = transmittance * alpha;
        for ch in 0..3 {
            rgb[ch] += w * samples.color[i][ch];
        }
        opacity += w;
        weights.push(w);
        transmittance *= 1.0 - alpha;
    }
    Ok(CompositeResult { rgb, opacity, weights })
}

/// Gradients of a scalar loss w.r.t. per-sample sigma and color, given
/// d_rgb = dL/dC. Uses the forward pass's weights.
pub fn composite_backward(
    samples: &SampleSet,
    result: &CompositeResult,
    d_rgb: &[f64; 3],
) -> (Vec<f64>, Vec<[f64; 3]>) {
    let n = samples.sigma.len();
    let mut d_sigma = vec![0.0f64; n];
    let mut d_color = vec![[0.0f64; 3]; n];
    // dot of each sample color with the upstream gradient
    let dots: Vec<f64> = samples
        .color
        .iter()
        .map(|c| c[0] * d_rgb[0] + c[1] * d_rgb[1] + c[2] * d_rgb[2])
        .collect();
    // suffix sums of w_j * (c_j . g) for j > i
    let mut suffix = 0.0f64;
    let mut suffixes = vec![0.0f64; n];
    for i in (0..n).rev() {
        suffixes[i] = suffix;
        suffix += result.weights[i] * dots[i];
    }
    // running transmittance to recover T_i (1 - alpha_i) = T_{i+1}
    let mut transmittance = 1.0f64;
    for i in 0..n {
        let alpha_complement = (-samples.sigma[i] * samples.delta[i]).exp();
        let t_next = transmittance * alpha_complement;
        d_sigma[i] = samples.delta[i] * (t_next * dots[i] - suffixes[i]);
        for ch in 0..3 {
            d_color[i][ch] = result.weights[i] * d_rgb[ch];
        }
        transmittance = t_next;
    }
    (d_sigma, d_color)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct term-by-term evaluation of the rendering sum, independent of
    /// the incremental production path.
    pub fn composite_oracle(samples: &SampleSet) -> [f64; 3] {
        let n = samples.sigma.len();
        let mut rgb = [0.0f64; 3];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..i {
                acc += samples.sigma[j] * samples.delta[j];
            }
            let t_i = (-acc).exp();
            let w = t_i * (1.0 - (-samples.sigma[i] * samples.delta[i]).exp());
            for ch in 0..3 {
                rgb[ch] += w * samples.color[i][ch];
            }
        }
        rgb
    }

    #[test]
    fn zero_density_is_black() {
        let s = SampleSet {
            sigma: vec![0.0; 5],
            delta: vec![0.2; 5],
            color: vec![[1.0, 0.5, 0.3]; 5],
        };
        let r = composite(&s).unwrap();
        assert_eq!(r.rgb, [0.0, 0.0, 0.0]);
        assert_eq!(r.opacity, 0.0);
    }

    #[test]
    fn two_sample_hand_example() {
        // sigma*delta = ln 2 per sample -> w = (0.5, 0.25)
        let ln2 = std::f64::consts::LN_2;
        let s = SampleSet {
            sigma: vec![ln2, ln2],
            delta: vec![1.0, 1.0],
            color: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        };
        let r = composite(&s).unwrap();
        assert!((r.weights[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[1] - 0.25).abs() < 1e-15);
        assert!((r.rgb[0] - 0.5).abs() < 1e-15);
        assert!((r.rgb[1] - 0.25).abs() < 1e-15);
        assert_eq!(r.rgb[2], 0.0);
    }

    #[test]
    fn matches_brute_force_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..32);
            let s = SampleSet {
                sigma: (0..n).map(|_| rng.gen_range(0.0..5.0)).collect(),
                delta: (0..n).map(|_| rng.gen_range(0.0..0.3)).collect(),
                color: (0..n)
                    .map(|_| [rng.gen(), rng.gen(), rng.gen()])
                    .collect(),
            };
            let r = composite(&s).unwrap();
            let o = composite_oracle(&s);
            for ch in 0..3 {
                assert!((r.rgb[ch] - o[ch]).abs() <= 1e-12 * (1.0 + o[ch].abs()));
            }
            // invariants
            let wsum: f64 = r.weights.iter().sum();
            assert!(wsum <= 1.0 + 1e-12);
            assert!(r.weights.iter().all(|w| (0.0..=1.0).contains(w)));
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 6;
        let mut s = SampleSet {
            sigma: (0..n).map(|_| rng.gen_range(0.1..3.0)).collect(),
            delta: (0..n).map(|_| rng.gen_range(0.05..0.3)).collect(),
            color: (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect(),
        };
        let g = [0.3, -0.7, 1.1];
        let loss = |s: &SampleSet| {
            let r = composite(s).unwrap();
            r.rgb[0] * g[0] + r.rgb[1] * g[1] + r.rgb[2] * g[2]
        };
        let r = composite(&s).unwrap();
        let (d_sigma, d_color) = composite_backward(&s, &r, &g);
        let h = 1e-6;
        for i in 0..n {
            let orig = s.sigma[i];
            s.sigma[i] = orig + h;
            let hi = loss(&s);
            s.sigma[i] = orig - h;
            let lo = loss(&s);
            s.sigma[i] = orig;
            let fd = (hi - lo) / (2.0 * h);
            assert!((fd - d_sigma[i]).abs() < 1e-7, "sigma {i}: {fd} vs {}", d_sigma[i]);
            for ch in 0..3 {
                let orig = s.color[i][ch];
                s.color[i][ch] = orig + h;
                let hi = loss(&s);
                s.color[i][ch] = orig - h;
                let lo = loss(&s);
                s.color[i][ch] = orig;
                let fd = (hi - lo) / (2.0 * h);
                assert!((fd - d_color[i][ch]).abs() < 1e-7);
            }
        }
    }
}
