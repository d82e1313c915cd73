//! Sinusoidal positional encoding for coordinates and view directions.

/// Output length of `freq_encode` for `dim` input dimensions.
pub fn freq_encode_len(dim: usize, n_freq: usize) -> usize {
    2 * n_freq * dim
}

/// Concatenation of (sin(2^k pi x_i), cos(2^k pi x_i)) for k = 0..n_freq-1,
/// dimension-major: all frequencies of x_0 first.
pub fn freq_encode(x: &[f64], n_freq: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), freq_encode_len(x.len(), n_freq));
    let mut j = 0;
    for &xi in x {
        let mut arg = std::f64::consts::PI * xi;
        for _ in 0..n_freq {
            out[j] = arg.sin();
            out[j + 1] = arg.cos();
            j += 2;
            arg *= 2.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input() {
        let mut out = vec![9.0; freq_encode_len(3, 4)];
        freq_encode(&[0.0, 0.0, 0.0], 4, &mut out);
        for pair in out.chunks(2) {
            assert_eq!(pair[0], 0.0);
            assert_eq!(pair[1], 1.0);
        }
    }

    #[test]
    fn zero_frequencies() {
        assert_eq!(freq_encode_len(3, 0), 0);
        let mut out: Vec<f64> = vec![];
        freq_encode(&[0.3, 0.4, 0.5], 0, &mut out);
    }

    #[test]
    fn half_input_first_band() {
        let mut out = vec![0.0; freq_encode_len(1, 1)];
        freq_encode(&[0.5], 1, &mut out);
        assert!((out[0] - 1.0).abs() < 1e-15); // sin(pi/2)
        assert!(out[1].abs() < 1e-15); // cos(pi/2)
    }
}
