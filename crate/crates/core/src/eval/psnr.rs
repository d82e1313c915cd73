//! Peak signal-to-noise ratio.

use crate::error::{CnfError, Result};

/// Sentinel reported when MSE is exactly zero.
pub const PSNR_MAX_DB: f64 = 99.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    pub db: f64,
    /// True when MSE was zero and the MAX sentinel was substituted.
    pub max_flag: bool,
}

/// 10 log10(1 / MSE) over all pixels and channels, values in [0,1].
pub fn psnr(pred: &[[f64; 3]], gt: &[[f64; 3]]) -> Result<Psnr> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(CnfError::usage(format!(
            "psnr: dimension mismatch ({} vs {})",
            pred.len(),
            gt.len()
        )));
    }
    let mut acc = 0.0f64;
    for (p, g) in pred.iter().zip(gt) {
        for ch in 0..3 {
            let d = p[ch] - g[ch];
            acc += d * d;
        }
    }
    let mse = acc / (pred.len() * 3) as f64;
    if mse == 0.0 {
        return Ok(Psnr {
            db: PSNR_MAX_DB,
            max_flag: true,
        });
    }
    Ok(Psnr {
        db: (10.0 * (1.0 / mse).log10()).min(PSNR_MAX_DB),
        max_flag: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_images_hit_sentinel() {
        let img = vec![[0.3, 0.5, 0.7]; 10];
        let p = psnr(&img, &img).unwrap();
        assert_eq!(p.db, PSNR_MAX_DB);
        assert!(p.max_flag);
    }

    #[test]
    fn unit_mse_is_zero_db() {
        let white = vec![[1.0; 3]; 4];
        let black = vec![[0.0; 3]; 4];
        let p = psnr(&white, &black).unwrap();
        assert_eq!(p.db, 0.0);
    }

    #[test]
    fn mse_hundredth_is_twenty_db() {
        let a = vec![[0.1, 0.1, 0.1]; 8];
        let b = vec![[0.0, 0.0, 0.0]; 8];
        let p = psnr(&a, &b).unwrap();
        assert!((p.db - 20.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric() {
        let a = vec![[0.2, 0.9, 0.4]; 5];
        let b = vec![[0.7, 0.1, 0.5]; 5];
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn mismatch_is_error() {
        let a = vec![[0.0; 3]; 4];
        let b = vec![[0.0; 3]; 5];
        assert!(psnr(&a, &b).is_err());
    }
}
