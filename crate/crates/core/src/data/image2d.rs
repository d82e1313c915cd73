//! 2D image-field benchmarks: a single image partitioned into pixel tasks,
//! plus a deterministic procedural test image.

use serde::{Deserialize, Serialize};

use crate::data::partition::partition_balanced;
use crate::error::Result;
use crate::imgio::ImageF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Task i owns a contiguous band of pixel columns.
    VerticalStrips,
    /// Pixels flattened row-major, split into contiguous chunks.
    SequentialPatches,
}

/// Per-task pixel lists covering the image disjointly.
pub fn split_pixels(
    width: u32,
    height: u32,
    n_tasks: usize,
    mode: SplitMode,
) -> Result<Vec<Vec<(u32, u32)>>> {
    match mode {
        SplitMode::VerticalStrips => {
            let cols = partition_balanced(width as usize, n_tasks)?;
            Ok(cols
                .into_iter()
                .map(|r| {
                    let mut px = Vec::with_capacity(r.len() * height as usize);
                    for y in 0..height {
                        for x in r.clone() {
                            px.push((x as u32, y));
                        }
                    }
                    px
                })
                .collect())
        }
        SplitMode::SequentialPatches => {
            let chunks = partition_balanced((width * height) as usize, n_tasks)?;
            Ok(chunks
                .into_iter()
                .map(|r| {
                    r.map(|i| ((i as u32) % width, (i as u32) / width)).collect()
                })
                .collect())
        }
    }
}

/// Deterministic per-pixel grain, uniform in [-a, a] per channel.
/// Emulates the sensor-noise floor of a photographed target.
pub(crate) fn grain(x: u32, y: u32, ch: u32, amplitude: f64) -> f64 {
    let mut z = (x as u64) << 40 | (y as u64) << 16 | ch as u64;
    z = z.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    amplitude * (2.0 * (z as f64 / u64::MAX as f64) - 1.0)
}

const GRAIN_AMPLITUDE: f64 = 0.03;

/// Deterministic colorful test image: smooth color ramps, disks, stripe
/// bands and fine grain, so every strip carries both low- and
/// high-frequency content.
pub fn synthetic_image2d(width: u32, height: u32) -> ImageF {
    let mut pixels = Vec::with_capacity((width * height) as usize);
    let w = width as f64;
    let h = height as f64;
    for yi in 0..height {
        for xi in 0..width {
            let x = (xi as f64 + 0.5) / w;
            let y = (yi as f64 + 0.5) / h;
            let mut r = 0.35 + 0.3 * (2.0 * std::f64::consts::PI * x).sin() * y;
            let mut g = 0.5 + 0.4 * (3.0 * std::f64::consts::PI * (x + y)).cos() * (1.0 - y);
            let mut b = 0.4 + 0.5 * x * y;
            // disks
            for (cx, cy, rad, col) in [
                (0.25, 0.3, 0.12, [0.95, 0.2, 0.1]),
                (0.7, 0.6, 0.18, [0.1, 0.7, 0.9]),
                (0.5, 0.85, 0.08, [0.9, 0.9, 0.1]),
            ] {
                let d = ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt();
                if d < rad {
                    let t = 1.0 - (d / rad) * (d / rad);
                    r = r * (1.0 - t) + col[0] * t;
                    g = g * (1.0 - t) + col[1] * t;
                    b = b * (1.0 - t) + col[2] * t;
                }
            }
            // high-frequency stripes in a band
            if (0.4..0.5).contains(&y) {
                let s = 0.5 + 0.5 * (40.0 * std::f64::consts::PI * x).sin();
                r = 0.7 * r + 0.3 * s;
                g = 0.7 * g + 0.3 * s;
                b = 0.7 * b + 0.3 * (1.0 - s);
            }
            r += grain(xi, yi, 0, GRAIN_AMPLITUDE);
            g += grain(xi, yi, 1, GRAIN_AMPLITUDE);
            b += grain(xi, yi, 2, GRAIN_AMPLITUDE);
            pixels.push([r.clamp(0.0, 1.0), g.clamp(0.0, 1.0), b.clamp(0.0, 1.0)]);
        }
    }
    ImageF::new(width, height, pixels)
}
