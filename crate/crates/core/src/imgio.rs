//! Float RGB images and their on-disk forms: 8-bit PNG and NPY float32.

use std::io::Write;
use std::path::Path;

use crate::error::{CnfError, Result};

/// Row-major RGB image with values in [0,1], top-left origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageF {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f64; 3]>,
}

impl ImageF {
    pub fn new(width: u32, height: u32, pixels: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(pixels.len(), (width * height) as usize);
        ImageF {
            width,
            height,
            pixels,
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f64; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            for ch in p {
                buf.push((ch.clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        let img = image::RgbImage::from_raw(self.width, self.height, buf)
            .expect("buffer size matches dimensions");
        img.save(path)
            .map_err(|e| CnfError::data(format!("png write {}: {e}", path.display())))
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|e| CnfError::data(format!("png read {}: {e}", path.display())))?
            .to_rgb8();
        let (width, height) = img.dimensions();
        let pixels = img
            .pixels()
            .map(|p| [
                p[0] as f64 / 255.0,
                p[1] as f64 / 255.0,
                p[2] as f64 / 255.0,
            ])
            .collect();
        Ok(ImageF {
            width,
            height,
            pixels,
        })
    }

    /// NPY v1.0 file with dtype <f4 and shape (height, width, 3).
    pub fn save_npy(&self, path: &Path) -> Result<()> {
        let dict = format!(
            "{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}, 3), }}",
            self.height, self.width
        );
        let unpadded = 10 + dict.len() + 1;
        let pad = (64 - unpadded % 64) % 64;
        let mut header = dict.into_bytes();
        header.extend(std::iter::repeat(b' ').take(pad));
        header.push(b'\n');
        let mut f = std::fs::File::create(path).map_err(|e| CnfError::io(path, e))?;
        let mut out = Vec::new();
        out.extend_from_slice(b"\x93NUMPY\x01\x00");
        out.extend_from_slice(&(header.len() as u16).to_le_bytes());
        out.extend_from_slice(&header);
        for p in &self.pixels {
            for ch in p {
                out.extend_from_slice(&(*ch as f32).to_le_bytes());
            }
        }
        f.write_all(&out).map_err(|e| CnfError::io(path, e))
    }
}
