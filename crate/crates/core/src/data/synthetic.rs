//! Procedural desk-scale 3D scenes: colored primitives rendered along an
//! orbit trajectory through the same compositing path the trainer uses.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::data::manifest::{save_manifest, FrameEntry, ManifestFile, SceneManifest, MANIFEST_SCHEMA};
use crate::error::Result;
use crate::imgio::ImageF;
use crate::render::{render_image, Camera, Intrinsics, QueryField, RenderSettings, SceneBox};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Shape {
    Sphere { center: [f64; 3], radius: f64 },
    Box { center: [f64; 3], half: [f64; 3] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    pub color: [f64; 3],
    pub density: f64,
}

/// World-space procedural density/color field over a scene box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcScene {
    pub aabb: SceneBox,
    pub primitives: Vec<Primitive>,
    /// Width of the soft density edge at primitive boundaries.
    pub edge: f64,
}

impl ProcScene {
    /// Three colored primitives inside [-1,1]^3.
    pub fn default_three() -> Self {
        ProcScene {
            aabb: SceneBox {
                min: [-1.0; 3],
                max: [1.0; 3],
            },
            primitives: vec![
                Primitive {
                    shape: Shape::Sphere {
                        center: [-0.45, 0.0, 0.05],
                        radius: 0.38,
                    },
                    color: [0.9, 0.15, 0.1],
                    density: 30.0,
                },
                Primitive {
                    shape: Shape::Box {
                        center: [0.45, -0.25, 0.3],
                        half: [0.3, 0.25, 0.25],
                    },
                    color: [0.1, 0.8, 0.2],
                    density: 30.0,
                },
                Primitive {
                    shape: Shape::Sphere {
                        center: [0.1, 0.45, -0.4],
                        radius: 0.3,
                    },
                    color: [0.15, 0.25, 0.95],
                    density: 30.0,
                },
            ],
            edge: 0.04,
        }
    }

    /// A ring of n distinctly colored primitives around the origin, meant
    /// to be scanned by outward-looking cameras so different trajectory
    /// segments observe disjoint content.
    pub fn ring(n: usize) -> Self {
        let mut primitives = Vec::with_capacity(n);
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let center = [
                0.85 * th.cos(),
                0.12 * ((k % 3) as f64 - 1.0),
                0.85 * th.sin(),
            ];
            let color = [
                0.5 + 0.45 * th.cos(),
                0.5 + 0.45 * (th - 2.094).cos(),
                0.5 + 0.45 * (th + 2.094).cos(),
            ];
            let shape = if k % 2 == 0 {
                Shape::Sphere {
                    center,
                    radius: 0.16 + 0.04 * ((k % 4) as f64 / 3.0),
                }
            } else {
                Shape::Box {
                    center,
                    half: [0.14, 0.17, 0.14],
                }
            };
            primitives.push(Primitive {
                shape,
                color,
                density: 30.0,
            });
        }
        ProcScene {
            aabb: SceneBox {
                min: [-1.2; 3],
                max: [1.2; 3],
            },
            primitives,
            edge: 0.04,
        }
    }

    pub fn single_sphere(radius: f64, density: f64) -> Self {
        ProcScene {
            aabb: SceneBox {
                min: [-1.0; 3],
                max: [1.0; 3],
            },
            primitives: vec![Primitive {
                shape: Shape::Sphere {
                    center: [0.0; 3],
                    radius,
                },
                color: [1.0, 1.0, 1.0],
                density,
            }],
            edge: 0.005,
        }
    }

    /// Signed distance to the primitive surface (negative inside).
    fn signed_distance(shape: &Shape, p: &Vector3<f64>) -> f64 {
        match shape {
            Shape::Sphere { center, radius } => {
                (p - Vector3::from(*center)).norm() - radius
            }
            Shape::Box { center, half } => {
                let q = p - Vector3::from(*center);
                let mut outside = 0.0f64;
                let mut inside = f64::NEG_INFINITY;
                for i in 0..3 {
                    let d = q[i].abs() - half[i];
                    if d > 0.0 {
                        outside += d * d;
                    }
                    inside = inside.max(d);
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    inside
                }
            }
        }
    }
}

impl QueryField for ProcScene {
    fn query(&self, x: &[f64], _dir: Option<&[f64; 3]>) -> Result<(f64, [f64; 3])> {
        // x arrives in the unit domain; map back to world
        let p = Vector3::new(
            self.aabb.min[0] + x[0] * (self.aabb.max[0] - self.aabb.min[0]),
            self.aabb.min[1] + x[1] * (self.aabb.max[1] - self.aabb.min[1]),
            self.aabb.min[2] + x[2] * (self.aabb.max[2] - self.aabb.min[2]),
        );
        let mut sigma = 0.0;
        let mut color = [0.0f64; 3];
        for prim in &self.primitives {
            let d = Self::signed_distance(&prim.shape, &p);
            // 1 deep inside, 0 outside, linear ramp across the edge band
            let occ = (0.5 - d / self.edge).clamp(0.0, 1.0);
            let s = prim.density * occ;
            if s > sigma {
                sigma = s;
                color = prim.color;
            }
        }
        Ok((sigma, color))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_frames: usize,
    pub resolution: u32,
    pub orbit_radius: f64,
    pub elevation: f64,
    /// Samples per ray for ground-truth rendering.
    pub n_samples: usize,
    /// Cameras look away from the origin (room-scan style) instead of at it.
    pub look_outward: bool,
    /// Amplitude of deterministic sensor grain added to the images.
    pub grain: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_frames: 40,
            resolution: 128,
            orbit_radius: 2.8,
            elevation: 0.6,
            n_samples: 256,
            look_outward: false,
            grain: 0.0,
            seed: 0,
        }
    }
}

pub fn orbit_intrinsics(resolution: u32) -> Intrinsics {
    let r = resolution as f64;
    Intrinsics {
        fx: r * 0.8,
        fy: r * 0.8,
        cx: r / 2.0,
        cy: r / 2.0,
        width: resolution,
        height: resolution,
    }
}

/// Cameras on a full orbit around the origin, looking inward at it or
/// outward away from it.
pub fn orbit_cameras(spec: &SyntheticSpec) -> Result<Vec<Camera>> {
    let intr = orbit_intrinsics(spec.resolution);
    (0..spec.n_frames)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / spec.n_frames as f64;
            let eye = Vector3::new(
                spec.orbit_radius * theta.cos(),
                spec.elevation,
                spec.orbit_radius * theta.sin(),
            );
            let target = if spec.look_outward {
                Vector3::new(theta.cos(), spec.elevation, theta.sin())
            } else {
                Vector3::zeros()
            };
            Camera::look_at(intr, eye, target)
        })
        .collect()
}

/// Renders the procedural scene along the orbit and writes
/// `out/{manifest.json, images/frame_NNN.png}`. Deterministic per spec.
pub fn make_synthetic(scene: &ProcScene, spec: &SyntheticSpec, out: &Path) -> Result<SceneManifest> {
    let images_dir = out.join("images");
    std::fs::create_dir_all(&images_dir).map_err(|e| crate::error::CnfError::io(&images_dir, e))?;
    let cameras = orbit_cameras(spec)?;
    let settings = RenderSettings {
        n_samples: spec.n_samples,
        jitter: false,
        background: [0.0; 3],
    };
    let mut frames = Vec::with_capacity(cameras.len());
    for (k, cam) in cameras.iter().enumerate() {
        let mut pixels = render_image(scene, cam, &scene.aabb, &settings, spec.seed)?;
        if spec.grain > 0.0 {
            for (i, p) in pixels.iter_mut().enumerate() {
                let (x, y) = (i as u32 % spec.resolution, i as u32 / spec.resolution);
                for ch in 0..3 {
                    // frame index folded into the channel lane keeps the
                    // grain independent across frames
                    p[ch] = (p[ch]
                        + crate::data::image2d::grain(x, y, ch as u32 + 3 * k as u32, spec.grain))
                    .clamp(0.0, 1.0);
                }
            }
        }
        let img = ImageF::new(spec.resolution, spec.resolution, pixels);
        let rel = format!("images/frame_{k:03}.png");
        img.save_png(&out.join(&rel))?;
        frames.push(FrameEntry {
            image: rel,
            index: k,
            pose6: Some(cam.to_pose6()),
            matrix: None,
        });
    }
    let file = ManifestFile {
        schema: MANIFEST_SCHEMA.into(),
        intrinsics: orbit_intrinsics(spec.resolution),
        aabb: scene.aabb,
        frames,
    };
    save_manifest(&file, out)?;
    crate::data::manifest::load_manifest(out)
}
