//! Posed-image dataset manifests, schema "cnf-manifest/1".
//!
//! Layout on disk: `scene/{manifest.json, images/}`. Each frame carries its
//! image path and a pose, either as 6 scalars (translation + rodrigues
//! rotation vector) or a 3x4 camera-to-world matrix.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};
use crate::imgio::ImageF;
use crate::render::{Camera, Intrinsics, SceneBox};

pub const MANIFEST_SCHEMA: &str = "cnf-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameEntry {
    pub image: String,
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose6: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 4]; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub schema: String,
    pub intrinsics: Intrinsics,
    pub aabb: SceneBox,
    pub frames: Vec<FrameEntry>,
}

/// Validated manifest with cameras resolved and the dataset root recorded.
#[derive(Debug, Clone)]
pub struct SceneManifest {
    pub root: PathBuf,
    pub intrinsics: Intrinsics,
    pub aabb: SceneBox,
    pub cameras: Vec<Camera>,
    pub image_paths: Vec<PathBuf>,
}

impl SceneManifest {
    pub fn n_frames(&self) -> usize {
        self.cameras.len()
    }

    pub fn load_images(&self) -> Result<Vec<ImageF>> {
        let expect = (self.intrinsics.width, self.intrinsics.height);
        self.image_paths
            .iter()
            .map(|p| {
                let img = ImageF::load_png(p)?;
                if (img.width, img.height) != expect {
                    return Err(CnfError::data(format!(
                        "image {} is {}x{}, manifest says {}x{}",
                        p.display(),
                        img.width,
                        img.height,
                        expect.0,
                        expect.1
                    )));
                }
                Ok(img)
            })
            .collect()
    }
}

/// Accepts either the scene directory or the manifest file itself.
pub fn load_manifest(path: &Path) -> Result<SceneManifest> {
    let (root, file) = if path.is_dir() {
        (path.to_path_buf(), path.join(MANIFEST_FILE))
    } else {
        (
            path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            path.to_path_buf(),
        )
    };
    let text = std::fs::read_to_string(&file).map_err(|e| CnfError::io(&file, e))?;
    let parsed: ManifestFile = serde_json::from_str(&text)
        .map_err(|e| CnfError::data(format!("manifest {}: {e}", file.display())))?;
    if parsed.schema != MANIFEST_SCHEMA {
        return Err(CnfError::data(format!(
            "manifest schema {:?}, expected {MANIFEST_SCHEMA:?}",
            parsed.schema
        )));
    }
    parsed.intrinsics.validate()?;
    parsed.aabb.validate()?;
    if parsed.frames.is_empty() {
        return Err(CnfError::data("manifest: no frames"));
    }
    let ordered = parsed.frames.windows(2).all(|w| w[0].index < w[1].index);
    if !ordered {
        return Err(CnfError::data("manifest: frames not ordered by capture index"));
    }
    let mut cameras = Vec::with_capacity(parsed.frames.len());
    let mut image_paths = Vec::with_capacity(parsed.frames.len());
    for frame in &parsed.frames {
        let cam = match (&frame.pose6, &frame.matrix) {
            (Some(p), _) => Camera::from_pose6(parsed.intrinsics, p)?,
            (None, Some(m)) => Camera::from_matrix3x4(parsed.intrinsics, m)?,
            (None, None) => {
                return Err(CnfError::data(format!(
                    "manifest: frame {} has neither pose6 nor matrix",
                    frame.index
                )))
            }
        };
        let img_path = root.join(&frame.image);
        if !img_path.exists() {
            return Err(CnfError::data(format!(
                "manifest: frame {} image missing: {}",
                frame.index,
                img_path.display()
            )));
        }
        cameras.push(cam);
        image_paths.push(img_path);
    }
    Ok(SceneManifest {
        root,
        intrinsics: parsed.intrinsics,
        aabb: parsed.aabb,
        cameras,
        image_paths,
    })
}

pub fn save_manifest(file: &ManifestFile, root: &Path) -> Result<()> {
    let path = root.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(file)
        .map_err(|e| CnfError::data(format!("manifest encode: {e}")))?;
    std::fs::write(&path, text).map_err(|e| CnfError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn intr() -> Intrinsics {
        Intrinsics {
            fx: 50.0,
            fy: 50.0,
            cx: 16.0,
            cy: 16.0,
            width: 32,
            height: 32,
        }
    }

    fn write_scene(dir: &Path, frames: Vec<FrameEntry>) {
        std::fs::create_dir_all(dir.join("images")).unwrap();
        for f in &frames {
            ImageF::new(32, 32, vec![[0.5; 3]; 32 * 32])
                .save_png(&dir.join(&f.image))
                .unwrap();
        }
        let m = ManifestFile {
            schema: MANIFEST_SCHEMA.into(),
            intrinsics: intr(),
            aabb: SceneBox {
                min: [-1.0; 3],
                max: [1.0; 3],
            },
            frames,
        };
        save_manifest(&m, dir).unwrap();
    }

    #[test]
    fn minimal_two_frame_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_scene(
            dir.path(),
            vec![
                FrameEntry {
                    image: "images/a.png".into(),
                    index: 0,
                    pose6: Some([0.0, 0.0, 2.0, 0.0, 0.0, 0.0]),
                    matrix: None,
                },
                FrameEntry {
                    image: "images/b.png".into(),
                    index: 1,
                    pose6: Some([0.5, 0.0, 2.0, 0.0, 0.1, 0.0]),
                    matrix: None,
                },
            ],
        );
        let m = load_manifest(dir.path()).unwrap();
        assert_eq!(m.n_frames(), 2);
        assert_eq!(m.intrinsics, intr());
    }

    #[test]
    fn pose6_and_matrix_agree() {
        let cam = Camera::look_at(
            intr(),
            Vector3::new(1.2, 0.7, 2.0),
            Vector3::new(0.0, 0.0, 0.0),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_scene(
            dir.path(),
            vec![
                FrameEntry {
                    image: "images/a.png".into(),
                    index: 0,
                    pose6: Some(cam.to_pose6()),
                    matrix: None,
                },
                FrameEntry {
                    image: "images/b.png".into(),
                    index: 1,
                    pose6: None,
                    matrix: Some(cam.to_matrix3x4()),
                },
            ],
        );
        let m = load_manifest(dir.path()).unwrap();
        for (px, py) in [(3.0, 7.0), (30.0, 20.0)] {
            let a = m.cameras[0].pixel_ray(px, py);
            let b = m.cameras[1].pixel_ray(px, py);
            assert!((a.dir - b.dir).norm() < 1e-9);
            assert!((a.origin - b.origin).norm() < 1e-9);
        }
    }

    #[test]
    fn missing_image_names_the_frame() {
        let dir = tempfile::tempdir().unwrap();
        write_scene(
            dir.path(),
            vec![FrameEntry {
                image: "images/a.png".into(),
                index: 0,
                pose6: Some([0.0; 6]),
                matrix: None,
            }],
        );
        std::fs::remove_file(dir.path().join("images/a.png")).unwrap();
        let err = load_manifest(dir.path()).unwrap_err();
        assert!(err.to_string().contains("frame 0"));
    }
}
