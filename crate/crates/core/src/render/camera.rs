//! Pinhole camera: right-handed, looking down -z. Pose maps camera to
//! world and round-trips through the 6-scalar (t, rodrigues) form.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn validate(&self) -> Result<()> {
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(CnfError::data("intrinsics: fx and fy must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(CnfError::data("intrinsics: zero image dimensions"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    /// Camera-to-world rotation.
    pub rotation: Rotation3<f64>,
    /// Camera center in world coordinates.
    pub translation: Vector3<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub dir: Vector3<f64>,
    pub t_near: f64,
    pub t_far: f64,
}

impl Camera {
    pub fn new(intrinsics: Intrinsics, rotation: Rotation3<f64>, translation: Vector3<f64>) -> Result<Self> {
        intrinsics.validate()?;
        Ok(Camera {
            intrinsics,
            rotation,
            translation,
        })
    }

    /// Builds a camera from a 3x4 camera-to-world matrix, re-orthonormalizing
    /// the rotation part. Rejects matrices that are not close to rigid.
    pub fn from_matrix3x4(intrinsics: Intrinsics, m: &[[f64; 4]; 3]) -> Result<Self> {
        let r = Matrix3::new(
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        );
        let gram = r.transpose() * r;
        let dev = (gram - Matrix3::identity()).abs().max();
        if dev > 1e-3 {
            return Err(CnfError::data(format!(
                "camera: rotation part not orthonormal (deviation {dev:.2e})"
            )));
        }
        let rotation = Rotation3::from_matrix(&r);
        let translation = Vector3::new(m[0][3], m[1][3], m[2][3]);
        Camera::new(intrinsics, rotation, translation)
    }

    pub fn to_matrix3x4(&self) -> [[f64; 4]; 3] {
        let r = self.rotation.matrix();
        let t = self.translation;
        [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)], t[0]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)], t[1]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)], t[2]],
        ]
    }

    /// (t_x, t_y, t_z, r_x, r_y, r_z) with r a Rodrigues rotation vector.
    pub fn to_pose6(&self) -> [f64; 6] {
        let axis = self.rotation.scaled_axis();
        [
            self.translation[0],
            self.translation[1],
            self.translation[2],
            axis[0],
            axis[1],
            axis[2],
        ]
    }

    pub fn from_pose6(intrinsics: Intrinsics, pose: &[f64; 6]) -> Result<Self> {
        let rotation = Rotation3::from_scaled_axis(Vector3::new(pose[3], pose[4], pose[5]));
        Camera::new(intrinsics, rotation, Vector3::new(pose[0], pose[1], pose[2]))
    }

    /// Camera at `eye` looking at `target`, world up (0,1,0).
    pub fn look_at(intrinsics: Intrinsics, eye: Vector3<f64>, target: Vector3<f64>) -> Result<Self> {
        let forward = (target - eye).normalize();
        let world_up = Vector3::new(0.0, 1.0, 0.0);
        let mut right = forward.cross(&world_up);
        if right.norm() < 1e-9 {
            right = Vector3::new(1.0, 0.0, 0.0);
        } else {
            right = right.normalize();
        }
        let up = right.cross(&forward);
        // columns: camera x -> right, y -> up, z -> -forward
        let m = Matrix3::from_columns(&[right, up, -forward]);
        Camera::new(intrinsics, Rotation3::from_matrix_unchecked(m), eye)
    }

    /// World-space ray through pixel coordinates (px, py). The caller passes
    /// pixel centers (x + 0.5) when rastering a full image.
    pub fn pixel_ray(&self, px: f64, py: f64) -> Ray {
        let i = &self.intrinsics;
        let d_cam = Vector3::new((px - i.cx) / i.fx, -(py - i.cy) / i.fy, -1.0);
        let dir = (self.rotation * d_cam).normalize();
        Ray {
            origin: self.translation,
            dir,
            t_near: 0.0,
            t_far: f64::INFINITY,
        }
    }
}

/// Axis-aligned scene bounds; the field's unit domain maps onto it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl SceneBox {
    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            if !(self.min[i] < self.max[i]) {
                return Err(CnfError::data("aabb: degenerate bounds"));
            }
        }
        Ok(())
    }

    /// Maps a world point into [0,1]^3 (clamped against fp edge effects).
    pub fn to_unit(&self, p: &Vector3<f64>) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = ((p[i] - self.min[i]) / (self.max[i] - self.min[i])).clamp(0.0, 1.0);
        }
        out
    }

    /// Clips `ray` to the box; `None` when it misses.
    pub fn clip(&self, ray: &Ray) -> Option<Ray> {
        let mut t0 = 1e-6f64;
        let mut t1 = f64::INFINITY;
        for i in 0..3 {
            let inv = 1.0 / ray.dir[i];
            let mut a = (self.min[i] - ray.origin[i]) * inv;
            let mut b = (self.max[i] - ray.origin[i]) * inv;
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
        if t0 < t1 {
            Some(Ray {
                t_near: t0,
                t_far: t1,
                ..*ray
            })
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intr() -> Intrinsics {
        Intrinsics {
            fx: 100.0,
            fy: 100.0,
            cx: 64.0,
            cy: 64.0,
            width: 128,
            height: 128,
        }
    }

    fn identity_cam() -> Camera {
        Camera::new(intr(), Rotation3::identity(), Vector3::zeros()).unwrap()
    }

    #[test]
    fn principal_point_is_optical_axis() {
        let cam = identity_cam();
        let ray = cam.pixel_ray(64.0, 64.0);
        assert!((ray.dir - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn offset_pixel_back_projection() {
        let cam = identity_cam();
        let ray = cam.pixel_ray(164.0, 64.0);
        let expected = Vector3::new(1.0, 0.0, -1.0).normalize();
        assert!((ray.dir - expected).norm() < 1e-12);
    }

    #[test]
    fn directions_are_unit() {
        let cam = identity_cam();
        for (px, py) in [(0.0, 0.0), (127.5, 3.2), (50.0, 120.0)] {
            let ray = cam.pixel_ray(px, py);
            assert!((ray.dir.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pose6_round_trip() {
        let cam = Camera::look_at(
            intr(),
            Vector3::new(1.0, 2.0, 3.0),
            Vector3::new(0.0, 0.5, 0.0),
        )
        .unwrap();
        let pose = cam.to_pose6();
        let back = Camera::from_pose6(intr(), &pose).unwrap();
        for (px, py) in [(10.0, 10.0), (100.0, 30.0)] {
            let a = cam.pixel_ray(px, py);
            let b = back.pixel_ray(px, py);
            assert!((a.dir - b.dir).norm() < 1e-9);
            assert!((a.origin - b.origin).norm() < 1e-9);
        }
    }

    #[test]
    fn aabb_clip() {
        let aabb = SceneBox {
            min: [-1.0, -1.0, -1.0],
            max: [1.0, 1.0, 1.0],
        };
        let hit = Ray {
            origin: Vector3::new(0.0, 0.0, 3.0),
            dir: Vector3::new(0.0, 0.0, -1.0),
            t_near: 0.0,
            t_far: f64::INFINITY,
        };
        let clipped = aabb.clip(&hit).unwrap();
        assert!((clipped.t_near - 2.0).abs() < 1e-12);
        assert!((clipped.t_far - 4.0).abs() < 1e-12);
        let miss = Ray {
            origin: Vector3::new(0.0, 5.0, 3.0),
            dir: Vector3::new(0.0, 0.0, -1.0),
            t_near: 0.0,
            t_far: f64::INFINITY,
        };
        assert!(aabb.clip(&miss).is_none());
    }
}
