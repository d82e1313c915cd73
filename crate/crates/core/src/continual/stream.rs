//! Sequential task streams and their access-controlled views.
//!
//! At training stage i, ground-truth pixels are readable only for task i;
//! ray geometry is readable for tasks 0..=i. Evaluation and the joint
//! (non-continual) upper bound use the unrestricted view.

use std::ops::Range;

use crate::data::image2d::{split_pixels, SplitMode};
use crate::data::manifest::SceneManifest;
use crate::data::partition::partition_frames;
use crate::error::{CnfError, Result};
use crate::imgio::ImageF;
use crate::render::{Camera, Intrinsics, SceneBox};
use crate::train::RayInput;

#[derive(Debug, Clone)]
pub enum StreamData {
    Scene {
        intrinsics: Intrinsics,
        aabb: SceneBox,
        /// 6-scalar poses, the persistent ray registry.
        poses6: Vec<[f64; 6]>,
        /// Cameras rebuilt from the poses.
        cameras: Vec<Camera>,
        images: Vec<ImageF>,
        tasks: Vec<Range<usize>>,
    },
    Image2d {
        image: ImageF,
        tasks: Vec<Vec<(u32, u32)>>,
    },
}

#[derive(Debug, Clone)]
pub struct TaskStream {
    pub data: StreamData,
}

impl TaskStream {
    pub fn from_scene(manifest: &SceneManifest, n_tasks: usize) -> Result<Self> {
        let images = manifest.load_images()?;
        let tasks = partition_frames(manifest.n_frames(), n_tasks)?;
        let poses6: Vec<[f64; 6]> = manifest.cameras.iter().map(|c| c.to_pose6()).collect();
        // rays regenerate from the stored 6-scalar form
        let cameras: Vec<Camera> = poses6
            .iter()
            .map(|p| Camera::from_pose6(manifest.intrinsics, p))
            .collect::<Result<_>>()?;
        Ok(TaskStream {
            data: StreamData::Scene {
                intrinsics: manifest.intrinsics,
                aabb: manifest.aabb,
                poses6,
                cameras,
                images,
                tasks,
            },
        })
    }

    pub fn from_image2d(image: ImageF, n_tasks: usize, mode: SplitMode) -> Result<Self> {
        let tasks = split_pixels(image.width, image.height, n_tasks, mode)?;
        Ok(TaskStream {
            data: StreamData::Image2d { image, tasks },
        })
    }

    pub fn is_2d(&self) -> bool {
        matches!(self.data, StreamData::Image2d { .. })
    }

    pub fn n_tasks(&self) -> usize {
        match &self.data {
            StreamData::Scene { tasks, .. } => tasks.len(),
            StreamData::Image2d { tasks, .. } => tasks.len(),
        }
    }

    pub fn aabb(&self) -> Option<SceneBox> {
        match &self.data {
            StreamData::Scene { aabb, .. } => Some(*aabb),
            StreamData::Image2d { .. } => None,
        }
    }

    pub fn rays_in_task(&self, task: usize) -> usize {
        match &self.data {
            StreamData::Scene {
                tasks, intrinsics, ..
            } => tasks[task].len() * (intrinsics.width * intrinsics.height) as usize,
            StreamData::Image2d { tasks, .. } => tasks[task].len(),
        }
    }

    /// Total rays in tasks 0..=stage (the cumulative registry).
    pub fn cumulative_rays(&self, stage: usize) -> usize {
        (0..=stage).map(|t| self.rays_in_task(t)).sum()
    }

    /// Frame indices belonging to `task` (3D only).
    pub fn task_frames(&self, task: usize) -> Option<Range<usize>> {
        match &self.data {
            StreamData::Scene { tasks, .. } => Some(tasks[task].clone()),
            StreamData::Image2d { .. } => None,
        }
    }

    pub(crate) fn ray_input_unchecked(&self, task: usize, idx: usize) -> RayInput {
        match &self.data {
            StreamData::Scene {
                tasks,
                cameras,
                intrinsics,
                ..
            } => {
                let per_frame = (intrinsics.width * intrinsics.height) as usize;
                let frame = tasks[task].start + idx / per_frame;
                let p = idx % per_frame;
                let (x, y) = (p % intrinsics.width as usize, p / intrinsics.width as usize);
                let ray = cameras[frame].pixel_ray(x as f64 + 0.5, y as f64 + 0.5);
                RayInput::Ray {
                    ray,
                    ray_id: (frame * per_frame + p) as u64,
                }
            }
            StreamData::Image2d { image, tasks } => {
                let (x, y) = tasks[task][idx];
                RayInput::Pixel([
                    (x as f64 + 0.5) / image.width as f64,
                    (y as f64 + 0.5) / image.height as f64,
                ])
            }
        }
    }

    pub(crate) fn gt_color_unchecked(&self, task: usize, idx: usize) -> [f64; 3] {
        match &self.data {
            StreamData::Scene {
                tasks,
                images,
                intrinsics,
                ..
            } => {
                let per_frame = (intrinsics.width * intrinsics.height) as usize;
                let frame = tasks[task].start + idx / per_frame;
                images[frame].pixels[idx % per_frame]
            }
            StreamData::Image2d { image, tasks } => {
                let (x, y) = tasks[task][idx];
                image.pixel(x, y)
            }
        }
    }

    /// The training-time view at stage i (0-based task index).
    pub fn stage_view(&self, stage: usize) -> Result<StageView<'_>> {
        if stage >= self.n_tasks() {
            return Err(CnfError::usage(format!(
                "stage {stage} out of range ({} tasks)",
                self.n_tasks()
            )));
        }
        Ok(StageView {
            stream: self,
            stage,
        })
    }

    /// Unrestricted view for evaluation and the joint upper bound.
    pub fn full_view(&self) -> FullView<'_> {
        FullView { stream: self }
    }
}

/// Enforces the sequential-access contract.
pub struct StageView<'a> {
    pub stream: &'a TaskStream,
    pub stage: usize,
}

impl StageView<'_> {
    /// Ray geometry: available for the current and all previous tasks.
    pub fn ray(&self, task: usize, idx: usize) -> Result<RayInput> {
        if task > self.stage {
            return Err(CnfError::usage(format!(
                "ray of future task {task} requested at stage {}",
                self.stage
            )));
        }
        Ok(self.stream.ray_input_unchecked(task, idx))
    }

    /// Ground-truth pixels: current task only.
    pub fn gt(&self, task: usize, idx: usize) -> Result<[f64; 3]> {
        if task < self.stage {
            return Err(CnfError::AccessViolation {
                requested: task,
                stage: self.stage,
            });
        }
        if task > self.stage {
            return Err(CnfError::usage(format!(
                "ground truth of future task {task} requested at stage {}",
                self.stage
            )));
        }
        Ok(self.stream.gt_color_unchecked(task, idx))
    }
}

pub struct FullView<'a> {
    pub stream: &'a TaskStream,
}

impl FullView<'_> {
    pub fn ray(&self, task: usize, idx: usize) -> RayInput {
        self.stream.ray_input_unchecked(task, idx)
    }

    pub fn gt(&self, task: usize, idx: usize) -> [f64; 3] {
        self.stream.gt_color_unchecked(task, idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::image2d::synthetic_image2d;

    fn stream() -> TaskStream {
        TaskStream::from_image2d(synthetic_image2d(20, 10), 4, SplitMode::VerticalStrips).unwrap()
    }

    #[test]
    fn gt_access_is_stage_gated() {
        let s = stream();
        let v = s.stage_view(2).unwrap();
        assert!(v.gt(2, 0).is_ok());
        let past = v.gt(1, 0).unwrap_err();
        assert!(matches!(past, CnfError::AccessViolation { requested: 1, stage: 2 }));
        assert!(v.gt(3, 0).is_err());
    }

    #[test]
    fn rays_available_for_past_tasks() {
        let s = stream();
        let v = s.stage_view(2).unwrap();
        assert!(v.ray(0, 0).is_ok());
        assert!(v.ray(2, 0).is_ok());
        assert!(v.ray(3, 0).is_err());
    }

    #[test]
    fn cumulative_counts() {
        let s = stream();
        assert_eq!(s.cumulative_rays(3), 200);
        let per_task: usize = s.rays_in_task(0);
        assert_eq!(per_task, 50);
    }
}
