//! Per-stage evaluation and the consolidated PSNR report.

use crate::continual::stream::{StreamData, TaskStream};
use crate::error::Result;
use crate::eval::psnr::{psnr, Psnr};
use crate::field::FieldModel;
use crate::render::{render_image, render_image2d, RenderSettings};

#[derive(Debug, Clone)]
pub struct TaskEval {
    pub task: usize,
    /// Mean PSNR over all views/pixels of the task.
    pub psnr: f64,
    /// Mean PSNR over the held-out every-8th split.
    pub psnr_holdout: f64,
    pub max_flag: bool,
    /// Per-frame PSNRs (single entry in 2D mode).
    pub frames: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StageRow {
    pub stage: usize,
    pub tasks: Vec<TaskEval>,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub rows: Vec<StageRow>,
    pub fingerprint: String,
}

/// Renders every view of tasks 0..=stage with deterministic midpoint
/// sampling and reports per-task PSNR. Never mutates the model.
pub fn eval_stage(
    model: &FieldModel,
    stream: &TaskStream,
    stage: usize,
    n_samples: usize,
) -> Result<StageRow> {
    let start = std::time::Instant::now();
    let mut tasks = Vec::with_capacity(stage + 1);
    match &stream.data {
        StreamData::Image2d { image, tasks: parts } => {
            let pred = render_image2d(model, image.width, image.height)?;
            for (t, part) in parts.iter().enumerate().take(stage + 1) {
                let pred_px: Vec<[f64; 3]> = part
                    .iter()
                    .map(|&(x, y)| pred[(y * image.width + x) as usize])
                    .collect();
                let gt_px: Vec<[f64; 3]> = part.iter().map(|&(x, y)| image.pixel(x, y)).collect();
                let full = psnr(&pred_px, &gt_px)?;
                let hold_pred: Vec<[f64; 3]> = pred_px.iter().step_by(8).copied().collect();
                let hold_gt: Vec<[f64; 3]> = gt_px.iter().step_by(8).copied().collect();
                let hold = psnr(&hold_pred, &hold_gt)?;
                tasks.push(TaskEval {
                    task: t,
                    psnr: full.db,
                    psnr_holdout: hold.db,
                    max_flag: full.max_flag,
                    frames: vec![full.db],
                });
            }
        }
        StreamData::Scene {
            intrinsics,
            aabb,
            cameras,
            images,
            tasks: parts,
            ..
        } => {
            let settings = RenderSettings {
                n_samples,
                jitter: false,
                background: [0.0; 3],
            };
            for (t, range) in parts.iter().enumerate().take(stage + 1) {
                let mut frames = Vec::with_capacity(range.len());
                let mut holdout = Vec::new();
                let mut any_max = false;
                for frame in range.clone() {
                    let pred = render_image(model, &cameras[frame], aabb, &settings, 0)?;
                    let p: Psnr = psnr(&pred, &images[frame].pixels)?;
                    frames.push(p.db);
                    any_max |= p.max_flag;
                    if frame % 8 == 0 {
                        holdout.push(p.db);
                    }
                }
                let mean = frames.iter().sum::<f64>() / frames.len() as f64;
                let hold_mean = if holdout.is_empty() {
                    mean
                } else {
                    holdout.iter().sum::<f64>() / holdout.len() as f64
                };
                let _ = intrinsics;
                tasks.push(TaskEval {
                    task: t,
                    psnr: mean,
                    psnr_holdout: hold_mean,
                    max_flag: any_max,
                    frames,
                });
            }
        }
    }
    Ok(StageRow {
        stage,
        tasks,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

impl EvalReport {
    /// Mean over per-task means at the final stage.
    pub fn final_mean_of_task_means(&self) -> f64 {
        let row = self.rows.last().expect("report has rows");
        row.tasks.iter().map(|t| t.psnr).sum::<f64>() / row.tasks.len() as f64
    }

    /// Mean over all individual frames at the final stage.
    pub fn final_mean_over_frames(&self) -> f64 {
        let row = self.rows.last().expect("report has rows");
        let (mut acc, mut n) = (0.0, 0usize);
        for t in &row.tasks {
            for f in &t.frames {
                acc += f;
                n += 1;
            }
        }
        acc / n as f64
    }

    /// PSNR of `task` at the final stage.
    pub fn final_task_psnr(&self, task: usize) -> f64 {
        self.rows.last().expect("report has rows").tasks[task].psnr
    }

    /// PSNR of `task` at each stage where it was evaluated.
    pub fn task_curve(&self, task: usize) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.stage >= task)
            .map(|r| (r.stage, r.tasks[task].psnr))
            .collect()
    }

    /// Lower-triangular (stage, task) matrix as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,task,psnr,psnr_holdout,max_flag\n");
        for row in &self.rows {
            for t in &row.tasks {
                out.push_str(&format!(
                    "{},{},{:.4},{:.4},{}\n",
                    row.stage, t.task, t.psnr, t.psnr_holdout, t.max_flag as u8
                ));
            }
        }
        out
    }
}
