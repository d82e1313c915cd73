//! Budgeted optimization loop: fixed step count or wall-clock seconds.
//! Wall-clock is checked between steps; an in-flight step always completes.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::error::{CnfError, Result};
use crate::field::FieldModel;
use crate::train::adam::{optim_step, OptimState};
use crate::train::ewc::{ewc_penalty, FisherDiag};
use crate::train::loss::{loss_and_grad, GradBuffer, LossBatch, RenderContext};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Steps(u64),
    WallClockSecs(f64),
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        match self {
            Budget::Steps(_) => Ok(()),
            Budget::WallClockSecs(s) if *s > 0.0 => Ok(()),
            _ => Err(CnfError::usage("budget: wall-clock seconds must be positive")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: u64,
    pub task_index: usize,
    pub wall_clock_ms: f64,
    pub loss_gt: f64,
    pub loss_oracle: f64,
    pub loss_ewc: f64,
}

pub const STEP_LOG_HEADER: &str = "step,task_index,wall_clock_ms,loss_gt,loss_oracle,loss_ewc";

/// Appends step records as CSV, writing the header when the file is new.
pub fn append_step_log(path: &Path, records: &[StepRecord]) -> Result<()> {
    let fresh = !path.exists();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CnfError::io(path, e))?;
    let mut out = String::new();
    if fresh {
        out.push_str(STEP_LOG_HEADER);
        out.push('\n');
    }
    for r in records {
        out.push_str(&format!(
            "{},{},{:.3},{:.9},{:.9},{:.9}\n",
            r.step, r.task_index, r.wall_clock_ms, r.loss_gt, r.loss_oracle, r.loss_ewc
        ));
    }
    f.write_all(out.as_bytes()).map_err(|e| CnfError::io(path, e))
}

/// Runs sample -> forward/backward -> Adam until the budget is exhausted.
/// `batch_fn` receives the global optimizer step and a per-step render
/// context seed is derived inside from `ctx.seed` and the step.
pub fn train_budgeted(
    model: &mut FieldModel,
    optim: &mut OptimState,
    budget: &Budget,
    task_index: usize,
    ctx: &RenderContext,
    mut batch_fn: impl FnMut(u64) -> Result<LossBatch>,
    ewc: Option<(&FisherDiag, f64)>,
    log: &mut Vec<StepRecord>,
) -> Result<()> {
    budget.validate()?;
    let start = Instant::now();
    let mut grads: GradBuffer = Vec::new();
    let mut done_steps: u64 = 0;
    loop {
        match budget {
            Budget::Steps(n) => {
                if done_steps >= *n {
                    break;
                }
            }
            Budget::WallClockSecs(s) => {
                if start.elapsed().as_secs_f64() >= *s {
                    break;
                }
            }
        }
        // cosine annealing over the task budget, so each task's endpoint
        // is a settled optimum rather than an SGD noise ball
        let progress = match budget {
            Budget::Steps(n) => done_steps as f64 / (*n as f64).max(1.0),
            Budget::WallClockSecs(s) => (start.elapsed().as_secs_f64() / s).min(1.0),
        };
        optim.lr_scale = 0.5 * (1.0 + (std::f64::consts::PI * progress).cos());
        let step = optim.step;
        let batch = batch_fn(step)?;
        let mut step_ctx = ctx.clone();
        step_ctx.seed = derive_seed(ctx.seed, step);
        let stats = loss_and_grad(&batch, model, &step_ctx, &mut grads)?;
        let loss_ewc = match ewc {
            Some((fisher, lambda)) => ewc_penalty(model, fisher, lambda, Some(&mut grads))?,
            None => 0.0,
        };
        optim_step(model, &grads, optim)?;
        done_steps += 1;
        log.push(StepRecord {
            step: optim.step,
            task_index,
            wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
            loss_gt: stats.gt,
            loss_oracle: stats.oracle,
            loss_ewc,
        });
    }
    Ok(())
}

/// splitmix64 over (seed, step) for per-step RNG seeds.
pub fn derive_seed(seed: u64, step: u64) -> u64 {
    let mut z = seed ^ step.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
