//! Sequential-task orchestration: batch construction per strategy,
//! snapshot freezing, Fisher accumulation, checkpoints and per-stage
//! evaluation.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::continual::snapshot::{freeze, FrozenSnapshot};
use crate::continual::strategy::{Strategy, StrategyConfig};
use crate::continual::stream::{StageView, TaskStream};
use crate::error::{CnfError, Result};
use crate::eval::report::{eval_stage, EvalReport};
use crate::field::{FieldConfig, FieldModel};
use crate::render::RenderSettings;
use crate::train::{
    derive_seed, fisher_estimate, train_budgeted, Budget, FisherDiag, LossBatch, LossRay,
    OptimConfig, OptimState, RenderContext, SourceTag, StepRecord,
};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub field: FieldConfig,
    pub optim: OptimConfig,
    pub batch_size: usize,
    /// Samples per ray during training (3D).
    pub n_samples: usize,
    /// Samples per ray during evaluation (3D).
    pub eval_n_samples: usize,
    pub seed: u64,
    /// Per-task training budget.
    pub budget: Budget,
    pub fisher_batches: usize,
    pub fisher_batch_size: usize,
    /// When set, per-task checkpoints, the step log and the experiment
    /// manifest are written here.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunResult {
    pub model: FieldModel,
    pub report: EvalReport,
    pub log: Vec<StepRecord>,
    pub checkpoints: Vec<PathBuf>,
}

/// Uniform ray draw over the cumulative registry of tasks 0..=stage.
/// Current-task rays carry ground truth; earlier rays are supervised by
/// the frozen oracle's pseudo ground truth.
pub fn replay_sample(
    view: &StageView<'_>,
    oracle: Option<&FrozenSnapshot>,
    batch_size: usize,
    oracle_ctx: &RenderContext,
    rng: &mut ChaCha8Rng,
) -> Result<LossBatch> {
    let stream = view.stream;
    let stage = view.stage;
    if stage > 0 && oracle.is_none() {
        return Err(CnfError::usage(format!(
            "replay at stage {stage} requires an oracle frozen after stage {}",
            stage - 1
        )));
    }
    let total = stream.cumulative_rays(stage);
    let mut rays = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let mut pick = rng.gen_range(0..total);
        let mut task = 0usize;
        while pick >= stream.rays_in_task(task) {
            pick -= stream.rays_in_task(task);
            task += 1;
        }
        let input = view.ray(task, pick)?;
        let (target, source) = if task == stage {
            (view.gt(task, pick)?, SourceTag::Gt)
        } else {
            let oracle = oracle.expect("checked above");
            (oracle.pseudo_gt(&input, oracle_ctx)?, SourceTag::Oracle)
        };
        rays.push(LossRay {
            input,
            target,
            source,
        });
    }
    Ok(LossBatch { rays })
}

/// GT-only batch from a single task through the stage view.
fn task_batch(
    view: &StageView<'_>,
    task: usize,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LossBatch> {
    let n = view.stream.rays_in_task(task);
    let mut rays = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let idx = rng.gen_range(0..n);
        rays.push(LossRay {
            input: view.ray(task, idx)?,
            target: view.gt(task, idx)?,
            source: SourceTag::Gt,
        });
    }
    Ok(LossBatch { rays })
}

/// GT batch over all tasks (joint upper bound; bypasses sequencing).
fn joint_batch(stream: &TaskStream, batch_size: usize, rng: &mut ChaCha8Rng) -> Result<LossBatch> {
    let full = stream.full_view();
    let total = stream.cumulative_rays(stream.n_tasks() - 1);
    let mut rays = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let mut pick = rng.gen_range(0..total);
        let mut task = 0usize;
        while pick >= stream.rays_in_task(task) {
            pick -= stream.rays_in_task(task);
            task += 1;
        }
        rays.push(LossRay {
            input: full.ray(task, pick),
            target: full.gt(task, pick),
            source: SourceTag::Gt,
        });
    }
    Ok(LossBatch { rays })
}

/// Persistent replay state beyond the live model: the frozen snapshot in
/// checkpoint form plus 6 scalars per past camera and the shared
/// intrinsics. Independent of task count except the per-camera poses.
pub fn replay_state_bytes(oracle: &FrozenSnapshot, n_cameras: usize) -> usize {
    checkpoint::encode(oracle.model()).len() + n_cameras * 6 * 8 + 6 * 8
}

pub fn run_continual(
    stream: &TaskStream,
    strategy: &StrategyConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    if stream.n_tasks() == 0 {
        return Err(CnfError::usage("run: empty task stream"));
    }
    if opts.field.backbone != strategy.backbone {
        return Err(CnfError::usage("run: field backbone does not match strategy"));
    }
    let mut model = FieldModel::new(opts.field.clone())?;
    let train_ctx = RenderContext {
        aabb: stream.aabb(),
        settings: RenderSettings {
            n_samples: opts.n_samples,
            jitter: true,
            background: [0.0; 3],
        },
        seed: opts.seed,
    };
    let oracle_ctx = RenderContext {
        aabb: stream.aabb(),
        settings: RenderSettings {
            n_samples: opts.n_samples,
            jitter: false,
            background: [0.0; 3],
        },
        seed: 0,
    };
    let mut oracle: Option<FrozenSnapshot> = None;
    let mut fisher: Option<FisherDiag> = None;
    let mut log: Vec<StepRecord> = Vec::new();
    let mut report = EvalReport {
        rows: Vec::new(),
        fingerprint: format!("{strategy:?}|seed={}|batch={}", opts.seed, opts.batch_size),
    };
    let mut checkpoints = Vec::new();
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CnfError::io(dir, e))?;
    }

    for stage in 0..stream.n_tasks() {
        let view = stream.stage_view(stage)?;
        let mut optim = OptimState::new(opts.optim.clone(), model.param_count());
        let batch_seed = derive_seed(opts.seed, 0x5eed ^ stage as u64);
        {
            let oracle_ref = oracle.as_ref();
            let batch_fn = |step: u64| -> Result<LossBatch> {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(batch_seed, step));
                match strategy.strategy {
                    Strategy::Naive | Strategy::Ewc { .. } => {
                        task_batch(&view, stage, opts.batch_size, &mut rng)
                    }
                    Strategy::Replay => {
                        replay_sample(&view, oracle_ref, opts.batch_size, &oracle_ctx, &mut rng)
                    }
                    Strategy::Joint => joint_batch(stream, opts.batch_size, &mut rng),
                }
            };
            let ewc_arg = match (&strategy.strategy, &fisher) {
                (Strategy::Ewc { lambda }, Some(f)) => Some((f, *lambda)),
                _ => None,
            };
            train_budgeted(
                &mut model,
                &mut optim,
                &opts.budget,
                stage,
                &train_ctx,
                batch_fn,
                ewc_arg,
                &mut log,
            )?;
        }

        match strategy.strategy {
            Strategy::Replay => {
                oracle = Some(freeze(&model, stage));
            }
            Strategy::Ewc { .. } => {
                let fisher_seed = derive_seed(opts.seed, 0xf15e ^ stage as u64);
                let new = fisher_estimate(&model, &train_ctx, opts.fisher_batches, |b| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(fisher_seed, b as u64));
                    task_batch(&view, stage, opts.fisher_batch_size, &mut rng)
                })?;
                match &mut fisher {
                    Some(f) => f.accumulate(&new),
                    None => fisher = Some(new),
                }
            }
            _ => {}
        }

        if let Some(dir) = &opts.out_dir {
            let path = dir.join(format!("task_{:02}.cnf1", stage + 1));
            checkpoint::save(&model, &path)?;
            checkpoints.push(path);
        }
        report.rows.push(eval_stage(&model, stream, stage, opts.eval_n_samples)?);
    }

    if let Some(dir) = &opts.out_dir {
        crate::train::append_step_log(&dir.join("steps.csv"), &log)?;
        let manifest = format!(
            "strategy={:?}\nbackbone={:?}\nn_tasks={}\nbatch_size={}\nbudget={:?}\nseed={}\nparams={}\n",
            strategy.strategy,
            strategy.backbone,
            stream.n_tasks(),
            opts.batch_size,
            opts.budget,
            opts.seed,
            model.param_count(),
        );
        let path = dir.join("experiment.txt");
        std::fs::write(&path, manifest).map_err(|e| CnfError::io(&path, e))?;
        let report_path = dir.join("report.csv");
        std::fs::write(&report_path, report.to_csv()).map_err(|e| CnfError::io(&report_path, e))?;
    }

    Ok(RunResult {
        model,
        report,
        log,
        checkpoints,
    })
}
