//! Command-line front end: dataset synthesis, partition inspection,
//! training, evaluation, method comparison and rendering.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cnf_core::checkpoint;
use cnf_core::continual::{
    run_continual, Preset, RunOptions, Strategy, StrategyConfig, TaskStream, DEFAULT_EWC_LAMBDA,
};
use cnf_core::data::{
    load_manifest, make_synthetic, partition_balanced, partition_frames, synthetic_image2d,
    ProcScene, SplitMode, SyntheticSpec,
};
use cnf_core::error::CnfError;
use cnf_core::eval::bench;
use cnf_core::eval::{compare_methods, eval_stage};
use cnf_core::field::Backbone;
use cnf_core::imgio::ImageF;
use cnf_core::render::{render_image, render_image2d, RenderSettings};
use cnf_core::train::Budget;
use cnf_core::Result;

#[derive(Parser)]
#[command(name = "cnf", version, about = "Continual neural-field training on CPU")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackboneArg {
    Hash,
    Freq,
}

impl From<BackboneArg> for Backbone {
    fn from(b: BackboneArg) -> Backbone {
        match b {
            BackboneArg::Hash => Backbone::Hash,
            BackboneArg::Freq => Backbone::Freq,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Naive,
    Ewc,
    Replay,
    Joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneArg {
    /// Red sphere, green box, blue sphere.
    Three,
    /// Single centered sphere.
    Sphere,
    /// Ring of 12 distinct objects for outward-looking scans.
    Ring,
}

#[derive(Args)]
struct DataArgs {
    /// `bench2d`, a PNG path (2d), or a scene manifest directory (3d).
    #[arg(long)]
    dataset: String,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Number of sequential tasks.
    #[arg(long, default_value_t = 10)]
    tasks: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Render a procedural orbit dataset to disk.
    MakeSynthetic {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        frames: usize,
        #[arg(long, default_value_t = 64)]
        resolution: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SceneArg::Three)]
        scene: SceneArg,
        /// Cameras look away from the origin (room-scan style).
        #[arg(long)]
        outward: bool,
        /// Sensor-grain amplitude added to the images.
        #[arg(long, default_value_t = 0.0)]
        grain: f64,
    },
    /// Print the task partition for a frame or strip count.
    Partition {
        /// Number of frames (3d) or strip columns (2d).
        #[arg(long)]
        count: usize,
        #[arg(long)]
        tasks: usize,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Train a field over the sequential tasks of a dataset.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        backbone: BackboneArg,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// EWC regularization strength.
        #[arg(long, default_value_t = DEFAULT_EWC_LAMBDA)]
        lambda: f64,
        /// Per-task budget: `steps:N` or `secs:S`.
        #[arg(long, default_value = "steps:300")]
        budget: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Evaluate a checkpoint against a dataset's tasks.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Stage the checkpoint was trained through (0-based; default last).
        #[arg(long)]
        stage: Option<usize>,
    },
    /// Run several presets on one dataset with shared seeds.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated: nerf-incre, ingp-incre, ingp-ewc, meil-style, ours, joint.
        #[arg(long, default_value = "ingp-incre,ours,joint")]
        presets: String,
        #[arg(long, default_value = "steps:300")]
        budget: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a checkpoint to a PNG.
    Render {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scene manifest directory; required for 3D checkpoints.
        #[arg(long)]
        dataset: Option<String>,
        /// Frame index of the camera to render from (3D).
        #[arg(long, default_value_t = 0)]
        frame: usize,
        /// Output size for 2D checkpoints.
        #[arg(long, default_value_t = 512)]
        width: u32,
        #[arg(long, default_value_t = 512)]
        height: u32,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

fn parse_budget(s: &str) -> Result<Budget> {
    let budget = match s.split_once(':') {
        Some(("steps", n)) => Budget::Steps(
            n.parse()
                .map_err(|_| CnfError::usage(format!("budget: bad step count {n:?}")))?,
        ),
        Some(("secs", v)) => Budget::WallClockSecs(
            v.parse()
                .map_err(|_| CnfError::usage(format!("budget: bad seconds {v:?}")))?,
        ),
        _ => {
            return Err(CnfError::usage(format!(
                "budget: expected steps:N or secs:S, got {s:?}"
            )))
        }
    };
    budget.validate()?;
    Ok(budget)
}

fn load_stream(data: &DataArgs) -> Result<TaskStream> {
    match data.mode {
        Mode::TwoD => {
            let image = if data.dataset == "bench2d" {
                synthetic_image2d(bench::BENCH2D_SIZE, bench::BENCH2D_SIZE)
            } else {
                ImageF::load_png(data.dataset.as_ref())?
            };
            TaskStream::from_image2d(image, data.tasks, SplitMode::VerticalStrips)
        }
        Mode::ThreeD => {
            let manifest = load_manifest(data.dataset.as_ref())?;
            TaskStream::from_scene(&manifest, data.tasks)
        }
    }
}

fn run_options(data: &DataArgs, backbone: Backbone, seed: u64) -> RunOptions {
    let mut opts = match data.mode {
        Mode::TwoD => bench::bench2d_opts(seed, 300),
        Mode::ThreeD => bench::bench3d_opts(seed, 300),
    };
    opts.field = match data.mode {
        Mode::TwoD => bench::bench2d_field(backbone, seed),
        Mode::ThreeD => bench::bench3d_field(backbone, seed),
    };
    opts
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::MakeSynthetic {
            out,
            frames,
            resolution,
            seed,
            scene,
            outward,
            grain,
        } => {
            let spec = SyntheticSpec {
                n_frames: frames,
                resolution,
                seed,
                look_outward: outward,
                grain,
                orbit_radius: if outward { 0.25 } else { 2.8 },
                elevation: if outward { 0.05 } else { 0.6 },
                ..SyntheticSpec::default()
            };
            let scene = match scene {
                SceneArg::Three => ProcScene::default_three(),
                SceneArg::Sphere => ProcScene::single_sphere(0.8, 30.0),
                SceneArg::Ring => ProcScene::ring(12),
            };
            let manifest = make_synthetic(&scene, &spec, &out)?;
            println!(
                "wrote {} frames at {}x{} to {}",
                manifest.n_frames(),
                resolution,
                resolution,
                out.display()
            );
        }
        Command::Partition { count, tasks, mode } => {
            let parts = match mode {
                Mode::ThreeD => partition_frames(count, tasks)?,
                Mode::TwoD => partition_balanced(count, tasks)?,
            };
            for (i, r) in parts.iter().enumerate() {
                println!("task {i}: {}..{} ({} items)", r.start, r.end, r.len());
            }
        }
        Command::Train {
            data,
            backbone,
            strategy,
            lambda,
            budget,
            seed,
            out,
            batch_size,
        } => {
            let stream = load_stream(&data)?;
            let backbone: Backbone = backbone.into();
            let strategy = StrategyConfig {
                strategy: match strategy {
                    StrategyArg::Naive => Strategy::Naive,
                    StrategyArg::Ewc => Strategy::Ewc { lambda },
                    StrategyArg::Replay => Strategy::Replay,
                    StrategyArg::Joint => Strategy::Joint,
                },
                backbone,
            };
            let mut opts = run_options(&data, backbone, seed);
            opts.budget = parse_budget(&budget)?;
            if let Some(b) = batch_size {
                opts.batch_size = b;
            }
            opts.out_dir = Some(out.clone());
            let result = run_continual(&stream, &strategy, &opts)?;
            println!(
                "final mean PSNR {:.2} dB over {} tasks ({} checkpoints in {})",
                result.report.final_mean_of_task_means(),
                stream.n_tasks(),
                result.checkpoints.len(),
                out.display()
            );
        }
        Command::Eval {
            data,
            checkpoint,
            stage,
        } => {
            let stream = load_stream(&data)?;
            let model = checkpoint::load(&checkpoint)?;
            let stage = stage.unwrap_or(stream.n_tasks() - 1);
            let n_samples = match data.mode {
                Mode::TwoD => 0,
                Mode::ThreeD => 64,
            };
            let row = eval_stage(&model, &stream, stage, n_samples)?;
            println!("stage,task,psnr,psnr_holdout,max_flag");
            for t in &row.tasks {
                println!(
                    "{},{},{:.4},{:.4},{}",
                    row.stage, t.task, t.psnr, t.psnr_holdout, t.max_flag as u8
                );
            }
        }
        Command::Compare {
            data,
            presets,
            budget,
            seed,
            out,
        } => {
            let presets: Vec<Preset> = presets
                .split(',')
                .map(|s| {
                    Preset::parse(s.trim())
                        .ok_or_else(|| CnfError::usage(format!("unknown preset {s:?}")))
                })
                .collect::<Result<_>>()?;
            let stream = load_stream(&data)?;
            let mut base = run_options(&data, Backbone::Hash, seed);
            base.budget = parse_budget(&budget)?;
            let field_for = |b: Backbone| match data.mode {
                Mode::TwoD => bench::bench2d_field(b, seed),
                Mode::ThreeD => bench::bench3d_field(b, seed),
            };
            let results = compare_methods(&stream, &presets, &base, field_for, Some(&out))?;
            println!("preset,mean_of_task_means,mean_over_frames,task0_final");
            for r in &results {
                println!(
                    "{},{:.4},{:.4},{:.4}",
                    r.preset.name(),
                    r.run.report.final_mean_of_task_means(),
                    r.run.report.final_mean_over_frames(),
                    r.run.report.final_task_psnr(0),
                );
            }
        }
        Command::Render {
            checkpoint,
            out,
            dataset,
            frame,
            width,
            height,
            samples,
        } => {
            let model = checkpoint::load(&checkpoint)?;
            let (pixels, w, h) = if model.config.spatial_dim == 2 {
                (render_image2d(&model, width, height)?, width, height)
            } else {
                let dataset = dataset
                    .ok_or_else(|| CnfError::usage("render: 3D checkpoints need --dataset"))?;
                let manifest = load_manifest(dataset.as_ref())?;
                if frame >= manifest.cameras.len() {
                    return Err(CnfError::usage(format!(
                        "render: frame {frame} out of range ({} frames)",
                        manifest.cameras.len()
                    )));
                }
                let settings = RenderSettings {
                    n_samples: samples,
                    jitter: false,
                    background: [0.0; 3],
                };
                let pixels = render_image(
                    &model,
                    &manifest.cameras[frame],
                    &manifest.aabb,
                    &settings,
                    0,
                )?;
                (pixels, manifest.intrinsics.width, manifest.intrinsics.height)
            };
            ImageF::new(w, h, pixels).save_png(&out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CNF_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output exits 0; bad usage exits 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
