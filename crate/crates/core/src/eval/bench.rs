//! Desk-scale benchmark definitions shared by the CLI and the test
//! suites: a 512x512 procedural image split into vertical strips, and a
//! 40-frame synthetic orbit split into frame ranges.

use std::path::Path;

use crate::continual::{RunOptions, TaskStream};
use crate::data::image2d::SplitMode;
use crate::data::{load_manifest, make_synthetic, synthetic_image2d, ProcScene, SyntheticSpec};
use crate::error::Result;
use crate::field::{Backbone, FieldConfig, GridConfig};
use crate::train::{Budget, OptimConfig};

pub const BENCH2D_SIZE: u32 = 512;
pub const BENCH3D_FRAMES: usize = 40;
pub const BENCH3D_RESOLUTION: u32 = 64;

pub fn bench2d_stream(n_tasks: usize) -> Result<TaskStream> {
    let image = synthetic_image2d(BENCH2D_SIZE, BENCH2D_SIZE);
    TaskStream::from_image2d(image, n_tasks, SplitMode::VerticalStrips)
}

/// Field for the 2D benchmark. The hash table is kept small relative to
/// the fine levels so strips of the image genuinely contend for slots.
pub fn bench2d_field(backbone: Backbone, seed: u64) -> FieldConfig {
    match backbone {
        Backbone::Hash => {
            let grid = GridConfig::new(8, 1 << 12, 2, 16, 256, 2).expect("static config");
            FieldConfig::hash(2, grid, seed)
        }
        Backbone::Freq => FieldConfig::freq(2, 8, seed),
    }
}

pub fn bench2d_opts(seed: u64, steps_per_task: u64) -> RunOptions {
    RunOptions {
        field: bench2d_field(Backbone::Hash, seed),
        optim: OptimConfig::default(),
        batch_size: 512,
        n_samples: 0,
        eval_n_samples: 0,
        seed,
        budget: Budget::Steps(steps_per_task),
        fisher_batches: 8,
        fisher_batch_size: 256,
        out_dir: None,
    }
}

/// Outward-looking scan of a ring of distinct objects: each trajectory
/// segment observes its own sector, so sequential training genuinely
/// loses sight of earlier content.
pub fn bench3d_spec(seed: u64) -> (ProcScene, SyntheticSpec) {
    let spec = SyntheticSpec {
        n_frames: BENCH3D_FRAMES,
        resolution: BENCH3D_RESOLUTION,
        orbit_radius: 0.25,
        elevation: 0.05,
        look_outward: true,
        grain: 0.03,
        seed,
        ..SyntheticSpec::default()
    };
    (ProcScene::ring(12), spec)
}

/// Renders the orbit dataset into `dir` (reusing it when already present)
/// and partitions the frames into `n_tasks` sequential ranges.
pub fn bench3d_stream(dir: &Path, n_tasks: usize, seed: u64) -> Result<TaskStream> {
    let manifest = if dir.join("manifest.json").exists() {
        load_manifest(dir)?
    } else {
        let (scene, spec) = bench3d_spec(seed);
        make_synthetic(&scene, &spec, dir)?
    };
    TaskStream::from_scene(&manifest, n_tasks)
}

pub fn bench3d_field(backbone: Backbone, seed: u64) -> FieldConfig {
    match backbone {
        Backbone::Hash => {
            let grid = GridConfig::new(8, 1 << 13, 2, 16, 128, 3).expect("static config");
            FieldConfig::hash(3, grid, seed)
        }
        Backbone::Freq => FieldConfig::freq(3, 6, seed),
    }
}

pub fn bench3d_opts(seed: u64, steps_per_task: u64) -> RunOptions {
    RunOptions {
        field: bench3d_field(Backbone::Hash, seed),
        optim: OptimConfig::default(),
        batch_size: 128,
        n_samples: 64,
        eval_n_samples: 64,
        seed,
        budget: Budget::Steps(steps_per_task),
        fisher_batches: 4,
        fisher_batch_size: 64,
        out_dir: None,
    }
}
