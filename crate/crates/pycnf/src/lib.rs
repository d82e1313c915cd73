//! Python bindings for the continual neural-field engine.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use cnf_core::checkpoint;
use cnf_core::continual::{run_continual, RunOptions, Strategy, StrategyConfig, TaskStream};
use cnf_core::data::{synthetic_image2d, SplitMode};
use cnf_core::error::CnfError;
use cnf_core::eval::psnr;
use cnf_core::field::{self, Backbone, FieldConfig, FieldModel, GridConfig};
use cnf_core::imgio::ImageF;
use cnf_core::render::render_image2d;
use cnf_core::train::{Budget, OptimConfig};

fn err(e: CnfError) -> PyErr {
    match e {
        CnfError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn grid(
    levels: usize,
    table_size: usize,
    feature_dim: usize,
    n_min: u32,
    n_max: u32,
    dim: usize,
) -> PyResult<GridConfig> {
    GridConfig::new(levels, table_size, feature_dim, n_min, n_max, dim).map_err(err)
}

/// Per-level grid resolutions, coarsest to finest.
#[pyfunction]
fn level_resolutions(
    levels: usize,
    table_size: usize,
    feature_dim: usize,
    n_min: u32,
    n_max: u32,
    dim: usize,
) -> PyResult<Vec<u32>> {
    Ok(field::level_resolutions(&grid(
        levels, table_size, feature_dim, n_min, n_max, dim,
    )?))
}

/// Spatial-hash slot of an integer vertex.
#[pyfunction]
fn hash_index(vertex: Vec<u64>, table_size: usize, dim: usize) -> PyResult<usize> {
    let cfg = grid(1, table_size, 1, 2, 2, dim)?;
    if vertex.len() != dim {
        return Err(PyValueError::new_err("vertex length must equal dim"));
    }
    Ok(field::hash_index(&vertex, &cfg))
}

/// PSNR in dB between two flat RGB buffers with values in [0, 1].
#[pyfunction]
fn psnr_db(pred: Vec<f64>, gt: Vec<f64>) -> PyResult<f64> {
    if pred.len() % 3 != 0 || gt.len() % 3 != 0 {
        return Err(PyValueError::new_err("buffers must be flat RGB"));
    }
    let to_px = |v: &[f64]| -> Vec<[f64; 3]> {
        v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
    };
    Ok(psnr(&to_px(&pred), &to_px(&gt)).map_err(err)?.db)
}

/// Deterministic procedural test image as a flat RGB list.
#[pyfunction]
fn test_image(width: u32, height: u32) -> Vec<f64> {
    synthetic_image2d(width, height)
        .pixels
        .into_iter()
        .flatten()
        .collect()
}

#[pyclass(name = "FieldModel")]
struct PyFieldModel {
    inner: FieldModel,
}

#[pymethods]
impl PyFieldModel {
    /// Hash-grid backbone.
    #[staticmethod]
    #[pyo3(signature = (dim, levels=8, table_size=4096, feature_dim=2, n_min=16, n_max=256, seed=0))]
    fn hash(
        dim: usize,
        levels: usize,
        table_size: usize,
        feature_dim: usize,
        n_min: u32,
        n_max: u32,
        seed: u64,
    ) -> PyResult<Self> {
        let cfg = FieldConfig::hash(
            dim,
            grid(levels, table_size, feature_dim, n_min, n_max, dim)?,
            seed,
        );
        Ok(PyFieldModel {
            inner: FieldModel::new(cfg).map_err(err)?,
        })
    }

    /// Frequency-encoded MLP backbone.
    #[staticmethod]
    #[pyo3(signature = (dim, n_freq=6, seed=0))]
    fn freq(dim: usize, n_freq: usize, seed: u64) -> PyResult<Self> {
        Ok(PyFieldModel {
            inner: FieldModel::new(FieldConfig::freq(dim, n_freq, seed)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyFieldModel {
            inner: checkpoint::load(path.as_ref()).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        checkpoint::save(&self.inner, path.as_ref()).map_err(err)
    }

    /// (density, (r, g, b)) at a point in the unit domain.
    #[pyo3(signature = (x, direction=None))]
    fn eval(&self, x: Vec<f64>, direction: Option<[f64; 3]>) -> PyResult<(f64, (f64, f64, f64))> {
        let (sigma, c) = self.inner.eval(&x, direction.as_ref()).map_err(err)?;
        Ok((sigma, (c[0], c[1], c[2])))
    }

    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    fn param_hash(&self) -> u64 {
        self.inner.param_hash()
    }

    /// Render a 2D model to a flat RGB buffer.
    fn render2d(&self, width: u32, height: u32) -> PyResult<Vec<f64>> {
        Ok(render_image2d(&self.inner, width, height)
            .map_err(err)?
            .into_iter()
            .flatten()
            .collect())
    }
}

/// Continual training on a 2D image split into vertical strips.
/// Returns (model, final per-task PSNRs).
#[pyfunction]
#[pyo3(signature = (image, width, height, tasks, strategy, steps_per_task=200, seed=0, batch_size=256))]
fn train_image2d(
    image: Vec<f64>,
    width: u32,
    height: u32,
    tasks: usize,
    strategy: &str,
    steps_per_task: u64,
    seed: u64,
    batch_size: usize,
) -> PyResult<(PyFieldModel, Vec<f64>)> {
    if image.len() != (width * height * 3) as usize {
        return Err(PyValueError::new_err("image length must be width*height*3"));
    }
    let pixels: Vec<[f64; 3]> = image.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    let stream = TaskStream::from_image2d(
        ImageF::new(width, height, pixels),
        tasks,
        SplitMode::VerticalStrips,
    )
    .map_err(err)?;
    let strategy = StrategyConfig {
        strategy: match strategy {
            "naive" => Strategy::Naive,
            "ewc" => Strategy::Ewc { lambda: 1.0 },
            "replay" => Strategy::Replay,
            "joint" => Strategy::Joint,
            other => {
                return Err(PyValueError::new_err(format!("unknown strategy {other:?}")))
            }
        },
        backbone: Backbone::Hash,
    };
    let grid = GridConfig::new(8, 1 << 12, 2, 16, 256, 2).map_err(err)?;
    let opts = RunOptions {
        field: FieldConfig::hash(2, grid, seed),
        optim: OptimConfig::default(),
        batch_size,
        n_samples: 0,
        eval_n_samples: 0,
        seed,
        budget: Budget::Steps(steps_per_task),
        fisher_batches: 4,
        fisher_batch_size: batch_size,
        out_dir: None,
    };
    let result = run_continual(&stream, &strategy, &opts).map_err(err)?;
    let finals: Vec<f64> = (0..tasks)
        .map(|t| result.report.final_task_psnr(t))
        .collect();
    Ok((PyFieldModel { inner: result.model }, finals))
}

#[pymodule]
fn pycnf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFieldModel>()?;
    m.add_function(wrap_pyfunction!(level_resolutions, m)?)?;
    m.add_function(wrap_pyfunction!(hash_index, m)?)?;
    m.add_function(wrap_pyfunction!(psnr_db, m)?)?;
    m.add_function(wrap_pyfunction!(test_image, m)?)?;
    m.add_function(wrap_pyfunction!(train_image2d, m)?)?;
    Ok(())
}
