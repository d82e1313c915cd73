//! Continual training of neural fields on CPU.
//!
//! Scene fields (multi-resolution hash grids or frequency-encoded MLPs)
//! are trained on sequentially arriving task batches under naive, EWC,
//! replay-distillation or joint strategies, with exact reverse-mode
//! gradients through the volume renderer.

pub mod checkpoint;
pub mod continual;
pub mod data;
pub mod error;
pub mod eval;
pub mod field;
pub mod imgio;
pub mod render;
pub mod train;

pub use error::{CnfError, Result};
