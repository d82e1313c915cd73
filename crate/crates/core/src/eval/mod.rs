//! PSNR metrics, per-stage reports and multi-method comparisons.

pub mod bench;
pub mod compare;
pub mod psnr;
pub mod report;

pub use compare::{aggregate_csv, compare_methods, task0_curve_csv, CompareResult};
pub use psnr::{psnr, Psnr, PSNR_MAX_DB};
pub use report::{eval_stage, EvalReport, StageRow, TaskEval};
