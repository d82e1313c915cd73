//! Side-by-side preset runs with a shared seed and data stream.

use std::path::Path;

use crate::continual::{run_continual, Preset, RunOptions, RunResult, TaskStream};
use crate::error::{CnfError, Result};
use crate::field::{Backbone, FieldConfig};

#[derive(Debug)]
pub struct CompareResult {
    pub preset: Preset,
    pub run: RunResult,
}

/// Runs each preset on the same stream with the same seed and budget.
/// `field_for` maps a backbone to the model configuration so hash and
/// frequency presets each get a matching field.
pub fn compare_methods(
    stream: &TaskStream,
    presets: &[Preset],
    base: &RunOptions,
    field_for: impl Fn(Backbone) -> FieldConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<CompareResult>> {
    if presets.is_empty() {
        return Err(CnfError::usage("compare: no presets given"));
    }
    let mut results = Vec::with_capacity(presets.len());
    for &preset in presets {
        let cfg = preset.config();
        let mut opts = base.clone();
        opts.field = field_for(cfg.backbone);
        opts.out_dir = out_dir.map(|d| d.join(preset.name()));
        let run = run_continual(stream, &cfg, &opts)?;
        results.push(CompareResult { preset, run });
    }
    if let Some(dir) = out_dir {
        write_summaries(dir, &results)?;
    }
    Ok(results)
}

/// Per-stage PSNR of the first task for every preset, one column each.
pub fn task0_curve_csv(results: &[CompareResult]) -> String {
    let mut out = String::from("stage");
    for r in results {
        out.push(',');
        out.push_str(r.preset.name());
    }
    out.push('\n');
    let n_stages = results
        .iter()
        .map(|r| r.run.report.rows.len())
        .max()
        .unwrap_or(0);
    for stage in 0..n_stages {
        out.push_str(&stage.to_string());
        for r in results {
            let v = r
                .run
                .report
                .task_curve(0)
                .iter()
                .find(|(s, _)| *s == stage)
                .map(|(_, p)| *p);
            match v {
                Some(p) => out.push_str(&format!(",{p:.4}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Final-stage aggregates under both conventions: mean of per-task means
/// and mean over individual frames.
pub fn aggregate_csv(results: &[CompareResult]) -> String {
    let mut out = String::from("preset,mean_of_task_means,mean_over_frames,task0_final\n");
    for r in results {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4}\n",
            r.preset.name(),
            r.run.report.final_mean_of_task_means(),
            r.run.report.final_mean_over_frames(),
            r.run.report.final_task_psnr(0),
        ));
    }
    out
}

fn write_summaries(dir: &Path, results: &[CompareResult]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CnfError::io(dir, e))?;
    let curve = dir.join("curve_task0.csv");
    std::fs::write(&curve, task0_curve_csv(results)).map_err(|e| CnfError::io(&curve, e))?;
    let agg = dir.join("aggregate.csv");
    std::fs::write(&agg, aggregate_csv(results)).map_err(|e| CnfError::io(&agg, e))
}
