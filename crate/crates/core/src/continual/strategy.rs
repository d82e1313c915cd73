//! The strategy x backbone matrix and its named presets.

use serde::{Deserialize, Serialize};

use crate::field::Backbone;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Train on the current task's ground truth only.
    Naive,
    /// Naive plus a Fisher-weighted quadratic anchor to past solutions.
    Ewc { lambda: f64 },
    /// Mixed objective: current-task ground truth plus pseudo ground truth
    /// from a frozen snapshot, rays sampled uniformly over all tasks so far.
    Replay,
    /// Non-continual upper bound: ground truth from all tasks every step.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub backbone: Backbone,
}

/// Named experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Naive incremental training on the frequency backbone.
    NerfIncre,
    /// Naive incremental training on the hash backbone.
    IngpIncre,
    /// Hash backbone with EWC regularization.
    IngpEwc,
    /// Replay distillation on the frequency backbone.
    MeilStyle,
    /// Replay distillation on the hash backbone.
    Ours,
    /// Joint (non-continual) training on the hash backbone.
    Joint,
}

pub const DEFAULT_EWC_LAMBDA: f64 = 1.0;

impl Preset {
    pub fn config(self) -> StrategyConfig {
        match self {
            Preset::NerfIncre => StrategyConfig {
                strategy: Strategy::Naive,
                backbone: Backbone::Freq,
            },
            Preset::IngpIncre => StrategyConfig {
                strategy: Strategy::Naive,
                backbone: Backbone::Hash,
            },
            Preset::IngpEwc => StrategyConfig {
                strategy: Strategy::Ewc {
                    lambda: DEFAULT_EWC_LAMBDA,
                },
                backbone: Backbone::Hash,
            },
            Preset::MeilStyle => StrategyConfig {
                strategy: Strategy::Replay,
                backbone: Backbone::Freq,
            },
            Preset::Ours => StrategyConfig {
                strategy: Strategy::Replay,
                backbone: Backbone::Hash,
            },
            Preset::Joint => StrategyConfig {
                strategy: Strategy::Joint,
                backbone: Backbone::Hash,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::NerfIncre => "nerf-incre",
            Preset::IngpIncre => "ingp-incre",
            Preset::IngpEwc => "ingp-ewc",
            Preset::MeilStyle => "meil-style",
            Preset::Ours => "ours",
            Preset::Joint => "joint",
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        match s {
            "nerf-incre" => Some(Preset::NerfIncre),
            "ingp-incre" => Some(Preset::IngpIncre),
            "ingp-ewc" => Some(Preset::IngpEwc),
            "meil-style" => Some(Preset::MeilStyle),
            "ours" => Some(Preset::Ours),
            "joint" => Some(Preset::Joint),
            _ => None,
        }
    }
}
