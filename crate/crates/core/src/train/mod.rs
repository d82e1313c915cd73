//! Losses, exact gradients through render -> loss, Adam, EWC and the
//! budgeted training loop.

pub mod adam;
pub mod budget;
pub mod ewc;
pub mod loss;

pub use adam::{optim_step, OptimConfig, OptimState};
pub use budget::{append_step_log, derive_seed, train_budgeted, Budget, StepRecord};
pub use ewc::{ewc_penalty, fisher_estimate, FisherDiag};
pub use loss::{
    loss_and_grad, photometric_loss, GradBuffer, LossBatch, LossRay, LossStats, RayInput,
    RenderContext, SourceTag,
};
