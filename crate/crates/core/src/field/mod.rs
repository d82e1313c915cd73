pub mod freq;
pub mod grid;
pub mod mlp;
pub mod model;

pub use freq::{freq_encode, freq_encode_len};
pub use grid::{collision_count, hash_index, level_layouts, level_resolutions, GridConfig};
pub use mlp::{DensityActivation, MlpConfig};
pub use model::{Backbone, EvalCache, FieldConfig, FieldModel};
