//! Dataset loading, synthetic scene generation and task partitioning.

pub mod image2d;
pub mod manifest;
pub mod partition;
pub mod synthetic;

pub use image2d::{split_pixels, synthetic_image2d, SplitMode};
pub use manifest::{load_manifest, save_manifest, FrameEntry, ManifestFile, SceneManifest};
pub use partition::{partition_balanced, partition_frames};
pub use synthetic::{make_synthetic, orbit_cameras, orbit_intrinsics, ProcScene, SyntheticSpec};
