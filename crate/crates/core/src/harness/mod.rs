//! Run orchestration: configuration, training/evaluation loops, checkpoints,
//! statistics, and plots.

pub mod checkpoint;
pub mod config;
pub mod stats;
pub mod svg;
pub mod train;

pub use config::{Algorithm, RunConfig};
pub use stats::{stats, TrialStats};
pub use train::{evaluate, simulate, train, EpisodeRecord, EvalSummary};
