//! Reference plugins: classifiers, statistical functions, the grid clusterer and
//! the normal kernel.

pub mod classifier;
pub mod cluster;
pub mod kernel;
pub mod params;
pub mod stats;

pub use classifier::{classify_full, classify_lookahead, EmaClassifier, LookaheadClassifier, StepClassifier};
pub use cluster::{cell_center, grid_cell, Clusterer};
pub use kernel::{default_bandwidth, Kernel, BANDWIDTH_FLOOR};
pub use params::{Bandwidth, GridWidth, PluginParams, Region, StatVariant};
pub use stats::{stat_eval, StatAccumulator, StatFunction};
