//! Experiment harness: named presets run over a seed × horizon lattice,
//! written as CSV and summarized.

pub mod config;
pub mod presets;
pub mod schema;
pub mod summary;

pub use config::{ExperimentConfig, Preset};
pub use presets::{run_preset, PresetOutput};
pub use schema::{read_rows, write_rows, ResultRow};
pub use summary::{summarize, summarize_rows, Summary};
