//! Parameter sweeps over the spinlase models, with deterministic CSV/JSON
//! persistence, a hashed manifest and SVG figures.

pub mod config;
pub mod figures;
pub mod output;
pub mod svg;
pub mod sweep;
pub mod tasks;
pub mod validate;

pub use config::{load_config, ConfigError, SweepSpec, Task};
pub use figures::{emit_figures, FigureError, FigureReport};
pub use sweep::{run_sweep, SweepError, SweepReport};
