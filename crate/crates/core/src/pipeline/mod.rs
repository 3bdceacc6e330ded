//! End-to-end wiring: config, offline and live runs, and the long-haul
//! reliability simulator.

mod config;
mod run;
mod soak;

pub use config::{InputSource, Mode, RunConfig, DEFAULT_SEED};
pub use run::{load_input, run, RunOutput, RunSummary};
pub use soak::{poisson_stop_times, run_soak, SoakConfig, SoakReport};
