//! Simulated music-reactive percussion: audio analysis, stochastic drum
//! patterns, latency-compensated scheduling, virtual actuators, and GP-based
//! retargeting of recorded shaking gestures onto a planar arm.
//!
//! The pipeline mirrors the installation dataflow:
//!
//! ```text
//! audio ─► analysis ─► conductor ─► actuators ─► event log
//!            (gate, onsets,   (patterns, beat    (drum bank,
//!             density, bpm)    clock, 120 ms)     arm, watchdog)
//! ```
//!
//! Everything runs on a simulated clock, so offline runs and paced live runs
//! produce the same logs for the same input and seed.

pub mod actuators;
pub mod analysis;
pub mod conductor;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod rhythmgen;
pub mod synth;
pub mod time;
pub mod trajectory;

pub use error::{Error, Result};
pub use time::{SimDuration, SimTime};
