//! Audio feature extraction: volume gate, onsets, onset density, tempo, and
//! the tempo-stability verdict that gates generation downstream.

mod density;
mod gate;
mod onset;
mod stability;
mod stream;
mod tempo;

use serde::{Deserialize, Serialize};

pub use density::compute_density;
pub use gate::{gate_volume, rms, VolumeGate};
pub use onset::OnsetDetector;
pub use stability::assess_stability;
pub use stream::{Analyzer, Feature};
pub use tempo::{estimate_tempo, fold_bpm, TempoTracker};

/// Sample rate every analysis stage runs at; inputs are resampled to it.
pub const ANALYSIS_SAMPLE_RATE: u32 = 44_100;

/// A block of mono samples.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioFrame {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
    /// Seconds since stream start of `samples[0]`.
    pub start_time: f64,
}

impl AudioFrame {
    pub fn new(samples: Vec<f32>, sample_rate: u32, start_time: f64) -> Self {
        AudioFrame {
            samples,
            sample_rate,
            start_time,
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsetEvent {
    pub time: f64,
    /// Spectral flux at the detected peak.
    pub strength: f64,
}

/// Onsets per second over a trailing window ending at `time`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub window: f64,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TempoEstimate {
    pub bpm: f64,
    /// Time of the most recent beat, seconds.
    pub beat_phase: f64,
    pub confidence: f64,
    pub stable: bool,
    /// When the estimate was produced.
    pub time: f64,
}

/// Tunables for every analysis stage. Defaults follow the documented
/// detector and tracker settings; all of them can be overridden from the run
/// config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub window_size: usize,
    pub hop_size: usize,
    /// Added to the trailing flux median to form the peak threshold.
    pub flux_offset: f64,
    pub threshold_window_s: f64,
    pub min_onset_gap_s: f64,
    /// RMS amplitude below which the system stays silent.
    pub volume_threshold: f64,
    /// Trailing span the volume gate measures RMS over.
    pub gate_window_s: f64,
    pub density_window_s: f64,
    pub bpm_min: f64,
    pub bpm_max: f64,
    /// Onsets older than this are dropped from the tempo history.
    pub tempo_history_s: f64,
    /// Spacing of density/tempo estimates.
    pub eval_interval_s: f64,
    /// Exponential smoothing weight given to each new tempo estimate.
    pub tempo_smoothing: f64,
    /// Largest onset-pair lag (in onsets) that votes in the IOI histogram.
    pub max_ioi_lag: usize,
    pub n_stab: usize,
    pub cv_max: f64,
    pub dev_max: f64,
    /// Histogram peak sharpness required before an estimate may be stable.
    pub min_confidence: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window_size: 1024,
            hop_size: 256,
            flux_offset: 0.02,
            threshold_window_s: 1.0,
            min_onset_gap_s: 0.050,
            volume_threshold: 0.02,
            gate_window_s: 1.0,
            density_window_s: 4.0,
            bpm_min: 70.0,
            bpm_max: 180.0,
            tempo_history_s: 8.0,
            eval_interval_s: 1.0,
            tempo_smoothing: 0.5,
            max_ioi_lag: 2,
            n_stab: 8,
            cv_max: 0.04,
            dev_max: 6.0,
            min_confidence: 0.5,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if !self.window_size.is_power_of_two() || self.hop_size == 0 || self.hop_size > self.window_size {
            return Err(Error::Config(format!(
                "window_size must be a power of two >= hop_size > 0 (got {} / {})",
                self.window_size, self.hop_size
            )));
        }
        if !(self.volume_threshold > 0.0 && self.volume_threshold < 1.0) {
            return Err(Error::Config("volume_threshold must lie in (0, 1)".into()));
        }
        if !(self.bpm_min > 0.0 && self.bpm_max > self.bpm_min) {
            return Err(Error::Config("bpm range must satisfy 0 < bpm_min < bpm_max".into()));
        }
        if self.bpm_max < 2.0 * self.bpm_min - 1e-9 {
            return Err(Error::Config(
                "bpm range must span at least one octave so folding always lands inside it".into(),
            ));
        }
        for (name, v) in [
            ("density_window_s", self.density_window_s),
            ("gate_window_s", self.gate_window_s),
            ("threshold_window_s", self.threshold_window_s),
            ("tempo_history_s", self.tempo_history_s),
            ("eval_interval_s", self.eval_interval_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.tempo_smoothing > 0.0 && self.tempo_smoothing <= 1.0) {
            return Err(Error::Config("tempo_smoothing must lie in (0, 1]".into()));
        }
        if self.n_stab < 2 || self.max_ioi_lag == 0 {
            return Err(Error::Config("n_stab must be >= 2 and max_ioi_lag >= 1".into()));
        }
        Ok(())
    }
}
