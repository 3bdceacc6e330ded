use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::actuators::{ArmConfig, DrumBankConfig, DEFAULT_RECOVERY_DELAY_S};
use crate::analysis::AnalysisConfig;
use crate::conductor::ConductorConfig;
use crate::synth::{ClickSpec, PoissonSpec};
use crate::trajectory::{ArmModel, RetargetOptions};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Offline,
    Live,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSource {
    Wav { path: PathBuf },
    Click(ClickSpec),
    Poisson(PoissonSpec),
    Silence { duration_s: f64 },
}

/// Everything a run needs, as one flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: Option<InputSource>,
    pub seed: Option<u64>,
    pub event_log: Option<PathBuf>,
    pub feature_log: Option<PathBuf>,
    pub render_wav: Option<PathBuf>,
    /// Simulated seconds per wall-clock second in live mode.
    pub live_speed: f64,
    pub bus_capacity: usize,

    pub window_size: usize,
    pub hop_size: usize,
    pub flux_offset: f64,
    pub min_onset_gap_s: f64,
    pub volume_threshold: f64,
    pub gate_window_s: f64,
    pub density_window_s: f64,
    pub bpm_min: f64,
    pub bpm_max: f64,
    pub tempo_history_s: f64,
    pub eval_interval_s: f64,
    pub tempo_smoothing: f64,
    pub n_stab: usize,
    pub cv_max: f64,
    pub dev_max: f64,
    pub min_confidence: f64,

    pub actuation_latency_s: f64,
    pub arm_latency_s: Option<f64>,
    pub p_snippet: f64,
    pub delta_density_sig: f64,
    pub density_full_scale: f64,
    pub min_play_prob: f64,

    pub sweep_time_s: f64,
    pub return_time_s: f64,
    /// Defaults to whatever remains of the actuation latency after the sweep.
    pub link_latency_s: Option<f64>,
    pub recovery_delay_s: f64,
    pub safety_stops_s: Vec<f64>,

    pub length_scale_s: f64,
    pub noise_variance: f64,
    pub arm: ArmModel,
    pub snippet_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let a = AnalysisConfig::default();
        let c = ConductorConfig::default();
        let d = DrumBankConfig::default();
        let r = RetargetOptions::default();
        RunConfig {
            mode: Mode::Offline,
            input: None,
            seed: None,
            event_log: None,
            feature_log: None,
            render_wav: None,
            live_speed: 1.0,
            bus_capacity: 65_536,
            window_size: a.window_size,
            hop_size: a.hop_size,
            flux_offset: a.flux_offset,
            min_onset_gap_s: a.min_onset_gap_s,
            volume_threshold: a.volume_threshold,
            gate_window_s: a.gate_window_s,
            density_window_s: a.density_window_s,
            bpm_min: a.bpm_min,
            bpm_max: a.bpm_max,
            tempo_history_s: a.tempo_history_s,
            eval_interval_s: a.eval_interval_s,
            tempo_smoothing: a.tempo_smoothing,
            n_stab: a.n_stab,
            cv_max: a.cv_max,
            dev_max: a.dev_max,
            min_confidence: a.min_confidence,
            actuation_latency_s: c.actuation_latency_s,
            arm_latency_s: c.arm_latency_s,
            p_snippet: c.p_snippet,
            delta_density_sig: c.delta_density_sig,
            density_full_scale: c.density_full_scale,
            min_play_prob: c.min_play_prob,
            sweep_time_s: d.sweep_time_s,
            return_time_s: d.return_time_s,
            link_latency_s: None,
            recovery_delay_s: DEFAULT_RECOVERY_DELAY_S,
            safety_stops_s: Vec::new(),
            length_scale_s: r.length_scale,
            noise_variance: r.noise_variance,
            arm: ArmModel::default(),
            snippet_dir: None,
        }
    }
}

pub const DEFAULT_SEED: u64 = 0;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(InputSource::Wav { path }) = &mut cfg.input {
            fix(path);
        }
        for p in [&mut cfg.event_log, &mut cfg.feature_log, &mut cfg.render_wav, &mut cfg.snippet_dir]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            window_size: self.window_size,
            hop_size: self.hop_size,
            flux_offset: self.flux_offset,
            min_onset_gap_s: self.min_onset_gap_s,
            volume_threshold: self.volume_threshold,
            gate_window_s: self.gate_window_s,
            density_window_s: self.density_window_s,
            bpm_min: self.bpm_min,
            bpm_max: self.bpm_max,
            tempo_history_s: self.tempo_history_s,
            eval_interval_s: self.eval_interval_s,
            tempo_smoothing: self.tempo_smoothing,
            n_stab: self.n_stab,
            cv_max: self.cv_max,
            dev_max: self.dev_max,
            min_confidence: self.min_confidence,
            ..AnalysisConfig::default()
        }
    }

    pub fn conductor(&self) -> ConductorConfig {
        ConductorConfig {
            actuation_latency_s: self.actuation_latency_s,
            arm_latency_s: self.arm_latency_s,
            p_snippet: self.p_snippet,
            delta_density_sig: self.delta_density_sig,
            bpm_min: self.bpm_min,
            bpm_max: self.bpm_max,
            density_full_scale: self.density_full_scale,
            min_play_prob: self.min_play_prob,
            ..ConductorConfig::default()
        }
    }

    pub fn drums(&self) -> DrumBankConfig {
        DrumBankConfig {
            link_latency_s: self
                .link_latency_s
                .unwrap_or(self.actuation_latency_s - self.sweep_time_s),
            sweep_time_s: self.sweep_time_s,
            return_time_s: self.return_time_s,
            ..DrumBankConfig::default()
        }
    }

    pub fn arm_config(&self) -> ArmConfig {
        ArmConfig {
            start_latency_s: self.arm_latency_s.unwrap_or(self.actuation_latency_s),
            recovery_delay_s: self.recovery_delay_s,
        }
    }

    pub fn retarget_options(&self) -> RetargetOptions {
        RetargetOptions {
            length_scale: self.length_scale_s,
            noise_variance: self.noise_variance,
            ..RetargetOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_none() {
            return Err(Error::Config("exactly one input source is required".into()));
        }
        self.analysis().validate()?;
        self.conductor().validate()?;
        self.arm.validate()?;
        if !(self.live_speed > 0.0) {
            return Err(Error::Config("live_speed must be positive".into()));
        }
        if self.bus_capacity == 0 {
            return Err(Error::Config("bus_capacity must be positive".into()));
        }
        if !(self.recovery_delay_s >= 0.0 && self.recovery_delay_s.is_finite()) {
            return Err(Error::Config("recovery_delay_s must be non-negative".into()));
        }
        if self.safety_stops_s.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("safety stop times must be non-negative".into()));
        }
        if !(self.length_scale_s > 0.0) || !(self.noise_variance >= 0.0) {
            return Err(Error::Config("length_scale_s must be positive and noise_variance non-negative".into()));
        }
        let drums = self.drums();
        if !(drums.link_latency_s >= 0.0) {
            return Err(Error::Config(
                "sweep_time_s exceeds the actuation latency; set link_latency_s explicitly".into(),
            ));
        }
        if !(self.sweep_time_s > 0.0) || !(self.return_time_s >= 0.0) {
            return Err(Error::Config("sweep_time_s must be positive".into()));
        }
        match &self.input {
            Some(InputSource::Click(c)) => c.validate().map_err(|e| Error::Config(e.to_string())),
            Some(InputSource::Poisson(p)) => p.validate().map_err(|e| Error::Config(e.to_string())),
            Some(InputSource::Silence { duration_s }) if !(*duration_s > 0.0 && duration_s.is_finite()) => {
                Err(Error::Config("silence duration must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}
