use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{
    compute_density, AnalysisConfig, AudioFrame, DensityEstimate, OnsetDetector, OnsetEvent, TempoEstimate,
    TempoTracker, VolumeGate, ANALYSIS_SAMPLE_RATE,
};
use crate::{Error, Result};

/// A timestamped record leaving the analysis stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    Gate { time: f64, active: bool },
    Onset(OnsetEvent),
    Density(DensityEstimate),
    Tempo(TempoEstimate),
}

impl Feature {
    pub fn time(&self) -> f64 {
        match self {
            Feature::Gate { time, .. } => *time,
            Feature::Onset(o) => o.time,
            Feature::Density(d) => d.time,
            Feature::Tempo(t) => t.time,
        }
    }
}

/// The whole analysis chain over one mono stream at the analysis rate.
///
/// Audio is consumed in hop-sized blocks. After each block the volume gate
/// is re-evaluated over the trailing gate window; while it is closed no
/// block reaches the onset detector and no estimates are produced, and
/// closing it discards all onset and tempo history.
pub struct Analyzer {
    cfg: AnalysisConfig,
    gate: VolumeGate,
    detector: OnsetDetector,
    tracker: TempoTracker,
    onsets: VecDeque<OnsetEvent>,
    leftover: Vec<f32>,
    samples: u64,
    next_eval: f64,
}

impl Analyzer {
    pub fn new(cfg: AnalysisConfig) -> Result<Self> {
        cfg.validate()?;
        let gate_samples = (cfg.gate_window_s * ANALYSIS_SAMPLE_RATE as f64).round() as usize;
        Ok(Analyzer {
            gate: VolumeGate::new(cfg.volume_threshold, gate_samples),
            detector: OnsetDetector::new(&cfg),
            tracker: TempoTracker::new(&cfg),
            onsets: VecDeque::new(),
            leftover: Vec::with_capacity(cfg.hop_size),
            samples: 0,
            next_eval: 0.0,
            cfg,
        })
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.cfg
    }

    /// Stream time after everything pushed so far.
    pub fn now(&self) -> f64 {
        self.samples as f64 / ANALYSIS_SAMPLE_RATE as f64
    }

    pub fn gate_active(&self) -> bool {
        self.gate.is_active()
    }

    /// Pushes a contiguous frame; returns features in time order. Samples
    /// short of a full hop are held until the next call.
    pub fn push(&mut self, frame: &AudioFrame) -> Result<Vec<Feature>> {
        if frame.sample_rate != ANALYSIS_SAMPLE_RATE {
            return Err(Error::Config(format!(
                "analysis runs at {ANALYSIS_SAMPLE_RATE} Hz, got a {} Hz frame",
                frame.sample_rate
            )));
        }
        let mut out = Vec::new();
        let hop = self.cfg.hop_size;
        let mut rest = &frame.samples[..];
        if !self.leftover.is_empty() {
            let take = (hop - self.leftover.len()).min(rest.len());
            self.leftover.extend_from_slice(&rest[..take]);
            rest = &rest[take..];
            if self.leftover.len() == hop {
                let block = std::mem::take(&mut self.leftover);
                self.push_block(&block, &mut out)?;
                self.leftover = block;
                self.leftover.clear();
            }
        }
        let mut chunks = rest.chunks_exact(hop);
        for block in &mut chunks {
            self.push_block(block, &mut out)?;
        }
        self.leftover.extend_from_slice(chunks.remainder());
        Ok(out)
    }

    fn push_block(&mut self, block: &[f32], out: &mut Vec<Feature>) -> Result<()> {
        let sr = ANALYSIS_SAMPLE_RATE as f64;
        let start = self.samples as f64 / sr;
        self.samples += block.len() as u64;
        let now = self.now();

        let was_active = self.gate.is_active();
        let active = self.gate.push(block);
        if active != was_active {
            out.push(Feature::Gate { time: now, active });
            if active {
                self.next_eval = now + self.cfg.eval_interval_s;
            } else {
                self.detector.reset();
                self.tracker.reset();
                self.onsets.clear();
            }
        }
        if !active {
            return Ok(());
        }

        let frame = AudioFrame::new(block.to_vec(), ANALYSIS_SAMPLE_RATE, start);
        for onset in self.detector.push(&frame)? {
            self.onsets.push_back(onset);
            out.push(Feature::Onset(onset));
        }

        if now + 1e-9 >= self.next_eval {
            self.next_eval += self.cfg.eval_interval_s;
            let keep = self.cfg.tempo_history_s.max(self.cfg.density_window_s);
            while self.onsets.front().is_some_and(|o| o.time < now - keep) {
                self.onsets.pop_front();
            }
            let onsets = self.onsets.make_contiguous();
            out.push(Feature::Density(compute_density(onsets, self.cfg.density_window_s, now)?));
            let from = onsets.partition_point(|o| o.time < now - self.cfg.tempo_history_s);
            if let Some(tempo) = self.tracker.update(&onsets[from..], now) {
                out.push(Feature::Tempo(tempo));
            }
        }
        Ok(())
    }
}
