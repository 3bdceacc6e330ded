//! Half-wave-rectified log-magnitude spectral flux with an adaptive
//! median threshold and a refractory gap.

use std::collections::VecDeque;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{AnalysisConfig, AudioFrame, OnsetEvent};
use crate::{Error, Result};

/// Compression applied before the log: `ln(1 + LOG_GAIN * |X| / sum(w))`.
const LOG_GAIN: f32 = 100.0;

/// Offset, in samples from the start of the analysis window, that a flux
/// peak is stamped at. An attack produces its largest flux increment once
/// it is well inside the Hann window, not at its leading edge; the value is
/// measured on synthetic clicks.
const PEAK_STAMP_OFFSET: f64 = 644.0;

pub struct OnsetDetector {
    window_size: usize,
    hop_size: usize,
    sample_rate: Option<u32>,
    offset: f64,
    min_gap: f64,
    threshold_frames: usize,

    fft: Arc<dyn Fft<f32>>,
    window: Vec<f32>,
    window_norm: f32,
    scratch: Vec<Complex<f32>>,

    /// Most recent `window_size` samples, oldest first.
    buf: VecDeque<f32>,
    /// Samples accumulated toward the next hop.
    pending: usize,
    /// Absolute index of the sample following the last one consumed.
    consumed: u64,
    stream_start: Option<f64>,
    prev_log_mag: Vec<f32>,
    flux_history: VecDeque<f64>,
    /// Last three (flux, threshold, window start sample) triples.
    recent: VecDeque<(f64, f64, i64)>,
    last_onset: Option<f64>,
}

impl OnsetDetector {
    pub fn new(cfg: &AnalysisConfig) -> Self {
        let n = cfg.window_size;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let window: Vec<f32> = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f32::consts::PI * i as f32 / n as f32).cos())
            .collect();
        let window_norm = window.iter().sum();
        let threshold_frames =
            ((cfg.threshold_window_s * super::ANALYSIS_SAMPLE_RATE as f64) / cfg.hop_size as f64).ceil() as usize;
        OnsetDetector {
            window_size: n,
            hop_size: cfg.hop_size,
            sample_rate: None,
            offset: cfg.flux_offset,
            min_gap: cfg.min_onset_gap_s,
            threshold_frames: threshold_frames.max(1),
            fft,
            window,
            window_norm,
            scratch: vec![Complex::new(0.0, 0.0); n],
            buf: std::iter::repeat_n(0.0, n).collect(),
            pending: 0,
            consumed: 0,
            stream_start: None,
            prev_log_mag: vec![0.0; n / 2 + 1],
            flux_history: VecDeque::new(),
            recent: VecDeque::with_capacity(3),
            last_onset: None,
        }
    }

    /// Clears all stream state; the next frame starts a new stream.
    pub fn reset(&mut self) {
        self.sample_rate = None;
        self.buf.iter_mut().for_each(|s| *s = 0.0);
        self.pending = 0;
        self.consumed = 0;
        self.stream_start = None;
        self.prev_log_mag.iter_mut().for_each(|m| *m = 0.0);
        self.flux_history.clear();
        self.recent.clear();
        self.last_onset = None;
    }

    /// Consumes the next contiguous frame and returns onsets confirmed by it.
    pub fn push(&mut self, frame: &AudioFrame) -> Result<Vec<OnsetEvent>> {
        match self.sample_rate {
            None => {
                if frame.sample_rate == 0 {
                    return Err(Error::Config("sample rate must be positive".into()));
                }
                self.sample_rate = Some(frame.sample_rate);
                self.stream_start = Some(frame.start_time);
            }
            Some(sr) if sr != frame.sample_rate => {
                return Err(Error::Config(format!(
                    "sample rate changed mid-stream from {sr} Hz to {} Hz",
                    frame.sample_rate
                )));
            }
            Some(_) => {}
        }
        let mut out = Vec::new();
        for &s in &frame.samples {
            self.buf.pop_front();
            self.buf.push_back(s);
            self.consumed += 1;
            self.pending += 1;
            if self.pending == self.hop_size {
                self.pending = 0;
                if let Some(onset) = self.analyse_hop() {
                    out.push(onset);
                }
            }
        }
        Ok(out)
    }

    fn analyse_hop(&mut self) -> Option<OnsetEvent> {
        for (dst, (&s, &w)) in self.scratch.iter_mut().zip(self.buf.iter().zip(&self.window)) {
            *dst = Complex::new(s * w, 0.0);
        }
        self.fft.process(&mut self.scratch);

        let bins = self.window_size / 2 + 1;
        let mut flux = 0.0f64;
        for (bin, prev) in self.scratch[..bins].iter().zip(self.prev_log_mag.iter_mut()) {
            let log_mag = (1.0 + LOG_GAIN * bin.norm() / self.window_norm).ln();
            let rise = log_mag - *prev;
            if rise > 0.0 {
                flux += rise as f64;
            }
            *prev = log_mag;
        }
        flux /= bins as f64;

        self.flux_history.push_back(flux);
        if self.flux_history.len() > self.threshold_frames {
            self.flux_history.pop_front();
        }
        let threshold = median(&self.flux_history) + self.offset;
        let window_start = self.consumed as i64 - self.window_size as i64;
        self.recent.push_back((flux, threshold, window_start));
        if self.recent.len() > 3 {
            self.recent.pop_front();
        }
        if self.recent.len() < 3 {
            return None;
        }

        let (before, _, _) = self.recent[0];
        let (peak, peak_threshold, peak_start) = self.recent[1];
        let (after, _, _) = self.recent[2];
        if !(peak > before && peak >= after && peak > peak_threshold) {
            return None;
        }

        // Parabolic refinement of the peak position, in hops.
        let denom = before - 2.0 * peak + after;
        let shift = if denom.abs() > f64::EPSILON {
            (0.5 * (before - after) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let sr = self.sample_rate.unwrap_or(super::ANALYSIS_SAMPLE_RATE) as f64;
        let sample_pos = peak_start as f64 + PEAK_STAMP_OFFSET + shift * self.hop_size as f64;
        let time = self.stream_start.unwrap_or(0.0) + sample_pos / sr;

        if let Some(last) = self.last_onset {
            if time - last < self.min_gap {
                return None;
            }
        }
        self.last_onset = Some(time);
        Some(OnsetEvent { time, strength: peak })
    }
}

fn median(values: &VecDeque<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v: Vec<f64> = values.iter().copied().collect();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    *m
}
