//! Inter-onset-interval histogram tempo estimation.

use std::collections::VecDeque;

use super::{AnalysisConfig, OnsetEvent, TempoEstimate};

/// Minimum history the estimator accepts.
pub const MIN_ONSETS: usize = 4;

/// Half-width of the histogram peak, as a fraction of the peak tempo. Votes
/// within it refine the estimate and count toward confidence.
const PEAK_TOLERANCE: f64 = 0.04;

/// Folds `bpm` by octaves into `[lo, hi]`. Returns `None` when no octave of
/// it lands there, which can only happen for ranges narrower than an octave.
pub fn fold_bpm(mut bpm: f64, lo: f64, hi: f64) -> Option<f64> {
    if !(bpm > 0.0 && bpm.is_finite()) {
        return None;
    }
    while bpm < lo {
        bpm *= 2.0;
    }
    while bpm > hi {
        bpm /= 2.0;
    }
    (bpm >= lo && bpm <= hi).then_some(bpm)
}

struct Vote {
    bpm: f64,
    weight: f64,
}

/// Dominant tempo of an onset history. `None` when fewer than four onsets
/// are available or no interval votes land in range.
pub fn estimate_tempo(onsets: &[OnsetEvent], cfg: &AnalysisConfig) -> Option<TempoEstimate> {
    if onsets.len() < MIN_ONSETS {
        return None;
    }
    // Votes fold into a range padded by the peak tolerance so a tempo at
    // either edge is not split across two octaves.
    let (lo, hi) = (cfg.bpm_min * (1.0 - PEAK_TOLERANCE), cfg.bpm_max * (1.0 + PEAK_TOLERANCE));

    let mut votes = Vec::new();
    for i in 0..onsets.len() {
        for lag in 1..=cfg.max_ioi_lag {
            let Some(later) = onsets.get(i + lag) else { break };
            let interval = later.time - onsets[i].time;
            if let Some(bpm) = fold_bpm(60.0 / interval, lo, hi) {
                votes.push(Vote {
                    bpm,
                    weight: 1.0 / lag as f64,
                });
            }
        }
    }
    if votes.is_empty() {
        return None;
    }

    // One-BPM bins over the range; the peak is the bin whose tolerance
    // neighbourhood holds the most vote mass.
    let first_bin = lo.floor();
    let n_bins = (hi.ceil() - first_bin) as usize + 1;
    let mut hist = vec![0.0; n_bins];
    for v in &votes {
        let b = ((v.bpm - first_bin).round() as usize).min(n_bins - 1);
        hist[b] += v.weight;
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for b in 0..n_bins {
        let centre = first_bin + b as f64;
        let half = (centre * PEAK_TOLERANCE).round().max(1.0) as usize;
        let from = b.saturating_sub(half);
        let to = (b + half).min(n_bins - 1);
        let mass: f64 = hist[from..=to].iter().sum();
        // Ties go to the bin with more direct votes, then the slower tempo.
        if mass > best.1 + 1e-12 || ((mass - best.1).abs() <= 1e-12 && hist[b] > hist[best.0]) {
            best = (b, mass);
        }
    }
    let centre = first_bin + best.0 as f64;

    // Refine with the weighted mean period of the votes near the peak.
    let near = |bpm: f64, target: f64| (bpm - target).abs() <= target * PEAK_TOLERANCE + 0.5;
    let (mut w_sum, mut p_sum) = (0.0, 0.0);
    for v in votes.iter().filter(|v| near(v.bpm, centre)) {
        w_sum += v.weight;
        p_sum += v.weight * 60.0 / v.bpm;
    }
    let bpm = (60.0 / (p_sum / w_sum)).clamp(cfg.bpm_min, cfg.bpm_max);

    // Sharpness: share of vote mass on the peak or its octave neighbours.
    let total: f64 = votes.iter().map(|v| v.weight).sum();
    let on_peak: f64 = votes
        .iter()
        .filter(|v| near(v.bpm, bpm) || near(v.bpm, bpm * 2.0) || near(v.bpm, bpm / 2.0))
        .map(|v| v.weight)
        .sum();
    let confidence = (on_peak / total).clamp(0.0, 1.0);

    let last = onsets[onsets.len() - 1].time;
    Some(TempoEstimate {
        bpm,
        beat_phase: beat_phase(onsets, 60.0 / bpm, last),
        confidence,
        stable: false,
        time: last,
    })
}

/// Beat grid point nearest the latest onset, using the strength-weighted
/// circular mean of onset phases against `period`.
fn beat_phase(onsets: &[OnsetEvent], period: f64, latest: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let (mut s, mut c) = (0.0, 0.0);
    for o in onsets {
        let rel = (o.time - latest) / period;
        let w = o.strength.max(1e-9);
        s += w * (tau * rel).sin();
        c += w * (tau * rel).cos();
    }
    // Offset of the grid relative to `latest`, in periods within (-0.5, 0.5].
    let offset = s.atan2(c) / tau;
    latest + offset * period
}

/// Stateful wrapper: history trimming, exponential smoothing of the winning
/// tempo, and the recent-estimate sequence the stability check reads.
#[derive(Clone, Debug)]
pub struct TempoTracker {
    cfg: AnalysisConfig,
    smoothed: Option<f64>,
    recent: VecDeque<TempoEstimate>,
}

/// Relative jump beyond which smoothing restarts from the new estimate.
const SMOOTHING_RESET: f64 = 0.08;

impl TempoTracker {
    pub fn new(cfg: &AnalysisConfig) -> Self {
        TempoTracker {
            cfg: cfg.clone(),
            smoothed: None,
            recent: VecDeque::new(),
        }
    }

    pub fn reset(&mut self) {
        self.smoothed = None;
        self.recent.clear();
    }

    pub fn recent(&self) -> impl Iterator<Item = &TempoEstimate> {
        self.recent.iter()
    }

    /// Estimates from `history`, smooths, and attaches the stability verdict.
    pub fn update(&mut self, history: &[OnsetEvent], now: f64) -> Option<TempoEstimate> {
        let raw = estimate_tempo(history, &self.cfg)?;
        let alpha = self.cfg.tempo_smoothing;
        let bpm = match self.smoothed {
            Some(prev) if (raw.bpm - prev).abs() <= prev * SMOOTHING_RESET => alpha * raw.bpm + (1.0 - alpha) * prev,
            _ => raw.bpm,
        };
        self.smoothed = Some(bpm);

        let mut est = TempoEstimate {
            bpm,
            beat_phase: beat_phase(history, 60.0 / bpm, raw.time),
            confidence: raw.confidence,
            stable: false,
            time: now,
        };
        self.recent.push_back(est);
        while self.recent.len() > self.cfg.n_stab {
            self.recent.pop_front();
        }
        let seq: Vec<TempoEstimate> = self.recent.iter().copied().collect();
        est.stable = super::assess_stability(&seq, &self.cfg) && est.confidence >= self.cfg.min_confidence;
        if let Some(last) = self.recent.back_mut() {
            last.stable = est.stable;
        }
        Some(est)
    }
}
