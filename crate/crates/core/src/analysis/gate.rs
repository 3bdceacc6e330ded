use std::collections::VecDeque;

use super::AudioFrame;
use crate::{Error, Result};

pub fn rms(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
    (sum_sq / samples.len() as f64).sqrt()
}

/// True iff the frame's RMS amplitude reaches `threshold`.
pub fn gate_volume(frame: &AudioFrame, threshold: f64) -> Result<bool> {
    if frame.samples.is_empty() {
        return Err(Error::invalid("cannot gate an empty frame"));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("volume threshold {threshold} outside (0, 1)")));
    }
    Ok(rms(&frame.samples) >= threshold)
}

/// Streaming form of [`gate_volume`]: the frame it judges is the trailing
/// `window` samples, accumulated block by block.
#[derive(Clone, Debug)]
pub struct VolumeGate {
    threshold: f64,
    window: usize,
    blocks: VecDeque<(usize, f64)>,
    len: usize,
    sum_sq: f64,
    active: bool,
}

impl VolumeGate {
    pub fn new(threshold: f64, window_samples: usize) -> Self {
        VolumeGate {
            threshold,
            window: window_samples.max(1),
            blocks: VecDeque::new(),
            len: 0,
            sum_sq: 0.0,
            active: false,
        }
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Feeds one block and returns the gate state for the trailing window
    /// ending with it. Whole blocks are evicted, so the window may briefly
    /// exceed `window` samples by less than one block.
    pub fn push(&mut self, block: &[f32]) -> bool {
        let block_sq: f64 = block.iter().map(|&s| (s as f64) * (s as f64)).sum();
        self.blocks.push_back((block.len(), block_sq));
        self.len += block.len();
        self.sum_sq += block_sq;
        while let Some(&(n, _)) = self.blocks.front() {
            if self.len - n < self.window {
                break;
            }
            self.blocks.pop_front();
            self.len -= n;
            // Recompute rather than subtract so the sum never drifts negative.
            self.sum_sq = self.blocks.iter().map(|b| b.1).sum();
        }
        let rms = if self.len == 0 {
            0.0
        } else {
            (self.sum_sq / self.len as f64).sqrt()
        };
        self.active = rms >= self.threshold;
        self.active
    }

    pub fn reset(&mut self) {
        self.blocks.clear();
        self.len = 0;
        self.sum_sq = 0.0;
        self.active = false;
    }
}
