use serde::{Deserialize, Serialize};

use crate::analysis::TempoEstimate;
use crate::{Error, Result, SimDuration, SimTime};

/// Dispatch instant for a strike that must sound at `strike_time`.
pub fn compute_dispatch_time(strike_time: SimTime, actuation_latency: SimDuration) -> Result<SimTime> {
    if actuation_latency < SimDuration::ZERO {
        return Err(Error::invalid("actuation latency must be non-negative"));
    }
    let dispatch = strike_time - actuation_latency;
    if dispatch < SimTime::ZERO {
        return Err(Error::Scheduling {
            strike_time: strike_time.as_secs(),
            latency: actuation_latency.as_secs(),
        });
    }
    Ok(dispatch)
}

/// Beat grid derived from a tempo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeatClock {
    pub bpm: f64,
    pub beat_interval: f64,
    /// Start of the cycle being scheduled.
    pub next_beat_time: SimTime,
    /// A reference beat the grid is anchored to.
    pub phase: f64,
}

impl BeatClock {
    pub fn new(bpm: f64, next_beat_time: SimTime) -> Self {
        BeatClock {
            bpm,
            beat_interval: 60.0 / bpm,
            next_beat_time,
            phase: next_beat_time.as_secs(),
        }
    }

    /// Clamps the estimate into `[bpm_min, bpm_max]`.
    pub fn from_estimate(est: &TempoEstimate, bpm_min: f64, bpm_max: f64) -> Self {
        let bpm = est.bpm.clamp(bpm_min, bpm_max);
        BeatClock {
            bpm,
            beat_interval: 60.0 / bpm,
            next_beat_time: SimTime::from_secs(est.beat_phase),
            phase: est.beat_phase,
        }
    }

    pub fn interval(&self) -> SimDuration {
        SimDuration::from_secs(self.beat_interval)
    }

    fn beat(&self, k: f64) -> SimTime {
        SimTime::from_secs(self.phase + k * self.beat_interval)
    }

    /// Earliest predicted beat at or after `t`.
    pub fn next_beat_after(&self, t: SimTime) -> SimTime {
        let mut k = ((t.as_secs() - self.phase) / self.beat_interval).ceil();
        while self.beat(k) < t {
            k += 1.0;
        }
        while self.beat(k - 1.0) >= t {
            k -= 1.0;
        }
        self.beat(k)
    }

    pub fn nearest_beat(&self, t: SimTime) -> SimTime {
        let k = ((t.as_secs() - self.phase) / self.beat_interval).round();
        self.beat(k)
    }
}
