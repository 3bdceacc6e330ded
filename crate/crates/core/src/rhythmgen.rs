//! Stochastic two-bar drum patterns.
//!
//! A pattern is 32 sixteenth-note slots (two bars of 4/4). Density sets how
//! many slots are filled, syncopation how strongly the fill favours
//! off-beat slots, and every filled slot carries its own probability of
//! sounding on each pass through the pattern.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::DensityEstimate;
use crate::{Error, Result};

pub const SLOTS: usize = 32;
pub const SLOTS_PER_BAR: usize = 16;
pub const BARS_PER_PATTERN_CYCLE: u32 = 2;
pub const DRUMS: u8 = 6;
/// Bars after which a pattern is always replaced.
pub const REGENERATE_AFTER_BARS: u32 = 32;
pub const DEFAULT_MIN_PLAY_PROB: f64 = 0.6;

const ON_BEAT_SLOTS: usize = SLOTS / 4;
const OFF_BEAT_SLOTS: usize = SLOTS - ON_BEAT_SLOTS;

/// Quarter-note positions; everything else is off the beat.
pub fn is_on_beat(slot: usize) -> bool {
    slot % 4 == 0
}

/// Number of filled slots for a density in `[0, 1]`.
pub fn filled_slot_count(density: f64) -> usize {
    (4.0 + 24.0 * density.clamp(0.0, 1.0)).round() as usize
}

/// Relative weight of one off-beat slot against an on-beat slot.
pub fn off_beat_weight(syncopation: f64) -> f64 {
    1.0 + 3.0 * syncopation.clamp(0.0, 1.0)
}

/// Probability that a single draw lands off the beat.
pub fn off_beat_draw_probability(syncopation: f64) -> f64 {
    let w = off_beat_weight(syncopation);
    OFF_BEAT_SLOTS as f64 * w / (ON_BEAT_SLOTS as f64 + OFF_BEAT_SLOTS as f64 * w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub density: f64,
    pub syncopation: f64,
    pub seed: u64,
    #[serde(default = "default_min_play_prob")]
    pub min_play_prob: f64,
}

fn default_min_play_prob() -> f64 {
    DEFAULT_MIN_PLAY_PROB
}

impl GenParams {
    pub fn new(density: f64, syncopation: f64, seed: u64) -> Self {
        GenParams {
            density,
            syncopation,
            seed,
            min_play_prob: DEFAULT_MIN_PLAY_PROB,
        }
        .clamped()
    }

    pub fn clamped(self) -> Self {
        let unit = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        GenParams {
            density: unit(self.density),
            syncopation: unit(self.syncopation),
            seed: self.seed,
            min_play_prob: unit(self.min_play_prob),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrikeTarget {
    Rim,
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrumStrikeSpec {
    pub drum: u8,
    pub target: StrikeTarget,
    pub play_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPattern {
    pub slots: Vec<Option<DrumStrikeSpec>>,
    pub params_used: GenParams,
}

impl GridPattern {
    pub fn filled(&self) -> impl Iterator<Item = (usize, &DrumStrikeSpec)> {
        self.slots.iter().enumerate().filter_map(|(i, s)| s.as_ref().map(|s| (i, s)))
    }

    pub fn filled_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn off_beat_fraction(&self) -> f64 {
        let n = self.filled_count();
        if n == 0 {
            return 0.0;
        }
        self.filled().filter(|(i, _)| !is_on_beat(*i)).count() as f64 / n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots.len() != SLOTS {
            return Err(Error::invalid(format!("pattern has {} slots, expected {SLOTS}", self.slots.len())));
        }
        for (i, spec) in self.filled() {
            if spec.drum >= DRUMS {
                return Err(Error::invalid(format!("slot {i}: drum {} out of range", spec.drum)));
            }
            if !(0.0..=1.0).contains(&spec.play_prob) {
                return Err(Error::invalid(format!("slot {i}: play_prob {} outside [0, 1]", spec.play_prob)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pattern serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pattern: GridPattern = serde_json::from_str(text)?;
        pattern.validate()?;
        Ok(pattern)
    }
}

/// Fills `filled_slot_count(density)` slots. Each draw first picks on- or
/// off-beat with probability proportional to that class's total weight over
/// the grid, then a free slot of the class uniformly; a class with no free
/// slots left yields to the other.
pub fn generate_pattern(params: &GenParams) -> GridPattern {
    let params = params.clamped();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let count = filled_slot_count(params.density);
    let p_off = off_beat_draw_probability(params.syncopation);

    let mut free_on: Vec<usize> = (0..SLOTS).filter(|&s| is_on_beat(s)).collect();
    let mut free_off: Vec<usize> = (0..SLOTS).filter(|&s| !is_on_beat(s)).collect();
    let mut slots = vec![None; SLOTS];
    for _ in 0..count {
        let want_off = rng.random_bool(p_off);
        let pool = match (want_off, free_off.is_empty(), free_on.is_empty()) {
            (true, false, _) | (false, false, true) => &mut free_off,
            _ => &mut free_on,
        };
        let slot = pool.swap_remove(rng.random_range(0..pool.len()));
        let play_prob = if params.min_play_prob < 1.0 {
            rng.random_range(params.min_play_prob..=1.0)
        } else {
            1.0
        };
        slots[slot] = Some(DrumStrikeSpec {
            drum: rng.random_range(0..DRUMS),
            target: if rng.random_bool(0.5) {
                StrikeTarget::Rim
            } else {
                StrikeTarget::Interior
            },
            play_prob,
        });
    }
    GridPattern {
        slots,
        params_used: params,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleRealization {
    pub strikes: Vec<(usize, DrumStrikeSpec)>,
}

/// One pass through the pattern: each filled slot sounds independently with
/// its own probability.
pub fn realize_cycle(pattern: &GridPattern, rng: &mut impl Rng) -> CycleRealization {
    let strikes = pattern
        .filled()
        .filter(|(_, spec)| rng.random_bool(spec.play_prob.clamp(0.0, 1.0)))
        .map(|(i, spec)| (i, *spec))
        .collect();
    CycleRealization { strikes }
}

/// `history` runs from the pattern's birth (first entry) to now (last).
pub fn should_regenerate(history: &[DensityEstimate], bars_played: u32, delta_sig: f64) -> bool {
    if bars_played >= REGENERATE_AFTER_BARS {
        return true;
    }
    match (history.first(), history.last()) {
        (Some(birth), Some(current)) => (current.value - birth.value).abs() >= delta_sig,
        _ => false,
    }
}
