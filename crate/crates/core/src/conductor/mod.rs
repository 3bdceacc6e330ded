//! Beat clock, pattern lifecycle, and latency-compensated scheduling.
//!
//! The conductor turns analysis features into a queue of timestamped
//! actuator commands. Each command is dispatched `actuation_latency` before
//! the moment it should sound, so movement and transport time land the hit
//! on the beat.

mod clock;
mod schedule;

use std::collections::VecDeque;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actuators::{ArmCommand, Command};
use crate::analysis::{DensityEstimate, Feature, TempoEstimate};
use crate::rhythmgen::{self, GenParams, GridPattern, BARS_PER_PATTERN_CYCLE};
use crate::trajectory::{random_pose, ArmModel};
use crate::{Error, Result, SimDuration, SimTime};

pub use clock::{compute_dispatch_time, BeatClock};
pub use schedule::{schedule_cycle, schedule_cycle_with, select_arm_action, ArmAction, Latencies, ScheduledEvent};

pub const BEATS_PER_CYCLE: u32 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConductorConfig {
    /// Lead between dispatch and the intended strike, covering software,
    /// transport, and movement time.
    pub actuation_latency_s: f64,
    /// Arm-specific lead; defaults to `actuation_latency_s`.
    pub arm_latency_s: Option<f64>,
    pub p_snippet: f64,
    /// Density change (onsets/s) since a pattern's birth that forces a new one.
    pub delta_density_sig: f64,
    pub bpm_min: f64,
    pub bpm_max: f64,
    /// Onset density mapped to generator density 1.0.
    pub density_full_scale: f64,
    /// Slot spacing below which cycles are thinned to eighth notes.
    pub min_slot_spacing_s: f64,
    pub min_play_prob: f64,
}

impl Default for ConductorConfig {
    fn default() -> Self {
        ConductorConfig {
            actuation_latency_s: 0.120,
            arm_latency_s: None,
            p_snippet: 0.4,
            delta_density_sig: 1.0,
            bpm_min: 70.0,
            bpm_max: 180.0,
            density_full_scale: 8.0,
            min_slot_spacing_s: 0.040,
            min_play_prob: rhythmgen::DEFAULT_MIN_PLAY_PROB,
        }
    }
}

impl ConductorConfig {
    pub fn latencies(&self) -> Latencies {
        Latencies {
            strike: SimDuration::from_secs(self.actuation_latency_s),
            arm: SimDuration::from_secs(self.arm_latency_s.unwrap_or(self.actuation_latency_s)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.actuation_latency_s >= 0.0 && self.actuation_latency_s.is_finite()) {
            return Err(Error::Config("actuation_latency_s must be non-negative".into()));
        }
        if let Some(a) = self.arm_latency_s {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Config("arm_latency_s must be non-negative".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.p_snippet) {
            return Err(Error::Config("p_snippet must lie in [0, 1]".into()));
        }
        if !(self.delta_density_sig > 0.0) {
            return Err(Error::Config("delta_density_sig must be positive".into()));
        }
        if !(self.bpm_min > 0.0 && self.bpm_max > self.bpm_min) {
            return Err(Error::Config("bpm range must satisfy 0 < bpm_min < bpm_max".into()));
        }
        if !(self.density_full_scale > 0.0) {
            return Err(Error::Config("density_full_scale must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_play_prob) {
            return Err(Error::Config("min_play_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct ActivePattern {
    id: u64,
    pattern: GridPattern,
    densities: Vec<DensityEstimate>,
    bars_played: u32,
}

#[derive(Clone, Copy, Debug)]
struct NextCycle {
    start: SimTime,
    /// First time the cycle may be enqueued.
    enqueue_at: SimTime,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConductorStats {
    pub cycles_scheduled: u64,
    pub cycles_skipped: u64,
    pub patterns_generated: u64,
    pub events_cancelled: u64,
}

/// Drives the system flowchart from features to dispatched commands.
pub struct Conductor {
    cfg: ConductorConfig,
    latencies: Latencies,
    arm: ArmModel,
    rng: ChaCha8Rng,

    volume_open: bool,
    tempo: Option<TempoEstimate>,
    density: Option<DensityEstimate>,

    pattern: Option<ActivePattern>,
    next_pattern_id: u64,
    next_cycle: Option<NextCycle>,
    queue: VecDeque<ScheduledEvent>,
    now: Option<SimTime>,
    stats: ConductorStats,
}

impl Conductor {
    pub fn new(cfg: ConductorConfig, arm: ArmModel, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Conductor {
            latencies: cfg.latencies(),
            cfg,
            arm,
            rng: ChaCha8Rng::seed_from_u64(seed),
            volume_open: false,
            tempo: None,
            density: None,
            pattern: None,
            next_pattern_id: 0,
            next_cycle: None,
            queue: VecDeque::new(),
            now: None,
            stats: ConductorStats::default(),
        })
    }

    pub fn config(&self) -> &ConductorConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &ConductorStats {
        &self.stats
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Both the volume gate and the tempo-stability gate are open.
    pub fn gates_open(&self) -> bool {
        self.volume_open && self.tempo.is_some_and(|t| t.stable)
    }

    pub fn on_feature(&mut self, feature: &Feature) {
        match *feature {
            Feature::Gate { active, .. } => {
                self.volume_open = active;
                if !active {
                    self.tempo = None;
                }
            }
            Feature::Tempo(t) => self.tempo = Some(t),
            Feature::Density(d) => {
                self.density = Some(d);
                if let Some(p) = &mut self.pattern {
                    p.densities.push(d);
                }
            }
            Feature::Onset(_) => {}
        }
    }

    /// Earliest future time at which `step` has work: a due dispatch or a
    /// cycle to enqueue.
    pub fn next_wakeup(&self) -> Option<SimTime> {
        let due = self.queue.front().map(|e| e.dispatch_time);
        let enqueue = self.next_cycle.map(|c| c.enqueue_at);
        match (due, enqueue) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Advances to `now` and returns every event with `dispatch_time <= now`
    /// in dispatch order. With a gate closed, pending events are cancelled
    /// and nothing new is scheduled.
    ///
    /// # Panics
    ///
    /// If `now` is earlier than the previous call's.
    pub fn step(&mut self, now: SimTime) -> Vec<ScheduledEvent> {
        if let Some(prev) = self.now {
            assert!(now >= prev, "conductor clock regressed from {prev} to {now}");
        }
        self.now = Some(now);

        if !self.gates_open() {
            self.stats.events_cancelled += self.queue.len() as u64;
            self.queue.clear();
            self.pattern = None;
            self.next_cycle = None;
            return Vec::new();
        }

        loop {
            let next = match self.next_cycle {
                Some(c) => c,
                None => {
                    let c = self.first_cycle(now);
                    self.next_cycle = Some(c);
                    c
                }
            };
            if now < next.enqueue_at {
                break;
            }
            self.enqueue_cycle(next.start, now);
        }

        let mut out = Vec::new();
        while self.queue.front().is_some_and(|e| e.dispatch_time <= now) {
            out.extend(self.queue.pop_front());
        }
        out
    }

    fn clock(&self) -> BeatClock {
        let t = self.tempo.expect("gates open implies a tempo estimate");
        BeatClock::from_estimate(&t, self.cfg.bpm_min, self.cfg.bpm_max)
    }

    fn max_lead(&self) -> SimDuration {
        self.latencies.strike.max(self.latencies.arm)
    }

    /// Next predicted beat whose dispatch is still feasible.
    fn first_cycle(&self, now: SimTime) -> NextCycle {
        let start = self.clock().next_beat_after(now + self.max_lead());
        NextCycle { start, enqueue_at: now }
    }

    fn enqueue_cycle(&mut self, start: SimTime, now: SimTime) {
        let mut clock = self.clock();
        clock.next_beat_time = start;
        let interval = clock.interval();

        if self.needs_new_pattern() {
            self.new_pattern();
        }
        let active = self.pattern.as_mut().expect("pattern present");
        let realization = rhythmgen::realize_cycle(&active.pattern, &mut self.rng);
        let (pattern_id, bar_offset) = (active.id, active.bars_played);

        let action = select_arm_action(&mut self.rng, self.cfg.p_snippet);
        let pose = matches!(action, ArmAction::RandomPose).then(|| random_pose(&self.arm, &mut self.rng));
        let arm = ArmCommand {
            action,
            pose,
            move_duration: interval,
        };

        match schedule_cycle_with(
            &realization,
            &clock,
            arm,
            self.latencies,
            SimDuration::from_secs(self.cfg.min_slot_spacing_s),
        ) {
            Ok(mut events) => {
                for e in &mut events {
                    e.pattern_id = pattern_id;
                    e.bar_index += bar_offset;
                    debug_assert!(e.dispatch_time >= now);
                }
                self.queue.extend(events);
                self.stats.cycles_scheduled += 1;
            }
            Err(_) => self.stats.cycles_skipped += 1,
        }
        if let Some(p) = &mut self.pattern {
            p.bars_played += BARS_PER_PATTERN_CYCLE;
        }

        // Re-lock the following cycle to the latest beat prediction.
        let nominal = start + SimDuration(interval.micros() * BEATS_PER_CYCLE as i64);
        let last_slot = start + SimDuration(interval.micros() * (BEATS_PER_CYCLE as i64 * 4 - 1) / 4);
        let predicted = self.clock().nearest_beat(nominal);
        let mut next_start = if predicted > last_slot { predicted } else { nominal };
        while next_start - self.max_lead() < now {
            next_start += interval;
        }
        let enqueue_at = next_start - self.max_lead() - interval;
        self.next_cycle = Some(NextCycle {
            start: next_start,
            enqueue_at: enqueue_at.max(now),
        });
    }

    fn needs_new_pattern(&self) -> bool {
        match &self.pattern {
            None => true,
            Some(p) => rhythmgen::should_regenerate(&p.densities, p.bars_played, self.cfg.delta_density_sig),
        }
    }

    fn new_pattern(&mut self) {
        let density = self.density.map_or(0.0, |d| d.value);
        let params = GenParams {
            density: density / self.cfg.density_full_scale,
            syncopation: self.rng.random(),
            seed: self.rng.next_u64(),
            min_play_prob: self.cfg.min_play_prob,
        };
        let pattern = rhythmgen::generate_pattern(&params);
        let id = self.next_pattern_id;
        self.next_pattern_id += 1;
        self.stats.patterns_generated += 1;
        self.pattern = Some(ActivePattern {
            id,
            pattern,
            densities: self.density.into_iter().collect(),
            bars_played: 0,
        });
    }
}

pub(crate) fn command_rank(command: &Command) -> u8 {
    match command {
        Command::Strike(s) => s.drum,
        Command::Arm(_) => rhythmgen::DRUMS,
    }
}
