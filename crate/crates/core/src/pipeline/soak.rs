use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::actuators::{
    ActuatorHost, ArmConfig, DrumBankConfig, LogKind, LogLine, SnippetLibrary, VirtualArm, VirtualDrumBank,
};
use crate::analysis::{DensityEstimate, Feature, TempoEstimate};
use crate::conductor::{Conductor, ConductorConfig};
use crate::trajectory::{ArmModel, RetargetOptions};
use crate::{Result, SimDuration, SimTime};

/// A long steady-state run driven straight from features, without audio.
#[derive(Clone, Debug)]
pub struct SoakConfig {
    pub duration_s: f64,
    pub bpm: f64,
    /// Onset density fed to the conductor, onsets/s.
    pub density: f64,
    pub seed: u64,
    pub safety_stops_s: Vec<f64>,
    pub conductor: ConductorConfig,
    pub drums: DrumBankConfig,
    pub arm_config: ArmConfig,
    pub arm: ArmModel,
}

impl SoakConfig {
    pub fn new(duration_s: f64, seed: u64) -> Self {
        SoakConfig {
            duration_s,
            bpm: 120.0,
            density: 2.0,
            seed,
            safety_stops_s: Vec::new(),
            conductor: ConductorConfig::default(),
            drums: DrumBankConfig::default(),
            arm_config: ArmConfig::default(),
            arm: ArmModel::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SoakReport {
    pub duration_s: f64,
    pub commands_dispatched: u64,
    pub command_lines: u64,
    pub drum_ok: u64,
    pub drum_dropped: u64,
    pub arm_ok: u64,
    pub arm_dropped_safety: u64,
    pub arm_dropped_busy: u64,
    pub safety_stops: u64,
    pub watchdog_resets: u64,
    /// `(stop, reset)` instants in seconds.
    pub recoveries: Vec<(f64, f64)>,
    pub arm_downtime_s: f64,
    pub arm_uptime: f64,
    pub max_drum_gap_s: f64,
    pub patterns: u64,
    /// Hash over every drum log line, for comparing runs.
    pub drum_digest: u64,
}

/// Stop instants from a Poisson process of `rate_per_hour`.
pub fn poisson_stop_times(rate_per_hour: f64, duration_s: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = Exp::new(rate_per_hour / 3600.0).expect("rate must be positive");
    let mut out = Vec::new();
    let mut t = exp.sample(&mut rng);
    while t < duration_s {
        out.push(t);
        t += exp.sample(&mut rng);
    }
    out
}

/// Steps conductor and actuators event by event over the whole span and
/// hands every log line to `visit`.
pub fn run_soak(cfg: &SoakConfig, mut visit: impl FnMut(&LogLine)) -> Result<SoakReport> {
    let mut conductor = Conductor::new(cfg.conductor.clone(), cfg.arm.clone(), cfg.seed)?;
    let snippets = SnippetLibrary::load(None, &cfg.arm, &RetargetOptions::default())?;
    let arm = VirtualArm::new(
        cfg.arm.rest_config.clone(),
        SimDuration::from_secs(cfg.arm_config.start_latency_s),
        Arc::new(snippets),
    );
    let stops = cfg.safety_stops_s.iter().map(|&t| SimTime::from_secs(t)).collect();
    let mut host = ActuatorHost::new(
        VirtualDrumBank::new(&cfg.drums)?,
        arm,
        SimDuration::from_secs(cfg.arm_config.recovery_delay_s),
        cfg.seed,
    )
    .with_safety_stops(stops);

    conductor.on_feature(&Feature::Gate { time: 0.0, active: true });
    conductor.on_feature(&Feature::Density(DensityEstimate {
        value: cfg.density,
        window: 4.0,
        time: 0.0,
    }));
    conductor.on_feature(&Feature::Tempo(TempoEstimate {
        bpm: cfg.bpm,
        beat_phase: 0.0,
        confidence: 1.0,
        stable: true,
        time: 0.0,
    }));

    let end = SimTime::from_secs(cfg.duration_s);
    let mut report = SoakReport {
        duration_s: cfg.duration_s,
        ..SoakReport::default()
    };
    let mut hasher = DefaultHasher::new();
    let mut last_drum: Option<f64> = None;
    let mut pending_stop: Option<f64> = None;
    let mut lines = Vec::new();
    let mut t = SimTime::ZERO;

    let mut absorb = |lines: &mut Vec<LogLine>, report: &mut SoakReport| {
        for l in lines.drain(..) {
            match l.kind {
                LogKind::Strike => {
                    report.command_lines += 1;
                    l.to_json().hash(&mut hasher);
                    if l.is_ok() {
                        report.drum_ok += 1;
                        let ts = l.t_strike_actual.expect("ok strikes sound");
                        if let Some(prev) = last_drum {
                            report.max_drum_gap_s = report.max_drum_gap_s.max(ts - prev);
                        }
                        last_drum = Some(ts);
                    } else {
                        report.drum_dropped += 1;
                    }
                }
                LogKind::SafetyStop => {
                    report.safety_stops += 1;
                    // A stop during an outage does not restart it.
                    pending_stop.get_or_insert(l.t_dispatch);
                }
                LogKind::WatchdogReset => {
                    report.watchdog_resets += 1;
                    if let Some(s) = pending_stop.take() {
                        report.recoveries.push((s, l.t_dispatch));
                    }
                }
                _ => {
                    report.command_lines += 1;
                    match (l.is_ok(), l.reason) {
                        (true, _) => report.arm_ok += 1,
                        (false, Some(crate::actuators::DropReason::Safety)) => report.arm_dropped_safety += 1,
                        (false, _) => report.arm_dropped_busy += 1,
                    }
                }
            }
            visit(&l);
        }
    };

    loop {
        for e in conductor.step(t) {
            report.commands_dispatched += 1;
            host.dispatch(&e, &mut lines)?;
        }
        absorb(&mut lines, &mut report);
        match conductor.next_wakeup() {
            Some(next) if next <= end => t = next,
            _ => break,
        }
    }
    host.advance_to(end, &mut lines);
    absorb(&mut lines, &mut report);

    report.patterns = conductor.stats().patterns_generated;
    report.drum_digest = hasher.finish();
    report.arm_downtime_s = host.arm.downtime(end).as_secs();
    report.arm_uptime = 1.0 - report.arm_downtime_s / cfg.duration_s;
    Ok(report)
}
