use rand::Rng;
use serde::{Deserialize, Serialize};

use super::clock::{compute_dispatch_time, BeatClock};
use super::command_rank;
use crate::actuators::{ArmCommand, Command, StrikeCommand};
use crate::rhythmgen::{CycleRealization, SLOTS_PER_BAR};
use crate::{Error, Result, SimDuration, SimTime};

const DEFAULT_MIN_SLOT_SPACING: SimDuration = SimDuration(40_000);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum ArmAction {
    Snippet(u8),
    RandomPose,
}

/// Dispatch leads per actuator class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Latencies {
    pub strike: SimDuration,
    pub arm: SimDuration,
}

impl Latencies {
    pub fn uniform(lead: SimDuration) -> Self {
        Latencies { strike: lead, arm: lead }
    }
}

impl Default for Latencies {
    fn default() -> Self {
        Latencies::uniform(SimDuration::from_secs(0.120))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledEvent {
    pub dispatch_time: SimTime,
    pub strike_time: SimTime,
    pub command: Command,
    pub pattern_id: u64,
    /// Bar within the pattern's 32-bar life.
    pub bar_index: u32,
}

impl ScheduledEvent {
    /// Tie-break among events dispatched at the same instant.
    pub fn rank(&self) -> u8 {
        command_rank(&self.command)
    }
}

/// Snippet with probability `p_snippet` (uniform among the three), else a
/// random pose.
pub fn select_arm_action(rng: &mut impl Rng, p_snippet: f64) -> ArmAction {
    if rng.random::<f64>() < p_snippet {
        ArmAction::Snippet(rng.random_range(1..=3))
    } else {
        ArmAction::RandomPose
    }
}

/// Lays a realized cycle onto the sixteenth grid starting at
/// `clock.next_beat_time`, plus one arm event on the first beat.
pub fn schedule_cycle(
    realization: &CycleRealization,
    clock: &BeatClock,
    arm: ArmCommand,
    latencies: Latencies,
) -> Result<Vec<ScheduledEvent>> {
    schedule_cycle_with(realization, clock, arm, latencies, DEFAULT_MIN_SLOT_SPACING)
}

/// As [`schedule_cycle`]; cycles whose slot spacing falls below
/// `min_slot_spacing` keep only the eighth-note slots.
pub fn schedule_cycle_with(
    realization: &CycleRealization,
    clock: &BeatClock,
    arm: ArmCommand,
    latencies: Latencies,
    min_slot_spacing: SimDuration,
) -> Result<Vec<ScheduledEvent>> {
    let lead = latencies.strike.max(latencies.arm);
    if !(clock.beat_interval > lead.as_secs()) {
        return Err(Error::TempoTooFast {
            beat_interval: clock.beat_interval,
            latency: lead.as_secs(),
        });
    }
    let start = clock.next_beat_time;
    let slot_spacing = clock.beat_interval / 4.0;
    let thin = slot_spacing < min_slot_spacing.as_secs();

    let mut events = Vec::with_capacity(realization.strikes.len() + 1);
    events.push(ScheduledEvent {
        dispatch_time: compute_dispatch_time(start, latencies.arm)?,
        strike_time: start,
        command: Command::Arm(arm),
        pattern_id: 0,
        bar_index: 0,
    });
    for &(slot, spec) in &realization.strikes {
        if thin && slot % 2 == 1 {
            continue;
        }
        let strike_time = start + SimDuration::from_secs(slot as f64 * slot_spacing);
        events.push(ScheduledEvent {
            dispatch_time: compute_dispatch_time(strike_time, latencies.strike)?,
            strike_time,
            command: Command::Strike(StrikeCommand {
                drum: spec.drum,
                target: spec.target,
            }),
            pattern_id: 0,
            bar_index: (slot / SLOTS_PER_BAR) as u32,
        });
    }
    events.sort_by_key(|e| (e.dispatch_time, e.rank()));
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhythmgen::{DrumStrikeSpec, StrikeTarget, SLOTS};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pose_cmd() -> ArmCommand {
        ArmCommand {
            action: ArmAction::RandomPose,
            pose: Some(vec![0.3, 1.2, 0.6]),
            move_duration: SimDuration::from_secs(0.5),
        }
    }

    fn spec(drum: u8) -> DrumStrikeSpec {
        DrumStrikeSpec {
            drum,
            target: StrikeTarget::Rim,
            play_prob: 1.0,
        }
    }

    fn clock(bpm: f64, start: f64) -> BeatClock {
        BeatClock::new(bpm, SimTime::from_secs(start))
    }

    #[test]
    fn empty_realization_yields_only_the_arm_event() {
        let ev = schedule_cycle(&CycleRealization::default(), &clock(120.0, 20.0), pose_cmd(), Latencies::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert!(matches!(ev[0].command, Command::Arm(_)));
        assert_eq!(ev[0].strike_time, SimTime::from_secs(20.0));
    }

    #[test]
    fn grid_arithmetic() {
        let r = CycleRealization {
            strikes: vec![(0, spec(3)), (4, spec(1))],
        };
        let ev = schedule_cycle(&r, &clock(120.0, 20.0), pose_cmd(), Latencies::default()).unwrap();
        let strikes: Vec<_> = ev
            .iter()
            .filter(|e| matches!(e.command, Command::Strike(_)))
            .map(|e| (e.strike_time, e.dispatch_time))
            .collect();
        assert_eq!(
            strikes,
            vec![
                (SimTime::from_secs(20.0), SimTime::from_secs(19.88)),
                (SimTime::from_secs(20.5), SimTime::from_secs(20.38)),
            ]
        );
    }

    #[test]
    fn full_realization_is_strictly_ordered() {
        let r = CycleRealization {
            strikes: (0..SLOTS).map(|i| (i, spec((i % 6) as u8))).collect(),
        };
        let ev = schedule_cycle(&r, &clock(120.0, 20.0), pose_cmd(), Latencies::default()).unwrap();
        assert_eq!(ev.len(), 33);
        let mut brute = ev.clone();
        brute.sort_by(|a, b| {
            a.dispatch_time
                .cmp(&b.dispatch_time)
                .then(a.rank().cmp(&b.rank()))
        });
        assert_eq!(brute, ev);
        for w in ev.windows(2) {
            assert!((w[0].dispatch_time, w[0].rank()) < (w[1].dispatch_time, w[1].rank()));
        }
    }

    #[test]
    fn too_fast_tempo_is_rejected() {
        let mut c = clock(120.0, 20.0);
        c.beat_interval = 0.1;
        let r = schedule_cycle(&CycleRealization::default(), &c, pose_cmd(), Latencies::default());
        assert!(matches!(r, Err(Error::TempoTooFast { .. })));
    }

    #[test]
    fn narrow_slots_are_thinned_to_eighths() {
        let r = CycleRealization {
            strikes: (0..SLOTS).map(|i| (i, spec(0))).collect(),
        };
        let ev = schedule_cycle(&r, &clock(400.0, 20.0), pose_cmd(), Latencies::uniform(SimDuration::from_secs(0.1))).unwrap();
        assert_eq!(ev.len(), 1 + SLOTS / 2);
    }

    #[test]
    fn arm_action_certainties() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..500).all(|_| matches!(select_arm_action(&mut rng, 1.0), ArmAction::Snippet(1..=3))));
        assert!((0..500).all(|_| select_arm_action(&mut rng, 0.0) == ArmAction::RandomPose));
    }

    #[test]
    fn arm_action_frequencies_match_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            match select_arm_action(&mut rng, 0.5) {
                ArmAction::Snippet(i) => counts[i as usize] += 1,
                ArmAction::RandomPose => counts[0] += 1,
            }
        }
        let snippet = (counts[1] + counts[2] + counts[3]) as f64 / n as f64;
        assert!((snippet - 0.5).abs() <= 0.02);
        for c in &counts[1..] {
            assert!((*c as f64 / n as f64 - 1.0 / 6.0).abs() <= 0.02);
        }
    }

    #[test]
    fn selection_is_seed_deterministic() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| select_arm_action(&mut rng, 0.4)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }
}
