use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ActuatorId, ArmCommand, Command, DropReason, EventLogRecord, Outcome, SnippetLibrary};
use crate::conductor::ArmAction;
use crate::trajectory::JointConfig;
use crate::{Error, Result, SimDuration, SimTime};

pub const DEFAULT_RECOVERY_DELAY_S: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmConfig {
    /// Dispatch-to-motion delay.
    pub start_latency_s: f64,
    pub recovery_delay_s: f64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        ArmConfig {
            start_latency_s: 0.120,
            recovery_delay_s: DEFAULT_RECOVERY_DELAY_S,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArmState {
    Idle,
    PlayingSnippet { id: u8, start: SimTime, until: SimTime },
    Moving { start: SimTime, until: SimTime, from: JointConfig, to: JointConfig },
    SafetyStopped { since: SimTime },
}

pub struct VirtualArm {
    state: ArmState,
    current_config: JointConfig,
    rest_config: JointConfig,
    start_latency: SimDuration,
    snippets: Arc<SnippetLibrary>,
    stops: u64,
    resets: u64,
    downtime: SimDuration,
}

impl VirtualArm {
    pub fn new(rest_config: JointConfig, start_latency: SimDuration, snippets: Arc<SnippetLibrary>) -> Self {
        VirtualArm {
            state: ArmState::Idle,
            current_config: rest_config.clone(),
            rest_config,
            start_latency,
            snippets,
            stops: 0,
            resets: 0,
            downtime: SimDuration::ZERO,
        }
    }

    pub fn state(&self) -> &ArmState {
        &self.state
    }

    pub fn stops(&self) -> u64 {
        self.stops
    }

    pub fn resets(&self) -> u64 {
        self.resets
    }

    /// Total time spent safety-stopped up to `now`.
    pub fn downtime(&self, now: SimTime) -> SimDuration {
        match self.state {
            ArmState::SafetyStopped { since } if now > since => self.downtime + (now - since),
            _ => self.downtime,
        }
    }

    pub fn current_config(&self) -> &JointConfig {
        &self.current_config
    }

    /// Joint configuration at `t`, following any motion in progress.
    pub fn config_at(&self, t: SimTime) -> JointConfig {
        match &self.state {
            ArmState::PlayingSnippet { id, start, until } if t >= *start => {
                let traj = self.snippets.get(*id).expect("validated at dispatch");
                let t = t.min(*until);
                traj.config_at((t - *start).as_secs()).unwrap_or_else(|| self.current_config.clone())
            }
            ArmState::Moving { start, until, from, to } if t >= *start => {
                let span = (*until - *start).micros().max(1) as f64;
                let f = ((t - *start).micros() as f64 / span).clamp(0.0, 1.0);
                from.iter().zip(to).map(|(a, b)| a + (b - a) * f).collect()
            }
            _ => self.current_config.clone(),
        }
    }

    /// Completes any motion that has finished by `t`.
    fn settle(&mut self, t: SimTime) {
        let done = match &self.state {
            ArmState::PlayingSnippet { until, .. } | ArmState::Moving { until, .. } => *until <= t,
            _ => false,
        };
        if done {
            let until = match &self.state {
                ArmState::PlayingSnippet { until, .. } | ArmState::Moving { until, .. } => *until,
                _ => unreachable!(),
            };
            self.current_config = self.config_at(until);
            self.state = ArmState::Idle;
        }
    }
}

/// Starts a snippet or a pose move. Overlapping commands are dropped as
/// busy and anything sent to a stopped arm as safety.
pub fn execute_arm(arm: &mut VirtualArm, cmd: &ArmCommand, now: SimTime) -> Result<EventLogRecord> {
    arm.settle(now);
    let dropped = |reason| EventLogRecord::dropped(now, ActuatorId::Arm, Command::Arm(cmd.clone()), reason);
    let start = now + arm.start_latency;
    match arm.state {
        ArmState::SafetyStopped { .. } => return Ok(dropped(DropReason::Safety)),
        ArmState::PlayingSnippet { until, .. } | ArmState::Moving { until, .. } if until > start => {
            return Ok(dropped(DropReason::Busy));
        }
        _ => {}
    }
    arm.settle(start);
    let next = match cmd.action {
        ArmAction::Snippet(id) => {
            let traj = arm
                .snippets
                .get(id)
                .ok_or_else(|| Error::invalid(format!("snippet {id} does not exist")))?;
            ArmState::PlayingSnippet {
                id,
                start,
                until: start + SimDuration::from_secs(traj.duration()),
            }
        }
        ArmAction::RandomPose => {
            let to = cmd
                .pose
                .clone()
                .ok_or_else(|| Error::invalid("random-pose command carries no pose"))?;
            if to.len() != arm.current_config.len() {
                return Err(Error::invalid("pose has the wrong number of joints"));
            }
            ArmState::Moving {
                start,
                until: start + cmd.move_duration,
                from: arm.current_config.clone(),
                to,
            }
        }
    };
    arm.state = next;
    Ok(EventLogRecord {
        t_dispatch: now,
        t_strike_actual: Some(start),
        actuator: ActuatorId::Arm,
        command: Command::Arm(cmd.clone()),
        outcome: Outcome::Ok,
    })
}

/// Freezes the arm where it is at `at`. A stop on an already stopped arm
/// keeps the original stop time.
pub fn inject_safety_stop(arm: &mut VirtualArm, at: SimTime) {
    if matches!(arm.state, ArmState::SafetyStopped { .. }) {
        return;
    }
    arm.settle(at);
    arm.current_config = arm.config_at(at);
    arm.state = ArmState::SafetyStopped { since: at };
    arm.stops += 1;
}

/// Returns the arm to idle at rest once it has been stopped for
/// `recovery_delay`; yields the reset instant when that happens.
pub fn watchdog_step(arm: &mut VirtualArm, now: SimTime, recovery_delay: SimDuration) -> Option<SimTime> {
    let ArmState::SafetyStopped { since } = arm.state else {
        return None;
    };
    let reset_at = since + recovery_delay;
    if now < reset_at {
        return None;
    }
    arm.state = ArmState::Idle;
    arm.current_config = arm.rest_config.clone();
    arm.downtime = arm.downtime + recovery_delay;
    arm.resets += 1;
    Some(reset_at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::JointTrajectory;

    fn library() -> Arc<SnippetLibrary> {
        let traj = |secs: f64| JointTrajectory {
            times: vec![0.0, secs],
            configs: vec![vec![0.0, 1.0, 0.5], vec![0.2, 1.2, 0.7]],
        };
        Arc::new(SnippetLibrary::new(vec![traj(1.5), traj(2.0), traj(2.5)]).unwrap())
    }

    fn arm() -> VirtualArm {
        VirtualArm::new(vec![0.3, 1.2, 0.6], SimDuration::ZERO, library())
    }

    fn snippet(id: u8) -> ArmCommand {
        ArmCommand {
            action: ArmAction::Snippet(id),
            pose: None,
            move_duration: SimDuration::from_secs(0.5),
        }
    }

    fn pose() -> ArmCommand {
        ArmCommand {
            action: ArmAction::RandomPose,
            pose: Some(vec![0.0, 1.0, 0.0]),
            move_duration: SimDuration::from_secs(0.5),
        }
    }

    #[test]
    fn snippet_on_idle_arm() {
        let mut a = arm();
        let r = execute_arm(&mut a, &snippet(2), SimTime::from_secs(3.0)).unwrap();
        assert_eq!(r.outcome, Outcome::Ok);
        assert_eq!(
            *a.state(),
            ArmState::PlayingSnippet {
                id: 2,
                start: SimTime::from_secs(3.0),
                until: SimTime::from_secs(5.0)
            }
        );
    }

    #[test]
    fn overlapping_command_is_busy() {
        let mut a = arm();
        execute_arm(&mut a, &snippet(1), SimTime::from_secs(0.0)).unwrap();
        let r = execute_arm(&mut a, &pose(), SimTime::from_secs(1.0)).unwrap();
        assert_eq!(r.outcome, Outcome::Dropped(DropReason::Busy));
        let r = execute_arm(&mut a, &pose(), SimTime::from_secs(1.5)).unwrap();
        assert_eq!(r.outcome, Outcome::Ok);
    }

    #[test]
    fn stopped_arm_drops_everything() {
        let mut a = arm();
        inject_safety_stop(&mut a, SimTime::from_secs(1.0));
        for c in [snippet(1), snippet(3), pose()] {
            let r = execute_arm(&mut a, &c, SimTime::from_secs(2.0)).unwrap();
            assert_eq!(r.outcome, Outcome::Dropped(DropReason::Safety));
        }
    }

    #[test]
    fn stop_truncates_a_snippet() {
        let mut a = arm();
        execute_arm(&mut a, &snippet(3), SimTime::from_secs(0.0)).unwrap();
        let mid = a.config_at(SimTime::from_secs(1.25));
        inject_safety_stop(&mut a, SimTime::from_secs(1.25));
        assert_eq!(*a.state(), ArmState::SafetyStopped { since: SimTime::from_secs(1.25) });
        assert_eq!(a.current_config(), &mid);
        // Frozen: the config no longer follows the snippet.
        assert_eq!(a.config_at(SimTime::from_secs(2.0)), mid);
    }

    #[test]
    fn stop_while_idle() {
        let mut a = arm();
        inject_safety_stop(&mut a, SimTime::from_secs(4.0));
        assert!(matches!(a.state(), ArmState::SafetyStopped { .. }));
    }

    #[test]
    fn watchdog_resets_after_delay() {
        let mut a = arm();
        let delay = SimDuration::from_secs(5.0);
        inject_safety_stop(&mut a, SimTime::from_secs(100.0));
        assert_eq!(watchdog_step(&mut a, SimTime::from_secs(104.999), delay), None);
        assert_eq!(watchdog_step(&mut a, SimTime::from_secs(105.0), delay), Some(SimTime::from_secs(105.0)));
        assert_eq!(*a.state(), ArmState::Idle);
        assert_eq!(a.current_config(), &vec![0.3, 1.2, 0.6]);
        assert_eq!(watchdog_step(&mut a, SimTime::from_secs(106.0), delay), None);
    }

    #[test]
    fn two_stops_two_recoveries() {
        let mut a = arm();
        let delay = SimDuration::from_secs(5.0);
        let mut resets = Vec::new();
        for stop in [10.0, 70.0] {
            inject_safety_stop(&mut a, SimTime::from_secs(stop));
            let mut t = SimTime::from_secs(stop);
            while t < SimTime::from_secs(stop + 30.0) {
                resets.extend(watchdog_step(&mut a, t, delay));
                t += SimDuration::from_secs(0.5);
            }
        }
        assert_eq!(resets, vec![SimTime::from_secs(15.0), SimTime::from_secs(75.0)]);
        assert_eq!(a.downtime(SimTime::from_secs(200.0)), SimDuration::from_secs(10.0));
    }

    #[test]
    fn spaced_commands_never_drop() {
        let mut a = arm();
        let lib = library();
        let mut t = SimTime::ZERO;
        for i in 0..40u8 {
            let c = if i % 2 == 0 { snippet(1 + i % 3) } else { pose() };
            let r = execute_arm(&mut a, &c, t).unwrap();
            assert_eq!(r.outcome, Outcome::Ok, "command {i}");
            let d = match c.action {
                ArmAction::Snippet(id) => SimDuration::from_secs(lib.get(id).unwrap().duration()),
                ArmAction::RandomPose => c.move_duration,
            };
            t += d;
        }
    }

    #[test]
    fn pose_move_interpolates() {
        let mut a = arm();
        execute_arm(&mut a, &pose(), SimTime::ZERO).unwrap();
        let q = a.config_at(SimTime::from_secs(0.25));
        for ((x, from), to) in q.iter().zip([0.3, 1.2, 0.6]).zip([0.0, 1.0, 0.0]) {
            assert!((x - (from + to) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_snippet_is_an_error() {
        let mut a = arm();
        assert!(execute_arm(&mut a, &snippet(4), SimTime::ZERO).is_err());
    }
}
