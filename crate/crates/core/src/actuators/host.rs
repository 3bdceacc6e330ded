use std::collections::VecDeque;

use super::{
    execute_arm, execute_strike, inject_safety_stop, watchdog_step, Command, LogKind, LogLine, VirtualArm,
    VirtualDrumBank,
};
use crate::conductor::ScheduledEvent;
use crate::{Result, SimDuration, SimTime};

/// Owns both actuators, applies scheduled safety stops and the watchdog in
/// time order, and turns each dispatch into log lines.
pub struct ActuatorHost {
    pub bank: VirtualDrumBank,
    pub arm: VirtualArm,
    stops: VecDeque<SimTime>,
    recovery_delay: SimDuration,
    seed: u64,
    now: SimTime,
}

impl ActuatorHost {
    pub fn new(bank: VirtualDrumBank, arm: VirtualArm, recovery_delay: SimDuration, seed: u64) -> Self {
        ActuatorHost {
            bank,
            arm,
            stops: VecDeque::new(),
            recovery_delay,
            seed,
            now: SimTime::ZERO,
        }
    }

    /// Schedules safety stops; times need not be sorted.
    pub fn with_safety_stops(mut self, mut stops: Vec<SimTime>) -> Self {
        stops.sort();
        self.stops = stops.into();
        self
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Applies every stop and watchdog reset due at or before `t`.
    pub fn advance_to(&mut self, t: SimTime, out: &mut Vec<LogLine>) {
        loop {
            let reset = match self.arm.state() {
                super::ArmState::SafetyStopped { since } => Some(*since + self.recovery_delay),
                _ => None,
            };
            let stop = self.stops.front().copied();
            match (stop, reset) {
                (Some(s), r) if s <= t && r.is_none_or(|r| s < r) => {
                    self.stops.pop_front();
                    inject_safety_stop(&mut self.arm, s);
                    out.push(LogLine::arm_event(LogKind::SafetyStop, s, self.seed));
                }
                (_, Some(r)) if r <= t => {
                    watchdog_step(&mut self.arm, r, self.recovery_delay);
                    out.push(LogLine::arm_event(LogKind::WatchdogReset, r, self.seed));
                }
                _ => break,
            }
        }
        self.now = self.now.max(t);
    }

    pub fn dispatch(&mut self, event: &ScheduledEvent, out: &mut Vec<LogLine>) -> Result<()> {
        self.advance_to(event.dispatch_time, out);
        let t = event.dispatch_time;
        let record = match &event.command {
            Command::Strike(c) => execute_strike(&mut self.bank, c, t)?,
            Command::Arm(c) => execute_arm(&mut self.arm, c, t)?,
        };
        out.push(LogLine::from_dispatch(event, &record, self.seed));
        Ok(())
    }
}
