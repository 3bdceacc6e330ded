use serde::{Deserialize, Serialize};

use super::{ActuatorId, Command, DropReason, EventLogRecord, Outcome};
use crate::conductor::{ArmAction, ScheduledEvent};
use crate::rhythmgen::StrikeTarget;
use crate::{Error, Result, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogKind {
    Strike,
    Snippet1,
    Snippet2,
    Snippet3,
    RandomPose,
    SafetyStop,
    WatchdogReset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogOutcome {
    Ok,
    Dropped,
}

/// One line of the JSON Lines event log. Times are seconds on the
/// simulated clock, exact to the microsecond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogLine {
    pub t_dispatch: f64,
    pub t_strike: f64,
    pub kind: LogKind,
    pub drum: Option<u8>,
    pub target: Option<StrikeTarget>,
    pub pattern_id: Option<u64>,
    pub bar_index: Option<u32>,
    pub seed: u64,
    pub actuator: String,
    pub t_strike_actual: Option<f64>,
    pub outcome: LogOutcome,
    pub reason: Option<DropReason>,
}

impl LogLine {
    pub fn from_dispatch(event: &ScheduledEvent, record: &EventLogRecord, seed: u64) -> Self {
        let (kind, drum, target) = match &event.command {
            Command::Strike(s) => (LogKind::Strike, Some(s.drum), Some(s.target)),
            Command::Arm(a) => {
                let kind = match a.action {
                    ArmAction::Snippet(1) => LogKind::Snippet1,
                    ArmAction::Snippet(2) => LogKind::Snippet2,
                    ArmAction::Snippet(_) => LogKind::Snippet3,
                    ArmAction::RandomPose => LogKind::RandomPose,
                };
                (kind, None, None)
            }
        };
        let (outcome, reason) = match record.outcome {
            Outcome::Ok => (LogOutcome::Ok, None),
            Outcome::Dropped(r) => (LogOutcome::Dropped, Some(r)),
        };
        LogLine {
            t_dispatch: event.dispatch_time.as_secs(),
            t_strike: event.strike_time.as_secs(),
            kind,
            drum,
            target,
            pattern_id: Some(event.pattern_id),
            bar_index: Some(event.bar_index),
            seed,
            actuator: actuator_name(record.actuator),
            t_strike_actual: record.t_strike_actual.map(SimTime::as_secs),
            outcome,
            reason,
        }
    }

    /// A supervisor record (safety stop or watchdog reset) at `at`.
    pub fn arm_event(kind: LogKind, at: SimTime, seed: u64) -> Self {
        LogLine {
            t_dispatch: at.as_secs(),
            t_strike: at.as_secs(),
            kind,
            drum: None,
            target: None,
            pattern_id: None,
            bar_index: None,
            seed,
            actuator: actuator_name(ActuatorId::Arm),
            t_strike_actual: Some(at.as_secs()),
            outcome: LogOutcome::Ok,
            reason: None,
        }
    }

    pub fn is_strike(&self) -> bool {
        self.kind == LogKind::Strike
    }

    pub fn is_ok(&self) -> bool {
        self.outcome == LogOutcome::Ok
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("log lines always serialize")
    }

    pub fn parse(line: &str) -> Result<Self> {
        let l: LogLine = serde_json::from_str(line)?;
        let times = [Some(l.t_dispatch), Some(l.t_strike), l.t_strike_actual];
        if times.iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::invalid("log times must be finite"));
        }
        if l.drum.is_some_and(|d| d >= crate::rhythmgen::DRUMS) {
            return Err(Error::invalid("drum id out of range"));
        }
        Ok(l)
    }

    /// Parses a whole JSON Lines document; errors carry the 1-based line.
    pub fn parse_all(text: &str) -> Result<Vec<Self>> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                LogLine::parse(l).map_err(|e| Error::Parse {
                    line: i as u64 + 1,
                    message: e.to_string(),
                })
            })
            .collect()
    }
}

fn actuator_name(id: ActuatorId) -> String {
    match id {
        ActuatorId::Drum(d) => format!("drum{d}"),
        ActuatorId::Arm => "arm".into(),
    }
}
