//! Simulated endpoints: a six-motor drum bank and a supervised arm.

mod arm;
mod drums;
mod host;
mod log;
mod render;
mod snippets;

use serde::{Deserialize, Serialize};

use crate::conductor::ArmAction;
use crate::rhythmgen::StrikeTarget;
use crate::trajectory::JointConfig;
use crate::{SimDuration, SimTime};

pub use arm::{inject_safety_stop, watchdog_step, ArmConfig, ArmState, VirtualArm, DEFAULT_RECOVERY_DELAY_S};
pub use drums::{execute_strike, DrumBankConfig, DrumMotor, MotorState, VirtualDrumBank};
pub use host::ActuatorHost;
pub use log::{LogKind, LogLine, LogOutcome};
pub use render::{render_strikes, RENDER_SAMPLE_RATE};
pub use snippets::{SnippetLibrary, SNIPPET_CSV};

pub use arm::execute_arm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrikeCommand {
    pub drum: u8,
    pub target: StrikeTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmCommand {
    pub action: ArmAction,
    /// Goal configuration for a random-pose move.
    pub pose: Option<JointConfig>,
    pub move_duration: SimDuration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Command {
    Strike(StrikeCommand),
    Arm(ArmCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuatorId {
    Drum(u8),
    Arm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Busy,
    Safety,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Dropped(DropReason),
}

/// What an actuator did with one command.
#[derive(Clone, Debug, PartialEq)]
pub struct EventLogRecord {
    pub t_dispatch: SimTime,
    /// When the hit sounds (drums) or the motion begins (arm); `None` if dropped.
    pub t_strike_actual: Option<SimTime>,
    pub actuator: ActuatorId,
    pub command: Command,
    pub outcome: Outcome,
}

impl EventLogRecord {
    fn dropped(t_dispatch: SimTime, actuator: ActuatorId, command: Command, reason: DropReason) -> Self {
        EventLogRecord {
            t_dispatch,
            t_strike_actual: None,
            actuator,
            command,
            outcome: Outcome::Dropped(reason),
        }
    }
}
