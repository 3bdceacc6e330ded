use serde::{Deserialize, Serialize};

use super::{ActuatorId, Command, DropReason, EventLogRecord, Outcome, StrikeCommand};
use crate::rhythmgen::{StrikeTarget, DRUMS};
use crate::{Error, Result, SimDuration, SimTime};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrumBankConfig {
    /// Software and transport delay before a motor starts moving.
    pub link_latency_s: f64,
    pub sweep_time_s: f64,
    pub return_time_s: f64,
    /// Per-motor `[min_angle, max_angle]` in radians.
    pub range_registers: [[f64; 2]; DRUMS as usize],
    pub rest_angles: [f64; DRUMS as usize],
}

impl Default for DrumBankConfig {
    fn default() -> Self {
        DrumBankConfig {
            link_latency_s: 0.080,
            sweep_time_s: 0.040,
            return_time_s: 0.020,
            range_registers: [[-0.6, 0.6]; DRUMS as usize],
            rest_angles: [0.0; DRUMS as usize],
        }
    }
}

impl DrumBankConfig {
    /// Dispatch-to-sound delay of an idle motor.
    pub fn strike_latency(&self) -> SimDuration {
        SimDuration::from_secs(self.link_latency_s) + SimDuration::from_secs(self.sweep_time_s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MotorState {
    Idle,
    Sweeping { until: SimTime },
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Stroke {
    start: SimTime,
    strike: SimTime,
    end: SimTime,
    extreme: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrumMotor {
    pub id: u8,
    pub min_angle: f64,
    pub max_angle: f64,
    pub rest_angle: f64,
    pub sweep_time: SimDuration,
    pub return_time: SimDuration,
    stroke: Option<Stroke>,
}

impl DrumMotor {
    pub fn new(id: u8, range: [f64; 2], rest_angle: f64, sweep_time: SimDuration, return_time: SimDuration) -> Result<Self> {
        let [min_angle, max_angle] = range;
        if !(min_angle < rest_angle && rest_angle < max_angle) {
            return Err(Error::Config(format!(
                "drum {id}: range registers must satisfy min < rest < max"
            )));
        }
        if sweep_time <= SimDuration::ZERO || return_time < SimDuration::ZERO {
            return Err(Error::Config(format!("drum {id}: sweep time must be positive")));
        }
        Ok(DrumMotor {
            id,
            min_angle,
            max_angle,
            rest_angle,
            sweep_time,
            return_time,
            stroke: None,
        })
    }

    pub fn state(&self, t: SimTime) -> MotorState {
        match self.stroke {
            Some(s) if t < s.end => MotorState::Sweeping { until: s.end },
            _ => MotorState::Idle,
        }
    }

    /// Beater angle at `t` along the most recent stroke.
    pub fn angle_at(&self, t: SimTime) -> f64 {
        let Some(s) = self.stroke else {
            return self.rest_angle;
        };
        let frac = |a: SimTime, b: SimTime| ((t - a).micros() as f64 / (b - a).micros().max(1) as f64).clamp(0.0, 1.0);
        let angle = if t < s.start || t >= s.end {
            self.rest_angle
        } else if t < s.strike {
            self.rest_angle + (s.extreme - self.rest_angle) * frac(s.start, s.strike)
        } else {
            s.extreme + (self.rest_angle - s.extreme) * frac(s.strike, s.end)
        };
        angle.clamp(self.min_angle, self.max_angle)
    }

    fn extreme(&self, target: StrikeTarget) -> f64 {
        match target {
            StrikeTarget::Interior => self.max_angle,
            StrikeTarget::Rim => self.min_angle,
        }
    }
}

pub struct VirtualDrumBank {
    pub motors: Vec<DrumMotor>,
    pub link_latency: SimDuration,
}

impl VirtualDrumBank {
    pub fn new(cfg: &DrumBankConfig) -> Result<Self> {
        if !(cfg.link_latency_s >= 0.0) {
            return Err(Error::Config("link_latency_s must be non-negative".into()));
        }
        let motors = (0..DRUMS)
            .map(|id| {
                DrumMotor::new(
                    id,
                    cfg.range_registers[id as usize],
                    cfg.rest_angles[id as usize],
                    SimDuration::from_secs(cfg.sweep_time_s),
                    SimDuration::from_secs(cfg.return_time_s),
                )
            })
            .collect::<Result<_>>()?;
        Ok(VirtualDrumBank {
            motors,
            link_latency: SimDuration::from_secs(cfg.link_latency_s),
        })
    }
}

/// Starts a stroke on an idle motor; a motor still mid-stroke drops the
/// command.
pub fn execute_strike(bank: &mut VirtualDrumBank, cmd: &StrikeCommand, now: SimTime) -> Result<EventLogRecord> {
    let link = bank.link_latency;
    let motor = bank
        .motors
        .get_mut(cmd.drum as usize)
        .ok_or_else(|| Error::invalid(format!("drum id {} out of range", cmd.drum)))?;
    let actuator = ActuatorId::Drum(cmd.drum);
    let start = now + link;
    if let MotorState::Sweeping { .. } = motor.state(start) {
        return Ok(EventLogRecord::dropped(now, actuator, Command::Strike(*cmd), DropReason::Busy));
    }
    let strike = start + motor.sweep_time;
    motor.stroke = Some(Stroke {
        start,
        strike,
        end: strike + motor.return_time,
        extreme: motor.extreme(cmd.target),
    });
    Ok(EventLogRecord {
        t_dispatch: now,
        t_strike_actual: Some(strike),
        actuator,
        command: Command::Strike(*cmd),
        outcome: Outcome::Ok,
    })
}
