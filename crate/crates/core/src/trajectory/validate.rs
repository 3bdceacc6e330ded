use serde::{Deserialize, Serialize};

use super::{ArmModel, JointTrajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionViolation {
    pub sample: usize,
    pub joint: usize,
    pub value: f64,
}

/// Finite-difference velocity over `[sample - 1, sample]` above the limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityViolation {
    pub sample: usize,
    pub joint: usize,
    pub velocity: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub position_violations: Vec<PositionViolation>,
    pub velocity_violations: Vec<VelocityViolation>,
    /// Per joint, the smallest distance to either limit (negative when
    /// outside).
    pub worst_position_margin: Vec<f64>,
    /// Per joint, the smallest `limit - |velocity|`.
    pub worst_velocity_margin: Vec<f64>,
}

impl LimitReport {
    pub fn is_clean(&self) -> bool {
        self.position_violations.is_empty() && self.velocity_violations.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.position_violations.len() + self.velocity_violations.len()
    }
}

/// Report-only check of every sample against the joint limits and every
/// consecutive pair against the velocity limits.
pub fn validate_limits(traj: &JointTrajectory, arm: &ArmModel) -> LimitReport {
    let joints = arm.joint_limits.len();
    let mut report = LimitReport {
        worst_position_margin: vec![f64::INFINITY; joints],
        worst_velocity_margin: vec![f64::INFINITY; joints],
        ..LimitReport::default()
    };
    for (sample, q) in traj.configs.iter().enumerate() {
        for (joint, (&value, &[lo, hi])) in q.iter().zip(&arm.joint_limits).enumerate() {
            let margin = (value - lo).min(hi - value);
            report.worst_position_margin[joint] = report.worst_position_margin[joint].min(margin);
            if margin < 0.0 || !value.is_finite() {
                report.position_violations.push(PositionViolation { sample, joint, value });
            }
        }
    }
    for sample in 1..traj.configs.len() {
        let dt = traj.times[sample] - traj.times[sample - 1];
        let (prev, cur) = (&traj.configs[sample - 1], &traj.configs[sample]);
        for (joint, &limit) in arm.velocity_limits.iter().enumerate() {
            let (Some(a), Some(b)) = (prev.get(joint), cur.get(joint)) else { continue };
            let velocity = (b - a) / dt;
            let margin = limit - velocity.abs();
            report.worst_velocity_margin[joint] = report.worst_velocity_margin[joint].min(margin);
            if margin < 0.0 || !velocity.is_finite() {
                report.velocity_violations.push(VelocityViolation {
                    sample,
                    joint,
                    velocity,
                    limit,
                });
            }
        }
    }
    report
}
