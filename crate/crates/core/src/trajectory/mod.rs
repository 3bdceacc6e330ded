//! Retargeting recorded shaking gestures onto the arm: GP smoothing of the
//! captured poses, analytic IK with human-likeness branch selection, and
//! joint limit / velocity validation.

mod gp;
mod ik;
mod pose;
mod retarget;
mod validate;

pub use gp::{fit_gp, gp_predict, GpModel, GpParams, GpPrediction};
pub use ik::{forward_kinematics, joint_distance, random_pose, select_solution, solve_ik, wrap_angle, ArmModel, JointConfig, PlanarTarget};
pub use pose::{BaseTransform, DemoTrajectory, PoseSample, Quat, DEMO_RATE_HZ};
pub use retarget::{retarget, smooth_pose_trajectory, JointTrajectory, Retargeted, RetargetOptions};
pub use validate::{validate_limits, LimitReport, PositionViolation, VelocityViolation};
