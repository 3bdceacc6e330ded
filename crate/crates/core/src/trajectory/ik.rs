//! Planar three-link arm: forward kinematics, both analytic IK branches, and
//! selection of the branch closest to a reference configuration.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Joint angles, radians, base to tip. Selection and validation accept any
/// joint count.
pub type JointConfig = Vec<f64>;

/// Slack on the reachability test so exact full extension still solves.
const REACH_EPS: f64 = 1e-12;
/// Elbow angles closer than this are one (singular) solution.
const COINCIDENT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarTarget {
    pub x: f64,
    pub y: f64,
    /// Tool orientation, radians.
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmModel {
    pub link_lengths: [f64; 3],
    /// `[min, max]` radians per joint.
    pub joint_limits: Vec<[f64; 2]>,
    /// rad/s per joint.
    pub velocity_limits: Vec<f64>,
    /// Per-joint weights of the "visually close" distance.
    pub selection_weights: Vec<f64>,
    pub rest_config: JointConfig,
    /// Box the random lively pose is drawn from, `[min, max]` per joint.
    pub random_pose_box: Vec<[f64; 2]>,
}

impl Default for ArmModel {
    fn default() -> Self {
        ArmModel {
            link_lengths: [0.3, 0.3, 0.1],
            joint_limits: vec![[-PI, PI], [-2.8, 2.8], [-PI, PI]],
            velocity_limits: vec![PI, PI, 2.0 * PI],
            selection_weights: vec![1.0; 3],
            rest_config: vec![0.3, 1.2, 0.6],
            random_pose_box: vec![[-0.2, 0.9], [0.5, 1.8], [-0.6, 0.9]],
        }
    }
}

impl ArmModel {
    pub fn joints(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.joints();
        if self.link_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Config("link lengths must be positive".into()));
        }
        for (name, len) in [
            ("joint_limits", self.joint_limits.len()),
            ("velocity_limits", self.velocity_limits.len()),
            ("selection_weights", self.selection_weights.len()),
            ("rest_config", self.rest_config.len()),
            ("random_pose_box", self.random_pose_box.len()),
        ] {
            if len != n {
                return Err(Error::Config(format!("{name} has {len} entries, expected {n}")));
            }
        }
        if self.joint_limits.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(Error::Config("joint limits must satisfy min < max".into()));
        }
        if self.random_pose_box.iter().any(|[lo, hi]| !(lo <= hi)) {
            return Err(Error::Config("random pose box must satisfy min <= max".into()));
        }
        if self.velocity_limits.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("velocity limits must be positive".into()));
        }
        if self.selection_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("selection weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

pub fn forward_kinematics(arm: &ArmModel, q: &[f64]) -> PlanarTarget {
    let mut x = 0.0;
    let mut y = 0.0;
    let mut angle = 0.0;
    for (len, qi) in arm.link_lengths.iter().zip(q) {
        angle += qi;
        x += len * angle.cos();
        y += len * angle.sin();
    }
    PlanarTarget {
        x,
        y,
        theta: wrap_angle(angle),
    }
}

/// Both elbow branches for `target`, positive elbow angle first. Empty when
/// the wrist point lies outside the reachable annulus; a single solution at
/// full extension or full fold.
pub fn solve_ik(arm: &ArmModel, target: &PlanarTarget) -> Vec<JointConfig> {
    let [l1, l2, l3] = arm.link_lengths;
    let wx = target.x - l3 * target.theta.cos();
    let wy = target.y - l3 * target.theta.sin();
    let r2 = wx * wx + wy * wy;
    let mut c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !c2.is_finite() || c2.abs() > 1.0 + REACH_EPS {
        return Vec::new();
    }
    c2 = c2.clamp(-1.0, 1.0);
    let elbow = c2.acos();
    let branches: &[f64] = if elbow < COINCIDENT_EPS || PI - elbow < COINCIDENT_EPS {
        &[1.0]
    } else {
        &[1.0, -1.0]
    };
    branches
        .iter()
        .map(|sign| {
            let q2 = sign * elbow;
            let q1 = wrap_angle(wy.atan2(wx) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos()));
            let q3 = wrap_angle(target.theta - q1 - q2);
            vec![q1, q2, q3]
        })
        .collect()
}

/// Weighted squared joint-space distance.
pub fn joint_distance(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| weights.get(i).copied().unwrap_or(1.0) * (x - y).powi(2))
        .sum()
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// The solution nearest `reference`; exact distance ties go to the
/// lexicographically smaller configuration.
pub fn select_solution(solutions: &[JointConfig], reference: &[f64], weights: &[f64]) -> Result<JointConfig> {
    solutions
        .iter()
        .map(|q| (joint_distance(q, reference, weights), q))
        .min_by(|(da, a), (db, b)| {
            let scale = da.abs().max(db.abs()).max(1.0);
            if (da - db).abs() <= 1e-12 * scale {
                lexicographic(a, b)
            } else {
                da.total_cmp(db)
            }
        })
        .map(|(_, q)| q.clone())
        .ok_or(Error::NoSolution)
}

/// A configuration drawn uniformly from the arm's random-pose box.
pub fn random_pose(arm: &ArmModel, rng: &mut impl Rng) -> JointConfig {
    arm.random_pose_box
        .iter()
        .map(|&[lo, hi]| crate::synth::uniform_in(rng, lo, hi))
        .collect()
}
