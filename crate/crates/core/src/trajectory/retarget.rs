use serde::{Deserialize, Serialize};

use super::gp::{fit_gp, GpParams};
use super::ik::{select_solution, solve_ik, ArmModel, JointConfig, PlanarTarget};
use super::pose::{BaseTransform, DemoTrajectory, PoseSample, Quat};
use super::validate::{validate_limits, LimitReport};
use crate::{Error, Result};

/// Below this norm a regressed quaternion carries no usable orientation.
const MIN_QUAT_NORM: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JointTrajectory {
    pub times: Vec<f64>,
    pub configs: Vec<JointConfig>,
}

impl JointTrajectory {
    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Linear interpolation, clamped at both ends.
    pub fn config_at(&self, t: f64) -> Option<JointConfig> {
        let first = *self.times.first()?;
        if t <= first {
            return self.configs.first().cloned();
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i >= self.times.len() {
            return self.configs.last().cloned();
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        Some(
            self.configs[i - 1]
                .iter()
                .zip(&self.configs[i])
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetargetOptions {
    pub length_scale: f64,
    pub noise_variance: f64,
    pub transform: BaseTransform,
}

impl Default for RetargetOptions {
    fn default() -> Self {
        RetargetOptions {
            length_scale: 0.05,
            noise_variance: 1e-5,
            transform: BaseTransform::default(),
        }
    }
}

impl RetargetOptions {
    pub fn with_length_scale(length_scale: f64) -> Self {
        RetargetOptions {
            length_scale,
            ..Self::default()
        }
    }

    pub fn gp_params(&self) -> GpParams {
        GpParams::new(self.length_scale, self.noise_variance)
    }
}

/// GP-smoothed poses at `query_times`.
///
/// Each position coordinate is regressed on its own after removing its mean.
/// Quaternions are first sign-aligned along the sequence (consecutive dot
/// products non-negative), regressed component-wise, and renormalized; this
/// is an approximation that holds for the small rotations of a shake.
pub fn smooth_pose_trajectory(demo: &DemoTrajectory, params: GpParams, query_times: &[f64]) -> Result<Vec<PoseSample>> {
    if query_times.windows(2).any(|w| !(w[1] > w[0])) || query_times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("query times must be finite and strictly increasing"));
    }
    let times = demo.times();
    let mut channels: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); 7];
    let mut prev = demo.samples[0].orientation;
    for s in &demo.samples {
        let q = if s.orientation.dot(&prev) < 0.0 { s.orientation.neg() } else { s.orientation };
        prev = q;
        for (c, v) in s.position.iter().chain(q.0.iter()).enumerate() {
            channels[c].push(*v);
        }
    }
    let means: Vec<f64> = channels.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    for (c, m) in channels.iter_mut().zip(&means) {
        c.iter_mut().for_each(|v| *v -= m);
    }

    let model = fit_gp(&times, &channels, params)?;
    let pred = model.predict_mean(query_times);
    query_times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let v = |c: usize| pred[c][i] + means[c];
            let raw = Quat([v(3), v(4), v(5), v(6)]);
            let norm = raw.norm();
            if !(norm >= MIN_QUAT_NORM) {
                return Err(Error::DegenerateOrientation { time: t, norm });
            }
            Ok(PoseSample {
                t,
                position: [v(0), v(1), v(2)],
                orientation: Quat(raw.0.map(|c| c / norm)),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Retargeted {
    #[serde(flatten)]
    pub trajectory: JointTrajectory,
    pub report: LimitReport,
}

/// Planar target for a base-frame pose: the `xy` position and the yaw.
fn planar(pose: &PoseSample) -> PlanarTarget {
    PlanarTarget {
        x: pose.position[0],
        y: pose.position[1],
        theta: pose.orientation.yaw(),
    }
}

/// Smooths the demonstration at its own sample times, solves IK per pose,
/// and keeps the branch nearest the previously chosen configuration (seeded
/// by `reference`). Fails on the first unreachable pose.
pub fn retarget(demo: &DemoTrajectory, arm: &ArmModel, opts: &RetargetOptions, reference: &[f64]) -> Result<Retargeted> {
    arm.validate()?;
    let times = demo.times();
    let smoothed = smooth_pose_trajectory(demo, opts.gp_params(), &times)?;
    let mut rolling = reference.to_vec();
    let mut configs = Vec::with_capacity(smoothed.len());
    for pose in &smoothed {
        let target = planar(&opts.transform.apply(pose));
        let solutions = solve_ik(arm, &target);
        if solutions.is_empty() {
            return Err(Error::Unreachable { time: pose.t });
        }
        let chosen = select_solution(&solutions, &rolling, &arm.selection_weights)?;
        rolling.clone_from(&chosen);
        configs.push(chosen);
    }
    let trajectory = JointTrajectory { times, configs };
    let report = validate_limits(&trajectory, arm);
    Ok(Retargeted { trajectory, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ArcSpec;
    use crate::trajectory::forward_kinematics;

    fn constant_demo() -> DemoTrajectory {
        let samples = (0..120)
            .map(|i| PoseSample {
                t: i as f64 / 300.0,
                position: [0.4, 0.2, 0.05],
                orientation: Quat::from_yaw(0.3),
            })
            .collect();
        DemoTrajectory::new(samples, 300.0).unwrap()
    }

    #[test]
    fn constant_demo_gives_constant_output() {
        let demo = constant_demo();
        let out = smooth_pose_trajectory(&demo, GpParams::new(0.05, 1e-5), &demo.times()).unwrap();
        for p in &out {
            for (a, b) in p.position.iter().zip([0.4, 0.2, 0.05]) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(p.orientation.angle_to(&Quat::from_yaw(0.3)) < 1e-9);
        }
        let r = retarget(&demo, &ArmModel::default(), &RetargetOptions::default(), &ArmModel::default().rest_config).unwrap();
        assert!(r.report.is_clean());
        assert!(r.trajectory.configs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn sign_flipped_quaternions_are_aligned() {
        let mut demo = constant_demo();
        for s in demo.samples.iter_mut().skip(1).step_by(2) {
            s.orientation = s.orientation.neg();
        }
        let out = smooth_pose_trajectory(&demo, GpParams::new(0.05, 1e-5), &demo.times()).unwrap();
        assert!(out.iter().all(|p| p.orientation.angle_to(&Quat::from_yaw(0.3)) < 1e-9));
    }

    #[test]
    fn fully_averaged_rotation_is_degenerate() {
        // Two full yaw turns: every quaternion component averages to zero,
        // and an overwhelming noise variance pins the posterior to the mean.
        let samples: Vec<_> = (0..300)
            .map(|i| PoseSample {
                t: i as f64 / 300.0,
                position: [0.4, 0.2, 0.0],
                orientation: Quat::from_yaw(4.0 * std::f64::consts::TAU * i as f64 / 300.0),
            })
            .collect();
        let demo = DemoTrajectory::new(samples, 300.0).unwrap();
        let err = smooth_pose_trajectory(&demo, GpParams::new(0.01, 1e12), &[0.5]).unwrap_err();
        assert!(matches!(err, Error::DegenerateOrientation { time, .. } if time == 0.5));
    }

    #[test]
    fn unreachable_pose_is_named() {
        let mut demo = constant_demo();
        for s in &mut demo.samples {
            s.position = [5.0, 0.0, 0.0];
        }
        let err = retarget(&demo, &ArmModel::default(), &RetargetOptions::default(), &[0.0; 3]).unwrap_err();
        assert!(matches!(err, Error::Unreachable { time } if time == 0.0));
    }

    #[test]
    fn smooth_arc_round_trips_through_fk() {
        let arc = ArcSpec::new(2.0, 2.0).clean();
        let arm = ArmModel::default();
        let r = retarget(&arc, &arm, &RetargetOptions::default(), &arm.rest_config).unwrap();
        let smoothed = smooth_pose_trajectory(&arc, RetargetOptions::default().gp_params(), &arc.times()).unwrap();
        for (q, p) in r.trajectory.configs.iter().zip(&smoothed) {
            let fk = forward_kinematics(&arm, q);
            assert!((fk.x - p.position[0]).hypot(fk.y - p.position[1]) < 1e-9);
        }
    }
}
