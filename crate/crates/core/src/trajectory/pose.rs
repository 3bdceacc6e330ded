use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Capture rate of the demonstration recordings.
pub const DEMO_RATE_HZ: f64 = 300.0;

/// Samples whose quaternion norm is this close to one are renormalized on
/// load; anything further off is rejected.
const QUAT_LOAD_TOLERANCE: f64 = 1e-3;

/// Quaternion stored as `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const IDENTITY: Quat = Quat([1.0, 0.0, 0.0, 0.0]);

    pub fn from_yaw(yaw: f64) -> Self {
        let h = 0.5 * yaw;
        Quat([h.cos(), 0.0, 0.0, h.sin()])
    }

    pub fn w(&self) -> f64 {
        self.0[0]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Quat) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn neg(&self) -> Quat {
        Quat(self.0.map(|c| -c))
    }

    pub fn normalized(&self) -> Option<Quat> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| Quat(self.0.map(|c| c / n)))
    }

    /// Hamilton product `self * rhs`.
    pub fn mul(&self, rhs: &Quat) -> Quat {
        let [w1, x1, y1, z1] = self.0;
        let [w2, x2, y2, z2] = rhs.0;
        Quat([
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ])
    }

    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = Quat([0.0, v[0], v[1], v[2]]);
        let conj = Quat([self.0[0], -self.0[1], -self.0[2], -self.0[3]]);
        let r = self.mul(&p).mul(&conj);
        [r.0[1], r.0[2], r.0[3]]
    }

    /// Rotation about the base z axis.
    pub fn yaw(&self) -> f64 {
        let [w, x, y, z] = self.0;
        (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z))
    }

    /// Angle between the rotations, radians, in `[0, pi]`.
    pub fn angle_to(&self, other: &Quat) -> f64 {
        2.0 * self.dot(other).abs().min(1.0).acos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub t: f64,
    pub position: [f64; 3],
    pub orientation: Quat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoTrajectory {
    pub samples: Vec<PoseSample>,
    pub nominal_rate: f64,
}

impl DemoTrajectory {
    /// Validates timing and orientation, renormalizing quaternions that are
    /// unit up to rounding.
    pub fn new(mut samples: Vec<PoseSample>, nominal_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("a demonstration needs at least two samples"));
        }
        if !(nominal_rate > 0.0 && nominal_rate.is_finite()) {
            return Err(Error::invalid("nominal rate must be positive"));
        }
        for (i, s) in samples.iter_mut().enumerate() {
            if !s.t.is_finite() || s.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("sample {i}: non-finite value")));
            }
            let n = s.orientation.norm();
            if !n.is_finite() || (n - 1.0).abs() > QUAT_LOAD_TOLERANCE {
                return Err(Error::invalid(format!("sample {i}: quaternion norm {n} is not unit")));
            }
            s.orientation = Quat(s.orientation.0.map(|c| c / n));
        }
        if let Some(i) = samples.windows(2).position(|w| !(w[1].t > w[0].t)) {
            return Err(Error::invalid(format!("sample times not strictly increasing at sample {}", i + 1)));
        }
        let span = samples[samples.len() - 1].t - samples[0].t;
        let measured = (samples.len() - 1) as f64 / span;
        if (measured - nominal_rate).abs() >= 0.1 * nominal_rate {
            return Err(Error::invalid(format!(
                "measured rate {measured:.1} Hz deviates from nominal {nominal_rate} Hz by 10% or more"
            )));
        }
        Ok(DemoTrajectory { samples, nominal_rate })
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }
}

/// Rigid transform from the capture frame (shoulder-relative) into the arm
/// base frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseTransform {
    pub translation: [f64; 3],
    pub rotation: Quat,
}

impl Default for BaseTransform {
    fn default() -> Self {
        BaseTransform {
            translation: [0.0; 3],
            rotation: Quat::IDENTITY,
        }
    }
}

impl BaseTransform {
    pub fn apply(&self, pose: &PoseSample) -> PoseSample {
        let r = self.rotation.normalized().unwrap_or(Quat::IDENTITY);
        let p = r.rotate(pose.position);
        PoseSample {
            t: pose.t,
            position: [
                p[0] + self.translation[0],
                p[1] + self.translation[1],
                p[2] + self.translation[2],
            ],
            orientation: r.mul(&pose.orientation),
        }
    }
}
