//! Deterministic signal and trajectory generators. Their ground truth (click
//! times, clean poses) is what the tests and `gen` sidecars check against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::ANALYSIS_SAMPLE_RATE;
use crate::trajectory::{DemoTrajectory, PoseSample, Quat, DEMO_RATE_HZ};
use crate::{Error, Result};

/// Partials of the synthetic click, Hz.
const CLICK_PARTIALS: [f64; 4] = [900.0, 2_300.0, 4_700.0, 7_900.0];
const CLICK_DECAY_S: f64 = 0.025;
const CLICK_LENGTH_S: f64 = 0.150;
const CLICK_AMPLITUDE: f64 = 0.8;

/// Refractory gap of the Poisson source; the exponential part of each gap is
/// shortened so the realized mean rate stays at the requested rate.
pub const POISSON_DEAD_TIME_S: f64 = 0.060;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClickSpec {
    pub bpm: f64,
    /// Gaussian timing jitter, as a percentage of the beat period.
    #[serde(default)]
    pub jitter_pct: f64,
    pub duration_s: f64,
    /// Time of the first click.
    #[serde(default = "default_click_offset")]
    pub offset_s: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_click_offset() -> f64 {
    0.25
}

impl ClickSpec {
    pub fn new(bpm: f64, duration_s: f64) -> Self {
        ClickSpec {
            bpm,
            jitter_pct: 0.0,
            duration_s,
            offset_s: default_click_offset(),
            seed: 0,
        }
    }

    pub fn with_jitter(mut self, jitter_pct: f64, seed: u64) -> Self {
        self.jitter_pct = jitter_pct;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bpm > 0.0 && self.bpm.is_finite()) {
            return Err(Error::invalid("click bpm must be positive"));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::invalid("click duration must be positive"));
        }
        if !(self.jitter_pct >= 0.0 && self.jitter_pct.is_finite()) {
            return Err(Error::invalid("click jitter must be non-negative"));
        }
        if !(self.offset_s >= 0.0) {
            return Err(Error::invalid("click offset must be non-negative"));
        }
        Ok(())
    }

    /// Ground-truth click times inside `[0, duration)`, sorted.
    pub fn times(&self) -> Vec<f64> {
        let period = 60.0 / self.bpm;
        let sigma = self.jitter_pct / 100.0 * period;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
        let mut times = Vec::new();
        let mut k = 0u64;
        loop {
            let nominal = self.offset_s + k as f64 * period;
            if nominal >= self.duration_s {
                break;
            }
            let t = if sigma > 0.0 {
                nominal + normal.sample(&mut rng)
            } else {
                nominal
            };
            if (0.0..self.duration_s).contains(&t) {
                times.push(t);
            }
            k += 1;
        }
        times.sort_by(f64::total_cmp);
        times
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonSpec {
    /// Mean events per second, including the refractory gap.
    pub rate: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
}

impl PoissonSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && 1.0 / self.rate > POISSON_DEAD_TIME_S) {
            return Err(Error::invalid(format!(
                "poisson rate must be positive and below {} events/s",
                1.0 / POISSON_DEAD_TIME_S
            )));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::invalid("poisson duration must be positive"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mean_exp = 1.0 / self.rate - POISSON_DEAD_TIME_S;
        let mut t = 0.0;
        let mut times = Vec::new();
        loop {
            let u: f64 = rng.random();
            t += POISSON_DEAD_TIME_S - mean_exp * (1.0 - u).ln();
            if t >= self.duration_s {
                break;
            }
            times.push(t);
        }
        times
    }
}

/// Renders clicks at the given times into a mono buffer at the analysis rate.
pub fn render_clicks(times: &[f64], duration_s: f64) -> Vec<f32> {
    let sr = ANALYSIS_SAMPLE_RATE as f64;
    let n = (duration_s * sr).round() as usize;
    let mut out = vec![0.0f32; n];
    let shape = click_shape(sr);
    for &t in times {
        let start = (t * sr).round() as usize;
        for (i, &v) in shape.iter().enumerate() {
            match out.get_mut(start + i) {
                Some(s) => *s += v,
                None => break,
            }
        }
    }
    for s in &mut out {
        *s = s.clamp(-1.0, 1.0);
    }
    out
}

fn click_shape(sr: f64) -> Vec<f32> {
    let len = (CLICK_LENGTH_S * sr) as usize;
    (0..len)
        .map(|i| {
            let t = i as f64 / sr;
            let tone: f64 = CLICK_PARTIALS
                .iter()
                .map(|f| (2.0 * std::f64::consts::PI * f * t).cos())
                .sum::<f64>()
                / CLICK_PARTIALS.len() as f64;
            (CLICK_AMPLITUDE * tone * (-t / CLICK_DECAY_S).exp()) as f32
        })
        .collect()
}

/// Parameters of the planar shaking arc used as a retargeting fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub freq_hz: f64,
    pub duration_s: f64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
    /// Peak angular swing of the hand about the arc centre, radians.
    #[serde(default = "default_arc_swing")]
    pub swing_rad: f64,
    /// Marker noise, meters (position) and radians (yaw). Zero for a clean arc.
    #[serde(default)]
    pub position_noise_m: f64,
    #[serde(default)]
    pub yaw_noise_rad: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_rate() -> f64 {
    DEMO_RATE_HZ
}

fn default_arc_swing() -> f64 {
    0.12
}

/// Centre and radius of the arc the hand swings along, in the arm base frame.
const ARC_CENTER: [f64; 2] = [0.10, 0.05];
const ARC_RADIUS: f64 = 0.40;
const ARC_MEAN_ANGLE: f64 = 0.6;

impl ArcSpec {
    pub fn new(freq_hz: f64, duration_s: f64) -> Self {
        ArcSpec {
            freq_hz,
            duration_s,
            rate_hz: DEMO_RATE_HZ,
            swing_rad: default_arc_swing(),
            position_noise_m: 0.0,
            yaw_noise_rad: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("freq_hz", self.freq_hz),
            ("duration_s", self.duration_s),
            ("rate_hz", self.rate_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("arc {name} must be positive")));
            }
        }
        if !(self.position_noise_m >= 0.0 && self.yaw_noise_rad >= 0.0) {
            return Err(Error::invalid("arc noise must be non-negative"));
        }
        if !(self.swing_rad.abs() < 1.0) {
            return Err(Error::invalid("arc swing must be below 1 rad"));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.rate_hz).round() as usize
    }

    /// Noise-free pose at time `t`.
    pub fn clean_pose(&self, t: f64) -> PoseSample {
        let phase = 2.0 * std::f64::consts::PI * self.freq_hz * t;
        arc_pose(t, ARC_MEAN_ANGLE + self.swing_rad * phase.sin(), 0.0)
    }

    pub fn clean(&self) -> DemoTrajectory {
        let samples = (0..self.sample_count())
            .map(|i| self.clean_pose(i as f64 / self.rate_hz))
            .collect();
        DemoTrajectory::new(samples, self.rate_hz).expect("generated arc is valid")
    }

    /// The arc with marker noise applied, as a capture would record it.
    pub fn recorded(&self) -> DemoTrajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pos = Normal::new(0.0, self.position_noise_m.max(f64::MIN_POSITIVE)).expect("sigma");
        let yaw = Normal::new(0.0, self.yaw_noise_rad.max(f64::MIN_POSITIVE)).expect("sigma");
        let samples = (0..self.sample_count())
            .map(|i| {
                let t = i as f64 / self.rate_hz;
                let phase = 2.0 * std::f64::consts::PI * self.freq_hz * t;
                let angle = ARC_MEAN_ANGLE + self.swing_rad * phase.sin();
                let mut p = arc_pose(t, angle, if self.yaw_noise_rad > 0.0 { yaw.sample(&mut rng) } else { 0.0 });
                if self.position_noise_m > 0.0 {
                    for c in &mut p.position {
                        *c += pos.sample(&mut rng);
                    }
                }
                p
            })
            .collect();
        DemoTrajectory::new(samples, self.rate_hz).expect("generated arc is valid")
    }
}

/// Hand on the arc at `angle`, pointing radially outward, with an extra yaw.
fn arc_pose(t: f64, angle: f64, extra_yaw: f64) -> PoseSample {
    let x = ARC_CENTER[0] + ARC_RADIUS * angle.cos();
    let y = ARC_CENTER[1] + ARC_RADIUS * angle.sin();
    PoseSample {
        t,
        position: [x, y, 0.0],
        orientation: Quat::from_yaw(angle + extra_yaw),
    }
}

/// Procedural stand-ins for the three recorded shaker phrases. Each is two
/// seconds at 300 Hz with a distinct rhythmic signature and marker noise.
pub fn snippet_demo(id: u8) -> Result<DemoTrajectory> {
    let (pulses, accent, seed): (&[f64], f64, u64) = match id {
        // Steady eighth-note shake.
        1 => (&[0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75], 0.0, 11),
        // Dotted figure with a strong downbeat.
        2 => (&[0.0, 0.375, 0.75, 1.0, 1.375, 1.75], 0.5, 22),
        // Sparse, syncopated phrase.
        3 => (&[0.0, 0.5, 0.625, 1.125, 1.5], 0.25, 33),
        _ => return Err(Error::invalid(format!("snippet id {id} not in 1..=3"))),
    };
    let rate = DEMO_RATE_HZ;
    let n = (2.0 * rate) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos_noise = Normal::new(0.0, 0.0015).expect("sigma");
    let yaw_noise = Normal::new(0.0, 0.004).expect("sigma");
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            // Each pulse is a smooth out-and-back flick of the wrist.
            let mut swing = 0.0;
            for (k, &p) in pulses.iter().enumerate() {
                let gain = if k == 0 { 1.0 + accent } else { 1.0 };
                let d = (t - p - 0.06) / 0.05;
                swing += gain * (-0.5 * d * d).exp();
            }
            let angle = ARC_MEAN_ANGLE + 0.07 * swing;
            let mut pose = arc_pose(t, angle, 0.15 * swing + yaw_noise.sample(&mut rng));
            for c in &mut pose.position {
                *c += pos_noise.sample(&mut rng);
            }
            pose
        })
        .collect();
    DemoTrajectory::new(samples, rate)
}

/// Uniform sample from a closed box, for convenience in generators.
pub fn uniform_in(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}
