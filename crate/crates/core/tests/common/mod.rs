#![allow(dead_code)]

use tambor::analysis::{Analyzer, AnalysisConfig, AudioFrame, Feature, OnsetDetector, OnsetEvent, ANALYSIS_SAMPLE_RATE};
use std::f64::consts::PI;

use rand::Rng;
use tambor::synth::render_clicks;
use tambor::trajectory::{forward_kinematics, wrap_angle, ArmModel, PlanarTarget};

/// Full analysis chain over `samples`, fed in 1024-sample blocks.
pub fn analyze(samples: Vec<f32>, cfg: AnalysisConfig) -> Vec<Feature> {
    let mut a = Analyzer::new(cfg).unwrap();
    let mut out = Vec::new();
    for (k, chunk) in samples.chunks(1024).enumerate() {
        let start = (k * 1024) as f64 / ANALYSIS_SAMPLE_RATE as f64;
        out.extend(a.push(&AudioFrame::new(chunk.to_vec(), ANALYSIS_SAMPLE_RATE, start)).unwrap());
    }
    out
}

/// Onset detector alone, without the volume gate.
pub fn detect(samples: Vec<f32>) -> Vec<OnsetEvent> {
    let mut d = OnsetDetector::new(&AnalysisConfig::default());
    let mut out = Vec::new();
    for (k, chunk) in samples.chunks(4096).enumerate() {
        let start = (k * 4096) as f64 / ANALYSIS_SAMPLE_RATE as f64;
        out.extend(d.push(&AudioFrame::new(chunk.to_vec(), ANALYSIS_SAMPLE_RATE, start)).unwrap());
    }
    out
}

pub fn clicks_audio(times: &[f64], duration: f64) -> Vec<f32> {
    render_clicks(times, duration)
}

pub fn tempos(features: &[Feature]) -> Vec<tambor::analysis::TempoEstimate> {
    features
        .iter()
        .filter_map(|f| match f {
            Feature::Tempo(t) => Some(*t),
            _ => None,
        })
        .collect()
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Expected off-beat fraction for `n` category-first draws over 8 on-beat and
/// 24 off-beat slots, where a draw prefers off-beat with probability
/// `24w / (8 + 24w)` and a full class yields to the other.
pub fn expected_off_fraction(n: usize, syncopation: f64) -> f64 {
    let w = 1.0 + 3.0 * syncopation;
    let p = 24.0 * w / (8.0 + 24.0 * w);
    let lo = n.saturating_sub(8);
    (0..=n)
        .map(|b| binomial_pmf(n, b, p) * b.clamp(lo, 24) as f64 / n as f64)
        .sum()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

pub fn se(a: f64, b: f64, l: f64) -> f64 {
    (-0.5 * ((a - b) / l).powi(2)).exp()
}

/// Posterior mean and variance straight from the textbook formulas.
pub fn oracle(times: &[f64], ys: &[f64], l: f64, noise: f64, q: f64) -> (f64, f64) {
    let n = times.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| se(times[i], times[j], l) + if i == j { noise } else { 0.0 }).collect())
        .collect();
    let ks: Vec<f64> = times.iter().map(|&t| se(q, t, l)).collect();
    let alpha = dense_solve(k.clone(), ys.to_vec());
    let v = dense_solve(k, ks.clone());
    let mean = ks.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let var = 1.0 - ks.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    (mean, var)
}

pub fn reachable_target(arm: &ArmModel, rng: &mut impl Rng) -> (Vec<f64>, PlanarTarget) {
    let q: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
    (q.clone(), forward_kinematics(arm, &q))
}

pub fn pose_error(arm: &ArmModel, q: &[f64], t: &PlanarTarget) -> f64 {
    let f = forward_kinematics(arm, q);
    let dth = wrap_angle(f.theta - t.theta);
    (f.x - t.x).hypot(f.y - t.y) + dth.abs()
}

/// Coarse 1-degree grid over the first two joints (the third closes the
/// orientation), then a shrinking coordinate search around the best cell.
pub fn grid_search(arm: &ArmModel, t: &PlanarTarget) -> (f64, Vec<f64>) {
    let step = PI / 180.0;
    let close = |q1: f64, q2: f64| vec![q1, q2, t.theta - q1 - q2];
    let mut best = (f64::INFINITY, vec![0.0; 3]);
    for i in 0..360 {
        for j in 0..360 {
            let q = close(-PI + i as f64 * step, -PI + j as f64 * step);
            let e = pose_error(arm, &q, t);
            if e < best.0 {
                best = (e, q);
            }
        }
    }
    let mut h = step;
    while h > 1e-12 {
        let mut improved = false;
        for (d1, d2) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let q = close(best.1[0] + d1, best.1[1] + d2);
            let e = pose_error(arm, &q, t);
            if e < best.0 {
                best = (e, q);
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}

