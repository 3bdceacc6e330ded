use std::f64::consts::TAU;

use super::LogLine;
use crate::rhythmgen::StrikeTarget;

pub const RENDER_SAMPLE_RATE: u32 = 44_100;

const CLICK_S: f64 = 0.08;

fn pitch(drum: u8, target: StrikeTarget) -> f64 {
    let base = 110.0 * 1.25f64.powi(drum as i32);
    match target {
        StrikeTarget::Interior => base,
        StrikeTarget::Rim => base * 6.0,
    }
}

/// Mixes a decaying tone for every sounded strike into a mono buffer.
pub fn render_strikes(lines: &[LogLine], duration_s: f64) -> Vec<f32> {
    let sr = RENDER_SAMPLE_RATE as f64;
    let n = (duration_s.max(0.0) * sr).round() as usize;
    let mut out = vec![0.0f32; n];
    let len = (CLICK_S * sr) as usize;
    for l in lines.iter().filter(|l| l.is_strike() && l.is_ok()) {
        let (Some(t), Some(drum), Some(target)) = (l.t_strike_actual, l.drum, l.target) else {
            continue;
        };
        let f = pitch(drum, target);
        let start = (t * sr).round() as usize;
        for i in 0..len {
            let Some(s) = out.get_mut(start + i) else { break };
            let tt = i as f64 / sr;
            *s += (0.4 * (-tt / 0.015).exp() * (TAU * f * tt).sin()) as f32;
        }
    }
    for s in &mut out {
        *s = s.clamp(-1.0, 1.0);
    }
    out
}
