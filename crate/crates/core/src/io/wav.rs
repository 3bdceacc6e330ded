use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::analysis::{AudioFrame, ANALYSIS_SAMPLE_RATE};
use crate::{Error, Result};

/// Decodes PCM integer or float WAV bytes to mono at the analysis rate.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioFrame> {
    let reader = WavReader::new(Cursor::new(bytes))?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.sample_rate == 0 {
        return Err(Error::invalid("wav header declares no channels or a zero sample rate"));
    }
    let interleaved: Vec<f32> = match spec.sample_format {
        SampleFormat::Float => reader.into_samples::<f32>().collect::<Result<_, _>>()?,
        SampleFormat::Int => {
            if !(1..=32).contains(&spec.bits_per_sample) {
                return Err(Error::invalid("unsupported bit depth"));
            }
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f32 * scale))
                .collect::<Result<_, _>>()?
        }
    };
    let ch = spec.channels as usize;
    let mono: Vec<f32> = interleaved
        .chunks_exact(ch)
        .map(|frame| {
            let v = frame.iter().sum::<f32>() / ch as f32;
            if v.is_finite() { v } else { 0.0 }
        })
        .collect();
    let samples = resample_linear(&mono, spec.sample_rate, ANALYSIS_SAMPLE_RATE);
    Ok(AudioFrame::new(samples, ANALYSIS_SAMPLE_RATE, 0.0))
}

pub fn read_wav(path: &Path) -> Result<AudioFrame> {
    let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
    decode_wav(&bytes)
}

/// Writes mono 16-bit PCM.
pub fn write_wav(path: &Path, samples: &[f32], sample_rate: u32) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path, spec)?;
    for &s in samples {
        w.write_sample((s.clamp(-1.0, 1.0) * i16::MAX as f32).round() as i16)?;
    }
    w.finalize()?;
    Ok(())
}

/// Linear-interpolation resampler.
pub fn resample_linear(input: &[f32], from: u32, to: u32) -> Vec<f32> {
    if from == to || input.is_empty() {
        return input.to_vec();
    }
    let ratio = from as f64 / to as f64;
    let n = ((input.len() as f64) / ratio).floor() as usize;
    (0..n)
        .map(|i| {
            let x = i as f64 * ratio;
            let j = x.floor() as usize;
            let f = (x - j as f64) as f32;
            let a = input[j.min(input.len() - 1)];
            let b = input[(j + 1).min(input.len() - 1)];
            a + (b - a) * f
        })
        .collect()
}
