//! File formats: WAV audio and pose demonstrations.

mod demo;
mod wav;

pub use demo::{demo_to_csv, parse_demo_csv, parse_demo_json, read_demo_file, DemoRow};
pub use wav::{decode_wav, read_wav, resample_linear, write_wav};
