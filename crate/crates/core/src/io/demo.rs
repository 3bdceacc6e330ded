use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::trajectory::{DemoTrajectory, PoseSample, Quat, DEMO_RATE_HZ};
use crate::{Error, Result};

const HEADER: [&str; 8] = ["t", "x", "y", "z", "qw", "qx", "qy", "qz"];
const QUAT_TOLERANCE: f64 = 1e-3;

/// One demonstration sample as it appears in CSV and JSON files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
}

impl DemoRow {
    fn check(&self) -> std::result::Result<PoseSample, String> {
        let vals = [self.t, self.x, self.y, self.z, self.qw, self.qx, self.qy, self.qz];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        let q = Quat([self.qw, self.qx, self.qy, self.qz]);
        if (q.norm() - 1.0).abs() > QUAT_TOLERANCE {
            return Err(format!("quaternion norm {} is not unit", q.norm()));
        }
        Ok(PoseSample {
            t: self.t,
            position: [self.x, self.y, self.z],
            orientation: q,
        })
    }

    fn from_sample(s: &PoseSample) -> Self {
        let [qw, qx, qy, qz] = s.orientation.0;
        let [x, y, z] = s.position;
        DemoRow {
            t: s.t,
            x,
            y,
            z,
            qw,
            qx,
            qy,
            qz,
        }
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn finish(samples: Vec<PoseSample>, first_line: u64) -> Result<DemoTrajectory> {
    DemoTrajectory::new(samples, DEMO_RATE_HZ).map_err(|e| parse_error(first_line, e.to_string()))
}

/// Parses `t,x,y,z,qw,qx,qy,qz` CSV. Errors carry the 1-based file line.
pub fn parse_demo_csv(text: &str) -> Result<DemoTrajectory> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(parse_error(1, "empty file: expected header t,x,y,z,qw,qx,qy,qz"));
    }
    if headers.iter().ne(HEADER) {
        return Err(parse_error(1, format!("expected header {}", HEADER.join(","))));
    }
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: DemoRow = rec
            .deserialize(Some(&csv::StringRecord::from(HEADER.to_vec())))
            .map_err(|e| parse_error(line, e.to_string()))?;
        samples.push(row.check().map_err(|m| parse_error(line, m))?);
    }
    finish(samples, 2)
}

/// Parses a JSON array of `{t,x,y,z,qw,qx,qy,qz}` objects.
pub fn parse_demo_json(text: &str) -> Result<DemoTrajectory> {
    let rows: Vec<DemoRow> =
        serde_json::from_str(text).map_err(|e| parse_error(e.line() as u64, e.to_string()))?;
    let samples = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.check().map_err(|m| Error::invalid(format!("sample {i}: {m}"))))
        .collect::<Result<_>>()?;
    finish(samples, 1)
}

/// Reads a demo by extension: `.json` as JSON, anything else as CSV.
pub fn read_demo_file(path: &Path) -> Result<DemoTrajectory> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_demo_json(&text)
    } else {
        parse_demo_csv(&text)
    }
}

pub fn demo_to_csv(demo: &DemoTrajectory) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &demo.samples {
        w.serialize(DemoRow::from_sample(s)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ArcSpec;

    fn line_of(r: Result<DemoTrajectory>) -> u64 {
        match r {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_names_line_one() {
        assert_eq!(line_of(parse_demo_csv("")), 1);
        assert_eq!(line_of(parse_demo_csv("a,b\n")), 1);
    }

    #[test]
    fn malformed_row_names_its_line() {
        let text = "t,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0.00333,0,oops,0,1,0,0,0\n";
        assert_eq!(line_of(parse_demo_csv(text)), 3);
        let text = "t,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0.00333,0,0,0,2,0,0,0\n";
        assert_eq!(line_of(parse_demo_csv(text)), 3);
        let text = "t,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0.00333,0,0\n";
        assert_eq!(line_of(parse_demo_csv(text)), 3);
    }

    #[test]
    fn csv_round_trip() {
        let demo = ArcSpec::new(2.0, 1.0).clean();
        let back = parse_demo_csv(&demo_to_csv(&demo)).unwrap();
        assert_eq!(back.samples.len(), demo.samples.len());
        for (a, b) in demo.samples.iter().zip(&back.samples) {
            assert!((a.t - b.t).abs() < 1e-12);
            assert!((a.position[0] - b.position[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn json_matches_csv() {
        let demo = ArcSpec::new(2.0, 0.5).clean();
        let rows: Vec<DemoRow> = demo.samples.iter().map(DemoRow::from_sample).collect();
        let json = serde_json::to_string(&rows).unwrap();
        assert_eq!(parse_demo_json(&json).unwrap(), parse_demo_csv(&demo_to_csv(&demo)).unwrap());
        assert!(parse_demo_json("[]").is_err());
        assert!(parse_demo_json("{").is_err());
    }
}
