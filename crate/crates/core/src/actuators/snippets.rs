use std::path::Path;

use crate::io::{parse_demo_csv, read_demo_file};
use crate::trajectory::{retarget, ArmModel, DemoTrajectory, JointTrajectory, RetargetOptions};
use crate::{Error, Result};

/// The three bundled caxixi demonstrations, in demo CSV format.
pub const SNIPPET_CSV: [&str; 3] = [
    include_str!("../../fixtures/snippets/snippet1.csv"),
    include_str!("../../fixtures/snippets/snippet2.csv"),
    include_str!("../../fixtures/snippets/snippet3.csv"),
];

/// Retargeted joint trajectories for snippets 1..=3.
#[derive(Clone, Debug)]
pub struct SnippetLibrary {
    trajectories: Vec<JointTrajectory>,
}

impl SnippetLibrary {
    pub fn new(trajectories: Vec<JointTrajectory>) -> Result<Self> {
        if trajectories.len() != 3 {
            return Err(Error::invalid("a snippet library holds exactly three trajectories"));
        }
        if trajectories.iter().any(|t| t.times.len() < 2 || !(t.duration() > 0.0)) {
            return Err(Error::invalid("snippet trajectories need a positive duration"));
        }
        Ok(SnippetLibrary { trajectories })
    }

    pub fn bundled_demos() -> Result<Vec<DemoTrajectory>> {
        SNIPPET_CSV.iter().map(|s| parse_demo_csv(s)).collect()
    }

    /// Retargets the bundled fixtures, or `snippet1..3` demo files from
    /// `dir` (`.csv` or `.json`) when given.
    pub fn load(dir: Option<&Path>, arm: &ArmModel, opts: &RetargetOptions) -> Result<Self> {
        let demos = match dir {
            None => Self::bundled_demos()?,
            Some(dir) => (1..=3)
                .map(|i| {
                    let csv = dir.join(format!("snippet{i}.csv"));
                    let path = if csv.exists() { csv } else { dir.join(format!("snippet{i}.json")) };
                    read_demo_file(&path)
                })
                .collect::<Result<_>>()?,
        };
        let trajectories = demos
            .iter()
            .map(|d| retarget(d, arm, opts, &arm.rest_config).map(|r| r.trajectory))
            .collect::<Result<_>>()?;
        Self::new(trajectories)
    }

    pub fn get(&self, id: u8) -> Option<&JointTrajectory> {
        (1..=3).contains(&id).then(|| &self.trajectories[id as usize - 1])
    }

    pub fn durations(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.trajectories[i].duration())
    }
}
