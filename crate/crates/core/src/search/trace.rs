//! Per-evaluation search records.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    BayesCfx,
    BayesNaive,
    Random,
    Localopt,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::BayesCfx => "bayes-cfx",
            Strategy::BayesNaive => "bayes-naive",
            Strategy::Random => "random",
            Strategy::Localopt => "localopt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initial,
    Acquisition,
    Random,
    /// Acquisition proposals all duplicated existing samples.
    Fallback,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub iteration: usize,
    pub phase: Phase,
    pub x: Vec<f64>,
    pub y: f64,
    pub rho: f64,
    /// Best potential over all samples up to and including this one.
    pub incumbent: f64,
    /// Acquisition value of this trace's potential at `x`, when one was fitted.
    pub acquisition: Option<f64>,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    pub x: Vec<f64>,
    pub y: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub strategy: Strategy,
    pub seed: u64,
    pub budget: usize,
    pub potential: PotentialSpec,
    pub records: Vec<Record>,
    pub best: Option<BestPoint>,
    /// Reference optimum used for the target-set flag.
    pub rho_star: f64,
    pub rho_star_source: String,
    /// False only when the reference optimum was supplied exactly.
    pub rho_star_estimated: bool,
    pub epsilon: f64,
    pub in_target_set: bool,
    pub budget_exhausted: bool,
}

impl Trace {
    pub fn incumbent(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.incumbent)
    }

    /// Incumbent after the first `n` evaluations.
    pub fn incumbent_after(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.records
            .get(n.min(self.records.len()) - 1)
            .map_or(0.0, |r| r.incumbent)
    }

    pub fn evaluations(&self) -> usize {
        self.records.len()
    }

    /// Index of the first evaluation reaching `level`, if any.
    pub fn first_reaching(&self, level: f64) -> Option<usize> {
        self.records.iter().position(|r| r.rho >= level)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_jsonl()?.as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn read_jsonl(text: &str) -> Result<Vec<Record>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }
}
