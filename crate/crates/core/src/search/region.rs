//! Feasible region: a box intersected with half-spaces, with integer
//! coordinates and coordinates frozen at the query.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};

/// `a . x <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub a: Vec<f64>,
    pub b: f64,
}

impl LinearConstraint {
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - self.a.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConstraint {
    #[default]
    Free,
    IncreaseOnly,
    DecreaseOnly,
    /// Held at the query value.
    Fixed,
}

const DYKSTRA_SWEEPS: usize = 2000;
const REPAIR_STEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub linear: Vec<LinearConstraint>,
    pub integer: Vec<bool>,
    pub query: Vec<f64>,
}

impl Region {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Coordinates with room to move.
    pub fn free_dims(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&j| self.upper[j] > self.lower[j])
            .collect()
    }

    /// Same region with every coordinate outside `dims` frozen at the query.
    pub fn restrict(&self, dims: &[usize]) -> Region {
        let mut r = self.clone();
        for j in 0..self.dim() {
            if !dims.contains(&j) {
                r.lower[j] = self.query[j];
                r.upper[j] = self.query[j];
            }
        }
        r
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Exact membership, integrality included.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self.in_box(x)
            && self.linear.iter().all(|c| c.slack(x) >= 0.0)
            && x.iter()
                .zip(&self.integer)
                .all(|(v, &int)| !int || v.fract() == 0.0)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
            .collect()
    }

    /// Euclidean projection onto the continuous region (Dykstra's algorithm
    /// over the box and each half-space).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        if self.linear.is_empty() {
            return self.clamp(x);
        }
        let n_sets = self.linear.len() + 1;
        let mut y = x.to_vec();
        let mut incr = vec![vec![0.0; x.len()]; n_sets];
        for _ in 0..DYKSTRA_SWEEPS {
            let prev = y.clone();
            for s in 0..n_sets {
                let z: Vec<f64> = y.iter().zip(&incr[s]).map(|(a, b)| a + b).collect();
                let p = if s == 0 {
                    self.clamp(&z)
                } else {
                    project_halfspace(&self.linear[s - 1], &z)
                };
                incr[s] = z.iter().zip(&p).map(|(a, b)| a - b).collect();
                y = p;
            }
            let moved: f64 = y
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            if moved <= 1e-14 * (1.0 + norm(&y)) {
                break;
            }
        }
        self.clamp(&y)
    }

    /// Integer coordinates to the nearest integer inside the box.
    pub fn round(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.integer[j] {
                    v.round().clamp(self.lower[j].ceil(), self.upper[j].floor())
                } else {
                    v
                }
            })
            .collect()
    }

    /// A member of the region close to `x`: projection, rounding, and if the
    /// rounded point leaves the region, bisection back towards the query.
    pub fn finalize(&self, x: &[f64]) -> Vec<f64> {
        let candidate = self.round(&self.project(x));
        if self.contains(&candidate) {
            return candidate;
        }
        let at = |t: f64| -> Vec<f64> {
            let p: Vec<f64> = self
                .query
                .iter()
                .zip(&candidate)
                .map(|(q, c)| q + t * (c - q))
                .collect();
            self.round(&self.clamp(&p))
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = self.query.clone();
        for _ in 0..REPAIR_STEPS {
            let mid = 0.5 * (lo + hi);
            let p = at(mid);
            if self.contains(&p) {
                lo = mid;
                best = p;
            } else {
                hi = mid;
            }
        }
        best
    }

    /// Uniform draw from the box, rejected against the half-spaces, then
    /// finalised.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut last = self.query.clone();
        for _ in 0..1000 {
            last = self.sample_box(rng);
            if self.linear.iter().all(|c| c.slack(&last) >= 0.0) {
                break;
            }
        }
        self.finalize(&last)
    }

    pub fn sample_box(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                if hi > lo {
                    lo + (hi - lo) * rng.gen::<f64>()
                } else {
                    lo
                }
            })
            .collect()
    }

    /// `n` Latin-hypercube points in the box (not finalised).
    pub fn latin_hypercube(&self, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut pts = vec![vec![0.0; d]; n];
        for j in 0..d {
            let mut strata: Vec<usize> = (0..n).collect();
            strata.shuffle(rng);
            for (i, s) in strata.into_iter().enumerate() {
                let (lo, hi) = (self.lower[j], self.upper[j]);
                let u = (s as f64 + rng.gen::<f64>()) / n as f64;
                pts[i][j] = if hi > lo { lo + (hi - lo) * u } else { lo };
            }
        }
        pts
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn project_halfspace(c: &LinearConstraint, x: &[f64]) -> Vec<f64> {
    let slack = c.slack(x);
    if slack >= 0.0 {
        return x.to_vec();
    }
    let aa: f64 = c.a.iter().map(|v| v * v).sum();
    if aa == 0.0 {
        return x.to_vec();
    }
    x.iter()
        .zip(&c.a)
        .map(|(v, a)| v + slack / aa * a)
        .collect()
}

/// Builds the region for a query, applying sign constraints to the box.
pub fn build_region(
    query: &[f64],
    lower: &[f64],
    upper: &[f64],
    linear: &[LinearConstraint],
    integer_dims: &[usize],
    signs: &[SignConstraint],
) -> Result<Region> {
    let d = query.len();
    if lower.len() != d || upper.len() != d {
        return Err(CfxError::DimensionMismatch {
            expected: d,
            got: if lower.len() != d {
                lower.len()
            } else {
                upper.len()
            },
        });
    }
    if !signs.is_empty() && signs.len() != d {
        return Err(CfxError::DimensionMismatch {
            expected: d,
            got: signs.len(),
        });
    }
    if let Some(c) = linear.iter().find(|c| c.a.len() != d) {
        return Err(CfxError::DimensionMismatch {
            expected: d,
            got: c.a.len(),
        });
    }
    if let Some(&j) = integer_dims.iter().find(|&&j| j >= d) {
        return Err(CfxError::InvalidParameter(format!(
            "integer dimension {j} out of range"
        )));
    }
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    for j in 0..d {
        if !(lo[j] <= hi[j]) || !lo[j].is_finite() || !hi[j].is_finite() {
            return Err(CfxError::Infeasible(format!(
                "empty or unbounded box in dimension {j}"
            )));
        }
        if !(lo[j] <= query[j] && query[j] <= hi[j]) {
            return Err(CfxError::Infeasible(format!(
                "query lies outside the box in dimension {j}"
            )));
        }
        match signs.get(j).copied().unwrap_or_default() {
            SignConstraint::Free => {}
            SignConstraint::IncreaseOnly => lo[j] = query[j],
            SignConstraint::DecreaseOnly => hi[j] = query[j],
            SignConstraint::Fixed => {
                lo[j] = query[j];
                hi[j] = query[j];
            }
        }
    }
    let mut integer = vec![false; d];
    for &j in integer_dims {
        integer[j] = true;
        if query[j].fract() != 0.0 {
            return Err(CfxError::InvalidParameter(format!(
                "query is not integral in integer dimension {j}"
            )));
        }
    }
    let region = Region {
        lower: lo,
        upper: hi,
        linear: linear.to_vec(),
        integer,
        query: query.to_vec(),
    };
    if !region.contains(query) {
        return Err(CfxError::Infeasible(
            "query violates the linear constraints".into(),
        ));
    }
    Ok(region)
}
