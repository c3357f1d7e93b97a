//! Maximum-likelihood kernel hyperparameters.
//!
//! Coordinate-wise golden-section ascent of the log marginal likelihood in
//! log-parameter space, restarted from several seeded points. Outputs are
//! standardised first, so the signal-variance bounds are relative to the
//! output variance.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::{
    factorise, fit_standardized, lml_from_factor, output_standardisation, GpPosterior,
    KernelParams, SampleSet, DEFAULT_JITTER,
};
use crate::error::{CfxError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperOptions {
    pub restarts: usize,
    pub sweeps: usize,
    pub golden_iters: usize,
    /// One lengthscale per dimension when true, a shared one otherwise.
    pub ard: bool,
    pub jitter: f64,
    /// Lengthscale bounds as multiples of each input dimension's range.
    pub lengthscale_bounds: (f64, f64),
    /// Signal-variance bounds as multiples of the output variance.
    pub variance_bounds: (f64, f64),
}

impl Default for HyperOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            sweeps: 2,
            golden_iters: 24,
            ard: true,
            jitter: DEFAULT_JITTER,
            lengthscale_bounds: (1e-3, 1e3),
            variance_bounds: (1e-6, 1e6),
        }
    }
}

struct Objective<'a> {
    inputs: &'a [Vec<f64>],
    outputs: Vec<f64>,
    n_ls: usize,
    jitter: f64,
}

impl Objective<'_> {
    fn kernel(&self, theta: &[f64]) -> KernelParams {
        KernelParams {
            lengthscales: theta[..self.n_ls].iter().map(|t| t.exp()).collect(),
            signal_variance: theta[self.n_ls].exp(),
            jitter: self.jitter,
        }
    }

    fn eval(&self, theta: &[f64]) -> f64 {
        match factorise(&self.kernel(theta), self.inputs) {
            Ok((chol, _)) => {
                let v = lml_from_factor(&chol, &self.outputs);
                if v.is_finite() {
                    v
                } else {
                    f64::NEG_INFINITY
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

fn golden_max(mut lo: f64, mut hi: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..iters {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Kernel hyperparameters (in standardised output units) maximising the log
/// marginal likelihood of `data`.
pub fn fit_hyperparameters(
    data: &SampleSet,
    opts: &HyperOptions,
    seed: u64,
) -> Result<KernelParams> {
    let dim = data.dim().ok_or_else(|| {
        CfxError::InvalidParameter("cannot fit a GP to an empty sample set".into())
    })?;
    let (mean, sd) = output_standardisation(data.outputs());
    let outputs: Vec<f64> = data.outputs().iter().map(|y| (y - mean) / sd).collect();
    let n_ls = if opts.ard { dim } else { 1 };

    let ranges: Vec<f64> = (0..dim)
        .map(|j| {
            let (lo, hi) = data
                .inputs()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x[j]), hi.max(x[j]))
                });
            let r = hi - lo;
            if r > 0.0 && r.is_finite() {
                r
            } else {
                1.0
            }
        })
        .collect();
    let shared_range = ranges.iter().cloned().fold(0.0, f64::max);
    let mut bounds: Vec<(f64, f64)> = (0..n_ls)
        .map(|j| {
            let r = if opts.ard { ranges[j] } else { shared_range };
            (
                (opts.lengthscale_bounds.0 * r).ln(),
                (opts.lengthscale_bounds.1 * r).ln(),
            )
        })
        .collect();
    bounds.push((opts.variance_bounds.0.ln(), opts.variance_bounds.1.ln()));

    let objective = Objective {
        inputs: data.inputs(),
        outputs,
        n_ls,
        jitter: opts.jitter,
    };

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for restart in 0..opts.restarts.max(1) {
        let mut theta: Vec<f64> = if restart == 0 {
            let mut t: Vec<f64> = (0..n_ls)
                .map(|j| if opts.ard { ranges[j] } else { shared_range }.ln())
                .collect();
            t.push(0.0);
            t
        } else {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect()
        };
        let mut value = objective.eval(&theta);
        for _ in 0..opts.sweeps {
            for c in 0..theta.len() {
                let (lo, hi) = bounds[c];
                let mut probe = theta.clone();
                let (arg, v) = golden_max(lo, hi, opts.golden_iters, |t| {
                    probe[c] = t;
                    objective.eval(&probe)
                });
                if v > value {
                    theta[c] = arg;
                    value = v;
                }
            }
        }
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((theta, value));
        }
    }
    let (theta, value) = best.expect("at least one restart");
    if value == f64::NEG_INFINITY {
        return Err(CfxError::Cholesky {
            jitter: super::MAX_JITTER,
        });
    }
    Ok(objective.kernel(&theta))
}

/// Standardised fit with maximum-likelihood hyperparameters.
pub fn fit_auto(data: &SampleSet, opts: &HyperOptions, seed: u64) -> Result<GpPosterior> {
    let kernel = fit_hyperparameters(data, opts, seed)?;
    fit_standardized(data, &kernel)
}
