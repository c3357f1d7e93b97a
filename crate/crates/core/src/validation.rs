//! Self-test suite comparing the closed forms against independent oracles.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::acquisition::{
    ei_cfx_grad, ei_cfx_terms, ei_cfx_with_grad, oracle, AcquisitionInputs, GradientMode,
};
use crate::error::Result;
use crate::potential::{PotentialKind, PotentialSpec, INV_E};
use crate::quadrature::{
    gauss_hermite, gauss_legendre, legendre_weight_closed_form, QuadratureRule,
};
use crate::surrogate::{fit, KernelParams, SampleSet};

const KINDS: [PotentialKind; 3] = [
    PotentialKind::Sep,
    PotentialKind::AepPlus,
    PotentialKind::AepMinus,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// Largest absolute error (relative for the quadrature checks).
    pub max_error: f64,
    /// Largest error divided by its allowed tolerance.
    pub worst_ratio: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, errors: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut cases, mut max_error, mut worst_ratio) = (0, 0.0f64, 0.0f64);
        let mut finite = true;
        for (err, tol) in errors {
            cases += 1;
            finite &= err.is_finite();
            max_error = max_error.max(err);
            worst_ratio = worst_ratio.max(err / tol);
        }
        Self {
            name: name.to_string(),
            cases,
            max_error,
            worst_ratio,
            pass: finite && worst_ratio <= 1.0,
        }
    }
}

/// Closed-form EI-CFX against the kink-split Gauss-Legendre oracle.
pub fn check_closed_form(tuples: usize, seed: u64) -> Check {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let errors = (0..tuples).map(|i| {
        let kind = KINDS[i % 3];
        let width = 10f64.powf(rng.gen_range(-1.0..1.0));
        let sigma = 10f64.powf(rng.gen_range(-6.0..1.0));
        let mu = rng.gen_range(-3.0..3.0) * width;
        let rho = if i % 7 == 0 {
            0.0
        } else {
            10f64.powf(rng.gen_range(-6.0..INV_E.log10()))
        };
        let spec = PotentialSpec::new(kind, 0.0, width).expect("positive width");
        let closed = ei_cfx_terms(kind, mu, sigma, width, rho).value;
        let reference = oracle::reference_ei(&spec, rho, mu, sigma);
        (
            (closed - reference).abs(),
            (1e-8 * reference.abs()).max(1e-12),
        )
    });
    Check::new(
        "ei-cfx closed form vs quadrature",
        errors.collect::<Vec<_>>(),
    )
}

/// Analytic gradient against central differences with step `1e-5`.
pub fn check_gradient(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut errors = Vec::with_capacity(instances);
    for i in 0..instances {
        let xs: Vec<Vec<f64>> = (0..6)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (a * x[0]).sin() + b * x[1] * x[1])
            .collect();
        let kernel = KernelParams {
            lengthscales: vec![rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0)],
            signal_variance: rng.gen_range(0.5..2.0),
            jitter: 1e-10,
        };
        let post = fit(&SampleSet::from_parts(xs, ys)?, &kernel)?;
        let spec = PotentialSpec::new(
            KINDS[i % 3],
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.2..1.5),
        )?;
        let inputs = AcquisitionInputs::new(&post, spec);
        let x = [rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2)];
        let (_, g) = ei_cfx_with_grad(&inputs, &x)?;
        let fd = ei_cfx_grad(
            &inputs,
            &x,
            GradientMode::FiniteDifference { rel_step: 1e-5 },
        )?;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = g
            .iter()
            .zip(&fd)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        // Differences of values carrying absolute error ~ eps * incumbent.
        let rounding = f64::EPSILON * inputs.incumbent / 1e-5 * 2f64.sqrt();
        errors.push((err, (1e-5 * norm + rounding).max(1e-12)));
    }
    Ok(Check::new("ei-cfx gradient vs finite differences", errors))
}

fn moment_errors(rule: &QuadratureRule, exact: impl Fn(i32) -> (f64, f64)) -> Vec<(f64, f64)> {
    let n = rule.len() as i32;
    let mut out: Vec<(f64, f64)> = (0..2 * n)
        .map(|k| {
            let (value, scale) = exact(k);
            ((rule.integrate(|x| x.powi(k)) - value).abs() / scale, 1e-10)
        })
        .collect();
    let sum: f64 = rule.weights().iter().sum();
    out.push(((sum - rule.mass()).abs() / rule.mass(), 1e-12));
    let min_weight = rule.weights().iter().cloned().fold(f64::INFINITY, f64::min);
    out.push((if min_weight > 0.0 { 0.0 } else { f64::INFINITY }, 1.0));
    out
}

fn hermite_moment(k: i32) -> (f64, f64) {
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    if k % 2 == 0 {
        let v: f64 = (1..k).step_by(2).map(|j| j as f64).product::<f64>() * root_2pi;
        (v, v)
    } else {
        let m = (k - 1) / 2;
        let abs: f64 = (1..=m).map(|j| j as f64).product::<f64>() * 2f64.powi(m + 1);
        (0.0, abs)
    }
}

fn legendre_moment(k: i32) -> (f64, f64) {
    let abs = 2.0 / (k + 1) as f64;
    (if k % 2 == 0 { abs } else { 0.0 }, abs)
}

/// Degree `2n - 1` exactness, positive weights and total mass for `n = 1..=max_n`.
pub fn check_exactness(max_n: usize) -> Result<Vec<Check>> {
    let mut hermite = Vec::new();
    let mut legendre = Vec::new();
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    for n in 1..=max_n {
        let h = gauss_hermite(n)?;
        hermite.extend(moment_errors(&h, hermite_moment));
        hermite.push(((h.mass() - root_2pi).abs() / root_2pi, 1e-12));
        let l = gauss_legendre(n)?;
        legendre.extend(moment_errors(&l, legendre_moment));
        legendre.push(((l.mass() - 2.0).abs() / 2.0, 1e-12));
    }
    Ok(vec![
        Check::new("hermite rule exactness (rel)", hermite),
        Check::new("legendre rule exactness (rel)", legendre),
    ])
}

/// Golub-Welsch Legendre weights against `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn check_legendre_weights(max_n: usize) -> Result<Check> {
    let mut errors = Vec::new();
    for n in 1..=max_n {
        let rule = gauss_legendre(n)?;
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            let closed = legendre_weight_closed_form(n, x);
            errors.push(((w - closed).abs() / closed, 1e-12));
        }
    }
    Ok(Check::new("legendre weights vs closed form (rel)", errors))
}

/// The full suite.
pub fn run_suite() -> Result<Vec<Check>> {
    let mut checks = vec![check_closed_form(600, 1), check_gradient(200, 2)?];
    checks.extend(check_exactness(20)?);
    checks.push(check_legendre_weights(20)?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_suite().unwrap() {
            assert!(c.pass, "{c:?}");
            assert!(c.cases > 0);
        }
    }

    #[test]
    fn failing_errors_are_reported() {
        let c = Check::new("x", vec![(1e-3, 1e-4), (0.0, 1.0)]);
        assert!(!c.pass);
        assert_eq!(c.cases, 2);
        assert!((c.worst_ratio - 10.0).abs() < 1e-12);
        assert!(!Check::new("nan", vec![(f64::NAN, 1.0)]).pass);
    }
}
