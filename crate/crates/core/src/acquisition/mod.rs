//! Expected counterfactual improvement (EI-CFX) over a GP model of the
//! black-box output, plus the classic expected improvement over `rho o f`.

mod closed_form;
pub mod normal;
pub mod oracle;

pub use closed_form::{ei_cfx_terms, ClosedFormScratch, EiCfxTerms, DEGENERATE_SIGMA};

use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};
use crate::potential::{PotentialSpec, INV_E};
use crate::quadrature::QuadratureRule;
use crate::surrogate::GpPosterior;

/// Posterior, potential and incumbent that together define EI-CFX.
#[derive(Debug, Clone, Copy)]
pub struct AcquisitionInputs<'a> {
    pub posterior: &'a GpPosterior,
    pub potential: PotentialSpec,
    /// Best potential over the posterior's sample set.
    pub incumbent: f64,
}

/// Best potential value among `outputs`, zero for no outputs.
pub fn incumbent_of(potential: &PotentialSpec, outputs: &[f64]) -> f64 {
    outputs
        .iter()
        .map(|&y| potential.value(y))
        .fold(0.0, f64::max)
}

impl<'a> AcquisitionInputs<'a> {
    /// Incumbent taken from the outputs the posterior was conditioned on.
    pub fn new(posterior: &'a GpPosterior, potential: PotentialSpec) -> Self {
        let incumbent = incumbent_of(&potential, posterior.data().outputs());
        Self {
            posterior,
            potential,
            incumbent,
        }
    }

    pub fn with_incumbent(
        posterior: &'a GpPosterior,
        potential: PotentialSpec,
        incumbent: f64,
    ) -> Result<Self> {
        if !(0.0..=INV_E).contains(&incumbent) {
            return Err(CfxError::Domain {
                what: "incumbent potential",
                value: incumbent,
            });
        }
        Ok(Self {
            posterior,
            potential,
            incumbent,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
#[derive(Default)]
pub enum GradientMode {
    #[default]
    Analytic,
    /// Central differences with step `rel_step * max(1, |x_j|)`.
    FiniteDifference { rel_step: f64 },
}

pub fn ei_cfx(inputs: &AcquisitionInputs, x: &[f64]) -> Result<f64> {
    let (mean, var) = inputs.posterior.predict(x)?;
    let p = &inputs.potential;
    Ok(ei_cfx_terms(
        p.kind,
        mean - p.center,
        var.sqrt(),
        p.width,
        inputs.incumbent,
    )
    .value)
}

/// Value and analytic gradient, chained through the posterior mean and
/// standard deviation.
pub fn ei_cfx_with_grad(inputs: &AcquisitionInputs, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let pred = inputs.posterior.predict_with_gradient(x)?;
    let p = &inputs.potential;
    let sigma = pred.variance.sqrt();
    let t = ei_cfx_terms(
        p.kind,
        pred.mean - p.center,
        sigma,
        p.width,
        inputs.incumbent,
    );
    let grad = pred
        .mean_grad
        .iter()
        .zip(&pred.variance_grad)
        .map(|(&dm, &dv)| {
            let ds = if sigma > 0.0 { dv / (2.0 * sigma) } else { 0.0 };
            t.d_mu * dm + t.d_sigma * ds
        })
        .collect();
    Ok((t.value, grad))
}

fn central_difference(
    x: &[f64],
    rel_step: f64,
    f: impl Fn(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = rel_step * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let up = f(&probe)?;
        probe[j] = x[j] - h;
        let down = f(&probe)?;
        probe[j] = x[j];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

pub fn ei_cfx_grad(inputs: &AcquisitionInputs, x: &[f64], mode: GradientMode) -> Result<Vec<f64>> {
    match mode {
        GradientMode::Analytic => Ok(ei_cfx_with_grad(inputs, x)?.1),
        GradientMode::FiniteDifference { rel_step } => {
            central_difference(x, rel_step, |p| ei_cfx(inputs, p))
        }
    }
}

/// EI-CFX by applying a Gauss-Hermite rule (weight `exp(-z^2/2)`) to the
/// integral over the posterior.
pub fn ei_cfx_quadrature(
    inputs: &AcquisitionInputs,
    x: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    let (mean, var) = inputs.posterior.predict(x)?;
    Ok(oracle::gauss_hermite_ei(
        &inputs.potential,
        inputs.incumbent,
        mean,
        var.sqrt(),
        rule,
    ))
}

/// Classic expected improvement `E[max{0, Y - incumbent}]` for
/// `Y ~ N(mean, sigma^2)`, with derivatives in `mean` and `sigma`.
pub fn expected_improvement(mean: f64, sigma: f64, incumbent: f64) -> EiCfxTerms {
    if !(sigma > 0.0) {
        return if mean > incumbent {
            EiCfxTerms {
                value: mean - incumbent,
                d_mu: 1.0,
                d_sigma: 0.0,
            }
        } else {
            EiCfxTerms::default()
        };
    }
    let u = (mean - incumbent) / sigma;
    let cdf = normal::cdf(u);
    let pdf = normal::pdf(u);
    EiCfxTerms {
        value: (sigma * (u * cdf + pdf)).max(0.0),
        d_mu: cdf,
        d_sigma: pdf,
    }
}

/// Expected improvement of a posterior fitted to potential values directly.
pub fn ei_naive(posterior: &GpPosterior, incumbent: f64, x: &[f64]) -> Result<f64> {
    let (mean, var) = posterior.predict(x)?;
    Ok(expected_improvement(mean, var.sqrt(), incumbent).value)
}

pub fn ei_naive_with_grad(
    posterior: &GpPosterior,
    incumbent: f64,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let pred = posterior.predict_with_gradient(x)?;
    let sigma = pred.variance.sqrt();
    let t = expected_improvement(pred.mean, sigma, incumbent);
    let grad = pred
        .mean_grad
        .iter()
        .zip(&pred.variance_grad)
        .map(|(&dm, &dv)| {
            let ds = if sigma > 0.0 { dv / (2.0 * sigma) } else { 0.0 };
            t.d_mu * dm + t.d_sigma * ds
        })
        .collect();
    Ok((t.value, grad))
}
