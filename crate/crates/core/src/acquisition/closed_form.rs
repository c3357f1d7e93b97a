//! Closed-form expected counterfactual improvement.
//!
//! With `u = y - center` distributed as `N(mu_tilde, sigma^2)`, the
//! improvement `max{0, rho(u) - rho*}` is non-zero only on the superlevel
//! intervals `w [r_0, r_{-1}]` (and their mirror image), so
//!
//! ```text
//! alpha = sum over intervals of integral (rho(mu_tilde + sigma z) - rho*) phi(z) dz.
//! ```
//!
//! The product of the potential's Gaussian factor with the normal density is
//! again Gaussian: with `kappa = w^2 + 2 sigma^2`,
//! `rho(mu_tilde + sigma z) phi(z) dz = C (gamma + eta zeta)^2 phi(zeta) dzeta`
//! where `zeta = sqrt(kappa) / w (z + b)`, `b = 2 mu_tilde sigma / kappa`,
//! `gamma = mu_tilde - b sigma`, `eta = w sigma / sqrt(kappa)` and
//! `C = exp(-mu_tilde^2 / kappa) / (w sqrt(kappa))`. The remaining integrals
//! are truncated Gaussian moments.
//!
//! Derivatives with respect to `mu_tilde` and `sigma` differentiate the
//! Gaussian density only: the integrand vanishes at every interval end, so
//! the moving limits contribute nothing.

use serde::{Deserialize, Serialize};

use super::normal::truncated_moments;
use crate::potential::{level_radii, PotentialKind, PotentialSpec, INV_E};

/// `sigma / width` below which the posterior is treated as a point mass.
pub const DEGENERATE_SIGMA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormScratch {
    pub mu_tilde: f64,
    pub sigma: f64,
    pub width: f64,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    /// `ln C`.
    pub log_c: f64,
    pub gamma: f64,
    pub eta: f64,
}

/// Value of the acquisition and its partial derivatives in the posterior
/// mean offset and standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EiCfxTerms {
    pub value: f64,
    pub d_mu: f64,
    pub d_sigma: f64,
}

impl std::ops::Add for EiCfxTerms {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            d_mu: self.d_mu + o.d_mu,
            d_sigma: self.d_sigma + o.d_sigma,
        }
    }
}

fn poly_mul<const A: usize, const B: usize, const C: usize>(p: [f64; A], q: [f64; B]) -> [f64; C] {
    let mut out = [0.0; C];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

fn dot<const N: usize>(p: &[f64; N], m: &[f64; 5]) -> f64 {
    p.iter().zip(m).map(|(a, b)| a * b).sum()
}

impl ClosedFormScratch {
    pub fn new(mu_tilde: f64, sigma: f64, width: f64) -> Self {
        let kappa = width * width + 2.0 * sigma * sigma;
        let b = 2.0 * mu_tilde * sigma / kappa;
        let root_kappa = kappa.sqrt();
        Self {
            mu_tilde,
            sigma,
            width,
            kappa,
            a: 2.0 * mu_tilde * mu_tilde / kappa,
            b,
            log_c: -mu_tilde * mu_tilde / kappa - (width * root_kappa).ln(),
            gamma: mu_tilde * width * width / kappa,
            eta: width * sigma / root_kappa,
        }
    }

    /// Standardised limit `z` and transformed limit `zeta` for an offset `u`.
    pub fn limits(&self, u: f64) -> (f64, f64) {
        let z = (u - self.mu_tilde) / self.sigma;
        let zeta = (z + self.b) * self.kappa.sqrt() / self.width;
        (z, zeta)
    }

    /// Contribution of the offsets `u` in `[u_lo, u_hi]`, where
    /// `rho(u) >= rho_star` throughout.
    pub fn interval(&self, u_lo: f64, u_hi: f64, rho_star: f64) -> EiCfxTerms {
        if !(u_hi > u_lo) {
            return EiCfxTerms::default();
        }
        let (z_lo, zeta_lo) = self.limits(u_lo);
        let (z_hi, zeta_hi) = self.limits(u_hi);
        let mz: [f64; 3] = truncated_moments(z_lo, z_hi);
        let mzeta: [f64; 5] = truncated_moments(zeta_lo, zeta_hi);

        // z = s zeta - b with s = w / sqrt(kappa).
        let s = self.width / self.kappa.sqrt();
        let quad = [
            self.gamma * self.gamma,
            2.0 * self.gamma * self.eta,
            self.eta * self.eta,
        ];
        let z_poly = [-self.b, s];
        let z2_minus_1: [f64; 3] = {
            let sq: [f64; 3] = poly_mul(z_poly, z_poly);
            [sq[0] - 1.0, sq[1], sq[2]]
        };
        let p1: [f64; 4] = poly_mul(z_poly, quad);
        let p2: [f64; 5] = poly_mul(z2_minus_1, quad);

        let c = self.log_c.exp();
        let i0 = c * dot(&quad, &mzeta);
        let i1 = c * dot(&p1, &mzeta);
        let i2 = c * dot(&p2, &mzeta);
        EiCfxTerms {
            value: i0 - rho_star * mz[0],
            d_mu: (i1 - rho_star * mz[1]) / self.sigma,
            d_sigma: (i2 - rho_star * (mz[2] - mz[0])) / self.sigma,
        }
    }
}

/// `E[max{0, rho(u) - rho*}]` for `u ~ N(mu_tilde, sigma^2)` and a potential
/// of the given kind and width centred at zero, with derivatives.
pub fn ei_cfx_terms(
    kind: PotentialKind,
    mu_tilde: f64,
    sigma: f64,
    width: f64,
    incumbent: f64,
) -> EiCfxTerms {
    let incumbent = incumbent.clamp(0.0, INV_E);
    if incumbent >= INV_E * (1.0 - 1e-15) {
        return EiCfxTerms::default();
    }
    let spec = PotentialSpec {
        kind,
        center: 0.0,
        width,
    };
    if !(sigma > DEGENERATE_SIGMA * width) {
        let rho = spec.value(mu_tilde);
        return if rho > incumbent {
            EiCfxTerms {
                value: rho - incumbent,
                d_mu: spec.derivative(mu_tilde),
                d_sigma: 0.0,
            }
        } else {
            EiCfxTerms::default()
        };
    }
    let (inner, outer) = level_radii(incumbent).expect("incumbent clamped into range");
    let scratch = ClosedFormScratch::new(mu_tilde, sigma, width);
    let mut total = EiCfxTerms::default();
    if kind.has_upper() {
        total = total + scratch.interval(width * inner, width * outer, incumbent);
    }
    if kind.has_lower() {
        total = total + scratch.interval(-width * outer, -width * inner, incumbent);
    }
    total.value = total.value.max(0.0);
    total
}
