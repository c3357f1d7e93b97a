//! Quadrature evaluations of EI-CFX that share nothing with the closed form.
//!
//! [`gauss_hermite_ei`] applies a Gauss-Hermite rule to the whole real line.
//! The improvement has kinks where the potential crosses the incumbent, so a
//! global rule converges slowly there; [`reference_ei`] instead locates the
//! kinks by bisection on the potential itself (no Lambert W) and integrates
//! each smooth piece with composite Gauss-Legendre panels.

use std::sync::OnceLock;

use super::normal::FRAC_1_SQRT_2PI;
use crate::potential::{PotentialSpec, INV_E};
use crate::quadrature::{gauss_legendre, QuadratureRule};

/// `r^2 exp(-r^2)` is below the smallest subnormal beyond this radius.
const RADIUS_CUTOFF: f64 = 27.5;
/// Normal density is zero in double precision beyond this many deviations.
const Z_CUTOFF: f64 = 39.0;
const PANEL_NODES: usize = 20;

fn panel_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_NODES).expect("legendre rule"))
}

/// `sum_i w_i / mass * max{0, rho(mean + sigma z_i) - rho*}` for a rule with
/// weight `exp(-z^2/2)`.
pub fn gauss_hermite_ei(
    potential: &PotentialSpec,
    incumbent: f64,
    mean: f64,
    sigma: f64,
    rule: &QuadratureRule,
) -> f64 {
    let total: f64 = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&z, &w)| w * (potential.value(mean + sigma * z) - incumbent).max(0.0))
        .sum();
    total / rule.mass()
}

fn radial(r: f64) -> f64 {
    r * r * (-r * r).exp()
}

/// Root of `radial(r) = level` on `[lo, hi]` where `radial` is monotone.
fn bisect_radius(mut lo: f64, mut hi: f64, level: f64) -> f64 {
    let increasing = radial(hi) > radial(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = radial(mid) >= level;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Expected improvement of `potential` over `incumbent` when the model output
/// is `N(mean, sigma^2)`, by piecewise Gauss-Legendre quadrature.
pub fn reference_ei(potential: &PotentialSpec, incumbent: f64, mean: f64, sigma: f64) -> f64 {
    if incumbent >= INV_E {
        return 0.0;
    }
    if sigma == 0.0 {
        return (potential.value(mean) - incumbent).max(0.0);
    }
    let w = potential.width;
    let (inner, outer) = if incumbent <= 0.0 {
        (0.0, RADIUS_CUTOFF)
    } else {
        (
            bisect_radius(0.0, 1.0, incumbent),
            bisect_radius(1.0, RADIUS_CUTOFF, incumbent),
        )
    };
    let mut pieces = Vec::new();
    if potential.kind.has_upper() {
        pieces.push((w * inner, w * outer));
    }
    if potential.kind.has_lower() {
        pieces.push((-w * outer, -w * inner));
    }
    let offset = mean - potential.center;
    // Panels no wider than a quarter width in output units or one deviation.
    let max_panel = (0.25 * w / sigma).min(1.0);
    let rule = panel_rule();
    let mut total = 0.0;
    for (u_lo, u_hi) in pieces {
        let z_lo = ((u_lo - offset) / sigma).max(-Z_CUTOFF);
        let z_hi = ((u_hi - offset) / sigma).min(Z_CUTOFF);
        if !(z_hi > z_lo) {
            continue;
        }
        let panels = ((z_hi - z_lo) / max_panel).ceil().max(1.0) as usize;
        let h = (z_hi - z_lo) / panels as f64;
        for p in 0..panels {
            let a = z_lo + h * p as f64;
            let mid = a + 0.5 * h;
            let half = 0.5 * h;
            let panel: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&t, &wt)| {
                    let z = mid + half * t;
                    let gain = (potential.value(mean + sigma * z) - incumbent).max(0.0);
                    wt * gain * FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
                })
                .sum();
            total += half * panel;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_hermite;

    #[test]
    fn zero_when_incumbent_is_maximal() {
        let p = PotentialSpec::sep(0.0, 1.0).unwrap();
        let gh = gauss_hermite(64).unwrap();
        assert_eq!(gauss_hermite_ei(&p, INV_E, 0.3, 1.0, &gh), 0.0);
        assert_eq!(reference_ei(&p, INV_E, 0.3, 1.0), 0.0);
    }

    #[test]
    fn centred_unit_case_against_trapezoid() {
        // SEP, width 1, sigma 1, mean at centre, rho* = 0.
        let p = PotentialSpec::sep(0.0, 1.0).unwrap();
        let n = 1_000_000;
        let (a, b) = (-12.0, 12.0);
        let h = (b - a) / n as f64;
        let mut trap = 0.0;
        for i in 0..=n {
            let z: f64 = a + h * i as f64;
            let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
            trap += wt * z * z * (-z * z).exp() * FRAC_1_SQRT_2PI * (-0.5 * z * z).exp();
        }
        trap *= h;
        let gh = gauss_hermite(64).unwrap();
        let reference = reference_ei(&p, 0.0, 0.0, 1.0);
        assert!((reference - trap).abs() < 1e-12, "{reference} {trap}");
        // Smooth integrand at rho* = 0: the global rule is accurate too.
        assert!((gauss_hermite_ei(&p, 0.0, 0.0, 1.0, &gh) - trap).abs() < 1e-12);
    }

    #[test]
    fn bisection_finds_level_crossings() {
        let r0 = bisect_radius(0.0, 1.0, 0.1);
        let r1 = bisect_radius(1.0, RADIUS_CUTOFF, 0.1);
        assert!((radial(r0) - 0.1).abs() < 1e-15);
        assert!((radial(r1) - 0.1).abs() < 1e-15);
        assert!(r0 < 1.0 && r1 > 1.0);
    }
}
