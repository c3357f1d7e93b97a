//! Real branches of the Lambert W function.
//!
//! `W_0` covers `[-1/e, inf)` with values in `[-1, inf)`; `W_{-1}` covers
//! `[-1/e, 0)` with values in `(-inf, -1]`. Both branches meet at the branch
//! point `c = -1/e`, where a series in `p = sqrt(2(ec + 1))` is used directly.
//! Elsewhere the initial guess is refined with Halley's method (principal
//! branch) or Newton on the logarithmic form `w + ln(-w) = ln(-c)` (lower
//! branch, which avoids underflow of `exp(w)` for very negative `w`).

use crate::error::{CfxError, Result};

/// `1/e` rounded to nearest.
pub const INV_E: f64 = 0.367_879_441_171_442_3;

const E_HI: f64 = std::f64::consts::E;
const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// Radius around the branch point inside which the series is used as is.
const BRANCH_RADIUS: f64 = 1e-4;
/// Slack accepted below `-1/e` to absorb rounding of callers' arithmetic.
const BRANCH_SLACK: f64 = 1e-15;

const MAX_ITERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Principal branch `W_0`.
    K0,
    /// Lower branch `W_{-1}`.
    KM1,
}

/// Coefficients of `W(p) = -1 + p - p^2/3 + 11/72 p^3 - ...` about the branch
/// point. The lower branch uses the same series in `-p`.
const BRANCH_SERIES: [f64; 10] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680_863.0 / 43_545_600.0,
    -1963.0 / 204_120.0,
    226_287_557.0 / 37_623_398_400.0,
];

fn branch_series(p: f64) -> f64 {
    BRANCH_SERIES.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

/// `sqrt(2(ec + 1))`, with `e` split in two parts so that `ec + 1` keeps its
/// relative accuracy near the branch point.
fn branch_distance(c: f64) -> f64 {
    let t = E_HI.mul_add(c, 1.0) + E_LO * c;
    (2.0 * t).max(0.0).sqrt()
}

/// Evaluates the requested real branch of Lambert W at `c`.
pub fn lambert_w(branch: Branch, c: f64) -> Result<f64> {
    let domain_err = || CfxError::Domain {
        what: match branch {
            Branch::K0 => "lambert_w(K0)",
            Branch::KM1 => "lambert_w(KM1)",
        },
        value: c,
    };
    if c.is_nan() || c < -INV_E - BRANCH_SLACK {
        return Err(domain_err());
    }
    let c = c.max(-INV_E);
    match branch {
        Branch::K0 => Ok(w0(c)),
        Branch::KM1 => {
            if c >= 0.0 {
                return Err(domain_err());
            }
            Ok(wm1(c))
        }
    }
}

fn w0(c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if c == f64::INFINITY {
        return f64::INFINITY;
    }
    if c + INV_E < BRANCH_RADIUS {
        return branch_series(branch_distance(c)).max(-1.0);
    }
    if c > 3.0 {
        // Newton on w + ln(w) = ln(c).
        let target = c.ln();
        let mut w = target - target.ln();
        for _ in 0..MAX_ITERS {
            let g = w + w.ln() - target;
            let step = g / (1.0 + 1.0 / w);
            w -= step;
            if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
                break;
            }
        }
        return w;
    }
    let mut w = if c < -0.25 {
        branch_series(branch_distance(c))
    } else if c.abs() < 1e-3 {
        c * (1.0 - c * (1.0 - 1.5 * c))
    } else {
        c.ln_1p()
    };
    for _ in 0..MAX_ITERS {
        let ew = w.exp();
        let f = w * ew - c;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 2.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    w.max(-1.0)
}

fn wm1(c: f64) -> f64 {
    if c + INV_E < BRANCH_RADIUS {
        return branch_series(-branch_distance(c)).min(-1.0);
    }
    let target = (-c).ln();
    let mut w = if c < -0.25 {
        branch_series(-branch_distance(c))
    } else {
        target - (-target).ln()
    };
    // Newton on g(w) = w + ln(-w) - ln(-c); g'(w) = 1 + 1/w.
    for _ in 0..MAX_ITERS {
        let g = w + (-w).ln() - target;
        let gp = 1.0 + 1.0 / w;
        if gp == 0.0 {
            break;
        }
        let step = g / gp;
        let next = (w - step).min(-1.0);
        let moved = (next - w).abs();
        w = next;
        if moved <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(mut lo: f64, mut hi: f64, c: f64) -> f64 {
        // Monotone decreasing on (-inf, -1]: w e^w decreases from 0 to -1/e.
        let f = |w: f64| w * w.exp() - c;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_on_principal_branch() {
        assert_eq!(lambert_w(Branch::K0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn branches_meet_at_branch_point() {
        let a = lambert_w(Branch::K0, -INV_E).unwrap();
        let b = lambert_w(Branch::KM1, -INV_E).unwrap();
        assert!((a + 1.0).abs() < 1e-7, "{a}");
        assert!((b + 1.0).abs() < 1e-7, "{b}");
    }

    #[test]
    fn lower_branch_matches_bisection() {
        let expect = bisect(-50.0, -1.0, -0.1);
        let got = lambert_w(Branch::KM1, -0.1).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
        assert!((got + 3.577_152_063_957_297).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(lambert_w(Branch::K0, -0.5).is_err());
        assert!(lambert_w(Branch::KM1, 0.0).is_err());
        assert!(lambert_w(Branch::KM1, 0.3).is_err());
        assert!(lambert_w(Branch::K0, f64::NAN).is_err());
    }

    #[test]
    fn residuals_near_branch_point() {
        for k in 1..40 {
            let c = -INV_E + 10f64.powi(-k) * 3.0;
            if c >= 0.0 {
                continue;
            }
            for br in [Branch::K0, Branch::KM1] {
                let w = lambert_w(br, c).unwrap();
                assert!((w * w.exp() - c).abs() < 1e-13, "{br:?} {c} {w}");
            }
        }
    }

    #[test]
    fn large_arguments() {
        for c in [3.5, 10.0, 1e10, 1e300] {
            let w = lambert_w(Branch::K0, c).unwrap();
            let back = w + w.ln();
            assert!((back - c.ln()).abs() < 1e-13 * c.ln().abs().max(1.0), "{c}");
        }
        let w = lambert_w(Branch::KM1, -1e-300).unwrap();
        assert!((w + (-w).ln() - -1e300f64.ln()).abs() < 1e-12);
    }
}
