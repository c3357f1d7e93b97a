//! Standard normal density, distribution, and truncated polynomial moments.

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn pdf(t: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    FRAC_1_SQRT_2PI * (-0.5 * t * t).exp()
}

pub fn cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(t)` without cancellation.
pub fn sf(t: f64) -> f64 {
    0.5 * libm::erfc(t * std::f64::consts::FRAC_1_SQRT_2)
}

/// `cdf(hi) - cdf(lo)`, taken from whichever tail keeps full precision.
pub fn mass_between(lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    if lo >= 0.0 {
        sf(lo) - sf(hi)
    } else if hi <= 0.0 {
        cdf(hi) - cdf(lo)
    } else {
        1.0 - cdf(lo) - sf(hi)
    }
}

/// `[integral_lo^hi t^j phi(t) dt for j in 0..=N]`, via
/// `M_j = [-t^{j-1} phi(t)]_lo^hi + (j - 1) M_{j-2}`.
pub fn truncated_moments<const N: usize>(lo: f64, hi: f64) -> [f64; N] {
    let mut m = [0.0; N];
    if !(hi > lo) || N == 0 {
        return m;
    }
    let (plo, phi_) = (pdf(lo), pdf(hi));
    // t^{j-1} phi(t), zero at infinite limits.
    let edge = |t: f64, p: f64, k: i32| if p == 0.0 { 0.0 } else { t.powi(k) * p };
    m[0] = mass_between(lo, hi);
    if N > 1 {
        m[1] = plo - phi_;
    }
    for j in 2..N {
        let k = (j - 1) as i32;
        m[j] = edge(lo, plo, k) - edge(hi, phi_, k) + (j - 1) as f64 * m[j - 2];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((sf(8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
        assert_eq!(cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn tail_mass_keeps_precision() {
        let m = mass_between(10.0, 11.0);
        assert!((m / 7.619_661_958_203_076e-24 - 1.0).abs() < 1e-12, "{m}");
        let m = mass_between(-11.0, -10.0);
        assert!((m / 7.619_661_958_203_076e-24 - 1.0).abs() < 1e-12, "{m}");
        assert_eq!(mass_between(1.0, 1.0), 0.0);
    }

    #[test]
    fn full_line_moments() {
        let m: [f64; 5] = truncated_moments(f64::NEG_INFINITY, f64::INFINITY);
        let expect = [1.0, 0.0, 1.0, 0.0, 3.0];
        for (a, b) in m.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn moments_match_fine_trapezoid() {
        let (lo, hi) = (-0.7, 2.3);
        let m: [f64; 5] = truncated_moments(lo, hi);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        for (j, mj) in m.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..=n {
                let t = lo + h * i as f64;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * t.powi(j as i32) * pdf(t);
            }
            assert!((acc * h - mj).abs() < 1e-9, "j={j}");
        }
    }
}
