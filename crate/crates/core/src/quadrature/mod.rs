//! Orthogonal-polynomial recurrences and Gaussian quadrature.
//!
//! Monic orthogonal polynomials for a positive weight `phi` satisfy
//!
//! ```text
//! p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x),   p_0 = 1, p_{-1} = 0.
//! ```
//!
//! The symmetric Jacobi matrix carries `alpha` on its diagonal and
//! `sqrt(beta)` beside it. Its eigenvalues are the Gauss nodes and the squared
//! first components of its normalised eigenvectors, scaled by the total mass
//! `mu0 = integral of phi`, are the weights (Golub-Welsch). An `n`-node rule
//! integrates every polynomial of degree `<= 2n - 1` exactly.

mod tridiag;

pub use tridiag::{eigen_first_components, MAX_SWEEPS};

use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Which classical family a set of coefficients came from. Only affects the
/// normalisation used by [`eval_orthopoly`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Probabilist's Hermite, weight `exp(-x^2/2)` on the real line.
    Hermite,
    /// Legendre, weight `1` on `[-1, 1]`.
    Legendre,
    /// Coefficients computed from an arbitrary inner product.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCoeffs {
    pub family: Family,
    /// `alpha_0 .. alpha_{n-1}`.
    pub alpha: Vec<f64>,
    /// `beta_1 .. beta_{n-1}`, the squared off-diagonal Jacobi entries.
    pub beta: Vec<f64>,
    /// Total mass of the weight.
    pub mu0: f64,
}

impl RecurrenceCoeffs {
    /// Number of recurrence steps available; polynomials up to this degree can
    /// be evaluated and rules up to this many nodes built.
    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    /// Off-diagonal entries of the symmetric Jacobi matrix.
    pub fn jacobi_off_diagonal(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.sqrt()).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() || self.beta.len() + 1 != self.alpha.len() {
            return Err(CfxError::InvalidParameter(format!(
                "recurrence needs alpha of length n >= 1 and beta of length n - 1, got {} and {}",
                self.alpha.len(),
                self.beta.len()
            )));
        }
        if !(self.mu0 > 0.0) {
            return Err(CfxError::InvalidParameter(format!(
                "total mass must be positive, got {}",
                self.mu0
            )));
        }
        if let Some((k, &b)) = self.beta.iter().enumerate().find(|(_, &b)| !(b > 0.0)) {
            return Err(CfxError::NotPositiveDefinite {
                order: k + 1,
                beta: b,
            });
        }
        Ok(())
    }
}

/// Recurrence for the probabilist's Hermite polynomials: `alpha_k = 0`, `beta_k = k`.
pub fn hermite_coeffs(n: usize) -> Result<RecurrenceCoeffs> {
    check_order(n)?;
    Ok(RecurrenceCoeffs {
        family: Family::Hermite,
        alpha: vec![0.0; n],
        beta: (1..n).map(|k| k as f64).collect(),
        mu0: SQRT_2PI,
    })
}

/// Recurrence for the monic Legendre polynomials: `beta_k = k^2 / (4k^2 - 1)`.
pub fn legendre_coeffs(n: usize) -> Result<RecurrenceCoeffs> {
    check_order(n)?;
    Ok(RecurrenceCoeffs {
        family: Family::Legendre,
        alpha: vec![0.0; n],
        beta: (1..n)
            .map(|k| {
                let k2 = (k * k) as f64;
                k2 / (4.0 * k2 - 1.0)
            })
            .collect(),
        mu0: 2.0,
    })
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CfxError::InvalidParameter(
            "order must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Something that can evaluate `<f | g>` for a fixed positive measure.
pub trait InnerProduct {
    fn inner(&self, f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64) -> f64;
}

impl<F> InnerProduct for F
where
    F: Fn(&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64) -> f64,
{
    fn inner(&self, f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64) -> f64 {
        self(f, g)
    }
}

/// A weighted point set standing in for a continuous measure.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Trapezoid discretisation of `weight(x) dx` on `[a, b]` with `n` intervals.
    pub fn trapezoid(weight: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let mut points = Vec::with_capacity(n + 1);
        let mut weights = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = a + h * i as f64;
            let end = if i == 0 || i == n { 0.5 } else { 1.0 };
            points.push(x);
            weights.push(end * h * weight(x));
        }
        Self { points, weights }
    }

    pub fn from_rule(rule: &QuadratureRule) -> Self {
        Self {
            points: rule.nodes.clone(),
            weights: rule.weights.clone(),
        }
    }
}

impl InnerProduct for DiscreteMeasure {
    fn inner(&self, f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x) * g(x))
            .sum()
    }
}

/// Recurrence coefficients of the monic orthogonal polynomials of an inner
/// product, built one degree at a time (Stieltjes form of Gram-Schmidt).
pub fn stieltjes_coeffs(ip: &dyn InnerProduct, n: usize) -> Result<RecurrenceCoeffs> {
    check_order(n)?;
    let one = |_: f64| 1.0;
    let mu0 = ip.inner(&one, &one);
    if !(mu0 > 0.0) {
        return Err(CfxError::NotPositiveDefinite {
            order: 0,
            beta: mu0,
        });
    }
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n.saturating_sub(1));
    let mut prev_norm = mu0;
    for k in 0..n {
        let partial = RecurrenceCoeffs {
            family: Family::Custom,
            alpha: alpha.clone(),
            beta: beta.clone(),
            mu0,
        };
        let pk = |x: f64| eval_monic_unchecked(&partial, k, x);
        let norm = ip.inner(&pk, &pk);
        if k > 0 {
            let b = norm / prev_norm;
            if !(b > 0.0) || !b.is_finite() {
                return Err(CfxError::NotPositiveDefinite { order: k, beta: b });
            }
            beta.push(b);
        }
        let xpk = |x: f64| x * eval_monic_unchecked(&partial, k, x);
        alpha.push(ip.inner(&xpk, &pk) / norm);
        prev_norm = norm;
    }
    Ok(RecurrenceCoeffs {
        family: Family::Custom,
        alpha,
        beta,
        mu0,
    })
}

// Needs alpha[..k] and beta[..k-1]; used while coefficients are being built.
fn eval_monic_unchecked(c: &RecurrenceCoeffs, k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let b = if j == 0 { 0.0 } else { c.beta[j - 1] };
        let next = (x - c.alpha[j]) * cur - b * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Monic `p_k(x)` by forward recurrence.
pub fn eval_monic(coeffs: &RecurrenceCoeffs, k: usize, x: f64) -> Result<f64> {
    if k > coeffs.order() {
        return Err(CfxError::InvalidParameter(format!(
            "degree {k} exceeds recurrence order {}",
            coeffs.order()
        )));
    }
    Ok(eval_monic_unchecked(coeffs, k, x))
}

/// Leading coefficient of the classical normalisation of the degree-`k`
/// polynomial (`P_k(1) = 1` for Legendre, monic otherwise).
pub fn leading_coefficient(family: Family, k: usize) -> f64 {
    match family {
        Family::Legendre => (1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64 / j as f64),
        Family::Hermite | Family::Custom => 1.0,
    }
}

/// Value of the degree-`k` orthogonal polynomial in its family's classical
/// normalisation.
pub fn eval_orthopoly(coeffs: &RecurrenceCoeffs, k: usize, x: f64) -> Result<f64> {
    Ok(leading_coefficient(coeffs.family, k) * eval_monic(coeffs, k, x)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mass: f64,
}

impl QuadratureRule {
    /// Builds a rule from explicit parts, checking ordering and positivity.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, mass: f64) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(CfxError::InvalidParameter(format!(
                "rule needs matching non-empty nodes and weights, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CfxError::InvalidParameter(
                "rule nodes must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(CfxError::InvalidParameter(
                "rule weights must be strictly positive".into(),
            ));
        }
        Ok(Self {
            nodes,
            weights,
            mass,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl FnMut(f64) -> f64) -> f64 {
        integrate(self, f)
    }
}

/// Golub-Welsch: nodes and weights of the `n`-point Gauss rule.
pub fn golub_welsch(coeffs: &RecurrenceCoeffs, n: usize) -> Result<QuadratureRule> {
    coeffs.validate()?;
    check_order(n)?;
    if n > coeffs.order() {
        return Err(CfxError::InvalidParameter(format!(
            "{n}-point rule needs {n} recurrence terms, have {}",
            coeffs.order()
        )));
    }
    let off = coeffs.jacobi_off_diagonal();
    let (vals, firsts) = eigen_first_components(&coeffs.alpha[..n], &off[..n - 1])?;
    let mut pairs: Vec<(f64, f64)> = vals
        .into_iter()
        .zip(firsts)
        .map(|(x, v)| (x, coeffs.mu0 * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut nodes, mut weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if coeffs.alpha[..n].iter().all(|&a| a == 0.0) {
        // Symmetric weight: mirror nodes and weights exactly.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            (nodes[i], nodes[j]) = (-x, x);
            (weights[i], weights[j]) = (w, w);
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
    }
    QuadratureRule::from_parts(nodes, weights, coeffs.mu0)
}

pub fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    golub_welsch(&hermite_coeffs(n)?, n)
}

pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    golub_welsch(&legendre_coeffs(n)?, n)
}

/// Classical Gauss-Legendre weight `2 / ((1 - x^2) P_n'(x)^2)` at a node `x`.
pub fn legendre_weight_closed_form(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * cur - (k - 1) as f64 * prev) / k as f64;
        prev = cur;
        cur = next;
    }
    let (pn, pn1) = if n == 1 { (x, 1.0) } else { (cur, prev) };
    let dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    2.0 / ((1.0 - x * x) * dp * dp)
}

/// `sum_i w_i f(x_i)`.
pub fn integrate(rule: &QuadratureRule, mut f: impl FnMut(f64) -> f64) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f(x))
        .sum()
}

/// As [`integrate`], stopping at the first failed evaluation.
pub fn try_integrate<E>(
    rule: &QuadratureRule,
    mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
) -> std::result::Result<f64, E> {
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(x)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `integral x^k exp(-x^2/2) dx` over the real line.
    fn hermite_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        // (k-1)!! sqrt(2 pi)
        (1..k).step_by(2).fold(SQRT_2PI, |acc, j| acc * j as f64)
    }

    fn legendre_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k + 1) as f64
        }
    }

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn hermite_jacobi_entries() {
        let c = hermite_coeffs(3).unwrap();
        assert_eq!(c.alpha, vec![0.0; 3]);
        let off = c.jacobi_off_diagonal();
        assert_eq!(off[0], 1.0);
        assert!((off[1] - 2f64.sqrt()).abs() < 1e-16);
        let one = hermite_coeffs(1).unwrap();
        assert_eq!(one.alpha, vec![0.0]);
        assert!(one.beta.is_empty());
    }

    #[test]
    fn small_rules_in_closed_form() {
        let r = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + s).abs() < 1e-15 && (r.nodes()[1] - s).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-14 && (r.weights()[1] - 1.0).abs() < 1e-14);

        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);

        // Moment matching against integral x^k exp(-x^2/2) for k = 0..5 fixes
        // the 3-point rule to nodes 0, +-sqrt3 and weights sqrt(2pi) (1/6, 2/3, 1/6).
        let r = gauss_hermite(3).unwrap();
        let s3 = 3f64.sqrt();
        for (x, e) in r.nodes().iter().zip([-s3, 0.0, s3]) {
            assert!((x - e).abs() < 1e-12, "{x}");
        }
        for (w, e) in r.weights().iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((w - e * SQRT_2PI).abs() < 1e-13, "{w}");
        }
        let r = gauss_hermite(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn exactness_up_to_degree_2n_minus_1() {
        for n in 1..=10 {
            let h = gauss_hermite(n).unwrap();
            let l = gauss_legendre(n).unwrap();
            for k in 0..2 * n {
                // Odd moments vanish; measure them against the absolute moment.
                for (rule, exact) in [(&h, hermite_moment(k)), (&l, legendre_moment(k))] {
                    let q = rule.integrate(|x| x.powi(k as i32));
                    let scale = rule.integrate(|x| x.abs().powi(k as i32));
                    assert!(
                        (q - exact).abs() <= 1e-10 * scale,
                        "n={n} k={k} {q} vs {exact}"
                    );
                }
            }
            let hs: f64 = h.weights().iter().sum();
            let ls: f64 = l.weights().iter().sum();
            assert!((hs - SQRT_2PI).abs() <= 1e-12 * SQRT_2PI);
            assert!((ls - 2.0).abs() <= 1e-12 * 2.0);
        }
    }

    #[test]
    fn integrate_examples() {
        let h = gauss_hermite(8).unwrap();
        assert!((h.integrate(|x| x * x) - SQRT_2PI).abs() < 1e-13);
        let l = gauss_legendre(5).unwrap();
        assert!(l.integrate(|x| x.powi(9)).abs() < 1e-15);
    }

    #[test]
    fn weights_positive_up_to_64() {
        for n in 1..=64 {
            for rule in [gauss_hermite(n).unwrap(), gauss_legendre(n).unwrap()] {
                assert!(rule.weights().iter().all(|&w| w > 0.0), "n = {n}");
                let total: f64 = rule.weights().iter().sum();
                assert!((total - rule.mass()).abs() <= 1e-12 * rule.mass());
            }
        }
    }

    #[test]
    fn legendre_weights_match_classical_formula() {
        for n in 1..=20 {
            let rule = gauss_legendre(n).unwrap();
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let classical = legendre_weight_closed_form(n, x);
                assert!(
                    (w - classical).abs() < 1e-12 * classical.max(1.0),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn nodes_are_roots() {
        for n in 1..=12 {
            for coeffs in [hermite_coeffs(n).unwrap(), legendre_coeffs(n).unwrap()] {
                let rule = golub_welsch(&coeffs, n).unwrap();
                let span = rule.nodes()[n - 1].abs().max(1.0);
                let scale = (0..=1000)
                    .map(|i| -span + 2.0 * span * i as f64 / 1000.0)
                    .map(|x| eval_monic(&coeffs, n, x).unwrap().abs())
                    .fold(0.0, f64::max);
                for &x in rule.nodes() {
                    let v = eval_monic(&coeffs, n, x).unwrap();
                    assert!(v.abs() <= 1e-9 * scale, "n={n} x={x} p={v} scale={scale}");
                }
            }
        }
    }

    #[test]
    fn error_term_for_degree_2n() {
        // x^{2n} = p_n(x)^2 + (lower degree), so the quadrature error is the
        // squared norm of the monic p_n.
        for n in 1..=5 {
            let h = gauss_hermite(n).unwrap();
            let err = hermite_moment(2 * n) - h.integrate(|x| x.powi(2 * n as i32));
            let norm = SQRT_2PI * (1..=n).product::<usize>() as f64;
            assert!(rel_close(err, norm, 1e-10), "H n={n}: {err} vs {norm}");

            let l = gauss_legendre(n).unwrap();
            let err = legendre_moment(2 * n) - l.integrate(|x| x.powi(2 * n as i32));
            let lead = leading_coefficient(Family::Legendre, n);
            let norm = 2.0 / (2 * n + 1) as f64 / (lead * lead);
            assert!((err - norm).abs() < 1e-13, "L n={n}: {err} vs {norm}");
        }
    }

    #[test]
    fn polynomial_values() {
        let h = hermite_coeffs(5).unwrap();
        assert_eq!(eval_orthopoly(&h, 3, 2.0).unwrap(), 2.0);
        let l = legendre_coeffs(5).unwrap();
        assert!((eval_orthopoly(&l, 2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        for x in [-2.3f64, -0.4, 0.0, 0.77, 3.1] {
            let he4 = x.powi(4) - 6.0 * x * x + 3.0;
            assert!((eval_orthopoly(&h, 4, x).unwrap() - he4).abs() < 1e-12);
        }
        assert!(eval_orthopoly(&h, 6, 0.0).is_err());
    }

    #[test]
    fn orthogonality_on_fine_grids() {
        let h = hermite_coeffs(4).unwrap();
        let grid = DiscreteMeasure::trapezoid(|x| (-0.5 * x * x).exp(), -12.0, 12.0, 1_000_000);
        let he2 = |x: f64| eval_orthopoly(&h, 2, x).unwrap();
        let he3 = |x: f64| eval_orthopoly(&h, 3, x).unwrap();
        assert!(grid.inner(&he2, &he3).abs() < 1e-9);

        let l = legendre_coeffs(5).unwrap();
        let grid = DiscreteMeasure::trapezoid(|_| 1.0, -1.0, 1.0, 1_000_000);
        let p2 = |x: f64| eval_orthopoly(&l, 2, x).unwrap();
        let p4 = |x: f64| eval_orthopoly(&l, 4, x).unwrap();
        assert!(grid.inner(&p2, &p4).abs() < 1e-9);
    }

    #[test]
    fn stieltjes_reproduces_classical_families() {
        let n = 8;
        let grid = DiscreteMeasure::trapezoid(|x| (-0.5 * x * x).exp(), -12.0, 12.0, 200_000);
        let got = stieltjes_coeffs(&grid, n).unwrap();
        let expect = hermite_coeffs(n).unwrap();
        assert!((got.mu0 - expect.mu0).abs() < 1e-8);
        for (a, b) in got.alpha.iter().zip(&expect.alpha) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in got.beta.iter().zip(&expect.beta) {
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }

        // A finer Gauss rule is an exact inner product for these degrees.
        let fine = DiscreteMeasure::from_rule(&gauss_legendre(40).unwrap());
        let got = stieltjes_coeffs(&fine, n).unwrap();
        let expect = legendre_coeffs(n).unwrap();
        assert!((got.mu0 - 2.0).abs() < 1e-12);
        for (a, b) in got.beta.iter().zip(&expect.beta) {
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
        for a in &got.alpha {
            assert!(a.abs() < 1e-8);
        }
    }

    #[test]
    fn stieltjes_first_alpha_is_mean() {
        let m = DiscreteMeasure {
            points: vec![0.0, 1.0, 3.0],
            weights: vec![1.0, 2.0, 1.0],
        };
        let c = stieltjes_coeffs(&m, 1).unwrap();
        assert!((c.alpha[0] - 5.0 / 4.0).abs() < 1e-15);
        assert_eq!(c.mu0, 4.0);
    }

    #[test]
    fn stieltjes_detects_degenerate_measure() {
        // Two atoms support only two independent polynomials.
        let m = DiscreteMeasure {
            points: vec![-1.0, 1.0],
            weights: vec![1.0, 1.0],
        };
        let err = stieltjes_coeffs(&m, 3).unwrap_err();
        assert!(matches!(
            err,
            CfxError::NotPositiveDefinite { order: 2, .. }
        ));
    }

    #[test]
    fn closure_inner_product() {
        let ip = |f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64| {
            gauss_legendre(30).unwrap().integrate(|x| f(x) * g(x))
        };
        let c = stieltjes_coeffs(&ip, 4).unwrap();
        assert!((c.beta[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn try_integrate_propagates() {
        let rule = gauss_legendre(3).unwrap();
        let r: std::result::Result<f64, &str> =
            try_integrate(&rule, |x| if x > 0.5 { Err("boom") } else { Ok(x) });
        assert_eq!(r, Err("boom"));
    }

    #[test]
    fn invalid_inputs() {
        assert!(hermite_coeffs(0).is_err());
        assert!(golub_welsch(&hermite_coeffs(3).unwrap(), 4).is_err());
        let mut bad = hermite_coeffs(3).unwrap();
        bad.beta[1] = -1.0;
        assert!(golub_welsch(&bad, 3).is_err());
        assert!(QuadratureRule::from_parts(vec![1.0, 0.0], vec![1.0, 1.0], 2.0).is_err());
        assert!(QuadratureRule::from_parts(vec![0.0, 1.0], vec![1.0, 0.0], 1.0).is_err());
    }
}
