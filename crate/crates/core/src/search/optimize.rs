//! Multi-start projected gradient ascent of an acquisition surface.

use rand::Rng;
use rayon::prelude::*;

use super::region::Region;

pub(crate) type Objective<'a> = dyn Fn(&[f64]) -> (f64, Vec<f64>) + Sync + 'a;

/// A local maximiser found from one start.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

const MAX_HALVINGS: usize = 40;
const FIRST_STEP: f64 = 0.05;
const STATIONARY: f64 = 1e-10;

fn scaled_distance(a: &[f64], b: &[f64], scale: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(scale)
        .filter(|(_, s)| **s > 0.0)
        .map(|((x, y), s)| ((x - y) / s).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Ascent in box-normalised coordinates with step doubling on success and
/// halving on failure.
pub(crate) fn ascend(region: &Region, f: &Objective, x0: &[f64], max_iters: usize) -> Candidate {
    let scale: Vec<f64> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(lo, hi)| hi - lo)
        .collect();
    let mut x = region.project(x0);
    let (mut v, mut g) = f(&x);
    if !v.is_finite() {
        return Candidate {
            x,
            value: f64::NEG_INFINITY,
            converged: false,
        };
    }
    let dir = |g: &[f64]| -> Vec<f64> { g.iter().zip(&scale).map(|(gi, s)| gi * s * s).collect() };
    let gmax = g
        .iter()
        .zip(&scale)
        .map(|(gi, s)| (gi * s).abs())
        .fold(0.0, f64::max);
    if !(gmax > 0.0) {
        return Candidate {
            x,
            value: v,
            converged: true,
        };
    }
    let mut t = FIRST_STEP / gmax;
    for _ in 0..max_iters {
        let d = dir(&g);
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let cand = region.project(&trial);
            if scaled_distance(&cand, &x, &scale) < STATIONARY {
                return Candidate {
                    x,
                    value: v,
                    converged: true,
                };
            }
            let (vc, gc) = f(&cand);
            if vc.is_finite() && vc > v {
                let moved = scaled_distance(&cand, &x, &scale);
                x = cand;
                v = vc;
                g = gc;
                t *= 2.0;
                accepted = true;
                if moved < STATIONARY {
                    return Candidate {
                        x,
                        value: v,
                        converged: true,
                    };
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Candidate {
                x,
                value: v,
                converged: true,
            };
        }
    }
    Candidate {
        x,
        value: v,
        converged: false,
    }
}

/// Local maxima from `starts` Latin-hypercube points per region plus the
/// `extra` points, best first; ties keep start order.
pub(crate) fn multi_start(
    regions: &[Region],
    f: &Objective,
    extra: &[Vec<f64>],
    starts: usize,
    max_iters: usize,
    rng: &mut impl Rng,
) -> Vec<Candidate> {
    let mut jobs: Vec<(usize, Vec<f64>)> = Vec::new();
    for (r, region) in regions.iter().enumerate() {
        for x in region.latin_hypercube(starts, rng) {
            jobs.push((r, x));
        }
        for x in extra {
            jobs.push((r, x.clone()));
        }
    }
    let mut found: Vec<Candidate> = jobs
        .par_iter()
        .map(|(r, x)| ascend(&regions[*r], f, x, max_iters))
        .collect();
    found.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::region::build_region;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn finds_interior_and_boundary_maxima() {
        let r = build_region(&[0.5, 0.5], &[0.0, 0.0], &[1.0, 2.0], &[], &[], &[]).unwrap();
        let f = |x: &[f64]| {
            let v = -(x[0] - 0.3).powi(2) - (x[1] - 3.0).powi(2);
            (v, vec![-2.0 * (x[0] - 0.3), -2.0 * (x[1] - 3.0)])
        };
        let c = ascend(&r, &f, &[0.9, 0.1], 500);
        assert!(c.converged);
        assert!(
            (c.x[0] - 0.3).abs() < 1e-6 && (c.x[1] - 2.0).abs() < 1e-12,
            "{:?}",
            c.x
        );
    }

    #[test]
    fn flat_objective_stays_put() {
        let r = build_region(&[0.5], &[0.0], &[1.0], &[], &[], &[]).unwrap();
        let f = |_: &[f64]| (0.0, vec![0.0]);
        let c = ascend(&r, &f, &[0.25], 10);
        assert_eq!(c.x, vec![0.25]);
        assert!(c.converged);
    }

    #[test]
    fn ordering_is_deterministic() {
        let r = build_region(&[0.5], &[0.0], &[1.0], &[], &[], &[]).unwrap();
        let f = |x: &[f64]| {
            let v = (6.0 * x[0]).sin();
            (v, vec![6.0 * (6.0 * x[0]).cos()])
        };
        let a = multi_start(
            std::slice::from_ref(&r),
            &f,
            &[],
            8,
            200,
            &mut Xoshiro256PlusPlus::seed_from_u64(3),
        );
        let b = multi_start(
            &[r],
            &f,
            &[],
            8,
            200,
            &mut Xoshiro256PlusPlus::seed_from_u64(3),
        );
        assert_eq!(a, b);
        assert!((a[0].x[0] - std::f64::consts::PI / 12.0).abs() < 1e-6);
    }
}
