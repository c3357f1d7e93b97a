//! Counterfactual search: Bayes-CFX, naive expected improvement over the
//! composed potential, random search and projected-gradient local search.

mod optimize;
mod region;
mod trace;

pub use optimize::Candidate;
pub use region::{build_region, LinearConstraint, Region, SignConstraint};
pub use trace::{BestPoint, Phase, Record, Strategy, Trace};

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    ei_cfx, ei_cfx_grad, ei_cfx_with_grad, ei_naive, ei_naive_with_grad, incumbent_of,
    AcquisitionInputs, GradientMode,
};
use crate::error::{CfxError, Result};
use crate::models::Model;
use crate::potential::{target_membership, PotentialSpec, INV_E};
use crate::surrogate::{fit_auto, GpPosterior, HyperOptions, SampleSet};

/// Minimum separation between evaluated points.
pub const DEDUP_TOL: f64 = 1e-9;
/// Coordinate subsets enumerated exactly up to this many.
pub const MAX_SUBSETS: usize = 4096;
const SAMPLED_SUBSETS: usize = 256;
const FALLBACK_TRIES: usize = 200;

/// Reference optimum for the target-set flag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum RhoStar {
    /// Best potential observed during the run.
    #[default]
    Observed,
    /// The potential's global maximum `1/e`.
    PotentialMax,
    Value {
        value: f64,
    },
    /// Best of a regular grid over the feasible region and the observations.
    Grid {
        points_per_dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub initial_design: usize,
    pub acquisition_starts: usize,
    pub ascent_iters: usize,
    pub hyper: HyperOptions,
    pub gradient: GradientMode,
    pub epsilon: f64,
    pub rho_star: RhoStar,
    pub record_wall_time: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            initial_design: 5,
            acquisition_starts: 32,
            ascent_iters: 200,
            hyper: HyperOptions::default(),
            gradient: GradientMode::Analytic,
            epsilon: 0.01,
            rho_star: RhoStar::Observed,
            record_wall_time: false,
        }
    }
}

#[derive(Clone)]
pub struct SearchProblem {
    pub model: Arc<dyn Model>,
    pub query: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub linear: Vec<LinearConstraint>,
    pub integer_dims: Vec<usize>,
    /// Maximum number of coordinates that may differ from the query.
    pub l0_bound: Option<usize>,
    /// Empty, or one entry per dimension.
    pub signs: Vec<SignConstraint>,
    pub options: SearchOptions,
}

impl std::fmt::Debug for SearchProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchProblem")
            .field("query", &self.query)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("linear", &self.linear)
            .field("integer_dims", &self.integer_dims)
            .field("l0_bound", &self.l0_bound)
            .field("signs", &self.signs)
            .finish_non_exhaustive()
    }
}

impl SearchProblem {
    pub fn new(model: Arc<dyn Model>, query: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            model,
            query,
            lower,
            upper,
            linear: Vec::new(),
            integer_dims: Vec::new(),
            l0_bound: None,
            signs: Vec::new(),
            options: SearchOptions::default(),
        }
    }

    pub fn with_linear(mut self, linear: Vec<LinearConstraint>) -> Self {
        self.linear = linear;
        self
    }

    pub fn with_integer_dims(mut self, dims: Vec<usize>) -> Self {
        self.integer_dims = dims;
        self
    }

    pub fn with_l0_bound(mut self, k: Option<usize>) -> Self {
        self.l0_bound = k;
        self
    }

    pub fn with_signs(mut self, signs: Vec<SignConstraint>) -> Self {
        self.signs = signs;
        self
    }

    pub fn with_options(mut self, options: SearchOptions) -> Self {
        self.options = options;
        self
    }

    pub fn dim(&self) -> usize {
        self.query.len()
    }

    /// Validated feasible region (sign constraints folded into the box).
    pub fn region(&self) -> Result<Region> {
        if self.model.dim() != self.dim() {
            return Err(CfxError::DimensionMismatch {
                expected: self.model.dim(),
                got: self.dim(),
            });
        }
        if let Some(k) = self.l0_bound {
            if k > self.dim() {
                return Err(CfxError::InvalidParameter(format!(
                    "l0 bound {k} exceeds the dimension {}",
                    self.dim()
                )));
            }
        }
        build_region(
            &self.query,
            &self.lower,
            &self.upper,
            &self.linear,
            &self.integer_dims,
            &self.signs,
        )
    }

    /// Number of coordinates differing from the query.
    pub fn l0_distance(&self, x: &[f64]) -> usize {
        x.iter().zip(&self.query).filter(|(a, b)| a != b).count()
    }

    /// Box, half-space, integer, sign and l0 constraints, checked exactly.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.region().is_ok_and(|r| r.contains(x))
            && self.l0_bound.is_none_or(|k| self.l0_distance(x) <= k)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let y = self.model.predict(x)?;
        if !y.is_finite() {
            return Err(CfxError::Model(format!("non-finite output at {x:?}")));
        }
        Ok(y)
    }

    /// Gradient of the model, analytic when available, else central differences.
    pub fn model_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = self.model.gradient(x) {
            return g;
        }
        let mut probe = x.to_vec();
        let mut g = Vec::with_capacity(x.len());
        for j in 0..x.len() {
            let h = 1e-6 * x[j].abs().max(1.0);
            probe[j] = x[j] + h;
            let up = self.evaluate(&probe)?;
            probe[j] = x[j] - h;
            let down = self.evaluate(&probe)?;
            probe[j] = x[j];
            g.push((up - down) / (2.0 * h));
        }
        Ok(g)
    }
}

/// Index of the first candidate whose model output is at least `min_output`.
pub fn select_query(
    model: &dyn Model,
    candidates: &[Vec<f64>],
    min_output: f64,
) -> Result<Option<usize>> {
    for (i, x) in candidates.iter().enumerate() {
        if model.predict(x)? >= min_output {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Regions over which the acquisition is maximised: the whole region, or
/// one per coordinate subset of size `l0` (other coordinates frozen).
pub fn l0_regions(region: &Region, l0: Option<usize>, rng: &mut impl Rng) -> Vec<Region> {
    let free = region.free_dims();
    match l0 {
        Some(k) if k < free.len() => {
            if binomial(free.len(), k) <= MAX_SUBSETS as u128 {
                combinations(&free, k)
                    .iter()
                    .map(|s| region.restrict(s))
                    .collect()
            } else {
                (0..SAMPLED_SUBSETS)
                    .map(|_| {
                        let mut s: Vec<usize> = free.choose_multiple(rng, k).copied().collect();
                        s.sort_unstable();
                        region.restrict(&s)
                    })
                    .collect()
            }
        }
        _ => vec![region.clone()],
    }
}

/// Random feasible point; with an l0 bound, a random coordinate subset moves.
fn sample_point(region: &Region, l0: Option<usize>, rng: &mut impl Rng) -> Vec<f64> {
    let free = region.free_dims();
    match l0 {
        Some(k) if k < free.len() => {
            let mut s: Vec<usize> = free.choose_multiple(rng, k).copied().collect();
            s.sort_unstable();
            region.restrict(&s).sample(rng)
        }
        _ => region.sample(rng),
    }
}

fn initial_design(
    region: &Region,
    l0: Option<usize>,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    let free = region.free_dims();
    region
        .latin_hypercube(n, rng)
        .into_iter()
        .map(|mut p| {
            if let Some(k) = l0 {
                if k < free.len() {
                    let keep: Vec<usize> = free.choose_multiple(rng, k).copied().collect();
                    for j in 0..p.len() {
                        if !keep.contains(&j) {
                            p[j] = region.query[j];
                        }
                    }
                }
            }
            region.finalize(&p)
        })
        .collect()
}

fn is_new(data: &SampleSet, pending: &[Vec<f64>], x: &[f64]) -> bool {
    !data.contains_near(x, DEDUP_TOL)
        && pending.iter().all(|p| {
            p.iter()
                .zip(x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                > DEDUP_TOL
        })
}

fn fresh_random(
    region: &Region,
    l0: Option<usize>,
    data: &SampleSet,
    pending: &[Vec<f64>],
    rng: &mut impl Rng,
) -> Option<Vec<f64>> {
    (0..FALLBACK_TRIES)
        .map(|_| sample_point(region, l0, rng))
        .find(|x| is_new(data, pending, x))
}

/// Best potential on a regular grid over the feasible region.
pub fn grid_rho_star(
    problem: &SearchProblem,
    potential: &PotentialSpec,
    points_per_dim: usize,
) -> Result<f64> {
    let region = problem.region()?;
    let d = region.dim();
    let m = points_per_dim.max(2);
    let total = (m as f64).powi(d as i32);
    if total > 1e7 {
        return Err(CfxError::InvalidParameter(format!(
            "grid of {m}^{d} points is too large"
        )));
    }
    let total = total as usize;
    let best = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; d];
            for j in 0..d {
                let i = idx % m;
                idx /= m;
                x[j] = region.lower[j]
                    + (region.upper[j] - region.lower[j]) * i as f64 / (m - 1) as f64;
            }
            let x = region.round(&x);
            if !problem.is_feasible(&x) {
                return Ok(0.0);
            }
            Ok(potential.value(problem.evaluate(&x)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(best.into_iter().fold(0.0, f64::max))
}

struct Evaluation {
    x: Vec<f64>,
    y: f64,
    phase: Phase,
    /// Per-potential acquisition values.
    acquisition: Vec<Option<f64>>,
    wall_time_s: Option<f64>,
}

fn assemble_trace(
    problem: &SearchProblem,
    strategy: Strategy,
    seed: u64,
    budget: usize,
    potential: &PotentialSpec,
    index: usize,
    evals: &[Evaluation],
) -> Result<Trace> {
    let mut incumbent = 0.0f64;
    let mut best: Option<BestPoint> = None;
    let mut records = Vec::with_capacity(evals.len());
    for (i, e) in evals.iter().enumerate() {
        let rho = potential.value(e.y);
        if best.as_ref().is_none_or(|b| rho > b.rho) {
            best = Some(BestPoint {
                x: e.x.clone(),
                y: e.y,
                rho,
            });
        }
        incumbent = incumbent.max(rho);
        records.push(Record {
            iteration: i,
            phase: e.phase,
            x: e.x.clone(),
            y: e.y,
            rho,
            incumbent,
            acquisition: e.acquisition.get(index).copied().flatten(),
            wall_time_s: e.wall_time_s,
        });
    }
    let (rho_star, source, estimated) = match problem.options.rho_star {
        RhoStar::Observed => (incumbent, "observed", true),
        RhoStar::PotentialMax => (INV_E, "potential_max", false),
        RhoStar::Value { value } => (value, "given", false),
        RhoStar::Grid { points_per_dim } => (
            grid_rho_star(problem, potential, points_per_dim)?.max(incumbent),
            "grid",
            true,
        ),
    };
    let eps = problem.options.epsilon;
    let in_target = rho_star > 0.0
        && best
            .as_ref()
            .is_some_and(|b| target_membership(potential, rho_star, eps, b.y));
    Ok(Trace {
        strategy,
        seed,
        budget,
        potential: *potential,
        best,
        rho_star,
        rho_star_source: source.to_string(),
        rho_star_estimated: estimated,
        epsilon: eps,
        in_target_set: in_target,
        budget_exhausted: !in_target && records.len() >= budget,
        records,
    })
}

struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    fn stamp(&self) -> Option<f64> {
        self.enabled.then(|| self.start.elapsed().as_secs_f64())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Surrogate {
    Output,
    Potential,
}

/// Maximiser candidates of one potential's acquisition, best first.
fn rank_candidates(
    problem: &SearchProblem,
    regions: &[Region],
    posterior: &GpPosterior,
    potential: &PotentialSpec,
    incumbent: f64,
    surrogate: Surrogate,
    extra: &[Vec<f64>],
    rng: &mut impl Rng,
) -> Vec<Candidate> {
    let opts = &problem.options;
    let inputs = AcquisitionInputs {
        posterior,
        potential: *potential,
        incumbent,
    };
    let objective = |x: &[f64]| -> (f64, Vec<f64>) {
        let r = match (surrogate, opts.gradient) {
            (Surrogate::Output, GradientMode::Analytic) => ei_cfx_with_grad(&inputs, x),
            (Surrogate::Output, mode) => {
                ei_cfx(&inputs, x).and_then(|v| ei_cfx_grad(&inputs, x, mode).map(|g| (v, g)))
            }
            (Surrogate::Potential, _) => ei_naive_with_grad(posterior, incumbent, x),
        };
        r.unwrap_or((f64::NEG_INFINITY, vec![0.0; x.len()]))
    };
    optimize::multi_start(
        regions,
        &objective,
        extra,
        opts.acquisition_starts,
        opts.ascent_iters,
        rng,
    )
}

fn best_sample(data: &SampleSet, potential: &PotentialSpec) -> Option<Vec<f64>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &y) in data.outputs().iter().enumerate() {
        let r = potential.value(y);
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    best.map(|(i, _)| data.inputs()[i].clone())
}

/// Approximate maximiser of EI-CFX over the feasible region (with the l0
/// subset strategy), started from Latin-hypercube points and the best sample.
pub fn optimize_acquisition(
    posterior: &GpPosterior,
    potential: &PotentialSpec,
    incumbent: f64,
    problem: &SearchProblem,
    seed: u64,
) -> Result<Candidate> {
    let region = problem.region()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let regions = l0_regions(&region, problem.l0_bound, &mut rng);
    let extra: Vec<Vec<f64>> = best_sample(posterior.data(), potential)
        .into_iter()
        .collect();
    let ranked = rank_candidates(
        problem,
        &regions,
        posterior,
        potential,
        incumbent,
        Surrogate::Output,
        &extra,
        &mut rng,
    );
    Ok(ranked.into_iter().next().unwrap_or_else(|| Candidate {
        x: problem.query.clone(),
        value: 0.0,
        converged: true,
    }))
}

fn check_budget(problem: &SearchProblem, budget: usize) -> Result<()> {
    if budget < problem.options.initial_design.max(1) {
        return Err(CfxError::InvalidParameter(format!(
            "budget {budget} is below the initial design size {}",
            problem.options.initial_design
        )));
    }
    Ok(())
}

fn bayes_loop(
    problem: &SearchProblem,
    potentials: &[PotentialSpec],
    budget: usize,
    seed: u64,
    surrogate: Surrogate,
) -> Result<Vec<Trace>> {
    if potentials.is_empty() {
        return Err(CfxError::InvalidParameter(
            "at least one potential is required".into(),
        ));
    }
    check_budget(problem, budget)?;
    let region = problem.region()?;
    let l0 = problem.l0_bound;
    let opts = &problem.options;
    let clock = Clock {
        start: Instant::now(),
        enabled: opts.record_wall_time,
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut data = SampleSet::new();
    let mut evals: Vec<Evaluation> = Vec::new();
    let none = vec![None; potentials.len()];

    for p in initial_design(&region, l0, opts.initial_design, &mut rng) {
        let x = if is_new(&data, &[], &p) {
            Some(p)
        } else {
            fresh_random(&region, l0, &data, &[], &mut rng)
        };
        let Some(x) = x else { break };
        let y = problem.evaluate(&x)?;
        data.push(x.clone(), y)?;
        evals.push(Evaluation {
            x,
            y,
            phase: Phase::Initial,
            acquisition: none.clone(),
            wall_time_s: clock.stamp(),
        });
    }

    while data.len() < budget {
        let iter_seed: u64 = rng.gen();
        let mut acq_rng = Xoshiro256PlusPlus::seed_from_u64(iter_seed ^ 0x9e37_79b9_7f4a_7c15);
        let regions = l0_regions(&region, l0, &mut acq_rng);

        // One posterior per potential: shared for output models, separate
        // for potential-valued surrogates.
        let posteriors: Vec<Option<GpPosterior>> = match surrogate {
            Surrogate::Output => {
                let post = fit_auto(&data, &opts.hyper, iter_seed).ok();
                vec![post; potentials.len()]
            }
            Surrogate::Potential => potentials
                .iter()
                .map(|p| fit_auto(&data.map_outputs(|y| p.value(y)), &opts.hyper, iter_seed).ok())
                .collect(),
        };
        let acq_seeds: Vec<u64> = potentials.iter().map(|_| acq_rng.gen()).collect();
        let ranked: Vec<Vec<Candidate>> = potentials
            .par_iter()
            .enumerate()
            .map(|(i, p)| match &posteriors[i] {
                Some(post) => {
                    let incumbent = incumbent_of(p, data.outputs());
                    let extra: Vec<Vec<f64>> = best_sample(&data, p).into_iter().collect();
                    let mut r = Xoshiro256PlusPlus::seed_from_u64(acq_seeds[i]);
                    rank_candidates(
                        problem, &regions, post, p, incumbent, surrogate, &extra, &mut r,
                    )
                }
                None => Vec::new(),
            })
            .collect();

        let mut batch: Vec<(Vec<f64>, Phase)> = Vec::new();
        for cands in &ranked {
            let pending: Vec<Vec<f64>> = batch.iter().map(|(x, _)| x.clone()).collect();
            let pick = cands
                .iter()
                .map(|c| region.finalize(&c.x))
                .find(|x| is_new(&data, &pending, x));
            match pick {
                Some(x) => batch.push((x, Phase::Acquisition)),
                None => {
                    if let Some(x) = fresh_random(&region, l0, &data, &pending, &mut rng) {
                        batch.push((x, Phase::Fallback));
                    }
                }
            }
        }
        if batch.is_empty() {
            break;
        }
        for (x, phase) in batch {
            if data.len() >= budget {
                break;
            }
            let acquisition: Vec<Option<f64>> = potentials
                .iter()
                .zip(&posteriors)
                .map(|(p, post)| {
                    let post = post.as_ref()?;
                    let incumbent = incumbent_of(p, data.outputs());
                    match surrogate {
                        Surrogate::Output => ei_cfx(
                            &AcquisitionInputs {
                                posterior: post,
                                potential: *p,
                                incumbent,
                            },
                            &x,
                        )
                        .ok(),
                        Surrogate::Potential => ei_naive(post, incumbent, &x).ok(),
                    }
                })
                .collect();
            let y = problem.evaluate(&x)?;
            data.push(x.clone(), y)?;
            evals.push(Evaluation {
                x,
                y,
                phase,
                acquisition,
                wall_time_s: clock.stamp(),
            });
        }
    }

    let strategy = match surrogate {
        Surrogate::Output => Strategy::BayesCfx,
        Surrogate::Potential => Strategy::BayesNaive,
    };
    potentials
        .iter()
        .enumerate()
        .map(|(i, p)| assemble_trace(problem, strategy, seed, budget, p, i, &evals))
        .collect()
}

/// Bayes-CFX for several potentials over one shared sample set; `budget`
/// bounds the total number of model evaluations.
pub fn run_multi_cfx(
    problem: &SearchProblem,
    potentials: &[PotentialSpec],
    budget: usize,
    seed: u64,
) -> Result<Vec<Trace>> {
    bayes_loop(problem, potentials, budget, seed, Surrogate::Output)
}

/// Bayes-CFX: GP on the model output, EI-CFX maximised each iteration.
pub fn run_bayes_cfx(
    problem: &SearchProblem,
    potential: &PotentialSpec,
    budget: usize,
    seed: u64,
) -> Result<Trace> {
    Ok(run_multi_cfx(problem, std::slice::from_ref(potential), budget, seed)?.remove(0))
}

/// GP on the potential values `rho(f(x))` with classic expected improvement.
pub fn run_bayes_naive(
    problem: &SearchProblem,
    potential: &PotentialSpec,
    budget: usize,
    seed: u64,
) -> Result<Trace> {
    Ok(bayes_loop(
        problem,
        std::slice::from_ref(potential),
        budget,
        seed,
        Surrogate::Potential,
    )?
    .remove(0))
}

/// Uniform sampling over the feasible region.
pub fn run_random(
    problem: &SearchProblem,
    potential: &PotentialSpec,
    budget: usize,
    seed: u64,
) -> Result<Trace> {
    let region = problem.region()?;
    let clock = Clock {
        start: Instant::now(),
        enabled: problem.options.record_wall_time,
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut data = SampleSet::new();
    let mut evals = Vec::new();
    while data.len() < budget {
        let Some(x) = fresh_random(&region, problem.l0_bound, &data, &[], &mut rng) else {
            break;
        };
        let y = problem.evaluate(&x)?;
        data.push(x.clone(), y)?;
        evals.push(Evaluation {
            x,
            y,
            phase: Phase::Random,
            acquisition: vec![None],
            wall_time_s: clock.stamp(),
        });
    }
    assemble_trace(
        problem,
        Strategy::Random,
        seed,
        budget,
        potential,
        0,
        &evals,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalOptParams {
    /// Step size `eta`.
    pub step: f64,
    /// Stationarity tolerance `delta`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for LocalOptParams {
    fn default() -> Self {
        Self {
            step: 0.5,
            tol: 1e-6,
            max_iters: 1000,
        }
    }
}

impl LocalOptParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(CfxError::InvalidParameter(
                "local search needs positive step, tolerance and iteration cap".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalOptResult {
    pub x: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `|x - P[x + eta grad rho(f(x))]|` at the returned point.
    pub residual: f64,
}

/// `P[x + eta grad rho(f(x))]` and the model output at `x`.
pub fn projected_gradient_step(
    problem: &SearchProblem,
    region: &Region,
    potential: &PotentialSpec,
    x: &[f64],
    step: f64,
) -> Result<(Vec<f64>, f64)> {
    let y = problem.evaluate(x)?;
    let slope = potential.derivative(y);
    let g = if slope == 0.0 {
        vec![0.0; x.len()]
    } else {
        problem.model_gradient(x)?
    };
    let moved: Vec<f64> = x
        .iter()
        .zip(&g)
        .map(|(xi, gi)| xi + step * slope * gi)
        .collect();
    Ok((region.project(&moved), y))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Iterates `x <- P[x + eta grad rho(f(x))]` until
/// `|x - P[x + eta grad rho(f(x))]| <= delta` or the iteration cap.
pub fn projected_gradient_search(
    problem: &SearchProblem,
    potential: &PotentialSpec,
    x0: &[f64],
    params: &LocalOptParams,
) -> Result<LocalOptResult> {
    params.validate()?;
    let region = problem.region()?;
    let mut continuous = region.clone();
    continuous.integer = vec![false; region.dim()];
    if x0.len() != region.dim() || !continuous.contains(x0) {
        return Err(CfxError::InvalidParameter(
            "starting point lies outside the domain".into(),
        ));
    }
    let mut x = x0.to_vec();
    let mut residual = f64::INFINITY;
    for it in 0..params.max_iters {
        let (next, _) = projected_gradient_step(problem, &continuous, potential, &x, params.step)?;
        residual = distance(&x, &next);
        if residual <= params.tol {
            return Ok(LocalOptResult {
                x,
                converged: true,
                iterations: it,
                residual,
            });
        }
        x = next;
    }
    let (next, _) = projected_gradient_step(problem, &continuous, potential, &x, params.step)?;
    let last = distance(&x, &next);
    if last.is_finite() {
        residual = last;
    }
    Ok(LocalOptResult {
        converged: residual <= params.tol,
        x,
        iterations: params.max_iters,
        residual,
    })
}

/// Projected-gradient ascent from random feasible starts, restarting on
/// convergence; every iterate is one recorded evaluation (at its rounded,
/// feasible counterpart).
pub fn run_localopt(
    problem: &SearchProblem,
    potential: &PotentialSpec,
    budget: usize,
    seed: u64,
    params: &LocalOptParams,
) -> Result<Trace> {
    params.validate()?;
    let region = problem.region()?;
    let clock = Clock {
        start: Instant::now(),
        enabled: problem.options.record_wall_time,
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut evals: Vec<Evaluation> = Vec::new();
    'restarts: while evals.len() < budget {
        let start = sample_point(&region, problem.l0_bound, &mut rng);
        let moving: Vec<usize> = (0..start.len())
            .filter(|&j| start[j] != region.query[j])
            .collect();
        let mut sub = match problem.l0_bound {
            Some(_) => region.restrict(&moving),
            None => region.clone(),
        };
        let rounding = sub.clone();
        sub.integer = vec![false; sub.dim()];
        let mut x = start;
        for _ in 0..params.max_iters {
            if evals.len() >= budget {
                break 'restarts;
            }
            let (next, _) = projected_gradient_step(problem, &sub, potential, &x, params.step)?;
            let at = rounding.finalize(&x);
            let y = problem.evaluate(&at)?;
            evals.push(Evaluation {
                x: at,
                y,
                phase: Phase::Gradient,
                acquisition: vec![None],
                wall_time_s: clock.stamp(),
            });
            if distance(&x, &next) <= params.tol {
                continue 'restarts;
            }
            x = next;
        }
    }
    assemble_trace(
        problem,
        Strategy::Localopt,
        seed,
        budget,
        potential,
        0,
        &evals,
    )
}

/// Runs `strategy` for one potential.
pub fn run_strategy(
    strategy: Strategy,
    problem: &SearchProblem,
    potential: &PotentialSpec,
    budget: usize,
    seed: u64,
    local: &LocalOptParams,
) -> Result<Trace> {
    match strategy {
        Strategy::BayesCfx => run_bayes_cfx(problem, potential, budget, seed),
        Strategy::BayesNaive => run_bayes_naive(problem, potential, budget, seed),
        Strategy::Random => run_random(problem, potential, budget, seed),
        Strategy::Localopt => run_localopt(problem, potential, budget, seed, local),
    }
}
