//! Gaussian-process regression with an RBF kernel and zero prior mean.

mod hyperopt;

pub use hyperopt::{fit_auto, fit_hyperparameters, HyperOptions};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};

/// Jitter applied when none is requested explicitly.
pub const DEFAULT_JITTER: f64 = 1e-10;
/// Largest jitter tried before a fit is declared failed.
pub const MAX_JITTER: f64 = 1e-4;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// One entry per input dimension, or a single shared entry.
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub jitter: f64,
}

impl KernelParams {
    pub fn isotropic(lengthscale: f64, signal_variance: f64, jitter: f64) -> Self {
        Self {
            lengthscales: vec![lengthscale],
            signal_variance,
            jitter,
        }
    }

    pub fn lengthscale(&self, dim: usize) -> f64 {
        if self.lengthscales.len() == 1 {
            self.lengthscales[0]
        } else {
            self.lengthscales[dim]
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.lengthscales.len() != 1 && self.lengthscales.len() != dim {
            return Err(CfxError::DimensionMismatch {
                expected: dim,
                got: self.lengthscales.len(),
            });
        }
        if self
            .lengthscales
            .iter()
            .any(|l| !(*l > 0.0) || !l.is_finite())
        {
            return Err(CfxError::InvalidParameter(format!(
                "lengthscales must be positive, got {:?}",
                self.lengthscales
            )));
        }
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return Err(CfxError::InvalidParameter(format!(
                "signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if !(self.jitter >= 0.0) {
            return Err(CfxError::InvalidParameter(format!(
                "jitter must be non-negative, got {}",
                self.jitter
            )));
        }
        Ok(())
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(y)
            .enumerate()
            .map(|(j, (a, b))| {
                let d = (a - b) / self.lengthscale(j);
                d * d
            })
            .sum();
        self.signal_variance * (-0.5 * r2).exp()
    }
}

/// `s^2 exp(-1/2 sum_j ((x_j - y_j) / l_j)^2)`.
pub fn rbf_kernel(kernel: &KernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CfxError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    kernel.validate(x.len())?;
    Ok(kernel.eval(x, y))
}

/// Distinctness tolerance for sample inputs.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(inputs: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(CfxError::DimensionMismatch {
                expected: inputs.len(),
                got: outputs.len(),
            });
        }
        let mut set = Self::new();
        for (x, y) in inputs.into_iter().zip(outputs) {
            set.push(x, y)?;
        }
        Ok(set)
    }

    /// Appends a sample; rejects mismatched dimension and duplicate inputs.
    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if let Some(first) = self.inputs.first() {
            if first.len() != x.len() {
                return Err(CfxError::DimensionMismatch {
                    expected: first.len(),
                    got: x.len(),
                });
            }
        }
        if self.contains_near(&x, DUPLICATE_TOL) {
            return Err(CfxError::InvalidParameter(format!(
                "duplicate sample input {x:?}"
            )));
        }
        self.inputs.push(x);
        self.outputs.push(y);
        Ok(())
    }

    pub fn contains_near(&self, x: &[f64], tol: f64) -> bool {
        self.inputs
            .iter()
            .any(|p| p.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol))
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.inputs.first().map(Vec::len)
    }

    /// Same inputs with outputs mapped through `f`.
    pub fn map_outputs(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            inputs: self.inputs.clone(),
            outputs: self.outputs.iter().map(|&y| f(y)).collect(),
        }
    }
}

/// Posterior mean and variance at a point with their input gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
    pub mean_grad: Vec<f64>,
    pub variance_grad: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: KernelParams,
    data: SampleSet,
    factor: Cholesky<f64, Dyn>,
    dual_weights: DVector<f64>,
    jitter: f64,
    /// Outputs were fitted as `(y - shift) / scale`.
    shift: f64,
    scale: f64,
}

fn gram(kernel: &KernelParams, inputs: &[Vec<f64>], jitter: f64) -> DMatrix<f64> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(&inputs[i], &inputs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += jitter;
    }
    k
}

/// Cholesky of the Gram matrix, escalating jitter by 10x up to [`MAX_JITTER`].
fn factorise(kernel: &KernelParams, inputs: &[Vec<f64>]) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = kernel.jitter;
    loop {
        if let Some(chol) = gram(kernel, inputs, jitter).cholesky() {
            return Ok((chol, jitter));
        }
        let next = if jitter == 0.0 {
            DEFAULT_JITTER
        } else {
            jitter * 10.0
        };
        if next > MAX_JITTER * (1.0 + 1e-9) {
            return Err(CfxError::Cholesky { jitter });
        }
        jitter = next;
    }
}

fn check_data(data: &SampleSet, kernel: &KernelParams) -> Result<usize> {
    let dim = data.dim().ok_or_else(|| {
        CfxError::InvalidParameter("cannot fit a GP to an empty sample set".into())
    })?;
    kernel.validate(dim)?;
    Ok(dim)
}

fn fit_transformed(
    data: &SampleSet,
    kernel: &KernelParams,
    shift: f64,
    scale: f64,
) -> Result<GpPosterior> {
    check_data(data, kernel)?;
    let (factor, jitter) = factorise(kernel, data.inputs())?;
    let y = DVector::from_iterator(
        data.len(),
        data.outputs().iter().map(|&v| (v - shift) / scale),
    );
    let dual_weights = factor.solve(&y);
    Ok(GpPosterior {
        kernel: kernel.clone(),
        data: data.clone(),
        factor,
        dual_weights,
        jitter,
        shift,
        scale,
    })
}

/// Conditions the zero-mean GP on `data` as given.
pub fn fit(data: &SampleSet, kernel: &KernelParams) -> Result<GpPosterior> {
    fit_transformed(data, kernel, 0.0, 1.0)
}

/// Mean and standard deviation used to standardise outputs; a zero spread
/// falls back to 1.
pub fn output_standardisation(outputs: &[f64]) -> (f64, f64) {
    let n = outputs.len() as f64;
    let mean = outputs.iter().sum::<f64>() / n;
    let var = outputs.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let sd = if sd > 1e-300 && sd.is_finite() {
        sd
    } else {
        1.0
    };
    (mean, sd)
}

/// Fits on standardised outputs; `kernel` is interpreted in standardised
/// units and predictions are mapped back to the original scale.
pub fn fit_standardized(data: &SampleSet, kernel: &KernelParams) -> Result<GpPosterior> {
    check_data(data, kernel)?;
    let (mean, sd) = output_standardisation(data.outputs());
    fit_transformed(data, kernel, mean, sd)
}

impl GpPosterior {
    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn data(&self) -> &SampleSet {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.inputs()[0].len()
    }

    /// Jitter actually used for the factorisation.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower-triangular Cholesky factor of `K + jitter I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.factor.l()
    }

    pub fn dual_weights(&self) -> &DVector<f64> {
        &self.dual_weights
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(CfxError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.data.len(),
            self.data.inputs().iter().map(|xi| self.kernel.eval(x, xi)),
        )
    }

    fn variance_cap(&self) -> f64 {
        self.kernel.signal_variance + self.jitter
    }

    /// Posterior mean and variance at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        let k = self.cross(x);
        let mean = k.dot(&self.dual_weights);
        let mut v = k;
        self.factor.l_dirty().solve_lower_triangular_mut(&mut v);
        let var = (self.kernel.signal_variance - v.norm_squared()).clamp(0.0, self.variance_cap());
        Ok((
            self.shift + self.scale * mean,
            self.scale * self.scale * var,
        ))
    }

    /// Mean, variance and their gradients with respect to `x`.
    pub fn predict_with_gradient(&self, x: &[f64]) -> Result<Prediction> {
        self.check_dim(x)?;
        let d = self.dim();
        let k = self.cross(x);
        let mean = k.dot(&self.dual_weights);
        let kinv_k = self.factor.solve(&k);
        let raw_var = self.kernel.signal_variance - k.dot(&kinv_k);
        let var = raw_var.clamp(0.0, self.variance_cap());
        let mut mean_grad = vec![0.0; d];
        let mut variance_grad = vec![0.0; d];
        for (i, xi) in self.data.inputs().iter().enumerate() {
            for j in 0..d {
                let l = self.kernel.lengthscale(j);
                // d k(x, x_i) / d x_j
                let dk = -k[i] * (x[j] - xi[j]) / (l * l);
                mean_grad[j] += dk * self.dual_weights[i];
                variance_grad[j] -= 2.0 * dk * kinv_k[i];
            }
        }
        let s2 = self.scale * self.scale;
        if raw_var <= 0.0 {
            variance_grad.iter_mut().for_each(|g| *g = 0.0);
        }
        Ok(Prediction {
            mean: self.shift + self.scale * mean,
            variance: s2 * var,
            mean_grad: mean_grad.into_iter().map(|g| self.scale * g).collect(),
            variance_grad: variance_grad.into_iter().map(|g| s2 * g).collect(),
        })
    }
}

/// `-1/2 y^T alpha - sum log L_ii - n/2 log 2 pi` for the data as given.
pub fn log_marginal_likelihood(data: &SampleSet, kernel: &KernelParams) -> Result<f64> {
    check_data(data, kernel)?;
    let chol = gram(kernel, data.inputs(), kernel.jitter)
        .cholesky()
        .ok_or(CfxError::Cholesky {
            jitter: kernel.jitter,
        })?;
    Ok(lml_from_factor(&chol, data.outputs()))
}

fn lml_from_factor(chol: &Cholesky<f64, Dyn>, outputs: &[f64]) -> f64 {
    let y = DVector::from_column_slice(outputs);
    let alpha = chol.solve(&y);
    let logdet_half: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    -0.5 * y.dot(&alpha) - logdet_half - 0.5 * outputs.len() as f64 * LN_2PI
}
