//! Black-box model adapters: logistic regression, linear, a piecewise-constant
//! step ensemble, sums of Gaussian bumps, and closures.

mod dataset;

pub use dataset::{load_dataset, ColumnKind, ColumnSpec, EncodedFeature, Schema, TabularDataset};

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};

/// A deterministic scalar-output model.
pub trait Model: Send + Sync {
    fn dim(&self) -> usize;

    fn predict(&self, x: &[f64]) -> Result<f64>;

    /// Analytic input gradient, when the model has one.
    fn gradient(&self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(CfxError::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

fn affine(weights: &[f64], bias: f64, x: &[f64]) -> Result<f64> {
    check_dim(weights.len(), x)?;
    Ok(weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias)
}

/// Logistic function without overflow for large `|t|`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub fn logistic_predict(model: &LogisticModel, x: &[f64]) -> Result<f64> {
    Ok(sigmoid(affine(&model.weights, model.bias, x)?))
}

impl Model for LogisticModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        logistic_predict(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(
            logistic_predict(self, x)
                .map(|p| self.weights.iter().map(|w| p * (1.0 - p) * w).collect()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    #[serde(default)]
    pub bias: f64,
}

impl Model for LinearModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        affine(&self.weights, self.bias, x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(check_dim(self.weights.len(), x).map(|_| self.weights.clone()))
    }
}

/// Adds `value` when `x[dim] >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    pub dim: usize,
    pub threshold: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEnsembleModel {
    pub n_features: usize,
    pub base: f64,
    #[serde(default)]
    pub rules: Vec<StepRule>,
}

impl StepEnsembleModel {
    pub fn new(n_features: usize, base: f64, rules: Vec<StepRule>) -> Result<Self> {
        if let Some(r) = rules.iter().find(|r| r.dim >= n_features) {
            return Err(CfxError::InvalidParameter(format!(
                "step rule on feature {} of a {n_features}-feature ensemble",
                r.dim
            )));
        }
        Ok(Self {
            n_features,
            base,
            rules,
        })
    }
}

pub fn step_ensemble_predict(model: &StepEnsembleModel, x: &[f64]) -> Result<f64> {
    check_dim(model.n_features, x)?;
    let mut y = model.base;
    for r in &model.rules {
        let v = x.get(r.dim).ok_or(CfxError::DimensionMismatch {
            expected: r.dim + 1,
            got: x.len(),
        })?;
        if *v >= r.threshold {
            y += r.value;
        }
    }
    Ok(y)
}

impl Model for StepEnsembleModel {
    fn dim(&self) -> usize {
        self.n_features
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        step_ensemble_predict(self, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub height: f64,
    pub scale: f64,
}

/// `base + sum_k height_k exp(-|x - center_k|^2 / (2 scale_k^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpsModel {
    #[serde(default)]
    pub base: f64,
    pub bumps: Vec<Bump>,
}

impl BumpsModel {
    fn terms<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = (&'a Bump, f64)> + 'a {
        self.bumps.iter().map(move |b| {
            let d2: f64 = b.center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
            (b, b.height * (-0.5 * d2 / (b.scale * b.scale)).exp())
        })
    }
}

impl Model for BumpsModel {
    fn dim(&self) -> usize {
        self.bumps.first().map_or(0, |b| b.center.len())
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.base + self.terms(x).map(|(_, v)| v).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if let Err(e) = check_dim(self.dim(), x) {
            return Some(Err(e));
        }
        let mut g = vec![0.0; x.len()];
        for (b, v) in self.terms(x) {
            for j in 0..x.len() {
                g[j] -= v * (x[j] - b.center[j]) / (b.scale * b.scale);
            }
        }
        Some(Ok(g))
    }
}

type ModelFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Wraps a closure.
#[derive(Clone)]
pub struct FnModel {
    dim: usize,
    f: Arc<ModelFn>,
    grad: Option<Arc<GradFn>>,
}

impl FnModel {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            f: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl Model for FnModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(CfxError::Model(format!("non-finite output {y} at {x:?}")))
        }
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        let g = self.grad.as_ref()?;
        Some(check_dim(self.dim, x).map(|_| g(x)))
    }
}

/// On-disk model description, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelFile {
    Logistic(LogisticModel),
    StepEnsemble(StepEnsembleModel),
    Linear(LinearModel),
    Bumps(BumpsModel),
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelFile = serde_json::from_str(text)?;
        if let ModelFile::StepEnsemble(s) = &m {
            StepEnsembleModel::new(s.n_features, s.base, s.rules.clone())?;
        }
        if let ModelFile::Bumps(b) = &m {
            let d = b.dim();
            if d == 0
                || b.bumps
                    .iter()
                    .any(|k| k.center.len() != d || !(k.scale > 0.0))
            {
                return Err(CfxError::InvalidParameter(
                    "bumps need a common non-zero dimension and positive scales".into(),
                ));
            }
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn into_model(self) -> Arc<dyn Model> {
        match self {
            ModelFile::Logistic(m) => Arc::new(m),
            ModelFile::StepEnsemble(m) => Arc::new(m),
            ModelFile::Linear(m) => Arc::new(m),
            ModelFile::Bumps(m) => Arc::new(m),
        }
    }
}
