//! Run configuration: TOML, or JSON when the file ends in `.json`.

use std::path::{Path, PathBuf};

use cfx_core::models::{load_dataset, EncodedFeature, ModelFile, Schema, TabularDataset};
use cfx_core::potential::{PotentialKind, PotentialSpec};
use cfx_core::search::{
    select_query, LinearConstraint, LocalOptParams, SearchOptions, SearchProblem, SignConstraint,
    Strategy,
};
use cfx_core::CfxError;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Deserialize;

use crate::error::CliError;

/// Smallest budget accepted for the Bayesian strategies.
pub const MIN_BO_BUDGET: usize = 5;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// An l0 bound, or the string `"inf"` for none.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum L0Bound {
    Bound(usize),
    Named(String),
}

impl L0Bound {
    fn resolve(&self) -> Result<Option<usize>, CliError> {
        match self {
            L0Bound::Bound(k) => Ok(Some(*k)),
            L0Bound::Named(s) if s == "inf" || s == "none" => Ok(None),
            L0Bound::Named(s) => Err(CliError::Config(format!(
                "l0 bound must be an integer or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub schema: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectRule {
    /// Smallest acceptable model output at the query.
    pub min_output: f64,
    /// Size of the random pool drawn from the box when there is no dataset.
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default)]
    pub pool_seed: u64,
}

/// Keeps the query pool stream apart from the search streams of equal seed.
const POOL_STREAM: u64 = 0x51_7c_c1_b7_27_22_0a_95;

fn default_pool_size() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QueryConfig {
    Point(Vec<f64>),
    /// Row index into the dataset.
    Row(usize),
    Select(SelectRule),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// Defaults to the model output at the query.
    pub center: Option<f64>,
    pub width: Option<f64>,
    /// Output level the potential should peak at; sets `width = |center - target|`.
    pub target: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsConfig {
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub l0: Option<OneOrMany<L0Bound>>,
    pub signs: Option<Vec<SignConstraint>>,
    #[serde(default)]
    pub integer_dims: Vec<usize>,
    #[serde(default)]
    pub linear: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: PathBuf,
    pub dataset: Option<DatasetConfig>,
    pub query: QueryConfig,
    pub potential: OneOrMany<PotentialConfig>,
    #[serde(default)]
    pub constraints: ConstraintsConfig,
    pub strategy: Strategy,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub search: SearchOptions,
    #[serde(default)]
    pub localopt: LocalOptParams,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_str(text: &str, json: bool) -> Result<Self, CliError> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut config = Self::from_str(&text, json)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.model = base.join(&config.model);
        if let Some(d) = &mut config.dataset {
            d.path = base.join(&d.path);
            d.schema = base.join(&d.schema);
        }
        if let Some(out) = &mut config.output_dir {
            *out = base.join(&*out);
        }
        Ok(config)
    }
}

/// One (potential, l0 bound) combination.
#[derive(Debug, Clone)]
pub struct Case {
    pub potential: PotentialSpec,
    pub l0_bound: Option<usize>,
}

/// A validated config ready to run.
pub struct Prepared {
    pub features: Vec<String>,
    pub base: SearchProblem,
    pub query_output: f64,
    pub cases: Vec<Case>,
    pub strategy: Strategy,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub localopt: LocalOptParams,
}

impl Prepared {
    pub fn problem(&self, case: &Case) -> SearchProblem {
        self.base.clone().with_l0_bound(case.l0_bound)
    }
}

fn file_error(what: &str, path: &Path, e: CfxError) -> CliError {
    CliError::Config(format!("cannot load {what} {}: {e}", path.display()))
}

fn load_data(cfg: &DatasetConfig) -> Result<TabularDataset, CliError> {
    let schema = Schema::load(&cfg.schema).map_err(|e| file_error("schema", &cfg.schema, e))?;
    load_dataset(&cfg.path, &schema).map_err(|e| file_error("dataset", &cfg.path, e))
}

fn column_bounds(rows: &[Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for r in rows {
        for j in 0..d {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    (lo, hi)
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    if cfg.seeds.is_empty() {
        return Err(CliError::Config("at least one seed is required".into()));
    }
    let bayes = matches!(cfg.strategy, Strategy::BayesCfx | Strategy::BayesNaive);
    if bayes && cfg.budget < MIN_BO_BUDGET {
        return Err(CliError::Config(format!(
            "budget {} is below the minimum {MIN_BO_BUDGET} for {}",
            cfg.budget,
            cfg.strategy.name()
        )));
    }
    if cfg.budget == 0 {
        return Err(CliError::Config("budget must be positive".into()));
    }
    cfg.localopt
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let model = ModelFile::load(&cfg.model)
        .map_err(|e| file_error("model", &cfg.model, e))?
        .into_model();
    let d = model.dim();
    let data = cfg.dataset.as_ref().map(load_data).transpose()?;
    let encoded = data
        .as_ref()
        .map(|t| t.encoded())
        .transpose()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let dataset_features = data.as_ref().map(|t| t.features());
    if let Some(f) = &dataset_features {
        if f.len() != d {
            return Err(CliError::Config(format!(
                "dataset encodes {} features but the model expects {d}",
                f.len()
            )));
        }
    }

    let c = &cfg.constraints;
    let (lower, upper) = match (&c.lower, &c.upper, &encoded) {
        (Some(lo), Some(hi), _) => (lo.clone(), hi.clone()),
        (lo, hi, Some(rows)) => {
            let (dlo, dhi) = column_bounds(rows, d);
            (lo.clone().unwrap_or(dlo), hi.clone().unwrap_or(dhi))
        }
        _ => {
            return Err(CliError::Config(
                "constraints.lower and constraints.upper are required without a dataset".into(),
            ))
        }
    };
    if lower.len() != d || upper.len() != d {
        return Err(CliError::Config(format!(
            "box bounds must have {d} entries"
        )));
    }
    if lower.iter().zip(&upper).any(|(l, h)| !(l <= h)) {
        return Err(CliError::Infeasible(
            "empty box: some lower bound exceeds its upper bound".into(),
        ));
    }

    let query = match &cfg.query {
        QueryConfig::Point(q) => q.clone(),
        QueryConfig::Row(i) => {
            let rows = encoded
                .as_ref()
                .ok_or_else(|| CliError::Config("query.row needs a dataset".into()))?;
            rows.get(*i).cloned().ok_or_else(|| {
                CliError::Config(format!(
                    "query row {i} is out of range ({} rows)",
                    rows.len()
                ))
            })?
        }
        QueryConfig::Select(rule) => {
            let pool = match &encoded {
                Some(rows) => rows.clone(),
                None => {
                    let mut rng = Xoshiro256PlusPlus::seed_from_u64(rule.pool_seed ^ POOL_STREAM);
                    (0..rule.pool_size)
                        .map(|_| {
                            lower
                                .iter()
                                .zip(&upper)
                                .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
                                .collect()
                        })
                        .collect()
                }
            };
            let i = select_query(model.as_ref(), &pool, rule.min_output)
                .map_err(|e| CliError::Runtime(e.to_string()))?
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "no candidate query reaches model output {}",
                        rule.min_output
                    ))
                })?;
            pool[i].clone()
        }
    };
    if query.len() != d {
        return Err(CliError::Config(format!(
            "query has {} entries, the model expects {d}",
            query.len()
        )));
    }
    let query_output = model
        .predict(&query)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut integer_dims = c.integer_dims.clone();
    let mut signs = c.signs.clone().unwrap_or_default();
    let mut features: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    if let Some(fs) = &dataset_features {
        features = fs.iter().map(EncodedFeature::label).collect();
        let freeze_one_hot = c.signs.is_none();
        if freeze_one_hot {
            signs = vec![SignConstraint::Free; d];
        }
        for (j, f) in fs.iter().enumerate() {
            match f {
                EncodedFeature::Ordinal { .. } if !integer_dims.contains(&j) => {
                    integer_dims.push(j)
                }
                EncodedFeature::OneHot { .. } if freeze_one_hot => signs[j] = SignConstraint::Fixed,
                _ => {}
            }
        }
        integer_dims.sort_unstable();
    }
    if !signs.is_empty() && signs.len() != d {
        return Err(CliError::Config(format!("signs must have {d} entries")));
    }

    let mut options = cfg.search.clone();
    if let Some(eps) = cfg.epsilon {
        if !(eps >= 0.0) {
            return Err(CliError::Config("epsilon must be non-negative".into()));
        }
        options.epsilon = eps;
    }
    let base = SearchProblem::new(model, query, lower, upper)
        .with_linear(c.linear.clone())
        .with_integer_dims(integer_dims)
        .with_signs(signs)
        .with_options(options);

    let l0_bounds = match &c.l0 {
        None => vec![None],
        Some(b) => b
            .to_vec()
            .iter()
            .map(L0Bound::resolve)
            .collect::<Result<Vec<_>, _>>()?,
    };
    let mut cases = Vec::new();
    for p in cfg.potential.to_vec() {
        let center = p.center.unwrap_or(query_output);
        let width = match (p.width, p.target) {
            (Some(w), None) => w,
            (None, Some(t)) => (center - t).abs(),
            _ => {
                return Err(CliError::Config(
                    "each potential needs exactly one of width or target".into(),
                ))
            }
        };
        let potential = PotentialSpec::new(p.kind, center, width)
            .map_err(|e| CliError::Config(e.to_string()))?;
        for &l0_bound in &l0_bounds {
            cases.push(Case {
                potential,
                l0_bound,
            });
        }
    }
    let prepared = Prepared {
        features,
        base,
        query_output,
        cases,
        strategy: cfg.strategy,
        budget: cfg.budget,
        seeds: cfg.seeds.clone(),
        localopt: cfg.localopt,
    };
    for case in &prepared.cases {
        prepared
            .problem(case)
            .region()
            .map_err(CliError::from_core)?;
    }
    Ok(prepared)
}
