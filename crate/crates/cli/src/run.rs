//! `cfx run`: traces, summary and counterfactual table.

use std::fs;
use std::path::Path;

use cfx_core::potential::{PotentialKind, PotentialSpec};
use cfx_core::search::{run_strategy, Record, Trace};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Case, Prepared};
use crate::error::CliError;

#[derive(Serialize)]
struct TraceLine<'a> {
    case: usize,
    target: String,
    l0_bound: Option<usize>,
    #[serde(flatten)]
    record: &'a Record,
}

#[derive(Debug, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub terminal_incumbent: f64,
    pub evaluations: usize,
    pub best_x: Option<Vec<f64>>,
    pub best_y: Option<f64>,
    pub rho_star: f64,
    pub rho_star_source: String,
    pub rho_star_estimated: bool,
    pub in_target_set: bool,
    pub budget_exhausted: bool,
}

/// Mean and standard error of the incumbent after each evaluation.
#[derive(Debug, Serialize)]
pub struct Curve {
    pub mean: Vec<f64>,
    pub std_error: Vec<Option<f64>>,
}

#[derive(Debug, Serialize)]
pub struct CaseSummary {
    pub case: usize,
    pub target: String,
    pub potential: PotentialSpec,
    pub l0_bound: Option<usize>,
    pub runs: Vec<SeedSummary>,
    pub mean_terminal_incumbent: f64,
    /// Sample standard deviation over seeds divided by `sqrt(seeds)`.
    pub std_error: Option<f64>,
    pub incumbent_curve: Curve,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub strategy: String,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub rng: &'static str,
    pub features: Vec<String>,
    pub query: Vec<f64>,
    pub query_output: f64,
    pub cases: Vec<CaseSummary>,
}

fn kind_name(kind: PotentialKind) -> &'static str {
    match kind {
        PotentialKind::Sep => "sep",
        PotentialKind::AepPlus => "aep+",
        PotentialKind::AepMinus => "aep-",
    }
}

pub fn target_label(p: &PotentialSpec) -> String {
    format!(
        "{} center={} width={}",
        kind_name(p.kind),
        p.center,
        p.width
    )
}

fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

fn summarise(index: usize, case: &Case, traces: &[&Trace], budget: usize) -> CaseSummary {
    let runs: Vec<SeedSummary> = traces
        .iter()
        .map(|t| SeedSummary {
            seed: t.seed,
            terminal_incumbent: t.incumbent(),
            evaluations: t.evaluations(),
            best_x: t.best.as_ref().map(|b| b.x.clone()),
            best_y: t.best.as_ref().map(|b| b.y),
            rho_star: t.rho_star,
            rho_star_source: t.rho_star_source.clone(),
            rho_star_estimated: t.rho_star_estimated,
            in_target_set: t.in_target_set,
            budget_exhausted: t.budget_exhausted,
        })
        .collect();
    let terminal: Vec<f64> = runs.iter().map(|r| r.terminal_incumbent).collect();
    let (mean_terminal_incumbent, std_error) = mean_se(&terminal);
    let longest = traces
        .iter()
        .map(|t| t.evaluations())
        .max()
        .unwrap_or(0)
        .min(budget);
    let (mean, std_error_curve) = (1..=longest)
        .map(|n| {
            mean_se(
                &traces
                    .iter()
                    .map(|t| t.incumbent_after(n))
                    .collect::<Vec<_>>(),
            )
        })
        .unzip();
    CaseSummary {
        case: index,
        target: target_label(&case.potential),
        potential: case.potential,
        l0_bound: case.l0_bound,
        runs,
        mean_terminal_incumbent,
        std_error,
        incumbent_curve: Curve {
            mean,
            std_error: std_error_curve,
        },
    }
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))
}

/// Best run of a case: highest potential, then lowest seed.
fn best_trace<'a>(traces: &[&'a Trace]) -> Option<&'a Trace> {
    let mut best: Option<&Trace> = None;
    for t in traces {
        let Some(b) = &t.best else { continue };
        if best.is_none_or(|cur| b.rho > cur.best.as_ref().map_or(f64::NEG_INFINITY, |c| c.rho)) {
            best = Some(t);
        }
    }
    best
}

fn counterfactual_csv(prep: &Prepared, per_case: &[Vec<&Trace>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["target".to_string(), "l0_bound".into(), "seed".into()];
    header.extend(prep.features.iter().cloned());
    header.push("result_change".into());
    w.write_record(&header)
        .map_err(|e| CliError::io("csv", e))?;
    for (case, traces) in prep.cases.iter().zip(per_case) {
        let Some(t) = best_trace(traces) else {
            continue;
        };
        let best = t.best.as_ref().expect("best point");
        let mut row = vec![
            target_label(&case.potential),
            case.l0_bound.map_or("inf".into(), |k| k.to_string()),
            t.seed.to_string(),
        ];
        row.extend(
            best.x
                .iter()
                .zip(&prep.base.query)
                .map(|(x, q)| (x - q).to_string()),
        );
        row.push((best.y - prep.query_output).to_string());
        w.write_record(&row).map_err(|e| CliError::io("csv", e))?;
    }
    w.into_inner().map_err(|e| CliError::io("csv", e))
}

/// Runs every case for every seed and writes the artifacts into `out`.
pub fn run(prep: &Prepared, out: &Path) -> Result<Summary, CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::io(&format!("cannot create {}", out.display()), e))?;
    let per_seed: Vec<Vec<Trace>> = prep
        .seeds
        .par_iter()
        .map(|&seed| {
            prep.cases
                .iter()
                .map(|case| {
                    run_strategy(
                        prep.strategy,
                        &prep.problem(case),
                        &case.potential,
                        prep.budget,
                        seed,
                        &prep.localopt,
                    )
                    .map_err(CliError::from_core)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    for (seed, traces) in prep.seeds.iter().zip(&per_seed) {
        let mut text = String::new();
        for (i, (case, t)) in prep.cases.iter().zip(traces).enumerate() {
            for record in &t.records {
                let line = TraceLine {
                    case: i,
                    target: target_label(&case.potential),
                    l0_bound: case.l0_bound,
                    record,
                };
                text.push_str(&serde_json::to_string(&line).map_err(|e| CliError::io("trace", e))?);
                text.push('\n');
            }
        }
        write(&out.join(format!("trace_{seed}.jsonl")), text.as_bytes())?;
    }

    let per_case: Vec<Vec<&Trace>> = (0..prep.cases.len())
        .map(|i| per_seed.iter().map(|ts| &ts[i]).collect())
        .collect();
    let summary = Summary {
        strategy: prep.strategy.name().to_string(),
        budget: prep.budget,
        seeds: prep.seeds.clone(),
        rng: "xoshiro256++",
        features: prep.features.clone(),
        query: prep.base.query.clone(),
        query_output: prep.query_output,
        cases: prep
            .cases
            .iter()
            .zip(&per_case)
            .enumerate()
            .map(|(i, (c, ts))| summarise(i, c, ts, prep.budget))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::io("summary", e))?;
    write(&out.join("summary.json"), json.as_bytes())?;
    write(
        &out.join("counterfactuals.csv"),
        &counterfactual_csv(prep, &per_case)?,
    )?;
    Ok(summary)
}
