//! Parameter sweeps that emit one row per grid point and channel.

use std::collections::BTreeMap;

use lcc_core::exec::{par_map, ExecMode};
use lcc_core::lcc::CompressionReport;
use lcc_core::models::{build_model, CatalogModel};

use crate::channels;
use crate::config::{ExperimentConfig, ModelConfig, SweepVariable};
use crate::error::{CliError, CliResult};
use crate::table::{number, ResultTable, STATUS_OK};

/// Checked inputs of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub model: ModelConfig,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// Present when the model does not depend on the sweep value.
    pub fixed: Option<CatalogModel>,
}

impl SweepPlan {
    pub fn new(config: &ExperimentConfig) -> CliResult<Self> {
        let mut model = config
            .model
            .clone()
            .ok_or_else(|| CliError::Config("`run` needs a model".into()))?;
        let sweep = config
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("`run` needs a sweep".into()))?;
        if config.channels.is_empty() {
            return Err(CliError::Config("`run` needs at least one channel".into()));
        }
        if config.outputs.is_empty() {
            return Err(CliError::Config("`run` needs at least one output".into()));
        }
        let grid = sweep.grid.points()?;
        let variable = sweep.variable;
        match (variable, model.name.as_str()) {
            (SweepVariable::Theta, "von-neumann" | "three-qubit") | (SweepVariable::Ratio, "three-qubit") => {}
            (SweepVariable::Theta | SweepVariable::Ratio, name) => {
                return Err(CliError::Config(format!(
                    "model `{name}` has no `{}` parameter to sweep",
                    variable.name()
                )))
            }
            _ => {}
        }
        for channel in &config.channels {
            channels::validate(channel, &model.name, Some(variable))?;
        }
        let mut labels: Vec<&str> = config.channels.iter().map(|c| c.label()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Config(format!("duplicate channel label `{}`", w[0])));
        }
        if model.name == "random-hamiltonian" {
            model
                .params
                .entry("seed".into())
                .or_insert(config.seed as f64);
        }
        // Build once up front so bad model parameters are a config error.
        let probe = match variable {
            SweepVariable::Theta | SweepVariable::Ratio => with_param(&model.params, variable.name(), grid[0]),
            _ => model.params.clone(),
        };
        let built = build(&model, &probe).map_err(|e| CliError::Config(format!("model `{}`: {e}", model.name)))?;
        let fixed = match variable {
            SweepVariable::Theta | SweepVariable::Ratio => None,
            _ => Some(built),
        };
        Ok(Self {
            model,
            variable,
            grid,
            fixed,
        })
    }
}

fn with_param(params: &BTreeMap<String, f64>, key: &str, value: f64) -> BTreeMap<String, f64> {
    let mut p = params.clone();
    p.insert(key.into(), value);
    p
}

fn build(model: &ModelConfig, params: &BTreeMap<String, f64>) -> lcc_core::Result<CatalogModel> {
    build_model(&model.name, params, model.file.as_deref())
}

fn value(report: &CompressionReport, column: &str) -> f64 {
    match column {
        "gamma" => report.gamma,
        "one_minus_gamma" => report.retained_fraction(),
        "c" => report.capacity,
        "eta" => report.gain,
        "p_check" => report.p_retained,
        "I_rho" => report.qfi,
        "I_post" => report.gain * report.qfi,
        "residual_completeness" => report.residuals.completeness,
        "residual_coherence" => report.residuals.coherence,
        _ => unreachable!("columns come from Output::columns"),
    }
}

fn cells(result: lcc_core::Result<CompressionReport>, columns: &[&str]) -> (Vec<String>, String) {
    let blank = || vec![String::new(); columns.len()];
    match result {
        Err(e) => (blank(), format!("error: {e}")),
        Ok(report) => {
            let values: Vec<f64> = columns.iter().map(|c| value(&report, c)).collect();
            match columns.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
                Some((col, v)) => (blank(), format!("error: {col} = {v}")),
                None => (values.into_iter().map(number).collect(), STATUS_OK.into()),
            }
        }
    }
}

/// Evaluate every (grid point, channel) pair; rows are ordered by grid index
/// and then by channel order in the config.
pub fn run(config: &ExperimentConfig, mode: ExecMode) -> CliResult<ResultTable> {
    let plan = SweepPlan::new(config)?;
    let columns = config.columns();
    let variable = plan.variable;
    let mut header = vec!["index", variable.name(), "channel"];
    header.extend(&columns);
    header.push("status");
    let mut table = ResultTable::new(header);

    let indexed: Vec<(usize, f64)> = plan.grid.iter().copied().enumerate().collect();
    let blocks = par_map(mode, &indexed, |&(index, v)| {
        let rebuilt;
        let model = match &plan.fixed {
            Some(m) => Ok(m),
            None => {
                rebuilt = build(&plan.model, &with_param(&plan.model.params, variable.name(), v));
                rebuilt.as_ref().map_err(|e| e.to_string())
            }
        };
        let x = if variable == SweepVariable::X { v } else { config.x };
        let overrides: Vec<(&str, f64)> = match variable {
            SweepVariable::Epsilon | SweepVariable::Lambda => vec![(variable.name(), v)],
            _ => Vec::new(),
        };
        config
            .channels
            .iter()
            .map(|channel| {
                let (values, status) = match model {
                    Ok(m) => cells(channels::evaluate(channel, m, x, &overrides), &columns),
                    Err(ref e) => (vec![String::new(); columns.len()], format!("error: model: {e}")),
                };
                let mut row = vec![index.to_string(), number(v), channel.label().to_string()];
                row.extend(values);
                row.push(status);
                row
            })
            .collect::<Vec<_>>()
    });
    for row in blocks.into_iter().flatten() {
        table.push(row);
    }
    Ok(table)
}
