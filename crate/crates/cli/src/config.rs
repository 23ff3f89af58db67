//! Experiment configuration documents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    /// Evaluation point when the sweep variable is not `x`.
    #[serde(default)]
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl ChannelConfig {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    X,
    Theta,
    Epsilon,
    Lambda,
    Ratio,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::X => "x",
            SweepVariable::Theta => "theta",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::Lambda => "lambda",
            SweepVariable::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Grid {
    Linear { start: f64, stop: f64, points: usize },
    /// Geometric spacing between positive endpoints.
    Log { start: f64, stop: f64, points: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let values = match *self {
            Grid::Linear { start, stop, points } => spaced(start, stop, points, |a, b, t| a + (b - a) * t)?,
            Grid::Log { start, stop, points } => {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(CliError::Config(format!(
                        "log grid endpoints must be positive, got {start} and {stop}"
                    )));
                }
                let mut v = spaced(start.ln(), stop.ln(), points, |a, b, t| (a + (b - a) * t).exp())?;
                v[0] = start;
                if points > 1 {
                    v[points - 1] = stop;
                }
                v
            }
            Grid::Values(ref v) => v.clone(),
        };
        if values.is_empty() {
            return Err(CliError::Config("sweep grid is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("grid value {bad} is not finite")));
        }
        Ok(values)
    }
}

fn spaced(a: f64, b: f64, n: usize, at: impl Fn(f64, f64, f64) -> f64) -> CliResult<Vec<f64>> {
    match n {
        0 => Err(CliError::Config("sweep grid needs at least one point".into())),
        1 => Ok(vec![at(a, b, 0.0)]),
        _ => Ok((0..n).map(|i| at(a, b, i as f64 / (n - 1) as f64)).collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Gamma,
    OneMinusGamma,
    C,
    Eta,
    PCheck,
    #[serde(rename = "I_rho")]
    IRho,
    #[serde(rename = "I_post")]
    IPost,
    /// Expands to the completeness and coherence residual columns.
    Residuals,
}

impl Output {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Output::Gamma => &["gamma"],
            Output::OneMinusGamma => &["one_minus_gamma"],
            Output::C => &["c"],
            Output::Eta => &["eta"],
            Output::PCheck => &["p_check"],
            Output::IRho => &["I_rho"],
            Output::IPost => &["I_post"],
            Output::Residuals => &["residual_completeness", "residual_coherence"],
        }
    }
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Gamma, Output::C, Output::Eta]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Suite names; empty runs every suite.
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// POVM documents checked alongside the suites.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Read a config and make its relative paths absolute against the
    /// config's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(file) = self.model.as_mut().and_then(|m| m.file.as_mut()) {
            fix(file);
        }
        for file in self.channels.iter_mut().filter_map(|c| c.file.as_mut()) {
            fix(file);
        }
        if let Some(v) = self.verify.as_mut() {
            v.inputs.iter_mut().for_each(fix);
        }
    }

    /// SHA-256 of the key-sorted JSON form.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    /// Output columns in the order requested, each listed once.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut seen = Vec::new();
        for output in &self.outputs {
            for col in output.columns() {
                if !seen.contains(col) {
                    seen.push(*col);
                }
            }
        }
        seen
    }
}
