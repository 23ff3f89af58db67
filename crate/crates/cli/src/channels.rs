//! Named compression channels and their evaluation on catalog models.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use lcc_core::io::{read_json, PovmDocument};
use lcc_core::lcc::{build_lcc, compression_report, two_level_lcc, CompressionReport, GaugeSpec};
use lcc_core::models::{meter_lcc_channel, qubit_lcc_channel, wva_channel, CatalogModel, VonNeumannModel};
use lcc_core::povm::PovmSet;
use lcc_core::qfi::StatePoint;
use lcc_core::restricted::{entangled_lcc, restricted_report, weak_entanglement_lcc, EntangledSpec};
use lcc_core::{Error, Result};

use crate::config::{ChannelConfig, SweepVariable};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy)]
pub struct ChannelEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Numeric parameters with defaults.
    pub params: &'static [(&'static str, f64)],
    /// Parameters without a default.
    pub optional: &'static [&'static str],
    /// Compatible model names; empty accepts any model.
    pub models: &'static [&'static str],
    pub needs_file: bool,
}

const CHANNELS: &[ChannelEntry] = &[
    ChannelEntry {
        name: "qubit-lcc",
        description: "|φ_θ*⟩⟨φ_θ*| ⊗ I with θ* = −θ (−θ + 2ε at θ = π/2)",
        params: &[("epsilon", 0.0)],
        optional: &[],
        models: &["von-neumann"],
        needs_file: false,
    },
    ChannelEntry {
        name: "wva",
        description: "weak-value postselection |φ_θ*⟩⟨φ_θ*| ⊗ I, θ* = θ − π + ε unless theta_star is set",
        params: &[("epsilon", 1e-2)],
        optional: &["theta_star"],
        models: &["von-neumann"],
        needs_file: false,
    },
    ChannelEntry {
        name: "meter-lcc",
        description: "I ⊗ (|φ₁⟩⟨φ₁| + ε|φ₀⟩⟨φ₀|) on the meter",
        params: &[("epsilon", 1e-4)],
        optional: &[],
        models: &["von-neumann"],
        needs_file: false,
    },
    ChannelEntry {
        name: "entangled-lcc",
        description: "binary entangled-subspace channel on A, framed at the evaluation point",
        params: &[("epsilon", 1e-4)],
        optional: &[],
        models: &["three-qubit", "bipartite-file"],
        needs_file: false,
    },
    ChannelEntry {
        name: "two-level-lcc",
        description: "closed-form binary channel of the two-level family, built at x_star (default x)",
        params: &[("lambda", 0.25)],
        optional: &["x_star"],
        models: &["two-level"],
        needs_file: false,
    },
    ChannelEntry {
        name: "scaled-rho-lcc",
        description: "E = qρ⊥ + λρ built at x_star (default x)",
        params: &[("lambda", 0.25), ("q", 1.0)],
        optional: &["x_star"],
        models: &[],
        needs_file: false,
    },
    ChannelEntry {
        name: "jenne-gaeta-lcc",
        description: "E = (λ − 1)ρ + I built at x_star (default x)",
        params: &[("lambda", 0.25)],
        optional: &["x_star"],
        models: &[],
        needs_file: false,
    },
    ChannelEntry {
        name: "weak-entanglement",
        description: "product-model channel on A from the x = 0 reduced state",
        params: &[("q", 1.0), ("epsilon", 1e-4)],
        optional: &[],
        models: &["von-neumann", "bipartite-file"],
        needs_file: false,
    },
    ChannelEntry {
        name: "povm-file",
        description: "POVM document on the full space",
        params: &[],
        optional: &[],
        models: &[],
        needs_file: true,
    },
];

pub fn channel_catalog() -> &'static [ChannelEntry] {
    CHANNELS
}

pub fn entry(name: &str) -> CliResult<&'static ChannelEntry> {
    CHANNELS
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CliError::Config(format!("unknown channel `{name}`")))
}

/// Check a channel against the model and sweep before any evaluation.
pub fn validate(channel: &ChannelConfig, model: &str, sweep: Option<SweepVariable>) -> CliResult<()> {
    let e = entry(&channel.name)?;
    if !e.models.is_empty() && !e.models.contains(&model) {
        return Err(CliError::Config(format!(
            "channel `{}` needs one of the models {:?}, not `{model}`",
            e.name, e.models
        )));
    }
    let known = |k: &str| e.params.iter().any(|(p, _)| *p == k) || e.optional.contains(&k);
    if let Some(extra) = channel.params.keys().find(|k| !known(k)) {
        return Err(CliError::Config(format!("unknown parameter `{}.{extra}`", e.name)));
    }
    if e.needs_file != channel.file.is_some() {
        return Err(CliError::Config(if e.needs_file {
            format!("channel `{}` needs a file", e.name)
        } else {
            format!("channel `{}` does not take a file", e.name)
        }));
    }
    if let Some(var @ (SweepVariable::Epsilon | SweepVariable::Lambda)) = sweep {
        if !known(var.name()) {
            return Err(CliError::Config(format!(
                "channel `{}` has no `{}` parameter to sweep",
                e.name,
                var.name()
            )));
        }
    }
    Ok(())
}

struct Params<'a> {
    entry: &'static ChannelEntry,
    values: &'a BTreeMap<String, f64>,
    overrides: &'a [(&'a str, f64)],
}

impl Params<'_> {
    fn get(&self, key: &str) -> Option<f64> {
        self.overrides
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .or_else(|| self.values.get(key).copied())
            .or_else(|| self.entry.params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
    }

    fn require(&self, key: &str) -> f64 {
        self.get(key).expect("catalog default")
    }
}

fn von_neumann(model: &CatalogModel) -> Result<&VonNeumannModel> {
    match model {
        CatalogModel::VonNeumann(m) => Ok(m),
        _ => Err(Error::InvalidParameter("channel needs the von-neumann model".into())),
    }
}

fn bipartite(model: &CatalogModel) -> Result<&lcc_core::restricted::BipartiteModel> {
    model
        .bipartite()
        .ok_or_else(|| Error::InvalidParameter("channel needs a bipartite model".into()))
}

/// Compression report of `channel` on `model` at `x`.
///
/// `overrides` take precedence over the configured parameters.
pub fn evaluate(
    channel: &ChannelConfig,
    model: &CatalogModel,
    x: f64,
    overrides: &[(&str, f64)],
) -> Result<CompressionReport> {
    let entry = CHANNELS
        .iter()
        .find(|e| e.name == channel.name)
        .ok_or_else(|| Error::Unknown {
            kind: "channel",
            name: channel.name.clone(),
        })?;
    let p = Params {
        entry,
        values: &channel.params,
        overrides,
    };
    let family = model.family();
    let full = |povm: &PovmSet| compression_report(&StatePoint::evaluate(family, x)?, povm);
    match entry.name {
        "qubit-lcc" => full(&qubit_lcc_channel(von_neumann(model)?, p.require("epsilon"))),
        "wva" => {
            let m = von_neumann(model)?;
            let theta_star = p
                .get("theta_star")
                .unwrap_or(m.theta - PI + p.require("epsilon"));
            full(&wva_channel(m, theta_star))
        }
        "meter-lcc" => full(&meter_lcc_channel(von_neumann(model)?, p.require("epsilon"))?),
        "entangled-lcc" => {
            let eps = p.require("epsilon");
            let povm = match model {
                CatalogModel::ThreeQubit(m) => m.channel(eps, x)?,
                other => {
                    let b = bipartite(other)?;
                    let n = b
                        .structure()
                        .ok_or_else(|| Error::InvalidParameter("model has no subspace structure".into()))?
                        .phi_a
                        .len();
                    entangled_lcc(b, &EntangledSpec::binary(n, eps, Some(x)))?
                }
            };
            restricted_report(bipartite(model)?, x, &povm)
        }
        "two-level-lcc" => {
            let CatalogModel::TwoLevel(m) = model else {
                return Err(Error::InvalidParameter("channel needs the two-level model".into()));
            };
            let keep = two_level_lcc(p.get("x_star").unwrap_or(x), m.delta, p.require("lambda"));
            full(&PovmSet::binary(keep)?)
        }
        "scaled-rho-lcc" | "jenne-gaeta-lcc" => {
            let lambda = p.require("lambda");
            let gauge = if entry.name == "scaled-rho-lcc" {
                GaugeSpec::scaled_rho(vec![p.require("q")], vec![lambda])
            } else {
                GaugeSpec::jenne_gaeta(lambda)
            };
            let built_at = StatePoint::evaluate(family, p.get("x_star").unwrap_or(x))?;
            full(&build_lcc(&built_at, &gauge)?)
        }
        "weak-entanglement" => {
            let b = bipartite(model)?;
            let channel = weak_entanglement_lcc(b, &[p.require("q")], p.require("epsilon"))?;
            restricted_report(b, x, &channel.povm)
        }
        "povm-file" => {
            let path = channel
                .file
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("povm-file needs a file".into()))?;
            let doc: PovmDocument = read_json(path)?;
            full(&doc.povm()?)
        }
        _ => unreachable!("catalog names are matched above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lcc_core::models::build_model;

    fn channel(name: &str, params: &[(&str, f64)]) -> ChannelConfig {
        ChannelConfig {
            name: name.into(),
            label: None,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            file: None,
        }
    }

    #[test]
    fn validation() {
        assert!(validate(&channel("meter-lcc", &[]), "von-neumann", None).is_ok());
        assert!(validate(&channel("meter-lcc", &[]), "two-level", None).is_err());
        assert!(validate(&channel("meter-lcc", &[("lambda", 1.0)]), "von-neumann", None).is_err());
        assert!(validate(&channel("meter-lcc", &[]), "von-neumann", Some(SweepVariable::Lambda)).is_err());
        assert!(validate(&channel("povm-file", &[]), "two-level", None).is_err());
        assert!(validate(&channel("nope", &[]), "two-level", None).is_err());
        assert!(validate(&channel("scaled-rho-lcc", &[("x_star", 0.1)]), "random-hamiltonian", None).is_ok());
    }

    #[test]
    fn two_level_channels_agree() {
        let model = build_model("two-level", &BTreeMap::new(), None).unwrap();
        let closed = evaluate(&channel("two-level-lcc", &[]), &model, 0.3, &[]).unwrap();
        let gauge = evaluate(&channel("scaled-rho-lcc", &[]), &model, 0.3, &[]).unwrap();
        assert!((closed.gain - 4.0).abs() < 1e-9);
        assert!((closed.gain - gauge.gain).abs() < 1e-9);
        let swept = evaluate(&channel("two-level-lcc", &[]), &model, 0.3, &[("lambda", 0.5)]).unwrap();
        assert!((swept.capacity - 2.0).abs() < 1e-9);
    }

    #[test]
    fn weak_entanglement_on_meter_model() {
        let model = build_model("von-neumann", &BTreeMap::new(), None).unwrap();
        let report = evaluate(&channel("weak-entanglement", &[]), &model, 0.0, &[]).unwrap();
        // ⟨P⟩ = 0 so the predicted capacity is 1/cos²θ.
        assert!((report.capacity - 4.0).abs() < 1e-8);
        assert!(report.gamma.abs() < 1e-9);
    }
}
