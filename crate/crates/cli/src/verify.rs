//! Randomized invariant suites and checks of POVM documents.

use std::path::{Path, PathBuf};

use lcc_core::exec::ExecMode;
use lcc_core::io::PovmDocument;
use lcc_core::lcc::compression_report;
use lcc_core::povm;
use lcc_core::suites::{Suite, SuiteSummary};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::table::{number, ResultTable, STATUS_OK};

#[derive(Debug, Clone, PartialEq)]
pub struct InputCheck {
    pub path: PathBuf,
    /// `‖Σ E − I‖`
    pub completeness_residual: f64,
    /// Failure description; `None` when the document passes.
    pub failure: Option<String>,
}

/// Parse failures are config errors; invalid contents are reported as failed
/// checks.
pub fn check_input(path: &Path) -> CliResult<InputCheck> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let doc = PovmDocument::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let checked = |completeness_residual, failure| InputCheck {
        path: path.to_owned(),
        completeness_residual,
        failure,
    };
    let set = match doc.povm() {
        Ok(set) => set,
        Err(e) => return Ok(checked(f64::NAN, Some(e.to_string()))),
    };
    let diagnostics = povm::validate(&set);
    let residual = diagnostics.completeness_residual;
    if !diagnostics.is_valid() {
        return Ok(checked(residual, Some(diagnostics.failures.join("; "))));
    }
    let point = match doc.point() {
        Ok(point) => point,
        Err(e) => return Ok(checked(residual, Some(format!("state: {e}")))),
    };
    if let Some(point) = point {
        if let Err(e) = compression_report(&point, &set) {
            return Ok(checked(residual, Some(e.to_string())));
        }
    }
    Ok(checked(residual, None))
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub suites: Vec<SuiteSummary>,
    pub inputs: Vec<InputCheck>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteSummary::passed) && self.inputs.iter().all(|i| i.failure.is_none())
    }

    pub fn table(&self) -> ResultTable {
        let mut table = ResultTable::new([
            "index",
            "kind",
            "name",
            "trials",
            "checks",
            "skipped",
            "max_residual",
            "status",
        ]);
        for s in &self.suites {
            let status = match s.counterexamples.first() {
                None => STATUS_OK.to_string(),
                Some(c) => format!(
                    "fail: {} counterexamples, first at trial {}: {}",
                    s.counterexamples.len(),
                    c.trial,
                    c.detail
                ),
            };
            table.push(vec![
                table.rows.len().to_string(),
                "suite".into(),
                s.name.clone(),
                s.trials.to_string(),
                s.checks.to_string(),
                s.skipped.to_string(),
                number(s.max_residual),
                status,
            ]);
        }
        for i in &self.inputs {
            let residual = if i.completeness_residual.is_finite() {
                number(i.completeness_residual)
            } else {
                String::new()
            };
            table.push(vec![
                table.rows.len().to_string(),
                "input".into(),
                i.path.display().to_string(),
                String::new(),
                String::new(),
                String::new(),
                residual,
                i.failure.as_ref().map_or(STATUS_OK.to_string(), |f| format!("fail: {f}")),
            ]);
        }
        table
    }
}

/// Run the configured suites (all when none are named) and check every
/// input document.
pub fn verify(config: &ExperimentConfig, trials: Option<usize>, mode: ExecMode) -> CliResult<VerifyOutcome> {
    let section = config.verify.clone().unwrap_or_default();
    let suites = if section.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        section
            .suites
            .iter()
            .map(|name| Suite::from_name(name).map_err(|e| CliError::Config(e.to_string())))
            .collect::<CliResult<Vec<_>>>()?
    };
    let trials = trials.or(section.trials);
    if trials == Some(0) {
        return Err(CliError::Config("trials must be positive".into()));
    }
    let inputs = section
        .inputs
        .iter()
        .map(|p| check_input(p))
        .collect::<CliResult<Vec<_>>>()?;
    let seed = config.seed;
    // Suites parallelize internally over trials.
    let suites = suites.iter().map(|s| s.run(seed, trials, mode)).collect();
    Ok(VerifyOutcome { suites, inputs })
}
