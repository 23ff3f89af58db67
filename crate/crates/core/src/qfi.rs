//! Quantum Fisher information of pure parametric states and its per-outcome
//! decomposition under a generalized measurement.
//!
//! Every per-outcome quantity is a function of three scalars: the outcome
//! probability `p = ⟨ψ|E|ψ⟩`, the cross term `⟨∂⊥ψ|E|ψ⟩` and the projected
//! weight `⟨∂⊥ψ|E|∂⊥ψ⟩`. [`OutcomeTerms`] caches them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Outcomes with `⟨ψ|E|ψ⟩` below this are classified as null.
pub const NULL_THRESHOLD: f64 = 1e-14;
/// Tolerance on `‖ψ‖² − 1` for every probed state.
pub const NORM_TOL: f64 = 1e-10;
/// Maximum accepted disagreement between Richardson levels.
pub const RICHARDSON_TOL: f64 = 1e-6;

/// A differentiable family `x ↦ |ψ_x⟩` of unit vectors.
///
/// Implementors must use a differentiable global phase. An analytic
/// derivative is optional; without one, [`StatePoint::evaluate`] falls back to
/// Richardson-extrapolated central differences.
pub trait PureStateFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn state(&self, x: f64) -> CVector;

    fn derivative(&self, _x: f64) -> Option<CVector> {
        None
    }
}

impl<T: PureStateFamily + ?Sized> PureStateFamily for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn state(&self, x: f64) -> CVector {
        (**self).state(x)
    }
    fn derivative(&self, x: f64) -> Option<CVector> {
        (**self).derivative(x)
    }
}

impl<T: PureStateFamily + ?Sized> PureStateFamily for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn state(&self, x: f64) -> CVector {
        (**self).state(x)
    }
    fn derivative(&self, x: f64) -> Option<CVector> {
        (**self).derivative(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Analytic when the family provides it, finite differences otherwise.
    #[default]
    Auto,
    Analytic,
    /// Central difference with one Richardson level. `step` defaults to
    /// `1e-5·max(1, |x|)`.
    FiniteDifference { step: Option<f64> },
}

/// Richardson-extrapolated central difference of `family` at `x`.
pub fn finite_difference<F: PureStateFamily + ?Sized>(
    family: &F,
    x: f64,
    step: Option<f64>,
) -> Result<CVector> {
    let h = step.unwrap_or(1e-5 * x.abs().max(1.0));
    let central = |h: f64| (family.state(x + h) - family.state(x - h)) / linalg::re(2.0 * h);
    let coarse = central(h);
    let fine = central(h / 2.0);
    let extrapolated = (&fine * linalg::re(4.0) - &coarse) / linalg::re(3.0);
    // Second-order one-sided estimates: central stencils are blind to kinks
    // whose one-sided slopes average out.
    let f0 = family.state(x);
    let one_sided = |s: f64| {
        (family.state(x + s * h) * linalg::re(4.0)
            - family.state(x + 2.0 * s * h)
            - &f0 * linalg::re(3.0))
            / linalg::re(2.0 * s * h)
    };
    let scale = extrapolated.norm().max(1.0);
    let disagreement = ((&extrapolated - &fine).norm() / scale)
        .max((one_sided(1.0) - one_sided(-1.0)).norm() / scale);
    if !disagreement.is_finite() || disagreement > RICHARDSON_TOL {
        return Err(Error::DerivativeQuality { x, disagreement });
    }
    Ok(extrapolated)
}

/// A family evaluated at one parameter value.
#[derive(Debug, Clone)]
pub struct StatePoint {
    pub x: f64,
    pub psi: CVector,
    pub dpsi: CVector,
    /// `|∂⊥ψ⟩ = |∂ψ⟩ − ⟨ψ|∂ψ⟩|ψ⟩`.
    pub dperp: CVector,
    /// `g = ⟨∂⊥ψ|∂⊥ψ⟩`.
    pub g: f64,
}

impl StatePoint {
    pub fn evaluate<F: PureStateFamily + ?Sized>(family: &F, x: f64) -> Result<Self> {
        Self::evaluate_with(family, x, DerivativeMode::Auto)
    }

    pub fn evaluate_with<F: PureStateFamily + ?Sized>(
        family: &F,
        x: f64,
        mode: DerivativeMode,
    ) -> Result<Self> {
        let psi = family.state(x);
        let dpsi = match mode {
            DerivativeMode::Auto => match family.derivative(x) {
                Some(d) => d,
                None => finite_difference(family, x, None)?,
            },
            DerivativeMode::Analytic => family.derivative(x).ok_or_else(|| {
                Error::InvalidParameter("family has no analytic derivative".into())
            })?,
            DerivativeMode::FiniteDifference { step } => finite_difference(family, x, step)?,
        };
        Self::from_vectors(x, psi, dpsi)
    }

    pub fn from_vectors(x: f64, psi: CVector, dpsi: CVector) -> Result<Self> {
        if psi.len() != dpsi.len() {
            return Err(Error::DimensionMismatch {
                expected: psi.len(),
                found: dpsi.len(),
            });
        }
        let deviation = psi.norm_squared() - 1.0;
        if !deviation.is_finite() || deviation.abs() > NORM_TOL {
            return Err(Error::NotNormalized { x, deviation });
        }
        let mut dperp = &dpsi - &psi * linalg::inner(&psi, &dpsi);
        // second pass removes any residual overlap left by rounding
        let residual = linalg::inner(&psi, &dperp);
        dperp -= &psi * residual;
        let g = dperp.norm_squared();
        Ok(Self {
            x,
            psi,
            dpsi,
            dperp,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.psi.len()
    }

    /// `I(ρ_x) = 4g`.
    pub fn qfi(&self) -> f64 {
        4.0 * self.g
    }

    pub fn rho(&self) -> CMatrix {
        linalg::projector(&self.psi)
    }

    /// `∂ρ = |∂ψ⟩⟨ψ| + |ψ⟩⟨∂ψ|`.
    pub fn drho(&self) -> CMatrix {
        linalg::outer(&self.dpsi, &self.psi) + linalg::outer(&self.psi, &self.dpsi)
    }

    /// Normalized `|ψ⊥⟩ = |∂⊥ψ⟩/√g`, absent at stationary points.
    pub fn psi_perp(&self) -> Option<CVector> {
        (self.g > NULL_THRESHOLD).then(|| &self.dperp / linalg::re(self.g.sqrt()))
    }

    /// `ρ⊥ = |ψ⊥⟩⟨ψ⊥|`.
    pub fn rho_perp(&self) -> Result<CMatrix> {
        self.psi_perp()
            .map(|v| linalg::projector(&v))
            .ok_or(Error::StationaryPoint { g: self.g })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regular,
    Null,
}

/// The three scalars from which all per-outcome QFIs follow.
#[derive(Debug, Clone, Copy)]
pub struct OutcomeTerms {
    /// `⟨ψ|E|ψ⟩`
    pub probability: f64,
    /// `⟨∂⊥ψ|E|ψ⟩`
    pub cross: Complex64,
    /// `⟨∂⊥ψ|E|∂⊥ψ⟩`
    pub perp_weight: f64,
}

impl OutcomeTerms {
    /// Assumes `element` is PSD; callers that cannot guarantee this should go
    /// through the checked functions below.
    pub fn new(point: &StatePoint, element: &CMatrix) -> Self {
        let e_psi = element * &point.psi;
        Self {
            probability: linalg::inner(&point.psi, &e_psi).re,
            cross: linalg::inner(&point.dperp, &e_psi),
            perp_weight: linalg::sandwich(&point.dperp, element, &point.dperp).re,
        }
    }

    pub fn classification(&self) -> Classification {
        if self.probability < NULL_THRESHOLD {
            Classification::Null
        } else {
            Classification::Regular
        }
    }

    /// `I_ω(ρ) = 4⟨∂⊥ψ|E|∂⊥ψ⟩`.
    pub fn outcome_qfi(&self) -> f64 {
        4.0 * self.perp_weight
    }

    /// Classical Fisher information of the outcome; for null outcomes the
    /// limiting value `I_ω(ρ)` is returned.
    pub fn classical_fi(&self) -> f64 {
        match self.classification() {
            Classification::Null => self.outcome_qfi(),
            Classification::Regular => 4.0 * self.cross.re * self.cross.re / self.probability,
        }
    }

    /// QFI of the normalized post-measurement state; zero for null outcomes.
    pub fn postselected_qfi(&self) -> f64 {
        match self.classification() {
            Classification::Null => 0.0,
            Classification::Regular => {
                let p = self.probability;
                let value = 4.0 * (self.perp_weight * p - self.cross.norm_sqr()) / (p * p);
                value.max(0.0)
            }
        }
    }

    /// `I_ω(σ^SA) = I_ω(ρ) − 4(Im⟨∂⊥ψ|E|ψ⟩)²/p`, evaluated directly.
    pub fn joint_qfi(&self) -> f64 {
        match self.classification() {
            Classification::Null => self.outcome_qfi(),
            Classification::Regular => {
                self.outcome_qfi() - 4.0 * self.cross.im * self.cross.im / self.probability
            }
        }
    }
}

fn check_operator(point: &StatePoint, element: &CMatrix) -> Result<()> {
    if element.nrows() != point.dim() || element.ncols() != point.dim() {
        return Err(Error::DimensionMismatch {
            expected: point.dim(),
            found: element.nrows(),
        });
    }
    let min = linalg::min_eigenvalue(element)?;
    if min < -linalg::PSD_FLOOR * element.norm().max(1.0) {
        return Err(Error::NotPsd { eigenvalue: min });
    }
    Ok(())
}

fn checked_terms(point: &StatePoint, element: &CMatrix) -> Result<OutcomeTerms> {
    check_operator(point, element)?;
    Ok(OutcomeTerms::new(point, element))
}

pub fn perp_derivative(point: &StatePoint) -> &CVector {
    &point.dperp
}

pub fn qfi_pure(point: &StatePoint) -> f64 {
    point.qfi()
}

pub fn outcome_qfi(point: &StatePoint, element: &CMatrix) -> Result<f64> {
    Ok(checked_terms(point, element)?.outcome_qfi())
}

pub fn classical_fi(point: &StatePoint, element: &CMatrix) -> Result<f64> {
    Ok(checked_terms(point, element)?.classical_fi())
}

pub fn postselected_state_qfi(point: &StatePoint, element: &CMatrix) -> Result<f64> {
    Ok(checked_terms(point, element)?.postselected_qfi())
}

pub fn joint_outcome_qfi(point: &StatePoint, element: &CMatrix) -> Result<f64> {
    Ok(checked_terms(point, element)?.joint_qfi())
}

/// `(ρ⊥, |∂⊥ψ⟩⟨ψ|)` expressed through `ρ` and `∂ρ` only:
/// `ρ⊥ = (∂ρ)²/g − ρ` and `|∂⊥ψ⟩⟨ψ| = ½([∂ρ, ρ] + ∂ρ)`.
pub fn rho_perp_identities(point: &StatePoint) -> Result<(CMatrix, CMatrix)> {
    if point.g <= NULL_THRESHOLD {
        return Err(Error::StationaryPoint { g: point.g });
    }
    let rho = point.rho();
    let drho = point.drho();
    let rho_perp = &drho * &drho / linalg::re(point.g) - &rho;
    let cross = (linalg::commutator(&drho, &rho) + &drho) * linalg::re(0.5);
    Ok((rho_perp, cross))
}

/// One row of the per-outcome ledger.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerRow {
    pub label: String,
    pub probability: f64,
    pub classical: f64,
    pub postselected: f64,
    /// `I_cl + p·I_post`
    pub joint: f64,
    pub outcome: f64,
    pub classification: Classification,
}

impl LedgerRow {
    pub fn from_terms(label: &str, terms: &OutcomeTerms) -> Self {
        let classical = terms.classical_fi();
        let postselected = terms.postselected_qfi();
        Self {
            label: label.to_owned(),
            probability: terms.probability,
            classical,
            postselected,
            joint: classical + terms.probability * postselected,
            outcome: terms.outcome_qfi(),
            classification: terms.classification(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QfiLedger {
    pub rows: Vec<LedgerRow>,
}

impl QfiLedger {
    pub fn compute<'a, I>(point: &StatePoint, elements: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a CMatrix)>,
    {
        let rows = elements
            .into_iter()
            .map(|(label, element)| LedgerRow::from_terms(label, &OutcomeTerms::new(point, element)))
            .collect();
        Self { rows }
    }

    pub fn total_probability(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum()
    }

    pub fn row(&self, label: &str) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}
