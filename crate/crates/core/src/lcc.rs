//! Lossless compression channels: construction, verification and metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, re, CMatrix, CVector};
use crate::povm::{self, PovmElement, PovmSet};
use crate::qfi::{Classification, QfiLedger, StatePoint};

/// Tolerance on the gauge conditions and on `Σ q = 1`.
pub const GAUGE_TOL: f64 = 1e-9;
/// `c` must exceed one by this much to count as compression.
pub const EFFICIENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeKind {
    /// `Λ_ω = λ_ω ρ`
    ScaledRho(Vec<f64>),
    /// `Λ = λρ + 𝒫₀`, so `E = (λ − 1)ρ + I`.
    JenneGaeta(f64),
    /// Arbitrary `Λ_ω`, checked against the gauge conditions.
    Custom(Vec<CMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSpec {
    pub kind: GaugeKind,
    pub q: Vec<f64>,
}

impl GaugeSpec {
    pub fn scaled_rho(q: Vec<f64>, lambda: Vec<f64>) -> Self {
        Self {
            kind: GaugeKind::ScaledRho(lambda),
            q,
        }
    }

    /// One retained outcome with `Λ = λρ`.
    pub fn binary(lambda: f64) -> Self {
        Self::scaled_rho(vec![1.0], vec![lambda])
    }

    pub fn jenne_gaeta(lambda: f64) -> Self {
        Self {
            kind: GaugeKind::JenneGaeta(lambda),
            q: vec![1.0],
        }
    }

    pub fn custom(q: Vec<f64>, operators: Vec<CMatrix>) -> Self {
        Self {
            kind: GaugeKind::Custom(operators),
            q,
        }
    }

    pub fn outcomes(&self) -> usize {
        self.q.len()
    }

    fn check_weights(&self) -> Result<()> {
        if self.q.is_empty() {
            return Err(Error::EmptyRetainedSet);
        }
        if let Some(bad) = self.q.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
            return Err(Error::InvalidParameter(format!("weight q = {bad} outside (0, 1]")));
        }
        let total: f64 = self.q.iter().sum();
        if (total - 1.0).abs() > GAUGE_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        let count = match &self.kind {
            GaugeKind::ScaledRho(l) => l.len(),
            GaugeKind::JenneGaeta(_) => 1,
            GaugeKind::Custom(ops) => ops.len(),
        };
        if count != self.q.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {count} gauge operators",
                self.q.len()
            )));
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("λ = {lambda} outside (0, 1)")))
    }
}

fn outcome_label(index: usize, count: usize) -> String {
    if count == 1 {
        "keep".into()
    } else {
        format!("keep_{}", index + 1)
    }
}

/// Gauge operators `Λ_ω` with their `λ_ω = ⟨ψ|Λ_ω|ψ⟩`.
pub fn gauge_operators(point: &StatePoint, gauge: &GaugeSpec) -> Result<Vec<(CMatrix, f64)>> {
    gauge.check_weights()?;
    let rho = point.rho();
    let count = gauge.outcomes();
    match &gauge.kind {
        GaugeKind::ScaledRho(lambdas) => lambdas
            .iter()
            .map(|&l| {
                check_lambda(l)?;
                Ok((&rho * re(l), l))
            })
            .collect(),
        GaugeKind::JenneGaeta(l) => {
            check_lambda(*l)?;
            let rest = linalg::identity(point.dim()) - &rho - point.rho_perp()?;
            Ok(vec![(&rho * re(*l) + rest, *l)])
        }
        GaugeKind::Custom(ops) => {
            let perp = point.psi_perp().ok_or(Error::StationaryPoint { g: point.g })?;
            ops.iter()
                .enumerate()
                .map(|(i, op)| {
                    if op.nrows() != point.dim() || op.ncols() != point.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: point.dim(),
                            found: op.nrows(),
                        });
                    }
                    let perp_perp = linalg::sandwich(&perp, op, &perp).norm();
                    let perp_psi = linalg::sandwich(&perp, op, &point.psi)
                        .norm()
                        .max(linalg::sandwich(&point.psi, op, &perp).norm());
                    let lambda_c = linalg::sandwich(&point.psi, op, &point.psi);
                    let lambda = lambda_c.re;
                    if perp_perp > GAUGE_TOL
                        || perp_psi > GAUGE_TOL
                        || lambda_c.im.abs() > GAUGE_TOL
                        || !(lambda > GAUGE_TOL && lambda < 1.0 - GAUGE_TOL)
                    {
                        return Err(Error::GaugeViolation {
                            label: outcome_label(i, count),
                            perp_perp,
                            perp_psi,
                            lambda,
                        });
                    }
                    Ok((op.clone(), lambda))
                })
                .collect()
        }
    }
}

/// `E_ω = q_ω ρ⊥ + Λ_ω` for the retained outcomes plus the remainder
/// `I − Σ E_ω` as a single discarded element.
pub fn build_lcc(point: &StatePoint, gauge: &GaugeSpec) -> Result<PovmSet> {
    let rho_perp = point.rho_perp()?;
    let gauges = gauge_operators(point, gauge)?;
    let count = gauges.len();
    let dim = point.dim();
    let mut elements = Vec::with_capacity(count + 1);
    let mut total = CMatrix::zeros(dim, dim);
    for (i, ((lambda_op, _), q)) in gauges.into_iter().zip(&gauge.q).enumerate() {
        let e = &rho_perp * re(*q) + lambda_op;
        let label = outcome_label(i, count);
        require_psd(&label, &e)?;
        total += &e;
        elements.push(PovmElement { label, operator: e });
    }
    let discard = linalg::identity(dim) - total;
    require_psd("discard", &discard)?;
    elements.push(PovmElement {
        label: "discard".into(),
        operator: discard,
    });
    let retained: Vec<String> = (0..count).map(|i| outcome_label(i, count)).collect();
    PovmSet::new(elements, retained)
}

fn require_psd(label: &str, m: &CMatrix) -> Result<()> {
    let scale = m.norm().max(1.0);
    let min = linalg::min_eigenvalue(m)?;
    if min < -linalg::PSD_FLOOR * scale {
        return Err(Error::NonPositiveElement {
            label: label.into(),
            min_eigenvalue: min,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LccResiduals {
    /// `|⟨ψ⊥|Σ_✓ E|ψ⊥⟩ − 1|`
    pub completeness: f64,
    /// `max_✓ |⟨∂⊥ψ|E_ω|ψ⟩|`
    pub coherence: f64,
}

impl LccResiduals {
    pub fn max(&self) -> f64 {
        self.completeness.max(self.coherence)
    }
}

pub fn verify_lcc(point: &StatePoint, povm: &PovmSet) -> Result<LccResiduals> {
    if povm.dim() != point.dim() {
        return Err(Error::DimensionMismatch {
            expected: point.dim(),
            found: povm.dim(),
        });
    }
    let perp = point.psi_perp().ok_or(Error::StationaryPoint { g: point.g })?;
    let sum = povm.retained_sum();
    let completeness = (linalg::sandwich(&perp, &sum, &perp) - re(1.0)).norm();
    let coherence = povm
        .retained()
        .map(|e| linalg::sandwich(&point.dperp, &e.operator, &point.psi).norm())
        .fold(0.0, f64::max);
    Ok(LccResiduals {
        completeness,
        coherence,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressionReport {
    pub gamma: f64,
    #[serde(rename = "c")]
    pub capacity: f64,
    #[serde(rename = "eta")]
    pub gain: f64,
    #[serde(rename = "L")]
    pub retained_outcomes: usize,
    /// `Σ_✓ p(ω|x)`
    pub p_retained: f64,
    /// `I(ρ)`
    pub qfi: f64,
    pub efficient: bool,
    #[serde(rename = "residuals")]
    pub residuals: LccResiduals,
    pub ledger: QfiLedger,
}

impl CompressionReport {
    /// `Σ_✓ p·I(σ) / I(ρ) = 1 − γ`
    pub fn retained_fraction(&self) -> f64 {
        1.0 - self.gamma
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Loss, capacity and gain of `povm` evaluated on `point`.
pub fn compression_report(point: &StatePoint, povm: &PovmSet) -> Result<CompressionReport> {
    if povm.dim() != point.dim() {
        return Err(Error::DimensionMismatch {
            expected: point.dim(),
            found: povm.dim(),
        });
    }
    povm::validate(povm).into_result()?;
    if povm.retained_labels().is_empty() {
        return Err(Error::EmptyRetainedSet);
    }
    if point.g <= crate::qfi::NULL_THRESHOLD {
        return Err(Error::StationaryPoint { g: point.g });
    }
    let ledger = QfiLedger::compute(point, povm.labeled());
    assemble_report(
        ledger,
        point.qfi(),
        povm.retained_labels().len(),
        |label| povm.is_retained(label),
        verify_lcc(point, povm)?,
    )
}

pub(crate) fn assemble_report(
    ledger: QfiLedger,
    qfi: f64,
    retained_outcomes: usize,
    is_retained: impl Fn(&str) -> bool,
    residuals: LccResiduals,
) -> Result<CompressionReport> {
    let mut p_retained = 0.0;
    let mut weighted = 0.0;
    let mut post = 0.0;
    for row in ledger.rows.iter().filter(|r| is_retained(&r.label)) {
        if row.classification == Classification::Null {
            return Err(Error::NullRetainedOutcome {
                label: row.label.clone(),
                probability: row.probability,
            });
        }
        p_retained += row.probability;
        weighted += row.probability * row.postselected;
        post += row.postselected;
    }
    let capacity = 1.0 / p_retained;
    Ok(CompressionReport {
        gamma: 1.0 - weighted / qfi,
        capacity,
        gain: post / qfi,
        retained_outcomes,
        p_retained,
        qfi,
        efficient: capacity.is_finite() && capacity > 1.0 + EFFICIENCY_TOL,
        residuals,
        ledger,
    })
}

/// Exact binary LCC for `ψ_x = cos(xΔ/2)|0⟩ + i sin(xΔ/2)|1⟩`.
pub fn two_level_lcc(x: f64, delta: f64, lambda: f64) -> CMatrix {
    let h = x * delta / 2.0;
    let (s, co) = h.sin_cos();
    let off = (1.0 - lambda) * (x * delta).sin() / 2.0;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            re(lambda * co * co + s * s),
            c(0.0, off),
            c(0.0, -off),
            re(co * co + lambda * s * s),
        ],
    )
}

/// `K = √q ρ⊥ + √λ ρ` for the scaled-ρ gauge.
pub fn sensitivity_kraus(point: &StatePoint, q: f64, lambda: f64) -> Result<CMatrix> {
    Ok(point.rho_perp()? * re(q.sqrt()) + point.rho() * re(lambda.sqrt()))
}

/// `∂ₓ(K|ψ⟩/√p) = |∂ψ⟩ + (√(q/λ) − 1)√g |ψ⊥⟩`.
pub fn postselected_sensitivity(point: &StatePoint, q: f64, lambda: f64) -> Result<CVector> {
    check_lambda(lambda)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("weight q = {q} outside (0, 1]")));
    }
    let perp = point.psi_perp().ok_or(Error::StationaryPoint { g: point.g })?;
    let factor = ((q / lambda).sqrt() - 1.0) * point.g.sqrt();
    Ok(&point.dpsi + perp * re(factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::{self, PureStateFamily};
    use approx::assert_relative_eq;

    struct TwoLevel(f64);

    impl PureStateFamily for TwoLevel {
        fn dim(&self) -> usize {
            2
        }
        fn state(&self, x: f64) -> CVector {
            let h = x * self.0 / 2.0;
            CVector::from_vec(vec![re(h.cos()), c(0.0, h.sin())])
        }
        fn derivative(&self, x: f64) -> Option<CVector> {
            let h = x * self.0 / 2.0;
            let k = self.0 / 2.0;
            Some(CVector::from_vec(vec![re(-k * h.sin()), c(0.0, k * h.cos())]))
        }
    }

    /// `(cos x, 0.6i sin x, 0.8 sin x)`, differentiated numerically.
    struct ThreeLevel;

    impl PureStateFamily for ThreeLevel {
        fn dim(&self) -> usize {
            3
        }
        fn state(&self, x: f64) -> CVector {
            let (a, b) = (x.cos(), x.sin());
            CVector::from_vec(vec![re(a), c(0.0, b * 0.6), re(b * 0.8)])
        }
    }

    #[test]
    fn two_level_matches_construction() {
        let (x, delta, lambda) = (0.7, 1.3, 0.2);
        let pt = StatePoint::evaluate(&TwoLevel(delta), x).unwrap();
        let povm = build_lcc(&pt, &GaugeSpec::binary(lambda)).unwrap();
        let built = &povm.element("keep").unwrap().operator;
        assert!((built - two_level_lcc(x, delta, lambda)).norm() < 1e-12);
    }

    #[test]
    fn two_level_limits() {
        let e = two_level_lcc(0.0, 1.0, 0.3);
        assert!((e - CMatrix::from_row_slice(2, 2, &[re(0.3), re(0.0), re(0.0), re(1.0)])).norm() < 1e-15);
        assert!((two_level_lcc(0.4, 1.1, 1.0) - linalg::identity(2)).norm() < 1e-15);
    }

    #[test]
    fn two_level_postselected_gain() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.3).unwrap();
        let e = two_level_lcc(0.3, 1.0, 0.25);
        let post = qfi::postselected_state_qfi(&pt, &e).unwrap();
        assert_relative_eq!(post, 4.0 * pt.qfi(), max_relative = 1e-12);
        let report = compression_report(&pt, &PovmSet::binary(e).unwrap()).unwrap();
        assert!(report.gamma.abs() <= 1e-9);
        assert_relative_eq!(report.capacity, 4.0, max_relative = 1e-12);
        assert_relative_eq!(report.gain, 4.0, max_relative = 1e-12);
        assert!(report.efficient);
        assert!(report.residuals.max() < 1e-12);
    }

    #[test]
    fn retaining_everything_is_not_compression() {
        let pt = StatePoint::evaluate(&ThreeLevel, 0.4).unwrap();
        let rho = pt.rho();
        let rho_perp = pt.rho_perp().unwrap();
        let rest = linalg::identity(3) - &rho - &rho_perp;
        let povm = PovmSet::new(
            vec![
                PovmElement { label: "psi".into(), operator: rho },
                PovmElement { label: "perp".into(), operator: rho_perp },
                PovmElement { label: "rest".into(), operator: rest },
            ],
            ["psi", "rest"],
        )
        .unwrap();
        assert!(matches!(
            compression_report(&pt, &povm),
            Err(Error::NullRetainedOutcome { .. })
        ));
        let all = PovmSet::new(povm.elements().to_vec(), ["psi"]).unwrap();
        let report = compression_report(&pt, &all).unwrap();
        assert_relative_eq!(report.capacity, 1.0, max_relative = 1e-12);
        assert!(!report.efficient);

        let identity = PovmSet::new(
            vec![PovmElement { label: "all".into(), operator: linalg::identity(3) }],
            ["all"],
        )
        .unwrap();
        let report = compression_report(&pt, &identity).unwrap();
        assert!(report.residuals.completeness < 1e-12);
        assert!(!report.efficient);
        assert!(report.gamma.abs() < 1e-12);
    }

    #[test]
    fn scaled_rho_metrics() {
        let pt = StatePoint::evaluate(&ThreeLevel, 0.9).unwrap();
        let eps = 1e-3;
        let single = compression_report(&pt, &build_lcc(&pt, &GaugeSpec::binary(eps)).unwrap()).unwrap();
        assert_relative_eq!(single.capacity, 1.0 / eps, max_relative = 1e-9);
        assert_relative_eq!(single.gain, 1.0 / eps, max_relative = 1e-9);
        assert!(single.gamma.abs() < 1e-9);

        let pair = GaugeSpec::scaled_rho(vec![0.5, 0.5], vec![eps, eps]);
        let povm = build_lcc(&pt, &pair).unwrap();
        let report = compression_report(&pt, &povm).unwrap();
        assert_eq!(report.retained_outcomes, 2);
        assert_relative_eq!(report.gain, 1.0 / eps, max_relative = 1e-9);
        assert_relative_eq!(report.capacity, 1.0 / (2.0 * eps), max_relative = 1e-9);
        assert_relative_eq!(report.gain, 2.0 * report.capacity, max_relative = 1e-9);
    }

    #[test]
    fn jenne_gaeta_form() {
        let pt = StatePoint::evaluate(&ThreeLevel, 0.2).unwrap();
        let povm = build_lcc(&pt, &GaugeSpec::jenne_gaeta(0.1)).unwrap();
        let expected = pt.rho() * re(0.1 - 1.0) + linalg::identity(3);
        assert!((&povm.element("keep").unwrap().operator - expected).norm() < 1e-12);
    }

    #[test]
    fn custom_gauge_checks() {
        let pt = StatePoint::evaluate(&ThreeLevel, 0.2).unwrap();
        let rest = linalg::identity(3) - pt.rho() - pt.rho_perp().unwrap();
        let ok = GaugeSpec::custom(vec![1.0], vec![pt.rho() * re(0.3) + &rest * re(0.5)]);
        let report = compression_report(&pt, &build_lcc(&pt, &ok).unwrap()).unwrap();
        assert!(report.gamma.abs() < 1e-9);
        assert_relative_eq!(report.capacity, 1.0 / 0.3, max_relative = 1e-9);

        let bad = GaugeSpec::custom(vec![1.0], vec![pt.rho_perp().unwrap() * re(0.1) + pt.rho() * re(0.3)]);
        assert!(matches!(build_lcc(&pt, &bad), Err(Error::GaugeViolation { .. })));

        // Λ = λρ + 2·rest makes the discarded remainder negative
        let heavy = GaugeSpec::custom(vec![1.0], vec![pt.rho() * re(0.3) + &rest * re(2.0)]);
        assert!(matches!(
            build_lcc(&pt, &heavy),
            Err(Error::NonPositiveElement { .. })
        ));

        let overfull = GaugeSpec::scaled_rho(vec![0.5, 0.5], vec![0.6, 0.6]);
        assert!(matches!(
            build_lcc(&pt, &overfull),
            Err(Error::NonPositiveElement { .. })
        ));
    }

    #[test]
    fn weights_are_validated() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.1).unwrap();
        assert!(build_lcc(&pt, &GaugeSpec::scaled_rho(vec![0.5, 0.4], vec![0.1, 0.1])).is_err());
        assert!(build_lcc(&pt, &GaugeSpec::scaled_rho(vec![1.0], vec![1.0])).is_err());
        assert!(build_lcc(&pt, &GaugeSpec::scaled_rho(vec![1.0], vec![0.1, 0.2])).is_err());
    }

    #[test]
    fn generic_projective_measurement_is_not_lossless() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.5).unwrap();
        let povm = PovmSet::binary(linalg::projector(&linalg::basis(2, 0))).unwrap();
        let r = verify_lcc(&pt, &povm).unwrap();
        assert!(r.coherence > 1e-3);
    }

    #[test]
    fn sensitivity_without_amplification() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.5).unwrap();
        let v = postselected_sensitivity(&pt, 0.3, 0.3).unwrap();
        assert!((v - &pt.dpsi).norm() < 1e-15);
    }

    #[test]
    fn report_serializes_flat() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.3).unwrap();
        let report = compression_report(&pt, &build_lcc(&pt, &GaugeSpec::binary(0.5)).unwrap()).unwrap();
        let value: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        for key in ["gamma", "c", "eta", "L", "residuals", "ledger"] {
            assert!(value.get(key).is_some(), "{key}");
        }
    }
}
