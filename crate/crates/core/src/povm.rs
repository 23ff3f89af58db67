//! POVMs, Kraus channels and the five per-outcome saturation conditions.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::qfi::{Classification, OutcomeTerms, StatePoint, NULL_THRESHOLD};

/// Completeness tolerance `‖Σ E − I‖`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Default threshold on normalized condition residuals.
pub const SATURATION_TOL: f64 = 1e-9;
/// Offset in the residual normalization `√(g·p + ε₀)`.
pub const NORMALIZATION_EPS: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub label: String,
    pub operator: CMatrix,
}

/// Labeled POVM elements with a retained/discarded partition.
///
/// Construction only checks structure (square matrices of one dimension,
/// unique labels, retained labels that exist). Positivity and completeness
/// are reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSet {
    dim: usize,
    elements: Vec<PovmElement>,
    retained: BTreeSet<String>,
}

impl PovmSet {
    pub fn new<S: AsRef<str>>(
        elements: Vec<PovmElement>,
        retained: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.operator.nrows())
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut labels = BTreeSet::new();
        for e in &elements {
            if e.operator.nrows() != dim || e.operator.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.operator.nrows().max(e.operator.ncols()),
                });
            }
            if !labels.insert(e.label.clone()) {
                return Err(Error::InvalidPovm(format!("duplicate label `{}`", e.label)));
            }
        }
        let retained: BTreeSet<String> = retained
            .into_iter()
            .map(|s| s.as_ref().to_owned())
            .collect();
        if let Some(missing) = retained.iter().find(|l| !labels.contains(*l)) {
            return Err(Error::InvalidPovm(format!(
                "retained label `{missing}` has no element"
            )));
        }
        Ok(Self {
            dim,
            elements,
            retained,
        })
    }

    /// Single-outcome-retained POVM `{E_keep, I − E_keep}`.
    pub fn binary(keep: CMatrix) -> Result<Self> {
        let dim = keep.nrows();
        let discard = linalg::identity(dim) - &keep;
        Self::new(
            vec![
                PovmElement {
                    label: "keep".into(),
                    operator: keep,
                },
                PovmElement {
                    label: "discard".into(),
                    operator: discard,
                },
            ],
            ["keep"],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn element(&self, label: &str) -> Option<&PovmElement> {
        self.elements.iter().find(|e| e.label == label)
    }

    pub fn retained_labels(&self) -> &BTreeSet<String> {
        &self.retained
    }

    pub fn is_retained(&self, label: &str) -> bool {
        self.retained.contains(label)
    }

    /// Retained elements in element order.
    pub fn retained(&self) -> impl Iterator<Item = &PovmElement> {
        self.elements.iter().filter(|e| self.retained.contains(&e.label))
    }

    pub fn discarded(&self) -> impl Iterator<Item = &PovmElement> {
        self.elements.iter().filter(|e| !self.retained.contains(&e.label))
    }

    pub fn retained_sum(&self) -> CMatrix {
        self.retained()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + &e.operator)
    }

    pub fn labeled(&self) -> impl Iterator<Item = (&str, &CMatrix)> {
        self.elements.iter().map(|e| (e.label.as_str(), &e.operator))
    }

    /// `E ⊗ I_B` for every element.
    pub fn lift(&self, d_b: usize) -> PovmSet {
        let id = linalg::identity(d_b);
        PovmSet {
            dim: self.dim * d_b,
            elements: self
                .elements
                .iter()
                .map(|e| PovmElement {
                    label: e.label.clone(),
                    operator: linalg::kron(&e.operator, &id),
                })
                .collect(),
            retained: self.retained.clone(),
        }
    }

    /// Conjugate every element: `U E U†`.
    pub fn conjugated(&self, u: &CMatrix) -> PovmSet {
        PovmSet {
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|e| PovmElement {
                    label: e.label.clone(),
                    operator: u * &e.operator * u.adjoint(),
                })
                .collect(),
            retained: self.retained.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementDiagnostic {
    pub label: String,
    pub min_eigenvalue: f64,
    pub hermiticity_residual: f64,
    pub psd: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmDiagnostics {
    pub elements: Vec<ElementDiagnostic>,
    /// `‖Σ E − I‖` (Frobenius).
    pub completeness_residual: f64,
    pub failures: Vec<String>,
}

impl PovmDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidPovm(self.failures.join("; ")))
        }
    }
}

pub fn validate(povm: &PovmSet) -> PovmDiagnostics {
    let mut failures = Vec::new();
    let mut elements = Vec::with_capacity(povm.elements.len());
    for e in &povm.elements {
        let herm = linalg::hermiticity_residual(&e.operator);
        let scale = e.operator.norm().max(1.0);
        let (min_eigenvalue, psd) = match linalg::min_eigenvalue(&e.operator) {
            Ok(min) => (min, min >= -linalg::PSD_FLOOR * scale),
            Err(_) => (f64::NAN, false),
        };
        if herm > linalg::HERMITIAN_TOL * scale {
            failures.push(format!("`{}` is not Hermitian (residual {herm:.3e})", e.label));
        } else if !psd {
            failures.push(format!(
                "`{}` is not PSD (min eigenvalue {min_eigenvalue:.3e})",
                e.label
            ));
        }
        elements.push(ElementDiagnostic {
            label: e.label.clone(),
            min_eigenvalue,
            hermiticity_residual: herm,
            psd,
        });
    }
    let total = povm
        .elements
        .iter()
        .fold(CMatrix::zeros(povm.dim, povm.dim), |acc, e| acc + &e.operator);
    let completeness_residual = (total - linalg::identity(povm.dim)).norm();
    if completeness_residual > COMPLETENESS_TOL {
        failures.push(format!(
            "elements do not sum to identity (residual {completeness_residual:.3e})"
        ));
    }
    PovmDiagnostics {
        elements,
        completeness_residual,
        failures,
    }
}

/// Measurement operators `K_ω` with `K_ω†K_ω = E_ω`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<(String, CMatrix)>,
}

impl KrausChannel {
    /// Accepts any gauge `K = U√E`; completeness is checked.
    pub fn new(operators: Vec<(String, CMatrix)>) -> Result<Self> {
        let channel = Self { operators };
        let residual = channel.completeness_residual();
        if !(residual <= COMPLETENESS_TOL) {
            return Err(Error::InvalidPovm(format!(
                "Σ K†K deviates from identity by {residual:.3e}"
            )));
        }
        Ok(channel)
    }

    pub fn operators(&self) -> &[(String, CMatrix)] {
        &self.operators
    }

    pub fn completeness_residual(&self) -> f64 {
        let Some(dim) = self.operators.first().map(|(_, k)| k.ncols()) else {
            return f64::INFINITY;
        };
        let total = self
            .operators
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, (_, k)| acc + k.adjoint() * k);
        (total - linalg::identity(dim)).norm()
    }

    /// `E_ω = K_ω†K_ω` with the given retained labels.
    pub fn povm<S: AsRef<str>>(&self, retained: impl IntoIterator<Item = S>) -> Result<PovmSet> {
        PovmSet::new(
            self.operators
                .iter()
                .map(|(label, k)| PovmElement {
                    label: label.clone(),
                    operator: k.adjoint() * k,
                })
                .collect(),
            retained,
        )
    }
}

/// Canonical Kraus operators `K_ω = √E_ω`.
pub fn kraus_from(povm: &PovmSet) -> Result<KrausChannel> {
    validate(povm).into_result()?;
    let operators = povm
        .elements
        .iter()
        .map(|e| Ok((e.label.clone(), linalg::psd_sqrt(&e.operator)?)))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(operators)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classification: Classification,
    pub probability: f64,
    /// `√E|∂⊥ψ⟩ = 0`: the outcome carries no QFI at all.
    pub trivial: bool,
}

pub fn classify(element: &CMatrix, point: &StatePoint) -> ClassificationReport {
    let terms = OutcomeTerms::new(point, element);
    ClassificationReport {
        classification: terms.classification(),
        probability: terms.probability,
        trivial: terms.perp_weight <= NULL_THRESHOLD * point.g.max(f64::MIN_POSITIVE),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `Im⟨∂⊥ψ|E|ψ⟩ = 0` ⟺ `I_ω(σ^SA) = I_ω(ρ)`
    T1,
    /// `√E|∂⊥ψ⟩ = c√E|ψ⟩, c ∈ ℂ` ⟺ `I(σ_{x|ω}) = 0`
    T2,
    /// `Re⟨∂⊥ψ|E|ψ⟩ = 0` ⟺ `I_cl = 0`
    T3,
    /// `√E|∂⊥ψ⟩ ⊥ √E|ψ⟩` ⟺ `p·I(σ_{x|ω}) = I_ω(ρ)`
    T4,
    /// `√E|∂⊥ψ⟩ = c√E|ψ⟩, c ∈ ℝ` ⟺ `I_cl = I_ω(ρ)`
    T5,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::T1,
        Condition::T2,
        Condition::T3,
        Condition::T4,
        Condition::T5,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Satisfied,
    /// `√E` annihilates both `|ψ⟩` and `|∂⊥ψ⟩`.
    SatisfiedDegenerate,
    Violated,
}

impl ConditionStatus {
    pub fn holds(self) -> bool {
        !matches!(self, ConditionStatus::Violated)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub raw: f64,
    /// `raw / √(g·p + ε₀)`
    pub normalized: f64,
    pub status: ConditionStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationReport {
    pub classification: Classification,
    pub trivial: bool,
    pub checks: Vec<ConditionCheck>,
}

impl SaturationReport {
    pub fn check(&self, condition: Condition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|c| c.condition == condition)
            .expect("report holds every condition")
    }
}

/// Vectors `a = √E|∂⊥ψ⟩`, `b = √E|ψ⟩` shared by every check.
struct SqrtActions {
    a: CVector,
    b: CVector,
    cross: Complex64,
    probability: f64,
    degenerate: bool,
}

impl SqrtActions {
    fn new(element: &CMatrix, point: &StatePoint) -> Result<Self> {
        if element.nrows() != point.dim() {
            return Err(Error::DimensionMismatch {
                expected: point.dim(),
                found: element.nrows(),
            });
        }
        let root = linalg::psd_sqrt(element)?;
        let a = &root * &point.dperp;
        let b = &root * &point.psi;
        let probability = b.norm_squared();
        let degenerate = probability < NULL_THRESHOLD
            && a.norm_squared() <= NULL_THRESHOLD * point.g.max(f64::MIN_POSITIVE);
        Ok(Self {
            cross: linalg::inner(&a, &b),
            a,
            b,
            probability,
            degenerate,
        })
    }

    /// Component of `a` outside `span{b}` (complex) or `ℝ·b` (real).
    fn off_line(&self, real_only: bool) -> f64 {
        if self.probability < NULL_THRESHOLD {
            return self.a.norm();
        }
        let coeff = linalg::inner(&self.b, &self.a) / self.probability;
        let coeff = if real_only {
            Complex64::new(coeff.re, 0.0)
        } else {
            coeff
        };
        (&self.a - &self.b * coeff).norm()
    }

    fn raw(&self, condition: Condition) -> f64 {
        match condition {
            Condition::T1 => self.cross.im.abs(),
            Condition::T3 => self.cross.re.abs(),
            Condition::T4 => self.cross.norm(),
            Condition::T2 => self.off_line(false),
            Condition::T5 => self.off_line(true),
        }
    }
}

fn check_one(
    actions: &SqrtActions,
    point: &StatePoint,
    condition: Condition,
    tol: f64,
) -> ConditionCheck {
    let raw = actions.raw(condition);
    let normalized = raw / (point.g * actions.probability + NORMALIZATION_EPS).sqrt();
    let status = if actions.degenerate {
        ConditionStatus::SatisfiedDegenerate
    } else if normalized <= tol {
        ConditionStatus::Satisfied
    } else {
        ConditionStatus::Violated
    };
    ConditionCheck {
        condition,
        raw,
        normalized,
        status,
    }
}

pub fn check_condition(
    condition: Condition,
    element: &CMatrix,
    point: &StatePoint,
) -> Result<ConditionCheck> {
    let actions = SqrtActions::new(element, point)?;
    Ok(check_one(&actions, point, condition, SATURATION_TOL))
}

pub fn check_t1(element: &CMatrix, point: &StatePoint) -> Result<ConditionCheck> {
    check_condition(Condition::T1, element, point)
}

pub fn check_t2(element: &CMatrix, point: &StatePoint) -> Result<ConditionCheck> {
    check_condition(Condition::T2, element, point)
}

pub fn check_t3(element: &CMatrix, point: &StatePoint) -> Result<ConditionCheck> {
    check_condition(Condition::T3, element, point)
}

pub fn check_t4(element: &CMatrix, point: &StatePoint) -> Result<ConditionCheck> {
    check_condition(Condition::T4, element, point)
}

pub fn check_t5(element: &CMatrix, point: &StatePoint) -> Result<ConditionCheck> {
    check_condition(Condition::T5, element, point)
}

/// All five conditions at tolerance `tol` on the normalized residual.
pub fn saturation_report(
    element: &CMatrix,
    point: &StatePoint,
    tol: f64,
) -> Result<SaturationReport> {
    let actions = SqrtActions::new(element, point)?;
    let class = classify(element, point);
    Ok(SaturationReport {
        classification: class.classification,
        trivial: class.trivial,
        checks: Condition::ALL
            .iter()
            .map(|&c| check_one(&actions, point, c, tol))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, re};
    use crate::qfi::{self, PureStateFamily};
    use approx::assert_abs_diff_eq;

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

    struct RealRotation;

    impl PureStateFamily for RealRotation {
        fn dim(&self) -> usize {
            2
        }
        fn state(&self, x: f64) -> CVector {
            CVector::from_vec(vec![re(x.cos()), re(x.sin())])
        }
        fn derivative(&self, x: f64) -> Option<CVector> {
            Some(CVector::from_vec(vec![re(-x.sin()), re(x.cos())]))
        }
    }

    fn element(label: &str, m: CMatrix) -> PovmElement {
        PovmElement {
            label: label.into(),
            operator: m,
        }
    }

    #[test]
    fn validate_simple_povms() {
        let single = PovmSet::new(vec![element("all", identity(3))], ["all"]).unwrap();
        assert!(validate(&single).is_valid());

        let split = PovmSet::new(
            vec![
                element("a", identity(2) * re(0.6)),
                element("b", identity(2) * re(0.4)),
            ],
            ["a"],
        )
        .unwrap();
        assert!(validate(&split).is_valid());
    }

    #[test]
    fn overcomplete_povm_reports_residual() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.4).unwrap();
        let rho = pt.rho();
        let povm =
            PovmSet::new(vec![element("i", identity(2)), element("rho", rho.clone())], ["i"])
                .unwrap();
        let diag = validate(&povm);
        assert!(!diag.is_valid());
        assert_abs_diff_eq!(diag.completeness_residual, rho.norm(), epsilon = 1e-14);
    }

    #[test]
    fn structural_errors() {
        assert!(PovmSet::new(vec![element("a", identity(2))], ["b"]).is_err());
        assert!(PovmSet::new(
            vec![element("a", identity(2)), element("a", identity(2))],
            ["a"]
        )
        .is_err());
        assert!(matches!(
            PovmSet::new(vec![element("a", identity(2)), element("b", identity(3))], ["a"]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classification_of_projectors() {
        let fam = TwoLevel(1.0);
        let x = 0.3;
        let pt = StatePoint::evaluate(&fam, x).unwrap();
        assert_eq!(classify(&pt.rho(), &pt).classification, Classification::Regular);
        assert_eq!(
            classify(&pt.rho_perp().unwrap(), &pt).classification,
            Classification::Null
        );
        // mis-aimed projector from a prior estimate x* = x + 1e-3
        let prior = StatePoint::evaluate(&fam, x + 1e-3).unwrap();
        let report = classify(&prior.rho_perp().unwrap(), &pt);
        assert_eq!(report.classification, Classification::Regular);
        let expected = linalg::inner(&prior.psi_perp().unwrap(), &pt.psi).norm_sqr();
        assert_abs_diff_eq!(report.probability, expected, epsilon = 1e-9 * expected);
        assert!(report.probability > 0.0);
    }

    #[test]
    fn t1_and_t3_on_real_family() {
        let pt = StatePoint::evaluate(&RealRotation, 0.7).unwrap();
        let e = CMatrix::from_row_slice(2, 2, &[re(0.7), re(0.2), re(0.2), re(0.3)]);
        assert!(check_t1(&e, &pt).unwrap().raw < 1e-15);
        assert!(check_t3(&e, &pt).unwrap().raw > 1e-3);
        assert!(check_t3(&identity(2), &pt).unwrap().raw < 1e-15);
    }

    #[test]
    fn t1_violated_by_imaginary_coherence() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.0).unwrap();
        let psi = pt.psi.clone();
        let v = pt.dperp.clone();
        let mixer = linalg::outer(&psi, &v) * c(0.0, 1.0);
        let e = &mixer + mixer.adjoint() + identity(2);
        assert!(linalg::min_eigenvalue(&e).unwrap() >= 0.0);
        let t1 = check_t1(&e, &pt).unwrap();
        assert_eq!(t1.status, ConditionStatus::Violated);
        let joint = qfi::joint_outcome_qfi(&pt, &e).unwrap();
        let outcome = qfi::outcome_qfi(&pt, &e).unwrap();
        assert!(outcome - joint > 1e-3);
    }

    #[test]
    fn rank_one_elements_satisfy_t2() {
        let pt = StatePoint::evaluate(&TwoLevel(1.3), 0.45).unwrap();
        let w = CVector::from_vec(vec![c(0.3, -0.2), c(0.8, 0.1)]);
        let e = linalg::projector(&w);
        let t2 = check_t2(&e, &pt).unwrap();
        assert!(t2.status.holds(), "{t2:?}");
        assert!(qfi::postselected_state_qfi(&pt, &e).unwrap() < 1e-12);
        let rho_check = check_t2(&pt.rho(), &pt).unwrap();
        assert!(rho_check.raw < 1e-12);
    }

    #[test]
    fn t2_residual_matches_postselected_qfi() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.8).unwrap();
        let e = CMatrix::from_row_slice(2, 2, &[re(0.6), c(0.1, 0.2), c(0.1, -0.2), re(0.5)]);
        let t2 = check_t2(&e, &pt).unwrap();
        let terms = OutcomeTerms::new(&pt, &e);
        // 4‖a⊥‖² = p·I(σ)
        assert_abs_diff_eq!(
            4.0 * t2.raw * t2.raw,
            terms.probability * terms.postselected_qfi(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn t4_on_identity_like_and_generic() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.3).unwrap();
        let e = pt.rho_perp().unwrap() + pt.rho();
        assert!(check_t4(&e, &pt).unwrap().raw < 1e-14);
        let generic = CMatrix::from_row_slice(2, 2, &[re(0.6), c(0.1, 0.2), c(0.1, -0.2), re(0.5)]);
        assert_eq!(check_t4(&generic, &pt).unwrap().status, ConditionStatus::Violated);
    }

    #[test]
    fn t5_braunstein_caves_basis() {
        // For a real family, projectors onto (ψ ± ψ⊥)/√2 are optimal.
        let pt = StatePoint::evaluate(&RealRotation, 0.2).unwrap();
        let perp = pt.psi_perp().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for sign in [1.0, -1.0] {
            let v = (&pt.psi + &perp * re(sign)) * re(s);
            let e = linalg::projector(&v);
            let t5 = check_t5(&e, &pt).unwrap();
            assert!(t5.status.holds(), "{t5:?}");
            let terms = OutcomeTerms::new(&pt, &e);
            assert_abs_diff_eq!(terms.classical_fi(), terms.outcome_qfi(), epsilon = 1e-12);
        }
        assert!(check_t5(&pt.rho(), &pt).unwrap().raw < 1e-14);

        let twolevel = StatePoint::evaluate(&TwoLevel(1.0), 0.5).unwrap();
        let mixer = linalg::outer(&twolevel.psi, &twolevel.dperp) * c(0.0, 0.5);
        let e = &mixer + mixer.adjoint() + identity(2);
        assert_eq!(check_t5(&e, &twolevel).unwrap().status, ConditionStatus::Violated);
    }

    #[test]
    fn degenerate_status_is_distinct() {
        // d = 3 with a direction orthogonal to both ψ and ∂⊥ψ
        struct Planar;
        impl PureStateFamily for Planar {
            fn dim(&self) -> usize {
                3
            }
            fn state(&self, x: f64) -> CVector {
                CVector::from_vec(vec![re(x.cos()), re(x.sin()), re(0.0)])
            }
            fn derivative(&self, x: f64) -> Option<CVector> {
                Some(CVector::from_vec(vec![re(-x.sin()), re(x.cos()), re(0.0)]))
            }
        }
        let pt = StatePoint::evaluate(&Planar, 0.4).unwrap();
        let e = linalg::projector(&linalg::basis(3, 2));
        let report = saturation_report(&e, &pt, SATURATION_TOL).unwrap();
        assert!(report.trivial);
        for check in &report.checks {
            assert_eq!(check.status, ConditionStatus::SatisfiedDegenerate);
        }
    }

    #[test]
    fn kraus_round_trip() {
        let pt = StatePoint::evaluate(&TwoLevel(1.0), 0.3).unwrap();
        let projective = PovmSet::new(
            vec![element("psi", pt.rho()), element("perp", pt.rho_perp().unwrap())],
            ["psi"],
        )
        .unwrap();
        let k = kraus_from(&projective).unwrap();
        for ((_, op), e) in k.operators().iter().zip(projective.elements()) {
            assert!((op - &e.operator).norm() < 1e-12);
        }
        let identity_povm = PovmSet::new(vec![element("all", identity(2))], ["all"]).unwrap();
        let k = kraus_from(&identity_povm).unwrap();
        assert!((&k.operators()[0].1 - identity(2)).norm() < 1e-14);

        let unitary = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        let rotated = KrausChannel::new(vec![
            ("psi".into(), &unitary * pt.rho()),
            ("perp".into(), pt.rho_perp().unwrap()),
        ])
        .unwrap();
        let back = rotated.povm(["psi"]).unwrap();
        assert!((&back.elements()[0].operator - pt.rho()).norm() < 1e-12);
        assert!(KrausChannel::new(vec![("x".into(), identity(2) * re(0.5))]).is_err());
    }
}
