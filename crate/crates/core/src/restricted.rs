//! Postselection restricted to subsystem A of a bipartite pure state.
//!
//! The state evolves as `|ψ_x⟩ = e^{−ixH}|ψ₀⟩` with either `H = H_A⊗H_B` or
//! `H = H_A⊗I + I⊗H_B`. An A-only POVM `E_A ⊗ I_B` sees the state only through
//! the reduced operators `𝒞^A`, `ϱ^⊥A` and `ϱ^A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::io::{MatrixDoc, VectorDoc};
use crate::lcc::{self, CompressionReport, LccResiduals};
use crate::linalg::{self, c, re, CMatrix, CVector, HermitianEigen};
use crate::povm::{self, PovmElement, PovmSet};
use crate::qfi::{
    Classification, LedgerRow, OutcomeTerms, PureStateFamily, QfiLedger, StatePoint,
    NULL_THRESHOLD,
};

/// Tolerance for model invariants (orthogonality, common energy, weights).
pub const MODEL_TOL: f64 = 1e-9;
/// A local mean below this counts as zero when choosing a construction.
pub const MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    /// `H = H_A ⊗ H_B`
    Product,
    /// `H = H_A ⊗ I + I ⊗ H_B`
    Sum,
}

/// Energy-subspace data of an entangled sum model:
/// `|ψ₀⟩ = Σ_k √p_k |φ_k^A⟩|φ_k^B⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceStructure {
    pub phi_a: Vec<CVector>,
    pub weights: Vec<f64>,
    pub phi_b: Vec<CVector>,
    /// Common mean energy `⟨φ_k|H_A|φ_k⟩`.
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct BipartiteModel {
    d_a: usize,
    d_b: usize,
    kind: HamiltonianKind,
    h_a: CMatrix,
    h_b: CMatrix,
    initial: CVector,
    structure: Option<SubspaceStructure>,
    h_full: CMatrix,
    spectrum: Vec<f64>,
    modes: CMatrix,
    /// `V†|ψ₀⟩`
    amplitudes: CVector,
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let residual = linalg::hermiticity_residual(m);
    if residual > linalg::HERMITIAN_TOL * m.norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

fn full_spectrum(kind: HamiltonianKind, a: &HermitianEigen, b: &HermitianEigen) -> (Vec<f64>, CMatrix) {
    let (na, nb) = (a.eigenvalues.len(), b.eigenvalues.len());
    let mut values = Vec::with_capacity(na * nb);
    let mut modes = CMatrix::zeros(na * nb, na * nb);
    for i in 0..na {
        for j in 0..nb {
            let col = i * nb + j;
            values.push(match kind {
                HamiltonianKind::Product => a.eigenvalues[i] * b.eigenvalues[j],
                HamiltonianKind::Sum => a.eigenvalues[i] + b.eigenvalues[j],
            });
            let v = linalg::kron_vec(
                &a.eigenvectors.column(i).into_owned(),
                &b.eigenvectors.column(j).into_owned(),
            );
            modes.set_column(col, &v);
        }
    }
    (values, modes)
}

impl BipartiteModel {
    pub fn new(
        kind: HamiltonianKind,
        h_a: CMatrix,
        h_b: CMatrix,
        initial: CVector,
    ) -> Result<Self> {
        check_hermitian(&h_a)?;
        check_hermitian(&h_b)?;
        let (d_a, d_b) = (h_a.nrows(), h_b.nrows());
        if initial.len() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                found: initial.len(),
            });
        }
        let deviation = initial.norm_squared() - 1.0;
        if deviation.abs() > crate::qfi::NORM_TOL {
            return Err(Error::NotNormalized { x: 0.0, deviation });
        }
        let (ea, eb) = (linalg::herm_eig(&h_a)?, linalg::herm_eig(&h_b)?);
        let (spectrum, modes) = full_spectrum(kind, &ea, &eb);
        let h_full = match kind {
            HamiltonianKind::Product => linalg::kron(&h_a, &h_b),
            HamiltonianKind::Sum => {
                linalg::kron(&h_a, &linalg::identity(d_b)) + linalg::kron(&linalg::identity(d_a), &h_b)
            }
        };
        let amplitudes = modes.adjoint() * &initial;
        Ok(Self {
            d_a,
            d_b,
            kind,
            h_a,
            h_b,
            initial,
            structure: None,
            h_full,
            spectrum,
            modes,
            amplitudes,
        })
    }

    /// `H = x·H_A⊗H_B` with `|ψ₀⟩ = |φ_A⟩⊗|φ_B⟩`.
    pub fn product_state(h_a: CMatrix, h_b: CMatrix, phi_a: &CVector, phi_b: &CVector) -> Result<Self> {
        Self::new(HamiltonianKind::Product, h_a, h_b, linalg::kron_vec(phi_a, phi_b))
    }

    /// Sum model with the initial state assembled from `structure`, after
    /// checking its invariants.
    pub fn entangled(h_a: CMatrix, h_b: CMatrix, structure: SubspaceStructure) -> Result<Self> {
        let s = &structure;
        let n = s.phi_a.len();
        if n == 0 || s.weights.len() != n || s.phi_b.len() != n {
            return Err(Error::ModelInvariant(format!(
                "{} A states, {} weights, {} B states",
                n,
                s.weights.len(),
                s.phi_b.len()
            )));
        }
        if s.weights.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::ModelInvariant("weights must be positive".into()));
        }
        let total: f64 = s.weights.iter().sum();
        if (total - 1.0).abs() > MODEL_TOL {
            return Err(Error::ModelInvariant(format!("weights sum to {total}")));
        }
        for (family, side) in [(&s.phi_a, "A"), (&s.phi_b, "B")] {
            let gram = gram_residual(family);
            if gram > MODEL_TOL {
                return Err(Error::ModelInvariant(format!(
                    "{side} states are not orthonormal (residual {gram:.3e})"
                )));
            }
        }
        for (k, phi) in s.phi_a.iter().enumerate() {
            let mean = linalg::sandwich(phi, &h_a, phi).re;
            if (mean - s.energy).abs() > MODEL_TOL {
                return Err(Error::ModelInvariant(format!(
                    "⟨φ_{k}|H_A|φ_{k}⟩ = {mean}, common energy {}",
                    s.energy
                )));
            }
        }
        let dim = h_a.nrows() * h_b.nrows();
        let mut initial = CVector::zeros(dim);
        for ((a, b), p) in s.phi_a.iter().zip(&s.phi_b).zip(&s.weights) {
            initial += linalg::kron_vec(a, b) * re(p.sqrt());
        }
        let mut model = Self::new(HamiltonianKind::Sum, h_a, h_b, initial)?;
        let ledger = model.orthogonality_residual_for(&structure);
        if ledger > MODEL_TOL {
            return Err(Error::ModelInvariant(format!(
                "orthogonality ledger residual {ledger:.3e}"
            )));
        }
        model.structure = Some(structure);
        Ok(model)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    pub fn h_a(&self) -> &CMatrix {
        &self.h_a
    }

    pub fn h_b(&self) -> &CMatrix {
        &self.h_b
    }

    pub fn full_hamiltonian(&self) -> &CMatrix {
        &self.h_full
    }

    pub fn initial_state(&self) -> &CVector {
        &self.initial
    }

    pub fn structure(&self) -> Option<&SubspaceStructure> {
        self.structure.as_ref()
    }

    pub fn point(&self, x: f64) -> Result<StatePoint> {
        StatePoint::evaluate(self, x)
    }

    /// `ϱ₀^A`
    pub fn initial_rho_a(&self) -> CMatrix {
        linalg::trace_out_b(&linalg::projector(&self.initial), self.d_a, self.d_b)
            .expect("dimensions fixed at construction")
    }

    /// `ϱ₀^B`
    pub fn initial_rho_b(&self) -> CMatrix {
        linalg::trace_out_a(&linalg::projector(&self.initial), self.d_a, self.d_b)
            .expect("dimensions fixed at construction")
    }

    /// `(⟨H_A⟩, ⟨H_B⟩)` in the initial state.
    pub fn local_means(&self) -> (f64, f64) {
        (
            linalg::trace(&(self.initial_rho_a() * &self.h_a)).re,
            linalg::trace(&(self.initial_rho_b() * &self.h_b)).re,
        )
    }

    /// `(⟨H_A²⟩, ⟨H_B²⟩)` in the initial state.
    pub fn local_second_moments(&self) -> (f64, f64) {
        (
            linalg::trace(&(self.initial_rho_a() * &self.h_a * &self.h_a)).re,
            linalg::trace(&(self.initial_rho_b() * &self.h_b * &self.h_b)).re,
        )
    }

    /// `(δh_A, δh_B)`, the local standard deviations in the initial state.
    pub fn local_deviations(&self) -> (f64, f64) {
        let (ma, mb) = self.local_means();
        let (sa, sb) = self.local_second_moments();
        ((sa - ma * ma).max(0.0).sqrt(), (sb - mb * mb).max(0.0).sqrt())
    }

    /// `⟨ψ₀|H̄_A⊗H̄_B|ψ₀⟩` with mean-shifted local Hamiltonians.
    pub fn cross_covariance(&self) -> f64 {
        let (ma, mb) = self.local_means();
        let ha = &self.h_a - linalg::identity(self.d_a) * re(ma);
        let hb = &self.h_b - linalg::identity(self.d_b) * re(mb);
        linalg::sandwich(&self.initial, &linalg::kron(&ha, &hb), &self.initial).re
    }

    /// `e^{−ixH_A}`
    pub fn local_unitary_a(&self, x: f64) -> Result<CMatrix> {
        Ok(linalg::unitary_evolution(&linalg::herm_eig(&self.h_a)?, x))
    }

    /// Largest violation of `H̄φ_k ⊥ φ_k`, `φ_k ⊥ φ_l`, `H̄φ_k ⊥ φ_l`,
    /// `H̄φ_k ⊥ H̄φ_l` (`k ≠ l`, `H̄ = H_A − ℰ`); `None` without a structure.
    pub fn orthogonality_residual(&self) -> Option<f64> {
        self.structure
            .as_ref()
            .map(|s| self.orthogonality_residual_for(s))
    }

    fn orthogonality_residual_for(&self, s: &SubspaceStructure) -> f64 {
        let shifted = &self.h_a - linalg::identity(self.d_a) * re(s.energy);
        let moved: Vec<CVector> = s.phi_a.iter().map(|p| &shifted * p).collect();
        let mut worst: f64 = 0.0;
        for k in 0..s.phi_a.len() {
            worst = worst.max(linalg::inner(&moved[k], &s.phi_a[k]).norm());
            for l in 0..s.phi_a.len() {
                if k == l {
                    continue;
                }
                worst = worst
                    .max(linalg::inner(&s.phi_a[k], &s.phi_a[l]).norm())
                    .max(linalg::inner(&moved[k], &s.phi_a[l]).norm())
                    .max(linalg::inner(&moved[k], &moved[l]).norm());
            }
        }
        worst
    }

    /// `|φ_k^⊥A⟩ = (H_A − ℰ)|φ_k⟩/√Var`, `None` where the variance vanishes.
    pub fn perp_states(&self) -> Result<Vec<Option<CVector>>> {
        let s = self
            .structure
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("model has no subspace structure".into()))?;
        let shifted = &self.h_a - linalg::identity(self.d_a) * re(s.energy);
        Ok(s.phi_a
            .iter()
            .map(|phi| {
                let v = &shifted * phi;
                let var = v.norm_squared();
                (var > NULL_THRESHOLD).then(|| v / re(var.sqrt()))
            })
            .collect())
    }
}

fn gram_residual(vectors: &[CVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((linalg::inner(a, b) - re(target)).norm());
        }
    }
    worst
}

impl PureStateFamily for BipartiteModel {
    fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    fn state(&self, x: f64) -> CVector {
        let phased = CVector::from_iterator(
            self.spectrum.len(),
            self.spectrum
                .iter()
                .zip(self.amplitudes.iter())
                .map(|(e, a)| a * c(0.0, -x * e).exp()),
        );
        &self.modes * phased
    }

    fn derivative(&self, x: f64) -> Option<CVector> {
        Some(&self.h_full * self.state(x) * c(0.0, -1.0))
    }
}

/// `H − Tr(ρH)·I`
pub fn gauge_shift(h: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    check_hermitian(h)?;
    if rho.nrows() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: rho.nrows(),
        });
    }
    let mean = linalg::trace(&(rho * h)).re;
    Ok(h - linalg::identity(h.nrows()) * re(mean))
}

/// [`gauge_shift`] with `ρ = |ψ⟩⟨ψ|`.
pub fn gauge_shift_state(h: &CMatrix, state: &CVector) -> Result<CMatrix> {
    gauge_shift(h, &linalg::projector(state))
}

#[derive(Debug, Clone)]
pub struct ReducedQuantities {
    /// `𝒞^A = Tr_B |∂⊥ψ⟩⟨ψ|`
    pub c_a: CMatrix,
    /// `ϱ^⊥A = Tr_B ρ^⊥`
    pub rho_perp_a: CMatrix,
    /// `ϱ^A = Tr_B ρ`
    pub rho_a: CMatrix,
    /// `g = ⟨H²⟩ − ⟨H⟩²`
    pub g: f64,
    /// `(δh_A, δh_B)` for sum models.
    pub deltas: Option<(f64, f64)>,
}

impl ReducedQuantities {
    pub fn qfi(&self) -> f64 {
        4.0 * self.g
    }

    /// Per-outcome scalars of `E_A ⊗ I_B` from the reduced operators.
    pub fn terms(&self, e_a: &CMatrix) -> OutcomeTerms {
        OutcomeTerms {
            probability: linalg::trace(&(&self.rho_a * e_a)).re,
            cross: linalg::trace(&(&self.c_a * e_a)).conj(),
            perp_weight: self.g * linalg::trace(&(&self.rho_perp_a * e_a)).re,
        }
    }
}

/// Reduced operators at `x` from `ρ^⊥ = UH̄ρ₀H̄U†/Tr(ρ₀H̄²)` and
/// `|∂⊥ψ⟩⟨ψ| = −iUH̄ρ₀U†`.
pub fn reduced_quantities(model: &BipartiteModel, x: f64) -> Result<ReducedQuantities> {
    let psi = model.state(x);
    let h = model.full_hamiltonian();
    let mean = linalg::sandwich(&psi, h, &psi).re;
    let moved = h * &psi - &psi * re(mean);
    let g = moved.norm_squared();
    if g < NULL_THRESHOLD {
        return Err(Error::ZeroQfiModel { variance: g });
    }
    let dperp = &moved * c(0.0, -1.0);
    let (d_a, d_b) = model.dims();
    let c_ab = linalg::outer(&dperp, &psi);
    let perp_ab = linalg::projector(&dperp) / re(g);
    let rho_ab = linalg::projector(&psi);
    Ok(ReducedQuantities {
        c_a: linalg::trace_out_b(&c_ab, d_a, d_b)?,
        rho_perp_a: linalg::trace_out_b(&perp_ab, d_a, d_b)?,
        rho_a: linalg::trace_out_b(&rho_ab, d_a, d_b)?,
        g,
        deltas: (model.kind() == HamiltonianKind::Sum).then(|| model.local_deviations()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictedResiduals {
    /// `|Tr(ϱ^⊥A Σ_✓E) − 1|`
    pub completeness: f64,
    /// `max_✓ |Tr(𝒞^A E_ω)|`
    pub coherence: f64,
    /// `Tr(ϱ^A Σ_✓E)`, below one for compression.
    pub retained_probability: f64,
}

fn check_a_side(model: &BipartiteModel, povm: &PovmSet) -> Result<()> {
    if povm.dim() != model.dims().0 {
        return Err(Error::DimensionMismatch {
            expected: model.dims().0,
            found: povm.dim(),
        });
    }
    Ok(())
}

pub fn verify_restricted(
    model: &BipartiteModel,
    x: f64,
    povm_a: &PovmSet,
) -> Result<RestrictedResiduals> {
    check_a_side(model, povm_a)?;
    let rq = reduced_quantities(model, x)?;
    Ok(residuals_from(&rq, povm_a))
}

fn residuals_from(rq: &ReducedQuantities, povm_a: &PovmSet) -> RestrictedResiduals {
    let sum = povm_a.retained_sum();
    RestrictedResiduals {
        completeness: (linalg::trace(&(&rq.rho_perp_a * &sum)) - re(1.0)).norm(),
        coherence: povm_a
            .retained()
            .map(|e| linalg::trace(&(&rq.c_a * &e.operator)).norm())
            .fold(0.0, f64::max),
        retained_probability: linalg::trace(&(&rq.rho_a * &sum)).re,
    }
}

/// Compression metrics of `E_A ⊗ I_B` computed from reduced operators only.
pub fn restricted_report(
    model: &BipartiteModel,
    x: f64,
    povm_a: &PovmSet,
) -> Result<CompressionReport> {
    check_a_side(model, povm_a)?;
    povm::validate(povm_a).into_result()?;
    if povm_a.retained_labels().is_empty() {
        return Err(Error::EmptyRetainedSet);
    }
    let rq = reduced_quantities(model, x)?;
    let ledger = QfiLedger {
        rows: povm_a
            .labeled()
            .map(|(label, e)| LedgerRow::from_terms(label, &rq.terms(e)))
            .collect(),
    };
    let r = residuals_from(&rq, povm_a);
    lcc::assemble_report(
        ledger,
        rq.qfi(),
        povm_a.retained_labels().len(),
        |label| povm_a.is_retained(label),
        LccResiduals {
            completeness: r.completeness,
            coherence: r.coherence,
        },
    )
}

/// The same metrics on the full space with elements `E_A ⊗ I_B`.
pub fn lifted_report(model: &BipartiteModel, x: f64, povm_a: &PovmSet) -> Result<CompressionReport> {
    check_a_side(model, povm_a)?;
    lcc::compression_report(&model.point(x)?, &povm_a.lift(model.dims().1))
}

fn retained_labels(count: usize) -> Vec<String> {
    if count == 1 {
        vec!["keep".into()]
    } else {
        (1..=count).map(|i| format!("keep_{i}")).collect()
    }
}

fn with_remainder(retained: Vec<CMatrix>) -> Result<PovmSet> {
    let dim = retained[0].nrows();
    let labels = retained_labels(retained.len());
    let total = retained
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, e| acc + e);
    let discard = linalg::identity(dim) - total;
    let min = linalg::min_eigenvalue(&discard)?;
    if min < -linalg::PSD_FLOOR {
        return Err(Error::NonPositiveElement {
            label: "discard".into(),
            min_eigenvalue: min,
        });
    }
    let mut elements: Vec<PovmElement> = labels
        .iter()
        .zip(retained)
        .map(|(label, operator)| PovmElement {
            label: label.clone(),
            operator,
        })
        .collect();
    elements.push(PovmElement {
        label: "discard".into(),
        operator: discard,
    });
    PovmSet::new(elements, labels)
}

fn check_weights(q: &[f64]) -> Result<()> {
    if q.is_empty() {
        return Err(Error::EmptyRetainedSet);
    }
    if q.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
        return Err(Error::InvalidParameter("weights must lie in (0, 1]".into()));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > MODEL_TOL {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakBranch {
    /// `⟨H_A⟩ = 0`: `E_ω = q_ω ϱ^⊥A + ε|φ₀⟩⟨φ₀|`
    ZeroMeanA,
    /// `⟨H_B⟩ = 0`: `E_ω = q_ω ϱ^⊥A`
    ZeroMeanB,
}

#[derive(Debug, Clone)]
pub struct WeakEntanglementChannel {
    pub branch: WeakBranch,
    pub povm: PovmSet,
    /// Predicted capacity: `1/(Lε)` or `⟨H_A²⟩/⟨H_A⟩²`.
    pub predicted_capacity: f64,
}

/// Weak-entanglement channel on A for a product model at `x = 0`.
pub fn weak_entanglement_lcc(
    model: &BipartiteModel,
    q: &[f64],
    epsilon: f64,
) -> Result<WeakEntanglementChannel> {
    if model.kind() != HamiltonianKind::Product {
        return Err(Error::InvalidParameter(
            "weak-entanglement construction needs a product Hamiltonian".into(),
        ));
    }
    check_weights(q)?;
    let rho_a = model.initial_rho_a();
    let purity = linalg::trace(&(&rho_a * &rho_a)).re;
    if (purity - 1.0).abs() > MODEL_TOL {
        return Err(Error::ModelInvariant(format!(
            "initial state is entangled (purity of ϱ^A = {purity})"
        )));
    }
    let rq = reduced_quantities(model, 0.0)?;
    let (mean_a, mean_b) = model.local_means();
    let (branch, extra, predicted_capacity) = if mean_a.abs() <= MEAN_TOL {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("ε = {epsilon} must be positive")));
        }
        let lc = q.len() as f64 * epsilon;
        (WeakBranch::ZeroMeanA, &rho_a * re(epsilon), 1.0 / lc)
    } else if mean_b.abs() <= MEAN_TOL {
        let (second_a, _) = model.local_second_moments();
        (
            WeakBranch::ZeroMeanB,
            CMatrix::zeros(model.dims().0, model.dims().0),
            second_a / (mean_a * mean_a),
        )
    } else {
        return Err(Error::GaugeShiftRequired);
    };
    let retained = q
        .iter()
        .map(|w| &rq.rho_perp_a * re(*w) + &extra)
        .collect();
    Ok(WeakEntanglementChannel {
        branch,
        povm: with_remainder(retained)?,
        predicted_capacity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Projector onto `span{φ_k^A}`.
    Minimal,
    /// Projector onto the listed `φ_k^A` only.
    Subspaces(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntangledSpec {
    /// `r[ω][k]`, with `Σ_ω r[ω][k] = 1` for every `k`.
    pub r: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub support: Support,
    /// Conjugate by `e^{−ixH_A}` at this `x`; `None` builds the `x = 0` channel.
    pub frame: Option<f64>,
}

impl EntangledSpec {
    /// One retained outcome with every `r_k = 1` and the minimal support.
    pub fn binary(subspaces: usize, epsilon: f64, frame: Option<f64>) -> Self {
        Self {
            r: vec![vec![1.0; subspaces]],
            epsilon,
            support: Support::Minimal,
            frame,
        }
    }
}

/// `E_ω = Σ_k r_ωk |φ_k^⊥A⟩⟨φ_k^⊥A| + ε𝒫_supp` on A.
pub fn entangled_lcc(model: &BipartiteModel, spec: &EntangledSpec) -> Result<PovmSet> {
    let structure = model
        .structure()
        .ok_or_else(|| Error::InvalidParameter("model has no subspace structure".into()))?;
    let n = structure.phi_a.len();
    if spec.r.is_empty() {
        return Err(Error::EmptyRetainedSet);
    }
    if spec.r.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter(format!("each r row needs {n} entries")));
    }
    for k in 0..n {
        let column: f64 = spec.r.iter().map(|row| row[k]).sum();
        if (column - 1.0).abs() > MODEL_TOL || spec.r.iter().any(|row| row[k] < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r weights for subspace {k} sum to {column}"
            )));
        }
    }
    if !(spec.epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("ε = {} must be non-negative", spec.epsilon)));
    }
    let perps = model.perp_states()?;
    let present: Vec<&CVector> = perps.iter().flatten().collect();
    let gram = gram_residual(&present.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
    if gram > MODEL_TOL {
        return Err(Error::ModelInvariant(format!(
            "perpendicular states are not orthonormal (residual {gram:.3e})"
        )));
    }
    let d_a = model.dims().0;
    let support_indices: Vec<usize> = match &spec.support {
        Support::Minimal => (0..n).collect(),
        Support::Subspaces(idx) => {
            if let Some(bad) = idx.iter().find(|k| **k >= n) {
                return Err(Error::InvalidParameter(format!("no subspace {bad}")));
            }
            idx.clone()
        }
    };
    let support = support_indices
        .iter()
        .fold(CMatrix::zeros(d_a, d_a), |acc, &k| acc + linalg::projector(&structure.phi_a[k]));
    let frame = match spec.frame {
        Some(x) => Some(model.local_unitary_a(x)?),
        None => None,
    };
    let retained = spec
        .r
        .iter()
        .map(|row| {
            let mut e = &support * re(spec.epsilon);
            for (k, perp) in perps.iter().enumerate() {
                if let Some(v) = perp {
                    e += linalg::projector(v) * re(row[k]);
                }
            }
            match &frame {
                Some(u) => u * e * u.adjoint(),
                None => e,
            }
        })
        .collect();
    with_remainder(retained)
}

/// `δh_B²/(δh_A² + δh_B²)`
pub fn predicted_restricted_loss(model: &BipartiteModel) -> f64 {
    let (a, b) = model.local_deviations();
    b * b / (a * a + b * b)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossScalingRow {
    pub ratio: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// `δh_B²/(δh_A² + δh_B²)`
    pub predicted: f64,
    pub capacity: f64,
    pub gain: f64,
    /// `c · Σ_✓ p`, identically one.
    pub capacity_identity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossScalingReport {
    pub rows: Vec<LossScalingRow>,
    /// Log-log slope of the ratio term `δh_B²/(δh_A²+δh_B²)` of γ against
    /// `δh_B/δh_A`, at the smallest ε.
    pub ratio_exponent: Option<f64>,
    /// Log-log slope of `γ(ε) − γ(0)` against ε, at the largest ratio.
    pub epsilon_exponent: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sweep `γ`, `c`, `η` of the binary entangled channel over
/// `ratio × ε`; `build(ratio)` returns a sum model with that `δh_B/δh_A`.
pub fn loss_scaling_report<F>(
    build: F,
    x: f64,
    epsilons: &[f64],
    ratios: &[f64],
    mode: ExecMode,
) -> Result<LossScalingReport>
where
    F: Fn(f64) -> Result<BipartiteModel> + Sync + Send,
{
    if epsilons.is_empty() || ratios.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    let cells: Vec<(f64, f64)> = ratios
        .iter()
        .flat_map(|r| epsilons.iter().map(move |e| (*r, *e)))
        .collect();
    let rows = exec::par_map(mode, &cells, |&(ratio, epsilon)| -> Result<LossScalingRow> {
        let model = build(ratio)?;
        let subspaces = model.structure().map(|s| s.phi_a.len()).unwrap_or(0);
        let povm = entangled_lcc(&model, &EntangledSpec::binary(subspaces, epsilon, Some(x)))?;
        let report = restricted_report(&model, x, &povm)?;
        Ok(LossScalingRow {
            ratio,
            epsilon,
            gamma: report.gamma,
            predicted: predicted_restricted_loss(&model),
            capacity: report.capacity,
            gain: report.gain,
            capacity_identity: report.capacity * report.p_retained,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let eps_min = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio_max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ratio_points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.epsilon == eps_min)
        .map(|r| (r.ratio, r.gamma))
        .collect();
    let eps_rows: Vec<&LossScalingRow> = rows.iter().filter(|r| r.ratio == ratio_max).collect();
    let epsilon_exponent = {
        let model = build(ratio_max)?;
        let subspaces = model.structure().map(|s| s.phi_a.len()).unwrap_or(0);
        let limit = verify_restricted(
            &model,
            x,
            &entangled_lcc(&model, &EntangledSpec::binary(subspaces, 0.0, Some(x)))?,
        )?
        .completeness;
        let points: Vec<(f64, f64)> = eps_rows
            .iter()
            .map(|r| (r.epsilon, (r.gamma - limit).abs()))
            .filter(|(_, d)| *d > 1e-13)
            .collect();
        loglog_slope(&points)
    };
    Ok(LossScalingReport {
        ratio_exponent: loglog_slope(&ratio_points),
        epsilon_exponent,
        rows,
    })
}

/// Loss of the binary entangled channel in the `ε → 0` limit:
/// `1 − Tr(ϱ^⊥A Σ_k |φ_k^⊥⟩⟨φ_k^⊥|)`.
pub fn zero_epsilon_loss(model: &BipartiteModel, x: f64) -> Result<f64> {
    let subspaces = model
        .structure()
        .map(|s| s.phi_a.len())
        .ok_or_else(|| Error::InvalidParameter("model has no subspace structure".into()))?;
    let povm = entangled_lcc(model, &EntangledSpec::binary(subspaces, 0.0, Some(x)))?;
    let rq = reduced_quantities(model, x)?;
    let sum = povm.retained_sum();
    Ok(1.0 - linalg::trace(&(&rq.rho_perp_a * sum)).re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDoc {
    pub phi_a: Vec<VectorDoc>,
    pub weights: Vec<f64>,
    pub phi_b: Vec<VectorDoc>,
    pub energy: f64,
}

/// JSON form of a [`BipartiteModel`]: either an explicit initial state or a
/// subspace structure (sum models only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteDocument {
    pub dims: [usize; 2],
    pub hamiltonian: HamiltonianKind,
    pub h_a: MatrixDoc,
    pub h_b: MatrixDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<VectorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspaces: Option<SubspaceDoc>,
}

impl BipartiteDocument {
    pub fn from_model(model: &BipartiteModel) -> Self {
        let (d_a, d_b) = model.dims();
        Self {
            dims: [d_a, d_b],
            hamiltonian: model.kind(),
            h_a: MatrixDoc::from_matrix(model.h_a()),
            h_b: MatrixDoc::from_matrix(model.h_b()),
            initial_state: model
                .structure()
                .is_none()
                .then(|| VectorDoc::from_vector(model.initial_state())),
            subspaces: model.structure().map(|s| SubspaceDoc {
                phi_a: s.phi_a.iter().map(VectorDoc::from_vector).collect(),
                weights: s.weights.clone(),
                phi_b: s.phi_b.iter().map(VectorDoc::from_vector).collect(),
                energy: s.energy,
            }),
        }
    }

    pub fn model(&self) -> Result<BipartiteModel> {
        let [d_a, d_b] = self.dims;
        let h_a = self.h_a.to_square(d_a)?;
        let h_b = self.h_b.to_square(d_b)?;
        match (&self.initial_state, &self.subspaces) {
            (Some(state), None) => BipartiteModel::new(self.hamiltonian, h_a, h_b, state.to_vector()?),
            (None, Some(s)) if self.hamiltonian == HamiltonianKind::Sum => {
                let vectors = |docs: &[VectorDoc]| -> Result<Vec<CVector>> {
                    docs.iter().map(VectorDoc::to_vector).collect()
                };
                BipartiteModel::entangled(
                    h_a,
                    h_b,
                    SubspaceStructure {
                        phi_a: vectors(&s.phi_a)?,
                        weights: s.weights.clone(),
                        phi_b: vectors(&s.phi_b)?,
                        energy: s.energy,
                    },
                )
            }
            (None, Some(_)) => Err(Error::InvalidParameter(
                "subspace structure requires a sum Hamiltonian".into(),
            )),
            _ => Err(Error::InvalidParameter(
                "give exactly one of initial_state and subspaces".into(),
            )),
        }
    }
}

/// Classification of the retained outcomes of an A-side POVM.
pub fn retained_classes(model: &BipartiteModel, x: f64, povm_a: &PovmSet) -> Result<Vec<Classification>> {
    let rq = reduced_quantities(model, x)?;
    Ok(povm_a
        .retained()
        .map(|e| rq.terms(&e.operator).classification())
        .collect())
}
