//! Built-in state families and their postselection channels.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, re, CMatrix, CVector, HermitianEigen};
use crate::povm::{PovmElement, PovmSet};
use crate::qfi::PureStateFamily;
use crate::restricted::{
    BipartiteDocument, BipartiteModel, EntangledSpec, HamiltonianKind, SubspaceStructure, Support,
};

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
}

/// `|φ_θ⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩`
pub fn spin_state(theta: f64) -> CVector {
    CVector::from_vec(vec![re((theta / 2.0).cos()), re((theta / 2.0).sin())])
}

/// `ψ_x = cos(xΔ/2)|0⟩ + i sin(xΔ/2)|1⟩`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelFamily {
    pub delta: f64,
}

impl TwoLevelFamily {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("Δ = {delta}")));
        }
        Ok(Self { delta })
    }
}

impl PureStateFamily for TwoLevelFamily {
    fn dim(&self) -> usize {
        2
    }

    fn state(&self, x: f64) -> CVector {
        let (s, co) = (x * self.delta / 2.0).sin_cos();
        CVector::from_vec(vec![re(co), c(0.0, s)])
    }

    fn derivative(&self, x: f64) -> Option<CVector> {
        let (s, co) = (x * self.delta / 2.0).sin_cos();
        let k = self.delta / 2.0;
        Some(CVector::from_vec(vec![re(-k * s), c(0.0, k * co)]))
    }
}

/// `P_u = −i∂/∂u` on the first `n` Hermite–Gaussian modes of width σ:
/// `P = i(a† − a)/(2σ)`.
pub fn meter_momentum(sigma: f64, n: usize) -> Result<CMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("meter truncation {n} < 2")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("σ = {sigma} must be positive")));
    }
    let mut p = CMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let amp = ((k + 1) as f64).sqrt() / (2.0 * sigma);
        p[(k + 1, k)] = c(0.0, amp);
        p[(k, k + 1)] = c(0.0, -amp);
    }
    Ok(p)
}

pub const DEFAULT_MODES: usize = 40;

/// `ψ_x = e^{−ixσ_z⊗P}|φ_θ⟩⊗|φ₀⟩`, qubit first.
#[derive(Debug, Clone)]
pub struct VonNeumannModel {
    pub theta: f64,
    pub sigma: f64,
    pub modes: usize,
    inner: BipartiteModel,
}

impl VonNeumannModel {
    pub fn new(theta: f64, sigma: f64, modes: usize) -> Result<Self> {
        let p = meter_momentum(sigma, modes)?;
        let inner = BipartiteModel::product_state(
            pauli_z(),
            p,
            &spin_state(theta),
            &linalg::basis(modes, 0),
        )?;
        Ok(Self {
            theta,
            sigma,
            modes,
            inner,
        })
    }

    pub fn bipartite(&self) -> &BipartiteModel {
        &self.inner
    }

    /// Weight of the exact displaced Gaussian beyond the truncation,
    /// `1 − Σ_{n<N} e^{−α²} α^{2n}/n!` with `α = x/(2σ)`.
    pub fn truncation_leakage(&self, x: f64) -> f64 {
        let alpha2 = (x / (2.0 * self.sigma)).powi(2);
        let mut term = (-alpha2).exp();
        let mut kept = 0.0;
        for n in 0..self.modes {
            kept += term;
            term *= alpha2 / (n + 1) as f64;
        }
        (1.0 - kept).max(0.0)
    }
}

impl PureStateFamily for VonNeumannModel {
    fn dim(&self) -> usize {
        2 * self.modes
    }

    fn state(&self, x: f64) -> CVector {
        self.inner.state(x)
    }

    fn derivative(&self, x: f64) -> Option<CVector> {
        self.inner.derivative(x)
    }
}

fn binary(keep: CMatrix) -> PovmSet {
    PovmSet::binary(keep).expect("square element")
}

/// `|φ_θ*⟩⟨φ_θ*| ⊗ I`
pub fn wva_channel(model: &VonNeumannModel, theta_star: f64) -> PovmSet {
    let keep = linalg::kron(
        &linalg::projector(&spin_state(theta_star)),
        &linalg::identity(model.modes),
    );
    binary(keep)
}

/// `θ* = −θ`, or `−θ + 2ε` at `θ = π/2`.
pub fn qubit_lcc_angle(theta: f64, epsilon: f64) -> f64 {
    if (theta - FRAC_PI_2).abs() < 1e-12 {
        -theta + 2.0 * epsilon
    } else {
        -theta
    }
}

pub fn qubit_lcc_channel(model: &VonNeumannModel, epsilon: f64) -> PovmSet {
    wva_channel(model, qubit_lcc_angle(model.theta, epsilon))
}

/// `I ⊗ (|φ₁⟩⟨φ₁| + ε|φ₀⟩⟨φ₀|)`
pub fn meter_lcc_channel(model: &VonNeumannModel, epsilon: f64) -> Result<PovmSet> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("ε = {epsilon} outside [0, 1]")));
    }
    let mut meter = CMatrix::zeros(model.modes, model.modes);
    meter[(0, 0)] = re(epsilon);
    meter[(1, 1)] = re(1.0);
    Ok(binary(linalg::kron(&linalg::identity(2), &meter)))
}

/// Two qubits in A, one in B; `H_A = ω₀(σ_z⊗I + I⊗σ_z)`, `H_B = Δσ_z`,
/// `|ψ₀⟩ = √p₁|φ₁⟩|φ_θ⟩ + √p₂|φ₂⟩|φ_{θ−π}⟩`.
#[derive(Debug, Clone)]
pub struct ThreeQubitModel {
    pub omega0: f64,
    pub delta_b: f64,
    pub theta: f64,
    pub p1: f64,
    inner: BipartiteModel,
}

impl ThreeQubitModel {
    pub fn new(omega0: f64, delta_b: f64, theta: f64, p1: f64) -> Result<Self> {
        if !(p1 > 0.0 && p1 < 1.0) {
            return Err(Error::InvalidParameter(format!("p₁ = {p1} outside (0, 1)")));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = pauli_z();
        let id = linalg::identity(2);
        let h_a = (linalg::kron(&z, &id) + linalg::kron(&id, &z)) * re(omega0);
        let h_b = z * re(delta_b);
        let phi1 = CVector::from_vec(vec![re(s), re(0.0), re(0.0), re(s)]);
        let phi2 = CVector::from_vec(vec![re(0.0), re(s), re(s), re(0.0)]);
        let inner = BipartiteModel::entangled(
            h_a,
            h_b,
            SubspaceStructure {
                phi_a: vec![phi1, phi2],
                weights: vec![p1, 1.0 - p1],
                phi_b: vec![spin_state(theta), spin_state(theta - PI)],
                energy: 0.0,
            },
        )?;
        Ok(Self {
            omega0,
            delta_b,
            theta,
            p1,
            inner,
        })
    }

    /// Model with `Δ` chosen so that `δh_B/δh_A = ratio`.
    pub fn with_ratio(omega0: f64, theta: f64, p1: f64, ratio: f64) -> Result<Self> {
        let spread = Self::spread(theta, p1);
        if spread <= 0.0 {
            return Err(Error::InvalidParameter("δh_B vanishes for every Δ".into()));
        }
        let delta = ratio * 2.0 * omega0.abs() * p1.sqrt() / spread;
        Self::new(omega0, delta, theta, p1)
    }

    /// `2√(p₁p₂cos²θ + sin²θ/4)`
    fn spread(theta: f64, p1: f64) -> f64 {
        let p2 = 1.0 - p1;
        2.0 * (p1 * p2 * theta.cos().powi(2) + theta.sin().powi(2) / 4.0).sqrt()
    }

    /// `(δh_A, δh_B) = (2ω₀√p₁, 2Δ√(p₁p₂cos²θ + sin²θ/4))`
    pub fn analytic_deviations(&self) -> (f64, f64) {
        (
            2.0 * self.omega0.abs() * self.p1.sqrt(),
            self.delta_b.abs() * Self::spread(self.theta, self.p1),
        )
    }

    pub fn bipartite(&self) -> &BipartiteModel {
        &self.inner
    }

    /// `|φ₁^⊥⟩⟨φ₁^⊥| + ε|φ₂⟩⟨φ₂|` in the frame of `x`.
    pub fn channel(&self, epsilon: f64, x: f64) -> Result<PovmSet> {
        crate::restricted::entangled_lcc(
            &self.inner,
            &EntangledSpec {
                r: vec![vec![1.0, 1.0]],
                epsilon,
                support: Support::Subspaces(vec![1]),
                frame: Some(x),
            },
        )
    }
}

impl PureStateFamily for ThreeQubitModel {
    fn dim(&self) -> usize {
        8
    }

    fn state(&self, x: f64) -> CVector {
        self.inner.state(x)
    }

    fn derivative(&self, x: f64) -> Option<CVector> {
        self.inner.derivative(x)
    }
}

/// Entries drawn i.i.d. from the standard complex normal distribution.
pub fn random_complex<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `(A + A†)/2` for a complex Gaussian `A`.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_complex(rng, dim, dim);
    (&a + a.adjoint()) * re(0.5)
}

/// Haar-random unit vector.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v / re(n)
}

/// `E_k = S^{−1/2} A_k†A_k S^{−1/2}` with `S = Σ A_k†A_k` and Gaussian `A_k`
/// of the given ranks, which must add up to at least `dim`.
pub fn random_povm<R: Rng>(rng: &mut R, dim: usize, ranks: &[usize]) -> Result<Vec<CMatrix>> {
    if ranks.contains(&0) || ranks.iter().sum::<usize>() < dim {
        return Err(Error::InvalidParameter(format!(
            "ranks {ranks:?} cannot span dimension {dim}"
        )));
    }
    let raw: Vec<CMatrix> = ranks
        .iter()
        .map(|&r| {
            let a = random_complex(rng, r, dim);
            a.adjoint() * a
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, m| acc + m);
    let inv_sqrt = linalg::herm_eig(&total)?.apply(|l| re(1.0 / l.sqrt()));
    Ok(raw
        .iter()
        .map(|m| {
            let e = &inv_sqrt * m * &inv_sqrt;
            (&e + e.adjoint()) * re(0.5)
        })
        .collect())
}

/// `ψ_x = e^{−ixH₁} e^{−ix²H₂} ψ₀` with random Hermitian `H₁, H₂`.
#[derive(Debug, Clone)]
pub struct RandomAnalyticFamily {
    dim: usize,
    h1: HermitianEigen,
    h1_matrix: CMatrix,
    h2: HermitianEigen,
    h2_matrix: CMatrix,
    psi0: CVector,
}

impl RandomAnalyticFamily {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h1_matrix = random_hermitian(&mut rng, dim);
        let h2_matrix = random_hermitian(&mut rng, dim) * re(0.5);
        let psi0 = random_state(&mut rng, dim);
        Ok(Self {
            dim,
            h1: linalg::herm_eig(&h1_matrix)?,
            h1_matrix,
            h2: linalg::herm_eig(&h2_matrix)?,
            h2_matrix,
            psi0,
        })
    }
}

impl PureStateFamily for RandomAnalyticFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn state(&self, x: f64) -> CVector {
        linalg::unitary_evolution(&self.h1, x)
            * (linalg::unitary_evolution(&self.h2, x * x) * &self.psi0)
    }

    fn derivative(&self, x: f64) -> Option<CVector> {
        let inner = linalg::unitary_evolution(&self.h2, x * x) * &self.psi0;
        let u1 = linalg::unitary_evolution(&self.h1, x);
        let first = &self.h1_matrix * (&u1 * &inner);
        let second = &u1 * (&self.h2_matrix * &inner) * re(2.0 * x);
        Some((first + second) * c(0.0, -1.0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Numeric parameters with defaults.
    pub params: &'static [(&'static str, f64)],
}

const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "two-level",
        description: "cos(xΔ/2)|0⟩ + i sin(xΔ/2)|1⟩",
        params: &[("delta", 1.0)],
    },
    CatalogEntry {
        name: "von-neumann",
        description: "qubit ⊗ Hermite–Gaussian meter under x σ_z⊗P",
        params: &[("theta", PI / 3.0), ("sigma", 1.0), ("modes", DEFAULT_MODES as f64)],
    },
    CatalogEntry {
        name: "three-qubit",
        description: "entangled two-qubit A with one-qubit B under x(H_A + H_B)",
        params: &[
            ("omega0", 1.0),
            ("delta_b", 0.1),
            ("theta", PI / 3.0),
            ("p1", 2.0 / 3.0),
        ],
    },
    CatalogEntry {
        name: "random-hamiltonian",
        description: "e^{−ixH₁}e^{−ix²H₂}ψ₀ with seeded random H₁, H₂, ψ₀",
        params: &[("dim", 4.0), ("seed", 0.0)],
    },
    CatalogEntry {
        name: "bipartite-file",
        description: "product or sum bipartite model loaded from a JSON document",
        params: &[],
    },
];

pub fn family_catalog() -> &'static [CatalogEntry] {
    CATALOG
}

#[derive(Debug, Clone)]
pub enum CatalogModel {
    TwoLevel(TwoLevelFamily),
    VonNeumann(VonNeumannModel),
    ThreeQubit(ThreeQubitModel),
    Random(RandomAnalyticFamily),
    Bipartite(BipartiteModel),
}

impl CatalogModel {
    pub fn family(&self) -> &dyn PureStateFamily {
        match self {
            CatalogModel::TwoLevel(m) => m,
            CatalogModel::VonNeumann(m) => m,
            CatalogModel::ThreeQubit(m) => m,
            CatalogModel::Random(m) => m,
            CatalogModel::Bipartite(m) => m,
        }
    }

    pub fn bipartite(&self) -> Option<&BipartiteModel> {
        match self {
            CatalogModel::VonNeumann(m) => Some(m.bipartite()),
            CatalogModel::ThreeQubit(m) => Some(m.bipartite()),
            CatalogModel::Bipartite(m) => Some(m),
            _ => None,
        }
    }
}

fn param(entry: &CatalogEntry, values: &BTreeMap<String, f64>, key: &str) -> f64 {
    values.get(key).copied().unwrap_or_else(|| {
        entry
            .params
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .expect("catalog parameter")
    })
}

fn count(value: f64, key: &str) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidParameter(format!("{key} = {value} is not a count")))
    }
}

/// Build a catalog entry by name. `ratio` on the three-qubit entry overrides
/// `delta_b` so that `δh_B/δh_A = ratio`.
pub fn build_model(
    name: &str,
    values: &BTreeMap<String, f64>,
    path: Option<&Path>,
) -> Result<CatalogModel> {
    let entry = CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "model",
            name: name.into(),
        })?;
    let allowed = |k: &str| entry.params.iter().any(|(p, _)| *p == k) || (name == "three-qubit" && k == "ratio");
    if let Some(extra) = values.keys().find(|k| !allowed(k)) {
        return Err(Error::Unknown {
            kind: "parameter",
            name: format!("{name}.{extra}"),
        });
    }
    let get = |key: &str| param(entry, values, key);
    Ok(match name {
        "two-level" => CatalogModel::TwoLevel(TwoLevelFamily::new(get("delta"))?),
        "von-neumann" => CatalogModel::VonNeumann(VonNeumannModel::new(
            get("theta"),
            get("sigma"),
            count(get("modes"), "modes")?,
        )?),
        "three-qubit" => CatalogModel::ThreeQubit(match values.get("ratio") {
            Some(ratio) => ThreeQubitModel::with_ratio(get("omega0"), get("theta"), get("p1"), *ratio)?,
            None => ThreeQubitModel::new(get("omega0"), get("delta_b"), get("theta"), get("p1"))?,
        }),
        "random-hamiltonian" => CatalogModel::Random(RandomAnalyticFamily::new(
            count(get("dim"), "dim")?,
            count(get("seed"), "seed")? as u64,
        )?),
        "bipartite-file" => {
            let path = path.ok_or_else(|| {
                Error::InvalidParameter("bipartite-file needs a model path".into())
            })?;
            let doc: BipartiteDocument = crate::io::read_json(path)?;
            CatalogModel::Bipartite(doc.model()?)
        }
        _ => unreachable!("catalog names are matched above"),
    })
}

/// A product model from explicit local Hamiltonians and states.
pub fn product_model(h_a: CMatrix, h_b: CMatrix, phi_a: &CVector, phi_b: &CVector) -> Result<BipartiteModel> {
    BipartiteModel::product_state(h_a, h_b, phi_a, phi_b)
}

/// A sum model from explicit local Hamiltonians and an arbitrary state.
pub fn sum_model(h_a: CMatrix, h_b: CMatrix, initial: CVector) -> Result<BipartiteModel> {
    BipartiteModel::new(HamiltonianKind::Sum, h_a, h_b, initial)
}

/// Labels and operators of a POVM built from explicit retained elements.
pub fn povm_from_elements(retained: Vec<(String, CMatrix)>) -> Result<PovmSet> {
    let dim = retained
        .first()
        .map(|(_, m)| m.nrows())
        .ok_or(Error::EmptyRetainedSet)?;
    let total = retained
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, (_, m)| acc + m);
    let labels: Vec<String> = retained.iter().map(|(l, _)| l.clone()).collect();
    let mut elements: Vec<PovmElement> = retained
        .into_iter()
        .map(|(label, operator)| PovmElement { label, operator })
        .collect();
    elements.push(PovmElement {
        label: "discard".into(),
        operator: linalg::identity(dim) - total,
    });
    PovmSet::new(elements, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::StatePoint;
    use approx::assert_relative_eq;

    #[test]
    fn momentum_structure() {
        let sigma = 0.7;
        let p = meter_momentum(sigma, 12).unwrap();
        assert!(linalg::hermiticity_residual(&p) < 1e-15);
        assert_eq!(p[(0, 0)], re(0.0));
        assert_relative_eq!(p[(1, 0)].norm(), 1.0 / (2.0 * sigma), epsilon = 1e-15);
        let v0 = linalg::basis(12, 0);
        let var = (&p * &v0).norm_squared();
        assert_relative_eq!(var, 1.0 / (4.0 * sigma * sigma), epsilon = 1e-14);
        assert!(meter_momentum(sigma, 1).is_err());
    }

    #[test]
    fn evolution_is_a_displaced_gaussian() {
        let model = VonNeumannModel::new(0.0, 1.3, 40).unwrap();
        let x = 0.8;
        let psi = model.state(x);
        // θ = 0: the spin is |0⟩ and the meter shifts by +x
        let alpha: f64 = x / (2.0 * 1.3);
        let mut amp = (-alpha * alpha / 2.0).exp();
        for n in 0..20 {
            assert!((psi[n] - re(amp)).norm() < 1e-12, "mode {n}");
            amp *= alpha / ((n + 1) as f64).sqrt();
        }
        assert!(model.truncation_leakage(x) < 1e-30);
    }

    #[test]
    fn three_qubit_invariants() {
        let m = ThreeQubitModel::new(1.0, 0.3, PI / 3.0, 2.0 / 3.0).unwrap();
        let b = m.bipartite();
        let s = b.structure().unwrap();
        let h = b.h_a();
        for phi in &s.phi_a {
            assert!(linalg::sandwich(phi, h, phi).norm() < 1e-15);
        }
        assert!(linalg::sandwich(&s.phi_a[1], &(h * h), &s.phi_a[1]).norm() < 1e-15);
        assert_relative_eq!(linalg::sandwich(&s.phi_a[0], &(h * h), &s.phi_a[0]).re, 4.0, epsilon = 1e-14);
        assert!(b.orthogonality_residual().unwrap() < 1e-15);
        let (da, db) = b.local_deviations();
        let (ea, eb) = m.analytic_deviations();
        assert_relative_eq!(da, ea, max_relative = 1e-12);
        assert_relative_eq!(db, eb, max_relative = 1e-12);
        let perps = b.perp_states().unwrap();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CVector::from_vec(vec![re(s2), re(0.0), re(0.0), re(-s2)]);
        assert!((perps[0].as_ref().unwrap() - expected).norm() < 1e-15);
        assert!(perps[1].is_none());
    }

    #[test]
    fn ratio_parameterization() {
        let m = ThreeQubitModel::with_ratio(1.0, PI / 3.0, 2.0 / 3.0, 0.25).unwrap();
        let (a, b) = m.bipartite().local_deviations();
        assert_relative_eq!(b / a, 0.25, max_relative = 1e-12);
    }

    #[test]
    fn random_family_derivative() {
        let fam = RandomAnalyticFamily::new(5, 9).unwrap();
        let analytic = StatePoint::evaluate_with(&fam, 0.4, crate::qfi::DerivativeMode::Analytic).unwrap();
        let numeric = StatePoint::evaluate_with(
            &fam,
            0.4,
            crate::qfi::DerivativeMode::FiniteDifference { step: None },
        )
        .unwrap();
        assert!((&analytic.dperp - &numeric.dperp).norm() < 1e-6);
    }

    #[test]
    fn catalog_builds() {
        assert!(family_catalog().len() >= 5);
        let none = BTreeMap::new();
        for entry in family_catalog().iter().filter(|e| e.name != "bipartite-file") {
            let model = build_model(entry.name, &none, None).unwrap();
            let fam = model.family();
            for x in [-0.5, 0.0, 0.3] {
                assert!((fam.state(x).norm() - 1.0).abs() < 1e-12, "{}", entry.name);
            }
        }
        let mut bad = BTreeMap::new();
        bad.insert("nope".to_string(), 1.0);
        assert!(build_model("two-level", &bad, None).is_err());
        assert!(build_model("missing", &none, None).is_err());
        assert!(build_model("bipartite-file", &none, None).is_err());
    }

    #[test]
    fn spin_convention_phase_is_irrelevant() {
        // A global phase on |φ_θ⟩ changes no measurable quantity.
        let model = VonNeumannModel::new(PI / 3.0, 1.0, 20).unwrap();
        let shifted = BipartiteModel::product_state(
            pauli_z(),
            meter_momentum(1.0, 20).unwrap(),
            &(spin_state(PI / 3.0) * c(0.0, 1.0).exp()),
            &linalg::basis(20, 0),
        )
        .unwrap();
        let povm = wva_channel(&model, -PI / 3.0);
        let a = crate::lcc::compression_report(&StatePoint::evaluate(&model, 0.1).unwrap(), &povm).unwrap();
        let b = crate::lcc::compression_report(&StatePoint::evaluate(&shifted, 0.1).unwrap(), &povm).unwrap();
        assert_relative_eq!(a.gamma, b.gamma, epsilon = 1e-12);
        assert_relative_eq!(a.gain, b.gain, max_relative = 1e-12);
    }
}
