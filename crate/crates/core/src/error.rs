use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (‖M − M†‖ = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not PSD (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge for dimension {dim}")]
    EigenNoConvergence { dim: usize },

    #[error("state is not normalized at x = {x}: ‖ψ‖² − 1 = {deviation:.3e}")]
    NotNormalized { x: f64, deviation: f64 },

    #[error("finite-difference derivative unreliable at x = {x}: Richardson disagreement {disagreement:.3e}")]
    DerivativeQuality { x: f64, disagreement: f64 },

    #[error("stationary point, ρ^⊥ undefined (g = {g:.3e})")]
    StationaryPoint { g: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("null retained outcome `{label}` (p = {probability:.3e})")]
    NullRetainedOutcome { label: String, probability: f64 },

    #[error("no retained outcomes")]
    EmptyRetainedSet,

    #[error("gauge operator `{label}` violates the gauge conditions: ⟨ψ⊥|Λ|ψ⊥⟩ = {perp_perp:.3e}, |⟨ψ⊥|Λ|ψ⟩| = {perp_psi:.3e}, ⟨ψ|Λ|ψ⟩ = {lambda:.6}")]
    GaugeViolation {
        label: String,
        perp_perp: f64,
        perp_psi: f64,
        lambda: f64,
    },

    #[error("gauge makes element `{label}` non-positive (min eigenvalue {min_eigenvalue:.3e})")]
    NonPositiveElement { label: String, min_eigenvalue: f64 },

    #[error("zero QFI model (Tr ρ₀H² = {variance:.3e})")]
    ZeroQfiModel { variance: f64 },

    #[error("neither local Hamiltonian has zero mean on the initial state; apply gauge_shift first")]
    GaugeShiftRequired,

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
