//! Randomized verification suites.
//!
//! Trial `t` of a suite draws from a ChaCha8 stream keyed by the run seed, the
//! suite and `t`, so a summary does not depend on thread scheduling or on which
//! other suites ran.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{par_map_range, ExecMode};
use crate::lcc::{self, GaugeSpec};
use crate::linalg::{self, re, CMatrix, CVector};
use crate::models::{self, RandomAnalyticFamily, ThreeQubitModel, TwoLevelFamily};
use crate::povm::{self, Condition, ConditionStatus, PovmElement, PovmSet};
use crate::qfi::{self, Classification, DerivativeMode, OutcomeTerms, PureStateFamily, StatePoint};
use crate::restricted::{self, BipartiteModel, HamiltonianKind};

/// Residual below which a saturation condition counts as holding.
pub const CONDITION_HOLDS: f64 = 1e-9;
/// QFI equality implied by a holding condition, relative to `I(ρ)`.
pub const EQUALITY_IMPLIED: f64 = 1e-7;
/// QFI equality treated as holding, relative to `I(ρ)`.
pub const EQUALITY_HOLDS: f64 = 1e-10;
/// Residual implied by a holding QFI equality.
pub const CONDITION_IMPLIED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Saturation,
    Gauge,
    RhoPerpIdentities,
    Decomposition,
    Monotonicity,
    Completeness,
    FiniteDifference,
    NullLimit,
    Pictures,
    Sensitivity,
    Orthogonality,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Saturation,
        Suite::Gauge,
        Suite::RhoPerpIdentities,
        Suite::Decomposition,
        Suite::Monotonicity,
        Suite::Completeness,
        Suite::FiniteDifference,
        Suite::NullLimit,
        Suite::Pictures,
        Suite::Sensitivity,
        Suite::Orthogonality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Saturation => "saturation",
            Suite::Gauge => "gauge",
            Suite::RhoPerpIdentities => "rho_perp_identities",
            Suite::Decomposition => "decomposition",
            Suite::Monotonicity => "monotonicity",
            Suite::Completeness => "completeness",
            Suite::FiniteDifference => "finite_difference",
            Suite::NullLimit => "null_limit",
            Suite::Pictures => "pictures",
            Suite::Sensitivity => "sensitivity",
            Suite::Orthogonality => "orthogonality",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Unknown {
                kind: "suite",
                name: name.into(),
            })
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Saturation => 500,
            Suite::Gauge => 200,
            Suite::RhoPerpIdentities => 100,
            Suite::Decomposition | Suite::Monotonicity => 200,
            Suite::Completeness | Suite::FiniteDifference | Suite::Pictures => 100,
            Suite::NullLimit => NULL_LIMIT_CASES.len(),
            Suite::Sensitivity => 40,
            Suite::Orthogonality => 100,
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }

    /// Runs `trials` trials (the default count when `None`).
    pub fn run(self, seed: u64, trials: Option<usize>, mode: ExecMode) -> SuiteSummary {
        let trials = trials.unwrap_or_else(|| self.default_trials());
        match self {
            Suite::Saturation => execute(self, seed, trials, mode, saturation_trial),
            Suite::Gauge => execute(self, seed, trials, mode, gauge_trial),
            Suite::RhoPerpIdentities => execute(self, seed, trials, mode, rho_perp_trial),
            Suite::Decomposition => execute(self, seed, trials, mode, decomposition_trial),
            Suite::Monotonicity => execute(self, seed, trials, mode, monotonicity_trial),
            Suite::Completeness => execute(self, seed, trials, mode, completeness_trial),
            Suite::FiniteDifference => execute(self, seed, trials, mode, fd_trial),
            Suite::NullLimit => execute(self, seed, trials, mode, null_limit_trial),
            Suite::Pictures => execute(self, seed, trials, mode, pictures_trial),
            Suite::Sensitivity => execute(self, seed, trials, mode, sensitivity_trial),
            Suite::Orthogonality => execute(self, seed, trials, mode, orthogonality_trial),
        }
    }
}

/// Every suite at its default trial count.
pub fn run_all(seed: u64, mode: ExecMode) -> Vec<SuiteSummary> {
    Suite::ALL.iter().map(|s| s.run(seed, None, mode)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub checks: usize,
    pub skipped: usize,
    /// Largest residual over all checks, each divided by its own tolerance.
    pub max_residual: f64,
    /// Named case counts, e.g. how often each implication was exercised.
    pub tallies: BTreeMap<String, usize>,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.checks > 0
    }
}

#[derive(Debug, Default)]
struct Trial {
    checks: usize,
    skipped: usize,
    worst: f64,
    tallies: BTreeMap<String, usize>,
    failures: Vec<String>,
}

impl Trial {
    /// Records `residual ≤ tol`; NaN counts as a failure.
    fn within(&mut self, residual: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let ratio = residual / tol;
        if ratio.is_nan() || ratio > self.worst {
            self.worst = if ratio.is_nan() { f64::INFINITY } else { ratio };
        }
        if !(residual <= tol) {
            self.failures
                .push(format!("{}: {residual:.3e} > {tol:.1e}", what()));
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.worst = f64::INFINITY;
            self.failures.push(what());
        }
    }

    fn tally(&mut self, key: &str) {
        *self.tallies.entry(key.to_owned()).or_default() += 1;
    }
}

fn trial_rng(seed: u64, suite: Suite, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ suite.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(trial as u64);
    rng
}

fn execute<F>(suite: Suite, seed: u64, trials: usize, mode: ExecMode, body: F) -> SuiteSummary
where
    F: Fn(usize, &mut ChaCha8Rng, &mut Trial) -> Result<()> + Sync + Send,
{
    let outcomes = par_map_range(mode, trials, |t| {
        let mut rng = trial_rng(seed, suite, t);
        let mut trial = Trial::default();
        if let Err(e) = body(t, &mut rng, &mut trial) {
            trial.worst = f64::INFINITY;
            trial.failures.push(format!("error: {e}"));
        }
        trial
    });
    let mut summary = SuiteSummary {
        name: suite.name().into(),
        seed,
        trials,
        checks: 0,
        skipped: 0,
        max_residual: 0.0,
        tallies: BTreeMap::new(),
        counterexamples: Vec::new(),
    };
    for (t, trial) in outcomes.into_iter().enumerate() {
        summary.checks += trial.checks;
        summary.skipped += trial.skipped;
        summary.max_residual = summary.max_residual.max(trial.worst);
        for (k, v) in trial.tallies {
            *summary.tallies.entry(k).or_default() += v;
        }
        summary
            .counterexamples
            .extend(trial.failures.into_iter().map(|detail| Counterexample { trial: t, detail }));
    }
    summary
}

fn pick<T: Copy, R: Rng>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// A random analytic family at a random `x ∈ [−1, 1]`; `None` near stationary
/// points.
fn random_point<R: Rng>(rng: &mut R, dim: usize) -> Result<Option<StatePoint>> {
    let family = RandomAnalyticFamily::new(dim, rng.next_u64())?;
    let x = rng.random_range(-1.0..1.0);
    let point = StatePoint::evaluate(&family, x)?;
    Ok((point.g > 1e-6).then_some(point))
}

fn random_psd<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let a = models::random_complex(rng, rank, dim);
    a.adjoint() * a
}

/// Rescales a PSD matrix so that its largest eigenvalue is `top`.
fn with_top_eigenvalue(m: CMatrix, top: f64) -> Result<CMatrix> {
    let max = linalg::herm_eig(&m)?.max_eigenvalue();
    Ok(m * re(top / max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Generic,
    ImaginaryCross,
    RealCross,
    Orthogonal,
    ComplexLine,
    RealLine,
}

/// Picks a non-negative combination of rank-one projectors whose cross terms
/// cancel along `component` (or entirely when `component` is `None`).
fn cone_element<R: Rng>(
    rng: &mut R,
    point: &StatePoint,
    component: Option<fn(Complex64) -> f64>,
) -> Result<CMatrix> {
    let d = point.dim();
    let draw = |rng: &mut R| {
        let e = linalg::projector(&models::random_state(rng, d));
        let z = OutcomeTerms::new(point, &e).cross;
        (e, z)
    };
    for _ in 0..200 {
        match component {
            Some(f) => {
                let (e1, z1) = draw(rng);
                let (e2, z2) = draw(rng);
                let (a1, a2) = (f(z1), f(z2));
                if a1 * a2 < 0.0 {
                    return Ok(e1 * re(a2.abs()) + e2 * re(a1.abs()));
                }
            }
            None => {
                let (e1, z1) = draw(rng);
                let (e2, z2) = draw(rng);
                let (e3, z3) = draw(rng);
                let m = nalgebra::Matrix2::new(z1.re - z3.re, z2.re - z3.re, z1.im - z3.im, z2.im - z3.im);
                let Some(inv) = m.try_inverse() else { continue };
                let t = inv * nalgebra::Vector2::new(-z3.re, -z3.im);
                let t3 = 1.0 - t[0] - t[1];
                if t[0] > 0.0 && t[1] > 0.0 && t3 > 0.0 {
                    return Ok(e1 * re(t[0]) + e2 * re(t[1]) + e3 * re(t3));
                }
            }
        }
    }
    Err(Error::InvalidParameter("no cancelling combination found".into()))
}

/// PSD element annihilating `|∂⊥ψ⟩ − κ|ψ⟩`.
fn line_element<R: Rng>(rng: &mut R, point: &StatePoint, kappa: Complex64) -> Result<CMatrix> {
    let d = point.dim();
    let u = &point.dperp - &point.psi * kappa;
    let u = linalg::normalized(&u).ok_or_else(|| Error::InvalidParameter("zero kernel".into()))?;
    let p = linalg::identity(d) - linalg::projector(&u);
    let rank = rng.random_range(1..d.max(2));
    Ok(&p * random_psd(rng, d, rank) * &p)
}

fn saturation_element<R: Rng>(rng: &mut R, point: &StatePoint, target: Target) -> Result<CMatrix> {
    let d = point.dim();
    let scale = point.g.sqrt();
    let mut e = match target {
        Target::Generic => {
            let rank = rng.random_range(1..=d);
            random_psd(rng, d, rank)
        }
        Target::ImaginaryCross => cone_element(rng, point, Some(|z| z.im))?,
        Target::RealCross => cone_element(rng, point, Some(|z| z.re))?,
        Target::Orthogonal => cone_element(rng, point, None)?,
        Target::ComplexLine => {
            let kappa = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            line_element(rng, point, kappa * scale)?
        }
        Target::RealLine => {
            let kappa = rng.random_range(-1.0..1.0) * scale;
            line_element(rng, point, re(kappa))?
        }
    };
    let cross_free = matches!(
        target,
        Target::ImaginaryCross | Target::RealCross | Target::Orthogonal
    );
    if cross_free && d >= 3 && rng.random_bool(0.5) {
        // Support orthogonal to both ψ and ∂⊥ψ leaves every scalar unchanged.
        let rest = linalg::identity(d) - point.rho() - point.rho_perp()?;
        e += &rest * random_psd(rng, d, d) * &rest * re(rng.random_range(0.1..1.0));
    }
    with_top_eigenvalue(e, rng.random_range(0.2..1.0))
}

/// `|lhs − rhs|` of the QFI equality paired with each condition.
fn equality_gap(condition: Condition, terms: &OutcomeTerms) -> f64 {
    let outcome = terms.outcome_qfi();
    let post = terms.postselected_qfi();
    match condition {
        Condition::T1 => (terms.joint_qfi() - outcome).abs(),
        Condition::T2 => post.abs(),
        Condition::T3 => terms.classical_fi().abs(),
        Condition::T4 => (terms.probability * post - outcome).abs(),
        Condition::T5 => (terms.classical_fi() - outcome).abs(),
    }
}

fn saturation_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = pick(rng, &[2, 3, 4, 8]);
    let Some(point) = random_point(rng, dim)? else {
        trial.skipped += 1;
        return Ok(());
    };
    let target = pick(
        rng,
        &[
            Target::Generic,
            Target::ImaginaryCross,
            Target::RealCross,
            Target::Orthogonal,
            Target::ComplexLine,
            Target::RealLine,
        ],
    );
    let e = saturation_element(rng, &point, target)?;
    let terms = OutcomeTerms::new(&point, &e);
    if terms.classification() == Classification::Null {
        trial.skipped += 1;
        return Ok(());
    }
    let report = povm::saturation_report(&e, &point, CONDITION_HOLDS)?;
    let qfi = point.qfi();
    for check in &report.checks {
        let name = format!("{:?}", check.condition);
        let gap = equality_gap(check.condition, &terms) / qfi;
        let holds = check.status == ConditionStatus::SatisfiedDegenerate
            || check.normalized <= CONDITION_HOLDS;
        if holds {
            trial.tally(&format!("{name} condition holds"));
            trial.within(gap, EQUALITY_IMPLIED, || {
                format!("trial {t}, d = {dim}: {name} holds but equality gap")
            });
        }
        if gap <= EQUALITY_HOLDS {
            trial.tally(&format!("{name} equality holds"));
            let residual = if check.status == ConditionStatus::SatisfiedDegenerate {
                0.0
            } else {
                check.normalized
            };
            trial.within(residual, CONDITION_IMPLIED, || {
                format!("trial {t}, d = {dim}: {name} equality holds but residual")
            });
        }
    }
    Ok(())
}

fn random_weights<R: Rng>(rng: &mut R, n: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w * total / sum).collect()
}

fn gauge_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = pick(rng, &[2, 3, 4, 6]);
    let Some(point) = random_point(rng, dim)? else {
        trial.skipped += 1;
        return Ok(());
    };
    let outcomes = rng.random_range(1..=3);
    let q = random_weights(rng, outcomes, 1.0);
    let lambda_total = rng.random_range(0.05..0.95);
    let lambda = random_weights(rng, outcomes, lambda_total);
    let kind = rng.random_range(0..3);
    let (gauge, label) = if kind == 1 && outcomes == 1 {
        (GaugeSpec::jenne_gaeta(lambda[0]), "jenne_gaeta")
    } else if kind == 2 && dim >= 3 {
        let rest = linalg::identity(dim) - point.rho() - point.rho_perp()?;
        let raw: Vec<CMatrix> = (0..outcomes)
            .map(|_| &rest * random_psd(rng, dim, dim) * &rest)
            .collect();
        let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, m| acc + m);
        let shrink = rng.random_range(1.0..2.0) * linalg::herm_eig(&total)?.max_eigenvalue();
        let rho = point.rho();
        let ops = raw
            .into_iter()
            .zip(&lambda)
            .map(|(m, l)| &rho * re(*l) + m * re(1.0 / shrink))
            .collect();
        (GaugeSpec::custom(q.clone(), ops), "custom")
    } else {
        (GaugeSpec::scaled_rho(q.clone(), lambda.clone()), "scaled_rho")
    };
    trial.tally(label);
    let povm = lcc::build_lcc(&point, &gauge)?;
    let residuals = lcc::verify_lcc(&point, &povm)?;
    let report = lcc::compression_report(&point, &povm)?;
    let gain: f64 = q.iter().zip(&lambda).map(|(q, l)| q / l).sum();
    let context = |what: &str| format!("trial {t}, d = {dim}, {label}, L = {outcomes}: {what}");
    trial.within(residuals.max(), 1e-9, || context("lossless residual"));
    trial.within(report.gamma.abs(), 1e-8, || context("γ"));
    trial.within(
        (report.capacity - 1.0 / lambda_total).abs() / report.capacity,
        1e-8,
        || context("c − 1/Σλ"),
    );
    trial.within((report.gain - gain).abs() / gain, 1e-8, || context("η − Σq/λ"));
    Ok(())
}

fn rho_perp_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = rng.random_range(2..=6);
    let Some(point) = random_point(rng, dim)? else {
        trial.skipped += 1;
        return Ok(());
    };
    let (rho_perp, cross) = qfi::rho_perp_identities(&point)?;
    let direct_perp = point.rho_perp()?;
    let direct_cross = linalg::outer(&point.dperp, &point.psi);
    trial.within((rho_perp - direct_perp).norm(), 1e-9, || {
        format!("trial {t}, d = {dim}: ρ⊥ identity")
    });
    trial.within((cross - direct_cross).norm(), 1e-9, || {
        format!("trial {t}, d = {dim}: |∂⊥ψ⟩⟨ψ| identity")
    });
    Ok(())
}

fn random_measurement<R: Rng>(rng: &mut R, dim: usize) -> Result<Vec<CMatrix>> {
    let outcomes = rng.random_range(2..=5);
    let mut ranks: Vec<usize> = (0..outcomes).map(|_| rng.random_range(1..=dim)).collect();
    ranks[0] = dim;
    models::random_povm(rng, dim, &ranks)
}

fn decomposition_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = rng.random_range(2..=6);
    let Some(point) = random_point(rng, dim)? else {
        trial.skipped += 1;
        return Ok(());
    };
    let qfi = point.qfi();
    let elements = random_measurement(rng, dim)?;
    let mut total = 0.0;
    for e in &elements {
        let terms = OutcomeTerms::new(&point, e);
        total += terms.outcome_qfi();
        let split = terms.classical_fi() + terms.probability * terms.postselected_qfi();
        trial.within((split - terms.joint_qfi()).abs() / qfi, 1e-9, || {
            format!("trial {t}, d = {dim}: I_cl + p·I_post vs I_joint")
        });
    }
    trial.within((total - qfi).abs() / qfi, 1e-9, || {
        format!("trial {t}, d = {dim}: Σ I_ω vs I")
    });
    Ok(())
}

fn monotonicity_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = rng.random_range(2..=6);
    let Some(point) = random_point(rng, dim)? else {
        trial.skipped += 1;
        return Ok(());
    };
    let qfi = point.qfi();
    let tol = 1e-9;
    let excess = |lower: f64, upper: f64| (lower - upper).max(0.0) / qfi;
    let mut classical_total = 0.0;
    let mut joint_total = 0.0;
    for e in &random_measurement(rng, dim)? {
        let terms = OutcomeTerms::new(&point, e);
        let outcome = terms.outcome_qfi();
        classical_total += terms.classical_fi();
        joint_total += terms.joint_qfi();
        trial.within(excess(terms.classical_fi(), outcome), tol, || {
            format!("trial {t}: I_cl > I_ω")
        });
        trial.within(excess(terms.probability * terms.postselected_qfi(), outcome), tol, || {
            format!("trial {t}: p·I_post > I_ω")
        });
        trial.within(excess(terms.joint_qfi(), outcome), tol, || {
            format!("trial {t}: I_joint > I_ω")
        });
        trial.within(excess(0.0, terms.postselected_qfi()), tol, || {
            format!("trial {t}: I_post < 0")
        });
    }
    trial.within(excess(classical_total, qfi), tol, || format!("trial {t}: Σ I_cl > I"));
    trial.within(excess(joint_total, qfi), tol, || format!("trial {t}: Σ I_joint > I"));
    Ok(())
}

fn labelled(elements: Vec<CMatrix>) -> Vec<PovmElement> {
    elements
        .into_iter()
        .enumerate()
        .map(|(i, operator)| PovmElement {
            label: format!("e{i}"),
            operator,
        })
        .collect()
}

fn completeness_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = rng.random_range(2..=8);
    let elements = random_measurement(rng, dim)?;
    let povm = PovmSet::new(labelled(elements.clone()), ["e0"])?;
    let diagnostics = povm::validate(&povm);
    trial.within(diagnostics.completeness_residual, povm::COMPLETENESS_TOL, || {
        format!("trial {t}, d = {dim}: completeness")
    });
    trial.require(diagnostics.is_valid(), || format!("trial {t}: valid POVM rejected"));
    let kraus = povm::kraus_from(&povm)?;
    trial.within(kraus.completeness_residual(), povm::COMPLETENESS_TOL, || {
        format!("trial {t}, d = {dim}: Kraus completeness")
    });
    let mut corrupted = elements.clone();
    corrupted[0] *= re(1.0 + rng.random_range(1e-3..1e-1));
    let bad = PovmSet::new(labelled(corrupted), ["e0"])?;
    trial.require(!povm::validate(&bad).is_valid(), || {
        format!("trial {t}: overcomplete POVM accepted")
    });
    let mut indefinite = elements;
    let v = models::random_state(rng, dim);
    let shift = linalg::projector(&v) * re(0.2);
    indefinite[0] -= &shift;
    indefinite[1] += &shift;
    let bad = PovmSet::new(labelled(indefinite), ["e0"])?;
    let rejected = !povm::validate(&bad).is_valid();
    if rejected {
        trial.tally("indefinite rejected");
    }
    // Subtracting a projector only breaks positivity when the element's
    // eigenvalue along `v` is small enough, so check against the spectrum.
    let min = linalg::min_eigenvalue(&bad.elements()[0].operator)?;
    trial.require(rejected == (min < -linalg::PSD_FLOOR), || {
        format!("trial {t}: PSD check disagrees with spectrum (min {min:.3e})")
    });
    Ok(())
}

fn fd_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let dim = rng.random_range(2..=6);
    let family = RandomAnalyticFamily::new(dim, rng.next_u64())?;
    let x = rng.random_range(-1.0..1.0);
    let analytic = StatePoint::evaluate_with(&family, x, DerivativeMode::Analytic)?;
    let numeric =
        StatePoint::evaluate_with(&family, x, DerivativeMode::FiniteDifference { step: None })?;
    let scale = analytic.dpsi.norm().max(1.0);
    trial.within((&analytic.dpsi - &numeric.dpsi).norm() / scale, 1e-6, || {
        format!("trial {t}, d = {dim}: derivative")
    });
    trial.within(
        (analytic.qfi() - numeric.qfi()).abs() / analytic.qfi().max(1e-12),
        1e-6,
        || format!("trial {t}, d = {dim}: QFI"),
    );
    Ok(())
}

/// `(Δ, x)` pairs probed by the null-limit suite.
pub const NULL_LIMIT_CASES: [(f64, f64); 9] = [
    (0.5, -0.3),
    (0.5, 0.0),
    (0.5, 1.0),
    (1.0, -0.3),
    (1.0, 0.0),
    (1.0, 1.0),
    (2.0, -0.3),
    (2.0, 0.0),
    (2.0, 1.0),
];

/// Offsets `x* − x` approaching the null element `ρ⊥_x`.
pub const NULL_LIMIT_OFFSETS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Relative gaps `(I_ω(ρ⊥_x) − I_cl(ρ⊥_{x*}))/I_ω(ρ⊥_x)` for each offset.
pub fn null_limit_gaps(delta: f64, x: f64) -> Result<Vec<(f64, Classification)>> {
    let family = TwoLevelFamily::new(delta)?;
    let point = StatePoint::evaluate(&family, x)?;
    let limit = qfi::outcome_qfi(&point, &point.rho_perp()?)?;
    NULL_LIMIT_OFFSETS
        .iter()
        .map(|off| {
            let e = StatePoint::evaluate(&family, x + off)?.rho_perp()?;
            let terms = OutcomeTerms::new(&point, &e);
            Ok(((limit - qfi::classical_fi(&point, &e)?) / limit, terms.classification()))
        })
        .collect()
}

/// Resolution of the relative gap near a null element: `p` carries an
/// absolute rounding error of order 1e−16, which is 1e−7 relative at the
/// smallest offsets.
pub const NULL_LIMIT_FLOOR: f64 = 1e-7;

fn null_limit_trial(t: usize, _rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let (delta, x) = NULL_LIMIT_CASES[t % NULL_LIMIT_CASES.len()];
    let gaps = null_limit_gaps(delta, x)?;
    for (i, (gap, class)) in gaps.iter().enumerate() {
        trial.require(*class == Classification::Regular, || {
            format!("Δ = {delta}, x = {x}: offset {i} already null")
        });
        trial.require(*gap >= -NULL_LIMIT_FLOOR, || {
            format!("Δ = {delta}, x = {x}: I_cl overshoots at offset {i} ({gap:.3e})")
        });
        if i > 0 {
            let previous = gaps[i - 1].0.max(NULL_LIMIT_FLOOR);
            trial.require(*gap < previous, || {
                format!("Δ = {delta}, x = {x}: gap not decreasing at offset {i}")
            });
        }
    }
    let last = gaps.last().map(|g| g.0.abs()).unwrap_or(f64::NAN);
    trial.within(last, 1e-4, || format!("Δ = {delta}, x = {x}: final gap"));
    Ok(())
}

fn pictures_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let (d_a, d_b) = (rng.random_range(2..=3), rng.random_range(2..=3));
    let kind = if rng.random_bool(0.5) {
        HamiltonianKind::Product
    } else {
        HamiltonianKind::Sum
    };
    let h_a = models::random_hermitian(rng, d_a);
    let h_b = models::random_hermitian(rng, d_b);
    let initial = models::random_state(rng, d_a * d_b);
    let model = BipartiteModel::new(kind, h_a, h_b, initial)?;
    let x = rng.random_range(-1.0..1.0);
    if model.point(x)?.g < 1e-6 {
        trial.skipped += 1;
        return Ok(());
    }
    let elements = random_measurement(rng, d_a)?;
    let povm = PovmSet::new(labelled(elements), ["e0"])?;
    let reduced = restricted::restricted_report(&model, x, &povm)?;
    let lifted = restricted::lifted_report(&model, x, &povm)?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    let context = |what: &str| format!("trial {t}, {kind:?} {d_a}×{d_b}: {what}");
    trial.within(rel(reduced.gamma, lifted.gamma), 1e-9, || context("γ"));
    trial.within(rel(reduced.capacity, lifted.capacity), 1e-9, || context("c"));
    trial.within(rel(reduced.gain, lifted.gain), 1e-9, || context("η"));
    trial.within(rel(reduced.qfi, lifted.qfi), 1e-9, || context("I(ρ)"));
    Ok(())
}

/// `x' ↦ K|ψ_{x'}⟩/‖K|ψ_{x'}⟩‖` for a fixed Kraus operator.
pub struct Postselected<'a, F: ?Sized> {
    pub family: &'a F,
    pub kraus: CMatrix,
}

impl<F: PureStateFamily + ?Sized> PureStateFamily for Postselected<'_, F> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn state(&self, x: f64) -> CVector {
        let v = &self.kraus * self.family.state(x);
        let n = v.norm();
        v / re(n)
    }
}

/// Largest deviation between the amplified derivative and a Richardson
/// difference of the normalized postselected state, relative to `max(1, ‖∂ψ‖)`.
pub fn sensitivity_discrepancy<F: PureStateFamily + ?Sized>(
    family: &F,
    x: f64,
    q: f64,
    lambda: f64,
) -> Result<f64> {
    let point = StatePoint::evaluate(family, x)?;
    let kraus = lcc::sensitivity_kraus(&point, q, lambda)?;
    let analytic = lcc::postselected_sensitivity(&point, q, lambda)?;
    let numeric = qfi::finite_difference(&Postselected { family, kraus }, x, None)?;
    Ok((analytic - numeric).norm() / point.dpsi.norm().max(1.0))
}

fn sensitivity_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let x = rng.random_range(-1.0..1.0);
    let lambda = pick(rng, &[0.1, 0.25]);
    if t.is_multiple_of(2) {
        let delta = pick(rng, &[0.5, 1.0, 2.0]);
        let family = TwoLevelFamily::new(delta)?;
        let d = sensitivity_discrepancy(&family, x, 1.0, lambda)?;
        trial.within(d, 1e-6, || format!("two-level Δ = {delta}, x = {x}, λ = {lambda}"));
    } else {
        let dim = rng.random_range(2..=5);
        let family = RandomAnalyticFamily::new(dim, rng.next_u64())?;
        if StatePoint::evaluate(&family, x)?.g < 1e-6 {
            trial.skipped += 1;
            return Ok(());
        }
        let d = sensitivity_discrepancy(&family, x, 1.0, lambda)?;
        trial.within(d, 1e-6, || format!("random d = {dim}, x = {x}, λ = {lambda}"));
    }
    Ok(())
}

fn orthogonality_trial(t: usize, rng: &mut ChaCha8Rng, trial: &mut Trial) -> Result<()> {
    let omega0 = rng.random_range(0.2..2.0);
    let delta = rng.random_range(0.01..2.0);
    let theta = rng.random_range(0.0..std::f64::consts::PI);
    let p1 = rng.random_range(0.05..0.95);
    let model = ThreeQubitModel::new(omega0, delta, theta, p1)?;
    let bip = model.bipartite();
    let context = |what: &str| format!("trial {t}, θ = {theta:.3}, p₁ = {p1:.3}: {what}");
    let ledger = bip
        .orthogonality_residual()
        .ok_or_else(|| Error::ModelInvariant("three-qubit model lost its structure".into()))?;
    trial.within(ledger, 1e-9, || context("orthogonality ledger"));
    let perps: Vec<CVector> = bip.perp_states()?.into_iter().flatten().collect();
    for (i, a) in perps.iter().enumerate() {
        for (j, b) in perps.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            trial.within((linalg::inner(a, b) - re(target)).norm(), 1e-9, || {
                context("perpendicular states")
            });
        }
    }
    let (da, db) = model.analytic_deviations();
    let (na, nb) = bip.local_deviations();
    trial.within((da - na).abs() / da, 1e-9, || context("δh_A"));
    trial.within((db - nb).abs() / db.max(1e-12), 1e-9, || context("δh_B"));
    Ok(())
}
