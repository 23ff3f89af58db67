//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so every line is printed; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use lcc_core::exec::ExecMode;
use lcc_core::lcc::{compression_report, postselected_sensitivity, sensitivity_kraus, two_level_lcc};
use lcc_core::linalg::{self, CMatrix, CVector};
use lcc_core::models::{
    meter_lcc_channel, qubit_lcc_channel, wva_channel, RandomAnalyticFamily, ThreeQubitModel, TwoLevelFamily,
    VonNeumannModel,
};
use lcc_core::povm::PovmSet;
use lcc_core::qfi::{classical_fi, PureStateFamily, StatePoint};
use lcc_core::restricted::{loglog_slope, restricted_report};
use lcc_core::suites::{self, Suite, SuiteSummary};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> Outcome;

/// `(Var ρ H)^{1/2}`
fn deviation(rho: &CMatrix, h: &CMatrix) -> f64 {
    let mean = linalg::trace(&(rho * h)).re;
    let second = linalg::trace(&(rho * h * h)).re;
    (second - mean * mean).max(0.0).sqrt()
}

fn c1_two_level() -> Outcome {
    let mut worst = [0.0f64; 4];
    let mut count = 0;
    for delta in [0.5, 1.0, 2.0] {
        let family = TwoLevelFamily::new(delta).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.3, 1.0] {
            let point = StatePoint::evaluate(&family, x).unwrap();
            for lambda in [0.1, 0.25, 0.5] {
                let povm = PovmSet::binary(two_level_lcc(x, delta, lambda)).unwrap();
                let r = compression_report(&point, &povm).unwrap();
                let target = 1.0 / lambda;
                let values = [
                    r.gamma.abs(),
                    (r.capacity - target).abs() / r.capacity,
                    (r.gain - target).abs() / r.gain,
                    r.residuals.max(),
                ];
                for (w, v) in worst.iter_mut().zip(values) {
                    *w = w.max(v);
                }
                count += 1;
            }
        }
    }
    outcome(
        count == 45 && worst.iter().all(|w| *w <= 1e-9),
        format!(
            "{count} cases, max |γ| {:.2e}, max rel c err {:.2e}, max rel η err {:.2e}, max residual {:.2e} (tol 1e-9)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn c2_von_neumann_qfi() -> Outcome {
    let model = VonNeumannModel::new(PI / 3.0, 1.0, 40).unwrap();
    let worst = (0..=20)
        .map(|i| -0.5 + 0.05 * i as f64)
        .map(|x| (StatePoint::evaluate(&model, x).unwrap().qfi() - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-8,
        format!("21 points |x| ≤ 0.5, N = 40, σ = 1: max |I − 1/σ²|/(1/σ²) = {worst:.2e} (tol 1e-8)"),
    )
}

fn c3_meter_figure() -> Outcome {
    let theta = PI / 3.0;
    let x = 1e-4;
    let model = VonNeumannModel::new(theta, 1.0, 40).unwrap();
    let point = StatePoint::evaluate(&model, x).unwrap();

    let qubit = compression_report(&point, &qubit_lcc_channel(&model, 0.0)).unwrap();
    let qubit_ok = 1.0 - qubit.gamma >= 1.0 - 1e-6 && (qubit.gain - 4.0).abs() <= 1e-4;

    let wva = compression_report(&point, &wva_channel(&model, -2.0 * PI / 3.0 + 1e-2)).unwrap();
    let wva_expected = 1.0 - (theta + 5e-3).cos().powi(2);
    let wva_ok = ((1.0 - wva.gamma) - wva_expected).abs() <= 1e-4;

    let eps = 1e-4;
    let meter = compression_report(&point, &meter_lcc_channel(&model, eps).unwrap()).unwrap();
    let meter_ok = 1.0 - meter.gamma >= 1.0 - 1e-5;

    let verdict = |ok: bool| if ok { "ok" } else { "FAIL" };
    outcome(
        qubit_ok && wva_ok && meter_ok,
        format!(
            "qubit 1−γ = {:.9}, η = {:.6} [{}]; wva 1−γ = {:.6} vs {:.6} [{}]; meter 1−γ = {:.7} (need ≥ {}) [{}], \
             c = {:.4e}, c·ε = {:.4}, c·ε² = {:.3e}",
            1.0 - qubit.gamma,
            qubit.gain,
            verdict(qubit_ok),
            1.0 - wva.gamma,
            wva_expected,
            verdict(wva_ok),
            1.0 - meter.gamma,
            1.0 - 1e-5,
            verdict(meter_ok),
            meter.capacity,
            meter.capacity * eps,
            meter.capacity * eps * eps,
        ),
    )
}

fn c4_three_qubit() -> Outcome {
    let (x, eps) = (1e-5, 1e-4);
    let ratios: Vec<f64> = (0..41).map(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 40.0)).collect();
    let mut worst = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut loss_term = Vec::new();
    for &ratio in &ratios {
        let m = ThreeQubitModel::with_ratio(1.0, PI / 3.0, 2.0 / 3.0, ratio).unwrap();
        let b = m.bipartite();
        let da = deviation(&b.initial_rho_a(), b.h_a());
        let db = deviation(&b.initial_rho_b(), b.h_b());
        worst_ratio = worst_ratio.max((db / da - ratio).abs() / ratio);
        let kept = da * da / (da * da + db * db);
        let report = restricted_report(b, x, &m.channel(eps, x).unwrap()).unwrap();
        worst = worst.max(((1.0 - report.gamma) - kept).abs());
        loss_term.push((db / da, report.gamma));
    }
    let exponent = loglog_slope(&loss_term).unwrap_or(f64::NAN);
    let bound = 1e-6 + 2.0 * eps;
    outcome(
        worst <= bound && (exponent - 2.0).abs() <= 0.1 && worst_ratio < 1e-9,
        format!(
            "41 log ratios in [0.01, 1]: max |(1−γ) − δh_A²/(δh_A²+δh_B²)| = {worst:.2e} (tol {bound:.1e}), \
             fitted exponent {exponent:.4} (2 ± 0.1)"
        ),
    )
}

fn suite_line(s: &SuiteSummary) -> String {
    format!(
        "{} trials, {} checks, {} skipped, {} counterexamples, max residual/tol {:.2e}",
        s.trials,
        s.checks,
        s.skipped,
        s.counterexamples.len(),
        s.max_residual
    )
}

fn suite_check(suite: Suite, trials: usize) -> Outcome {
    let s = suite.run(0, None, ExecMode::Parallel);
    let mut detail = suite_line(&s);
    if let Some(c) = s.counterexamples.first() {
        detail.push_str(&format!("; first at trial {}: {}", c.trial, c.detail));
    }
    outcome(s.passed() && s.trials == trials && s.skipped == 0, detail)
}

fn c5_saturation() -> Outcome {
    let pinned = suites::CONDITION_HOLDS == 1e-9
        && suites::EQUALITY_IMPLIED == 1e-7
        && suites::EQUALITY_HOLDS == 1e-10
        && suites::CONDITION_IMPLIED == 1e-6;
    let o = suite_check(Suite::Saturation, 500);
    outcome(o.pass && pinned, format!("{} (thresholds 1e-9/1e-7, 1e-10/1e-6)", o.detail))
}

fn c6_gauge() -> Outcome {
    suite_check(Suite::Gauge, 200)
}

fn c7_rho_perp() -> Outcome {
    suite_check(Suite::RhoPerpIdentities, 100)
}

fn c8_null_limit() -> Outcome {
    let mut monotone = true;
    let mut final_gap = 0.0f64;
    for delta in [0.5, 1.0, 2.0] {
        let family = TwoLevelFamily::new(delta).unwrap();
        for x in [-0.3, 0.0, 1.0] {
            let point = StatePoint::evaluate(&family, x).unwrap();
            let target = point.qfi();
            let mut prev = f64::INFINITY;
            for offset in [1e-2, 1e-3, 1e-4] {
                let star = StatePoint::evaluate(&family, x + offset).unwrap();
                let fi = classical_fi(&point, &star.rho_perp().unwrap()).unwrap();
                let gap = (target - fi).abs() / target;
                monotone &= gap < prev;
                prev = gap;
            }
            final_gap = final_gap.max(prev);
        }
    }
    outcome(
        monotone && final_gap < 1e-4,
        format!("9 (Δ, x) cases, offsets 1e-2, 1e-3, 1e-4: monotone = {monotone}, max final rel gap {final_gap:.2e} (tol 1e-4)"),
    )
}

/// `(N(x+h) − N(x−h))/2h` with `N(y) = Kψ_y/‖Kψ_y‖`.
fn postselected_fd(family: &dyn PureStateFamily, k: &CMatrix, x: f64, h: f64) -> CVector {
    let normalized = |y: f64| {
        let v = k * family.state(y);
        let n = v.norm();
        v / linalg::re(n)
    };
    (normalized(x + h) - normalized(x - h)) / linalg::re(2.0 * h)
}

fn c9_sensitivity() -> Outcome {
    let families: Vec<(&str, Box<dyn PureStateFamily>)> = vec![
        ("two-level", Box::new(TwoLevelFamily::new(1.0).unwrap())),
        ("random d=4", Box::new(RandomAnalyticFamily::new(4, 0).unwrap())),
        ("random d=6", Box::new(RandomAnalyticFamily::new(6, 1).unwrap())),
    ];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (_, family) in &families {
        for x in [-0.4, 0.1, 0.7] {
            let point = StatePoint::evaluate(family.as_ref(), x).unwrap();
            for lambda in [0.1, 0.25] {
                let k = sensitivity_kraus(&point, 1.0, lambda).unwrap();
                let analytic = postselected_sensitivity(&point, 1.0, lambda).unwrap();
                let fd = postselected_fd(family.as_ref(), &k, x, 1e-5);
                worst = worst.max((analytic - fd).norm());
                cases += 1;
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("{cases} cases, q = 1, λ ∈ {{0.1, 0.25}}: max ‖analytic − finite difference‖ = {worst:.2e} (tol 1e-6)"),
    )
}

fn run_cli(config: &std::path::Path, seed: u64) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lcc"))
        .args(["run", "--seed", &seed.to_string(), "--config"])
        .arg(config)
        .output()
        .expect("spawn lcc");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8"))
}

fn body(csv: &str) -> &str {
    csv.split_once('\n').map_or("", |(first, rest)| {
        assert!(first.starts_with("# {"));
        rest
    })
}

fn c10_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("lcc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let seeded = dir.join("random.json");
    std::fs::write(
        &seeded,
        r#"{
            "model": {"name": "random-hamiltonian", "params": {"dim": 5}},
            "channels": [{"name": "scaled-rho-lcc", "params": {"x_star": 0.2}}, {"name": "jenne-gaeta-lcc"}],
            "sweep": {"variable": "x", "grid": {"linear": {"start": -0.5, "stop": 0.5, "points": 21}}},
            "outputs": ["gamma", "c", "eta", "p_check", "I_rho", "I_post", "residuals"]
        }"#,
    )
    .unwrap();
    let meter_channels = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/meter-channels.json");
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, path) in [("meter-channels", meter_channels.as_path()), ("random", seeded.as_path())] {
        let (code_a, a) = run_cli(path, 7);
        let (code_b, b) = run_cli(path, 7);
        let same = code_a == 0 && code_b == 0 && !body(&a).is_empty() && body(&a) == body(&b);
        pass &= same;
        notes.push(format!("{name}: {} body lines identical = {same}", body(&a).lines().count()));
    }
    let (_, other) = run_cli(&seeded, 8);
    let (_, again) = run_cli(&seeded, 7);
    let seed_matters = body(&other) != body(&again);
    pass &= seed_matters;
    notes.push(format!("seed 8 differs from seed 7 = {seed_matters}"));
    std::fs::remove_dir_all(&dir).ok();
    outcome(pass, notes.join("; "))
}

fn main() {
    let criteria: [(usize, &str, Check, Duration); 10] = [
        (1, "two-level exact LCC", c1_two_level, Duration::from_secs(1)),
        (2, "meter model QFI baseline", c2_von_neumann_qfi, Duration::from_secs(1)),
        (3, "qubit, weak-value and meter channels at x = 1e-4", c3_meter_figure, Duration::from_secs(10)),
        (4, "three-qubit loss scaling", c4_three_qubit, Duration::from_secs(5)),
        (5, "saturation condition equivalences", c5_saturation, Duration::from_secs(30)),
        (6, "gauge construction soundness", c6_gauge, Duration::from_secs(10)),
        (7, "perpendicular projector identities", c7_rho_perp, Duration::from_secs(5)),
        (8, "null measurement limit", c8_null_limit, Duration::from_secs(1)),
        (9, "amplified sensitivity", c9_sensitivity, Duration::from_secs(1)),
        (10, "deterministic run output", c10_determinism, Duration::from_secs(5)),
    ];
    let mut failed = Vec::new();
    for (n, name, check, limit) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed < limit;
        println!(
            "{} criterion {n}: {name}: {} [{:.3} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: {} of 10 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
