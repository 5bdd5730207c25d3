//! Acceptance criteria, one line per criterion:
//! `criterion N PASS|FAIL  <description>  (<detail>, <seconds>s)`.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use stark_toric::dynamics::{flow_equivalence, measure_period, torus_act, IntegratorSpec};
use stark_toric::elliptic::{
    log_k_second_difference, satisfies_interpolation_bound, EllipticModulus,
};
use stark_toric::levi_civita::{
    conformal_factor, energy_minus, lc_lift, regularized_energy, RegularizedState,
};
use stark_toric::periods::{period, period_oracle, tau1, tau2, OscillatorSelector, SliceEnergy};
use stark_toric::quadrature::QuadratureSpec;
use stark_toric::stark_model::{hamiltonian, FieldStrength, HillMap};
use stark_toric::toric_profile::{action_spec, profile_sample, verify_convexity};

use OscillatorSelector::{Minus, Plus};

type Outcome = Result<String, String>;

/// Name, runtime budget and check.
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn fs(e: f64) -> FieldStrength {
    FieldStrength::new(e).expect("positive field strength")
}

fn se(c: f64) -> SliceEnergy {
    SliceEnergy::new(c).expect("nonnegative slice energy")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// A state on the zero level with the given `(z₁, z₂, w₂)`.
fn zero_level_state(eps: FieldStrength, z1: f64, z2: f64, w2: f64) -> RegularizedState {
    let e2 = energy_minus(z2, w2, eps);
    let w1 = (2.0 * (2.0 - e2) - z1 * z1 - eps.value() * z1.powi(4)).sqrt();
    RegularizedState::new([z1, z2], [w1, w2])
}

fn convexity_certificates() -> Outcome {
    let mut worst = 0.0f64;
    let mut min_f = f64::INFINITY;
    for e in [0.005, 0.01, 0.02, 0.04, 0.06, 0.0624] {
        let cert = verify_convexity(fs(e), 201, 1e-4).map_err(|err| format!("eps {e}: {err}"))?;
        if !cert.passed() {
            return Err(format!(
                "eps {e}: min f'' {:.3e}, residual {:.3e}",
                cert.min_f_second, cert.max_fd_residual
            ));
        }
        worst = worst.max(cert.max_fd_residual);
        min_f = min_f.min(cert.min_f_second);
    }
    check(
        min_f > 0.0 && worst <= 1e-4,
        format!("min f'' {min_f:.3e}, max residual {worst:.3e}"),
    )
}

fn log_convexity_of_k() -> Outcome {
    let n = 500;
    let (lo, hi) = (-10.0, 0.99);
    let mut min_diff = f64::INFINITY;
    for k in 0..n {
        let m = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        let m = EllipticModulus::new(m).map_err(|e| e.to_string())?;
        let d = log_k_second_difference(m, 1e-3).map_err(|e| e.to_string())?;
        min_diff = min_diff.min(d);
        if !satisfies_interpolation_bound(m, 1e-9).map_err(|e| e.to_string())? {
            return Err(format!("interpolation bound fails at m = {}", m.value()));
        }
    }
    check(
        min_diff > 0.0,
        format!("min second difference of ln K {min_diff:.3e}"),
    )
}

fn period_grid() -> Vec<(f64, f64)> {
    let eps = linspace(0.01, 0.06, 5);
    let cs = linspace(0.2, 2.0, 5);
    eps.iter()
        .flat_map(|&e| cs.iter().map(move |&c| (e, c)))
        .collect()
}

fn periods_against_flow() -> Outcome {
    let spec = IntegratorSpec::default();
    let mut worst = 0.0f64;
    for (e, c) in period_grid() {
        for sel in [Plus, Minus] {
            let tau = period(fs(e), se(c), sel).map_err(|err| err.to_string())?;
            let measured =
                measure_period(fs(e), se(c), sel, &spec).map_err(|err| err.to_string())?;
            worst = worst.max(((measured - tau) / tau).abs());
        }
    }
    check(worst <= 1e-6, format!("max relative error {worst:.3e}"))
}

fn periods_against_quadrature() -> Outcome {
    let spec = QuadratureSpec::new(1e-13, 1e-13, 40).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (e, c) in period_grid() {
        for sel in [Plus, Minus] {
            let tau = period(fs(e), se(c), sel).map_err(|err| err.to_string())?;
            let oracle = period_oracle(fs(e), se(c), sel, &spec).map_err(|err| err.to_string())?;
            worst = worst.max(((oracle - tau) / tau).abs());
        }
    }
    check(worst <= 1e-9, format!("max relative error {worst:.3e}"))
}

fn flow_equivalence_criterion() -> Outcome {
    let eps = fs(0.05);
    let states = [
        zero_level_state(eps, 0.7, 1.1, -0.4),
        zero_level_state(eps, -1.0, 0.5, 0.9),
        zero_level_state(eps, 0.4, -1.3, 0.2),
    ];
    let mut worst = 0.0f64;
    for s in &states {
        let d =
            flow_equivalence(s, eps, &IntegratorSpec::default(), 5.0).map_err(|e| e.to_string())?;
        worst = worst.max(d);
    }
    check(worst <= 1e-5, format!("max deviation {worst:.3e}"))
}

fn ball_degeneration() -> Outcome {
    let prof = profile_sample(fs(1e-6), 64, &action_spec()).map_err(|e| e.to_string())?;
    let line = prof
        .samples
        .iter()
        .map(|p| (p.x + p.y - 4.0 * PI).abs())
        .fold(0.0, f64::max);
    let f_max = prof.second_derivs.iter().copied().fold(0.0, f64::max);
    let f_min = prof
        .second_derivs
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    check(
        prof.len() == 64 && line <= 1e-3 && f_min > 0.0 && f_max <= 1e-3,
        format!("max |x+y-4pi| {line:.3e}, f'' in [{f_min:.3e}, {f_max:.3e}]"),
    )
}

fn harmonic_limits() -> Outcome {
    let mut worst_formula = 0.0f64;
    for e in [1e-6, 0.005, 0.01, 0.02, 0.04, 0.05, 0.06, 0.0624, 0.3, 1.0] {
        let t2 = tau2(fs(e), se(0.0)).map_err(|err| err.to_string())?;
        for t in [tau1(fs(e), se(0.0)), t2] {
            worst_formula = worst_formula.max(((t - 2.0 * PI) / (2.0 * PI)).abs());
        }
    }
    let spec = IntegratorSpec::default();
    let mut worst_flow = 0.0f64;
    for e in [0.01, 0.05] {
        for sel in [Plus, Minus] {
            let p = measure_period(fs(e), se(1e-6), sel, &spec).map_err(|err| err.to_string())?;
            worst_flow = worst_flow.max((p - 2.0 * PI).abs());
        }
    }
    check(
        worst_formula <= 1e-12 && worst_flow <= 1e-5,
        format!("formula {worst_formula:.3e} relative, flow {worst_flow:.3e}"),
    )
}

fn torus_periodicity() -> Outcome {
    let eps = fs(0.05);
    let spec = IntegratorSpec::default();
    let dist = |a: &RegularizedState, b: &RegularizedState| {
        a.to_array()
            .iter()
            .zip(b.to_array())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let act = |t1: f64, t2: f64, s: &RegularizedState| {
        torus_act(t1, t2, s, eps, &spec).map_err(|e| e.to_string())
    };
    let mut period_err = 0.0f64;
    let mut comp_err = 0.0f64;
    for s in [
        zero_level_state(eps, 0.7, 1.1, -0.4),
        zero_level_state(eps, -1.0, 0.5, 0.9),
    ] {
        period_err = period_err.max(dist(&act(1.0, 0.0, &s)?, &s));
        period_err = period_err.max(dist(&act(0.0, 1.0, &s)?, &s));
        let stepwise = act(0.25, 0.8, &act(0.3, 0.45, &s)?)?;
        let direct = act(0.55, 1.25, &s)?;
        comp_err = comp_err.max(dist(&stepwise, &direct));
    }
    check(
        period_err <= 1e-6 && comp_err <= 2e-6,
        format!("period return {period_err:.3e}, composition {comp_err:.3e}"),
    )
}

fn pullback_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_57a4);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let r = rng.gen_range(0.1..=3.0);
        let th = rng.gen_range(0.0..2.0 * PI);
        let s = RegularizedState::new(
            [r * f64::cos(th), r * f64::sin(th)],
            [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
        );
        let eps = fs(rng.gen_range(1e-4..0.0624));
        let reg = regularized_energy(&s, eps);
        let planar = lc_lift(&s).map_err(|e| e.to_string())?;
        let pulled =
            conformal_factor(&s) * (hamiltonian(&planar, eps).map_err(|e| e.to_string())? + 0.5);
        worst = worst.max((reg - pulled).abs() / (1.0 + reg.abs()));
    }
    check(worst <= 1e-12, format!("max relative mismatch {worst:.3e}"))
}

fn hill_decomposition() -> Outcome {
    let mut counts = Vec::new();
    for e in [0.01, 0.05] {
        let map = HillMap::compute_stable(fs(e), 256, 2048).map_err(|err| err.to_string())?;
        counts.push(map.component_count());
    }
    let mut codes = Vec::new();
    for e in ["0.0625", "0.2"] {
        let out = Command::new(env!("CARGO_BIN_EXE_stark-toric"))
            .args(["hill", "--eps", e, "--out", "-"])
            .output()
            .map_err(|err| err.to_string())?;
        codes.push(out.status.code());
    }
    check(
        counts == [2, 2] && codes == [Some(2), Some(2)],
        format!("components {counts:?}, exit codes at eps >= 1/16 {codes:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "convexity certificates",
            Duration::from_secs(10),
            convexity_certificates,
        ),
        (
            "log-convexity of K",
            Duration::from_secs(5),
            log_convexity_of_k,
        ),
        (
            "formula vs flow periods",
            Duration::from_secs(60),
            periods_against_flow,
        ),
        (
            "formula vs quadrature periods",
            Duration::from_secs(5),
            periods_against_quadrature,
        ),
        (
            "Levi-Civita flow equivalence",
            Duration::from_secs(30),
            flow_equivalence_criterion,
        ),
        (
            "ball degeneration",
            Duration::from_secs(300),
            ball_degeneration,
        ),
        ("harmonic limits", Duration::from_secs(300), harmonic_limits),
        (
            "torus action periodicity",
            Duration::from_secs(300),
            torus_periodicity,
        ),
        (
            "pullback identity",
            Duration::from_secs(300),
            pullback_identity,
        ),
        (
            "Hill decomposition",
            Duration::from_secs(300),
            hill_decomposition,
        ),
    ];

    let total = Instant::now();
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget of {}s", budget.as_secs())),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}  {name}  ({detail}, {:.2}s)",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    let total = total.elapsed();
    println!(
        "acceptance: {} of {} criteria passed in {:.2}s",
        criteria.len() - failures,
        criteria.len(),
        total.as_secs_f64()
    );
    if failures == 0 && total <= Duration::from_secs(300) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
