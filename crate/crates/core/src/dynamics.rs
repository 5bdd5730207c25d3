//! Symplectic integration of the planar Stark flow and of the regularized,
//! separated oscillator flows.
//!
//! Every system here is separable, `H = |p|²/2 + U(x)`, so one leapfrog step
//! is kick–drift–kick and the fourth-order scheme is Yoshida's triple-jump
//! composition of leapfrog steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levi_civita::{
    conformal_factor, energy_minus, energy_plus, lc_lift, regularized_energy, RegularizedState,
};
use crate::periods::{period, turning_point, OscillatorSelector, SliceEnergy};
use crate::stark_model::{FieldStrength, PlanarState};

/// Collision cutoff for the unregularized integrator.
pub const DEFAULT_COLLISION_CUTOFF: f64 = 1e-3;

/// Tolerance on the crossing time when refining a section crossing.
const SECTION_TIME_TOL: f64 = 1e-10;

/// Largest `|E_ε(s₀)|` accepted as lying on the zero level.
const LEVEL_SET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    Leapfrog2,
    Yoshida4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    step: f64,
    scheme: Scheme,
    max_steps: usize,
}

impl IntegratorSpec {
    pub fn new(step: f64, scheme: Scheme, max_steps: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!(
                "integration step must be positive, got {step}"
            )));
        }
        if max_steps == 0 {
            return Err(Error::Domain("max_steps must be at least 1".into()));
        }
        Ok(Self {
            step,
            scheme,
            max_steps,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn with_step(self, step: f64) -> Result<Self> {
        Self::new(step, self.scheme, self.max_steps)
    }

    /// Number of equal steps covering `duration` with steps no longer than
    /// the nominal one.
    fn steps_for(&self, duration: f64) -> Result<usize> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::Domain(format!(
                "duration must be nonnegative, got {duration}"
            )));
        }
        let n = (duration / self.step).ceil() as usize;
        if n > self.max_steps {
            return Err(Error::Domain(format!(
                "duration {duration} needs {n} steps, above max_steps {}",
                self.max_steps
            )));
        }
        Ok(n)
    }
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            step: 1e-3,
            scheme: Scheme::Yoshida4,
            max_steps: 10_000_000,
        }
    }
}

/// Sampled solution of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// `max |H − H₀|` over the samples.
    pub energy_drift: f64,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }
}

/// One degree-of-freedom phase point `(z, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OscillatorState {
    pub z: f64,
    pub w: f64,
}

/// A regularized trajectory with the accumulated physical time.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedTrajectory {
    /// Regularized time `s`.
    pub s: Vec<f64>,
    /// Physical time `t(s) = ∫₀ˢ |z|² ds′`.
    pub t: Vec<f64>,
    pub states: Vec<RegularizedState>,
    /// Regularized energy along the trajectory.
    pub energy: Vec<f64>,
    pub energy_drift: f64,
}

/// A separable Hamiltonian `|p|²/2 + U(x)` on `ℝᴺ`.
trait Separable<const N: usize> {
    /// `−∇U(x)`, or an error when `x` leaves the admissible region.
    fn force(&self, x: &[f64; N], time: f64) -> Result<[f64; N]>;
    fn energy(&self, x: &[f64; N], p: &[f64; N]) -> Result<f64>;

    /// Rejects a drift from `from` to `to` that passes through a forbidden set.
    fn check_drift(&self, _from: &[f64; N], _to: &[f64; N], _time: f64) -> Result<()> {
        Ok(())
    }
}

#[allow(clippy::excessive_precision)]
const YOSHIDA_W1: f64 = 1.351_207_191_959_657_6; // 1 / (2 − ∛2)
#[allow(clippy::excessive_precision)]
const YOSHIDA_W0: f64 = -1.702_414_383_919_315_3; // −∛2 / (2 − ∛2)

fn leapfrog<const N: usize, H: Separable<N>>(
    sys: &H,
    x: &mut [f64; N],
    p: &mut [f64; N],
    h: f64,
    time: f64,
) -> Result<()> {
    let f = sys.force(x, time)?;
    let from = *x;
    for i in 0..N {
        p[i] += 0.5 * h * f[i];
        x[i] += h * p[i];
    }
    sys.check_drift(&from, x, time)?;
    let f = sys.force(x, time + h)?;
    for i in 0..N {
        p[i] += 0.5 * h * f[i];
    }
    Ok(())
}

fn advance<const N: usize, H: Separable<N>>(
    sys: &H,
    scheme: Scheme,
    x: &mut [f64; N],
    p: &mut [f64; N],
    h: f64,
    time: f64,
) -> Result<()> {
    match scheme {
        Scheme::Leapfrog2 => leapfrog(sys, x, p, h, time),
        Scheme::Yoshida4 => {
            leapfrog(sys, x, p, YOSHIDA_W1 * h, time)?;
            leapfrog(sys, x, p, YOSHIDA_W0 * h, time + YOSHIDA_W1 * h)?;
            leapfrog(
                sys,
                x,
                p,
                YOSHIDA_W1 * h,
                time + (YOSHIDA_W1 + YOSHIDA_W0) * h,
            )
        }
    }
}

/// Integrates for exactly `duration`, recording every step.
fn run<const N: usize, H: Separable<N>>(
    sys: &H,
    spec: &IntegratorSpec,
    x0: [f64; N],
    p0: [f64; N],
    duration: f64,
) -> Result<Trajectory<([f64; N], [f64; N])>> {
    let n = spec.steps_for(duration)?;
    let h = if n == 0 { 0.0 } else { duration / n as f64 };
    let (mut x, mut p) = (x0, p0);
    let e0 = sys.energy(&x, &p)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push((x, p));
    let mut drift = 0.0f64;
    for k in 0..n {
        let t = k as f64 * h;
        advance(sys, spec.scheme, &mut x, &mut p, h, t)?;
        drift = drift.max((sys.energy(&x, &p)? - e0).abs());
        times.push((k + 1) as f64 * h);
        states.push((x, p));
    }
    Ok(Trajectory {
        times,
        states,
        energy_drift: drift,
    })
}

/// Advances without recording; returns the final state.
fn flow_for<const N: usize, H: Separable<N>>(
    sys: &H,
    spec: &IntegratorSpec,
    x: &mut [f64; N],
    p: &mut [f64; N],
    duration: f64,
) -> Result<()> {
    let n = spec.steps_for(duration.abs())?;
    if n == 0 {
        return Ok(());
    }
    let h = duration / n as f64;
    for k in 0..n {
        advance(sys, spec.scheme, x, p, h, k as f64 * h)?;
    }
    Ok(())
}

struct PlanarStark {
    eps: f64,
    cutoff: f64,
}

impl Separable<2> for PlanarStark {
    fn force(&self, q: &[f64; 2], time: f64) -> Result<[f64; 2]> {
        let r = q[0].hypot(q[1]);
        if r < self.cutoff {
            return Err(Error::CollisionApproach {
                radius: r,
                cutoff: self.cutoff,
                time,
            });
        }
        let r3 = r * r * r;
        Ok([-q[0] / r3 - self.eps, -q[1] / r3])
    }

    fn energy(&self, q: &[f64; 2], p: &[f64; 2]) -> Result<f64> {
        let r = q[0].hypot(q[1]);
        if r == 0.0 {
            return Err(Error::Domain("energy is singular at the origin".into()));
        }
        Ok(0.5 * (p[0] * p[0] + p[1] * p[1]) - 1.0 / r + self.eps * q[0])
    }

    /// A drift segment can jump across the origin on near-radial orbits, and
    /// a drift longer than half the distance to the origin means the step no
    /// longer resolves the encounter; both count as a collision approach.
    fn check_drift(&self, from: &[f64; 2], to: &[f64; 2], time: f64) -> Result<()> {
        let d = [to[0] - from[0], to[1] - from[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        if len2 == 0.0 {
            return Ok(());
        }
        let t = (-(from[0] * d[0] + from[1] * d[1]) / len2).clamp(0.0, 1.0);
        let closest = (from[0] + t * d[0]).hypot(from[1] + t * d[1]);
        let unresolved = len2.sqrt() > 0.5 * from[0].hypot(from[1]).min(to[0].hypot(to[1]));
        if closest < self.cutoff || unresolved {
            return Err(Error::CollisionApproach {
                radius: closest,
                cutoff: self.cutoff,
                time,
            });
        }
        Ok(())
    }
}

struct Oscillator {
    eps: FieldStrength,
    sel: OscillatorSelector,
}

impl Oscillator {
    fn saddle(&self) -> f64 {
        1.0 / (2.0 * self.eps.value()).sqrt()
    }
}

impl Separable<1> for Oscillator {
    fn force(&self, z: &[f64; 1], time: f64) -> Result<[f64; 1]> {
        let z = z[0];
        if self.sel == OscillatorSelector::Minus && z.abs() >= self.saddle() {
            return Err(Error::Escape {
                position: z.abs(),
                saddle: self.saddle(),
                time,
            });
        }
        Ok([-z - self.sel.sign() * 2.0 * self.eps.value() * z * z * z])
    }

    fn energy(&self, z: &[f64; 1], w: &[f64; 1]) -> Result<f64> {
        Ok(match self.sel {
            OscillatorSelector::Plus => energy_plus(z[0], w[0], self.eps),
            OscillatorSelector::Minus => energy_minus(z[0], w[0], self.eps),
        })
    }
}

/// `E_ε` on `T*ℂ` with `x = z`, `p = w`.
struct Regularized {
    eps: FieldStrength,
}

impl Separable<2> for Regularized {
    fn force(&self, z: &[f64; 2], _time: f64) -> Result<[f64; 2]> {
        let e = self.eps.value();
        Ok([
            -z[0] - 2.0 * e * z[0] * z[0] * z[0],
            -z[1] + 2.0 * e * z[1] * z[1] * z[1],
        ])
    }

    fn energy(&self, z: &[f64; 2], w: &[f64; 2]) -> Result<f64> {
        Ok(regularized_energy(&RegularizedState::new(*z, *w), self.eps))
    }
}

/// Integrates the Stark flow of `H_ε` from `s0` for `duration`.
pub fn integrate_planar(
    s0: &PlanarState,
    eps: FieldStrength,
    spec: &IntegratorSpec,
    duration: f64,
) -> Result<Trajectory<PlanarState>> {
    integrate_planar_with_cutoff(s0, eps, spec, duration, DEFAULT_COLLISION_CUTOFF)
}

pub fn integrate_planar_with_cutoff(
    s0: &PlanarState,
    eps: FieldStrength,
    spec: &IntegratorSpec,
    duration: f64,
    cutoff: f64,
) -> Result<Trajectory<PlanarState>> {
    let sys = PlanarStark {
        eps: eps.value(),
        cutoff,
    };
    let traj = run(&sys, spec, s0.q, s0.p, duration)?;
    Ok(Trajectory {
        times: traj.times,
        states: traj
            .states
            .into_iter()
            .map(|(q, p)| PlanarState { q, p })
            .collect(),
        energy_drift: traj.energy_drift,
    })
}

fn check_bounded_well(eps: FieldStrength, z: f64, w: f64) -> Result<()> {
    let saddle = 1.0 / (2.0 * eps.value()).sqrt();
    let energy = energy_minus(z, w, eps);
    if z.abs() >= saddle || energy >= 1.0 / (8.0 * eps.value()) {
        return Err(Error::Domain(format!(
            "(z, w) = ({z}, {w}) is not inside the bounded well of E²"
        )));
    }
    Ok(())
}

/// Integrates `ż = w, ẇ = −z ∓ 2εz³`.
pub fn integrate_oscillator(
    z0: f64,
    w0: f64,
    eps: FieldStrength,
    sel: OscillatorSelector,
    spec: &IntegratorSpec,
    duration: f64,
) -> Result<Trajectory<OscillatorState>> {
    if sel == OscillatorSelector::Minus {
        check_bounded_well(eps, z0, w0)?;
    }
    let sys = Oscillator { eps, sel };
    let traj = run(&sys, spec, [z0], [w0], duration)?;
    Ok(Trajectory {
        times: traj.times,
        states: traj
            .states
            .into_iter()
            .map(|(z, w)| OscillatorState { z: z[0], w: w[0] })
            .collect(),
        energy_drift: traj.energy_drift,
    })
}

/// Measures the period of the oscillation of energy `c` by following the
/// flow from the turning point back to the section `{w = 0, z > 0}`.
///
/// Only downward crossings (`w` from positive to nonpositive) count; the
/// upward crossing at the opposite turning point happens at `z < 0`. The
/// crossing time is refined by bisection on the length of a final partial
/// step.
pub fn measure_period(
    eps: FieldStrength,
    c: SliceEnergy,
    sel: OscillatorSelector,
    spec: &IntegratorSpec,
) -> Result<f64> {
    let z_max = turning_point(eps, c, sel)?;
    let sys = Oscillator { eps, sel };
    let h = spec.step;
    let (mut x, mut p) = ([z_max], [0.0]);
    let mut time = 0.0;

    for _ in 0..spec.max_steps {
        let (x_prev, p_prev) = (x, p);
        advance(&sys, spec.scheme, &mut x, &mut p, h, time)?;
        if p_prev[0] > 0.0 && p[0] <= 0.0 && x[0] > 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > SECTION_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let (mut xm, mut pm) = (x_prev, p_prev);
                advance(&sys, spec.scheme, &mut xm, &mut pm, mid, time)?;
                if pm[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(time + 0.5 * (lo + hi));
        }
        time += h;
    }
    Err(Error::NoReturn {
        max_steps: spec.max_steps,
    })
}

/// Flows one factor for `fraction` of its own period.
fn act_factor(
    z: f64,
    w: f64,
    fraction: f64,
    eps: FieldStrength,
    sel: OscillatorSelector,
    spec: &IntegratorSpec,
) -> Result<(f64, f64)> {
    if !fraction.is_finite() {
        return Err(Error::Domain(format!(
            "torus parameter must be finite, got {fraction}"
        )));
    }
    if fraction == 0.0 {
        return Ok((z, w));
    }
    let energy = match sel {
        OscillatorSelector::Plus => energy_plus(z, w, eps),
        OscillatorSelector::Minus => {
            check_bounded_well(eps, z, w)?;
            energy_minus(z, w, eps)
        }
    };
    // Rounding can push the energy of a point at the origin a hair negative.
    let tau = period(eps, SliceEnergy::new(energy.max(0.0))?, sel)?;
    let sys = Oscillator { eps, sel };
    let (mut x, mut p) = ([z], [w]);
    flow_for(&sys, spec, &mut x, &mut p, fraction * tau)?;
    Ok((x[0], p[0]))
}

/// The torus action on the bounded regularized hypersurface:
/// `(t₁, t₂) · (z, w) = (φ^{t₁τ¹(E¹)}_{E¹}(z₁, w₁), φ^{t₂τ²(E²)}_{E²}(z₂, w₂))`.
pub fn torus_act(
    t1: f64,
    t2: f64,
    s: &RegularizedState,
    eps: FieldStrength,
    spec: &IntegratorSpec,
) -> Result<RegularizedState> {
    let (z1, w1) = act_factor(s.z[0], s.w[0], t1, eps, OscillatorSelector::Plus, spec)?;
    let (z2, w2) = act_factor(s.z[1], s.w[1], t2, eps, OscillatorSelector::Minus, spec)?;
    Ok(RegularizedState::new([z1, z2], [w1, w2]))
}

/// Integrates the regularized flow of `E_ε` for regularized time `duration`,
/// accumulating physical time `t = ∫ |z|² ds`.
///
/// Each step adds Simpson's rule applied to the cubic Hermite interpolant of
/// `R = |z|²`, using `R′ = 2 z·w` at the step ends; this is fourth order,
/// matching the Yoshida scheme.
pub fn integrate_regularized(
    s0: &RegularizedState,
    eps: FieldStrength,
    spec: &IntegratorSpec,
    duration: f64,
) -> Result<RegularizedTrajectory> {
    let sys = Regularized { eps };
    let traj = run(&sys, spec, s0.z, s0.w, duration)?;
    let n = traj.states.len();
    let mut t = Vec::with_capacity(n);
    let mut energy = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (k, &(z, w)) in traj.states.iter().enumerate() {
        let st = RegularizedState::new(z, w);
        if k > 0 {
            let (zp, wp) = traj.states[k - 1];
            let h = traj.times[k] - traj.times[k - 1];
            let r0 = zp[0] * zp[0] + zp[1] * zp[1];
            let r1 = z[0] * z[0] + z[1] * z[1];
            let d0 = 2.0 * (zp[0] * wp[0] + zp[1] * wp[1]);
            let d1 = 2.0 * (z[0] * w[0] + z[1] * w[1]);
            acc += 0.5 * h * (r0 + r1) + h * h / 12.0 * (d0 - d1);
        }
        t.push(acc);
        energy.push(regularized_energy(&st, eps));
        states.push(st);
    }
    Ok(RegularizedTrajectory {
        s: traj.times,
        t,
        states,
        energy,
        energy_drift: traj.energy_drift,
    })
}

/// Number of regularized steps between comparison checkpoints.
const CHECKPOINT_STRIDE: usize = 10;

/// Checks that the regularized flow on the zero level, pushed forward by the
/// Levi-Civita lift and reparametrized by `t(s) = ∫ |z|² ds`, reproduces the
/// Stark flow.
///
/// Returns the largest max-norm deviation in `(q, p)` over the checkpoints.
pub fn flow_equivalence(
    s0: &RegularizedState,
    eps: FieldStrength,
    spec: &IntegratorSpec,
    s_duration: f64,
) -> Result<f64> {
    let e0 = regularized_energy(s0, eps);
    if e0.abs() > LEVEL_SET_TOL {
        return Err(Error::LevelSet { energy: e0 });
    }
    let reg = integrate_regularized(s0, eps, spec, s_duration)?;
    let start = lc_lift(s0)?;
    let sys = PlanarStark {
        eps: eps.value(),
        cutoff: DEFAULT_COLLISION_CUTOFF,
    };
    let (mut q, mut p) = (start.q, start.p);
    let mut t_prev = 0.0;
    let mut deviation = 0.0f64;

    for k in (CHECKPOINT_STRIDE..reg.states.len()).step_by(CHECKPOINT_STRIDE) {
        let st = &reg.states[k];
        if conformal_factor(st) == 0.0 {
            return Err(Error::CollisionApproach {
                radius: 0.0,
                cutoff: DEFAULT_COLLISION_CUTOFF,
                time: reg.t[k],
            });
        }
        flow_for(&sys, spec, &mut q, &mut p, reg.t[k] - t_prev)?;
        t_prev = reg.t[k];
        let lifted = lc_lift(st)?;
        let d = (0..2)
            .map(|i| (lifted.q[i] - q[i]).abs().max((lifted.p[i] - p[i]).abs()))
            .fold(0.0, f64::max);
        deviation = deviation.max(d);
    }
    Ok(deviation)
}
