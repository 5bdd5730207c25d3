//! The moment-map image of the bounded regularized hypersurface and the
//! convexity certificate for its profile.
//!
//! With the action primitives `T^i(c) = ∫₀ᶜ τ^i(b) db` the image is
//! `{(T¹(2−c), T²(c)) : c ∈ [0, 2]}`, the graph of a decreasing function
//! `f_ε` with
//!
//! ```text
//! f′(T¹(2−c)) = −τ²(c) / τ¹(2−c)
//! f″(T¹(2−c)) = τ²(c) / τ¹(2−c)² · ((ln τ²)′(c) + (ln τ¹)′(2−c))
//! ```
//!
//! The certificate evaluates `f″` from the second formula and checks it
//! against a finite-difference estimate built only from `τ¹`, `τ²` and
//! quadrature.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::periods::{
    log_period_derivative_sum, period, tau1, tau2, OscillatorSelector, SliceEnergy,
};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::stark_model::FieldStrength;

/// Version of the serialized certificate layout.
pub const CERTIFICATE_SCHEMA: u32 = 1;

/// Default quadrature for the action primitives.
pub fn action_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-10, 1e-13, 40).expect("valid constant spec")
}

/// Quadrature used inside the certificate, near machine precision.
pub fn certificate_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-14, 1e-14, 50).expect("valid constant spec")
}

/// One point `(T¹(2−c), T²(c))` of the moment-map image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentImagePoint {
    pub c: f64,
    pub x: f64,
    pub y: f64,
}

/// Sampled graph of `f_ε`, ordered by increasing `x` (decreasing `c`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToricProfile {
    pub eps: FieldStrength,
    pub samples: Vec<MomentImagePoint>,
    /// `f′` at each sample.
    pub slopes: Vec<f64>,
    /// `f″` at each sample.
    pub second_derivs: Vec<f64>,
}

impl ToricProfile {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of [`verify_convexity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub schema: u32,
    pub eps: FieldStrength,
    pub samples: usize,
    pub c_grid: Vec<f64>,
    /// Analytic `f″` at each grid point.
    pub f_second: Vec<f64>,
    pub min_f_second: f64,
    /// Largest relative mismatch between analytic and finite-difference `f″`
    /// over interior grid points.
    pub max_fd_residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl ConvexityCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn toric_inputs(eps: FieldStrength, c: f64) -> Result<(FieldStrength, f64)> {
    let eps = eps.require_toric()?;
    let c = SliceEnergy::toric(c)?.value();
    Ok((eps, c))
}

fn slice(c: f64) -> SliceEnergy {
    SliceEnergy::new(c.max(0.0)).expect("nonnegative slice energy")
}

/// `∫_a^b τ(b) db` for one oscillator.
fn period_integral(
    eps: FieldStrength,
    a: f64,
    b: f64,
    sel: OscillatorSelector,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let v = integrate(
        |c| period(eps, slice(c), sel).unwrap_or(f64::NAN),
        a,
        b,
        spec,
    )?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("period undefined on [{a}, {b}]")))
    }
}

/// `T(c) = ∫₀ᶜ τ(b) db` for `c ∈ [0, 2]`.
pub fn action_t(
    eps: FieldStrength,
    c: SliceEnergy,
    sel: OscillatorSelector,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (eps, c) = toric_inputs(eps, c.value())?;
    period_integral(eps, 0.0, c, sel, spec)
}

pub fn moment_image_with(
    eps: FieldStrength,
    c: SliceEnergy,
    spec: &QuadratureSpec,
) -> Result<MomentImagePoint> {
    let (eps, c) = toric_inputs(eps, c.value())?;
    Ok(MomentImagePoint {
        c,
        x: period_integral(eps, 0.0, 2.0 - c, OscillatorSelector::Plus, spec)?,
        y: period_integral(eps, 0.0, c, OscillatorSelector::Minus, spec)?,
    })
}

/// `(T¹(2−c), T²(c))`.
pub fn moment_image(eps: FieldStrength, c: SliceEnergy) -> Result<MomentImagePoint> {
    moment_image_with(eps, c, &action_spec())
}

/// `f′` at `x = T¹(2−c)`.
pub fn profile_slope(eps: FieldStrength, c: SliceEnergy) -> Result<f64> {
    let (eps, c) = toric_inputs(eps, c.value())?;
    Ok(-tau2(eps, slice(c))? / tau1(eps, slice(2.0 - c)))
}

/// `f″` at `x = T¹(2−c)`, from the log-derivative formula.
pub fn profile_second_derivative(eps: FieldStrength, c: SliceEnergy) -> Result<f64> {
    let (eps, c) = toric_inputs(eps, c.value())?;
    let t1 = tau1(eps, slice(2.0 - c));
    let t2 = tau2(eps, slice(c))?;
    Ok(t2 / (t1 * t1) * log_period_derivative_sum(eps, slice(c))?)
}

/// `n` points of a uniform grid on `[0, 2]` with exact endpoints.
pub fn uniform_c_grid(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|k| 2.0 * k as f64 / last).collect()
}

/// Samples the moment-map image on a uniform `c` grid of `n` points.
pub fn profile_sample(eps: FieldStrength, n: usize, spec: &QuadratureSpec) -> Result<ToricProfile> {
    let eps = eps.require_toric()?;
    if n < 2 {
        return Err(Error::Domain(format!(
            "profile needs at least 2 samples, got {n}"
        )));
    }
    let grid = uniform_c_grid(n);
    let rows = grid
        .par_iter()
        .rev()
        .map(|&c| {
            let sc = slice(c);
            Ok((
                moment_image_with(eps, sc, spec)?,
                profile_slope(eps, sc)?,
                profile_second_derivative(eps, sc)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut samples = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    let mut second_derivs = Vec::with_capacity(n);
    for (p, s, d) in rows {
        samples.push(p);
        slopes.push(s);
        second_derivs.push(d);
    }
    for w in samples.windows(2) {
        if !(w[1].x > w[0].x && w[1].y < w[0].y) {
            return Err(Error::InvariantViolation(format!(
                "profile not strictly monotone between c = {} and c = {}",
                w[0].c, w[1].c
            )));
        }
    }
    Ok(ToricProfile {
        eps,
        samples,
        slopes,
        second_derivs,
    })
}

/// Finite-difference estimate of `f″` at the image point of `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    /// Ridders' error estimate.
    pub error: f64,
}

/// Local chart of the graph of `f` around `(T¹(2−c₀), T²(c₀))`, expressed
/// through increments so nothing cancels against the full actions.
struct LocalChart<'a> {
    eps: FieldStrength,
    c0: f64,
    spec: &'a QuadratureSpec,
}

impl LocalChart<'_> {
    /// `f(x₀ + δ) − f(x₀)`.
    fn increment(&self, delta: f64) -> Result<f64> {
        let c = self.solve_c(delta)?;
        period_integral(self.eps, self.c0, c, OscillatorSelector::Minus, self.spec)
    }

    /// Solves `T¹(2−c) − T¹(2−c₀) = δ` for `c` by Newton's method with
    /// derivative `−τ¹(2−c)`.
    fn solve_c(&self, delta: f64) -> Result<f64> {
        let eps = self.eps;
        let mut c = self.c0 - delta / tau1(eps, slice(2.0 - self.c0));
        for _ in 0..30 {
            if !(0.0..=2.0).contains(&c) {
                return Err(Error::Domain(format!(
                    "finite-difference step leaves the slicing range (c = {c})"
                )));
            }
            let g = period_integral(
                eps,
                2.0 - self.c0,
                2.0 - c,
                OscillatorSelector::Plus,
                self.spec,
            )? - delta;
            let dc = g / tau1(eps, slice(2.0 - c));
            c += dc;
            if dc.abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
                return Ok(c);
            }
        }
        Err(Error::InvariantViolation(format!(
            "inverse of the first action did not converge near c = {}",
            self.c0
        )))
    }
}

/// Ridders' extrapolation of the central second difference
/// `(f(x+h) − 2f(x) + f(x−h)) / h²` at the image point of `c`, starting from
/// step `h0` and shrinking by 1.4 per level.
pub fn fd_second_derivative(
    eps: FieldStrength,
    c: SliceEnergy,
    h0: f64,
    spec: &QuadratureSpec,
) -> Result<FdEstimate> {
    const SHRINK: f64 = 1.4;
    const LEVELS: usize = 10;
    let (eps, c0) = toric_inputs(eps, c.value())?;
    if !(h0 > 0.0) {
        return Err(Error::Domain(format!(
            "initial step must be positive, got {h0}"
        )));
    }
    let chart = LocalChart { eps, c0, spec };
    let second_difference =
        |h: f64| -> Result<f64> { Ok((chart.increment(h)? + chart.increment(-h)?) / (h * h)) };

    let shrink2 = SHRINK * SHRINK;
    let mut table = [[0.0f64; LEVELS]; LEVELS];
    let mut h = h0;
    table[0][0] = second_difference(h)?;
    let mut best = FdEstimate {
        value: table[0][0],
        error: f64::INFINITY,
    };
    for i in 1..LEVELS {
        h /= SHRINK;
        table[0][i] = second_difference(h)?;
        let mut fac = shrink2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= shrink2;
            let err = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if err <= best.error {
                best = FdEstimate {
                    value: table[j][i],
                    error: err,
                };
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * best.error {
            break;
        }
    }
    Ok(best)
}

/// Certifies `f_ε″ > 0` on a uniform grid of `n` slice energies.
///
/// Passes when every analytic `f″` sample is positive and, at every interior
/// grid point, the finite-difference estimate agrees with it to relative
/// tolerance `tol`.
pub fn verify_convexity(eps: FieldStrength, n: usize, tol: f64) -> Result<ConvexityCertificate> {
    let eps = eps.require_toric()?;
    if n < 2 {
        return Err(Error::Domain(format!(
            "certificate needs at least 2 samples, got {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let spec = certificate_spec();
    let grid = uniform_c_grid(n);
    let x_total = period_integral(eps, 0.0, 2.0, OscillatorSelector::Plus, &spec)?;

    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(k, &c)| -> Result<(f64, f64)> {
            let analytic = profile_second_derivative(eps, slice(c))?;
            if k == 0 || k + 1 == n {
                return Ok((analytic, 0.0));
            }
            let x = period_integral(eps, 0.0, 2.0 - c, OscillatorSelector::Plus, &spec)?;
            let h0 = 0.9 * x.min(x_total - x).min(0.25 * x_total);
            let fd = fd_second_derivative(eps, slice(c), h0, &spec)?;
            Ok((analytic, ((fd.value - analytic) / analytic).abs()))
        })
        .collect::<Result<Vec<_>>>()?;

    let f_second: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let min_f_second = f_second.iter().copied().fold(f64::INFINITY, f64::min);
    let max_fd_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let verdict = if min_f_second > 0.0 && max_fd_residual <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConvexityCertificate {
        schema: CERTIFICATE_SCHEMA,
        eps,
        samples: n,
        c_grid: grid,
        f_second,
        min_f_second,
        max_fd_residual,
        tol,
        verdict,
    })
}
