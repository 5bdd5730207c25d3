//! Complete elliptic integral of the first kind and its derivatives.
//!
//! Parameter convention `m = k²`, with
//!
//! ```text
//! K(m) = ∫₀¹ dζ / √((1 − ζ²)(1 − m ζ²)),    m ∈ (−∞, 1)
//! ```
//!
//! `K` is evaluated by the arithmetic–geometric mean on `[0, 1)` and mapped
//! there from negative parameters by `K(m) = K(m/(m−1)) / √(1−m)`. The same
//! AGM sweep yields `E(m)` and, through the sequence `c_n`, a
//! cancellation-free form of `K′(m) = (E − (1−m)K) / (2m(1−m))` that stays
//! exact at the removable singularity `m = 0`.
//!
//! Every evaluator has a quadrature counterpart of the defining integral
//! (after `ζ = sin θ`) for cross-checking.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

const AGM_REL_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 60;

/// Parameter `m` of the complete elliptic integral, restricted to `m < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(m: f64) -> Result<Self> {
        if m < 1.0 {
            Ok(Self(m))
        } else {
            Err(Error::Domain(format!(
                "elliptic parameter must satisfy m < 1, got {m}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for EllipticModulus {
    type Error = Error;

    fn try_from(m: f64) -> Result<Self> {
        Self::new(m)
    }
}

/// Output of one AGM sweep started from `(1, √(1−m))`.
struct AgmSweep {
    /// Converged mean.
    mean: f64,
    /// `Σ_{n≥1} 2^{n−1} c_n²`.
    weighted_c2: f64,
    /// `Σ_{n≥1} 2^{n−1} c_n² / m`, kept finite at `m = 0`.
    weighted_c2_over_m: f64,
}

/// Runs the AGM with `c_{n+1} = c_n² / (4 a_{n+1})` so no difference of
/// nearly equal means is ever formed. Valid for every `m < 1`.
fn agm_sweep(m: f64) -> AgmSweep {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    // c_1 = (1 − √(1−m)) / 2 written without cancellation.
    let c1 = m / (2.0 * (1.0 + b));
    let mut c2 = c1 * c1;
    let mut c2_over_m = m / (4.0 * (1.0 + b) * (1.0 + b));
    let mut weight = 1.0;
    let mut weighted_c2 = 0.0;
    let mut weighted_c2_over_m = 0.0;

    for _ in 0..AGM_MAX_ITER {
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        a = a_next;
        b = b_next;
        weighted_c2 += weight * c2;
        weighted_c2_over_m += weight * c2_over_m;
        if (a - b).abs() <= AGM_REL_TOL * a {
            break;
        }
        // c_{n+1} = c_n² / (4 a_{n+1}) with a_{n+1} = (a_n + b_n)/2.
        let scale = 4.0 * (a + b) * (a + b);
        c2_over_m *= c2 / scale;
        c2 = c2 * c2 / scale;
        weight *= 2.0;
    }

    AgmSweep {
        mean: a,
        weighted_c2,
        weighted_c2_over_m,
    }
}

fn agm_k(m: f64) -> f64 {
    FRAC_PI_2 / agm_sweep(m).mean
}

/// `K(m)`.
pub fn ellip_k(m: EllipticModulus) -> f64 {
    let m = m.value();
    if m >= 0.0 {
        agm_k(m)
    } else {
        let one_minus = 1.0 - m;
        agm_k(-m / one_minus) / one_minus.sqrt()
    }
}

/// `E(m)`, the complete integral of the second kind.
pub fn ellip_e(m: EllipticModulus) -> f64 {
    let m = m.value();
    let sweep = agm_sweep(m);
    FRAC_PI_2 / sweep.mean * (1.0 - 0.5 * m - sweep.weighted_c2)
}

/// `K′(m)`, from the AGM closed form.
pub fn ellip_k_d1(m: EllipticModulus) -> f64 {
    let m = m.value();
    let sweep = agm_sweep(m);
    let k = FRAC_PI_2 / sweep.mean;
    k * (0.5 - sweep.weighted_c2_over_m) / (2.0 * (1.0 - m))
}

/// `(ln K)′(m) = K′(m) / K(m)`.
pub fn log_k_d1(m: EllipticModulus) -> f64 {
    let m = m.value();
    let sweep = agm_sweep(m);
    (0.5 - sweep.weighted_c2_over_m) / (2.0 * (1.0 - m))
}

fn oracle_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-14, 1e-13, 40).expect("valid constant spec")
}

/// `K″(m) = ¾ ∫₀^{π/2} sin⁴θ / (1 − m sin²θ)^{5/2} dθ`, by adaptive quadrature.
pub fn ellip_k_d2(m: EllipticModulus) -> Result<f64> {
    ellip_k_d2_with(m, &oracle_spec())
}

pub fn ellip_k_d2_with(m: EllipticModulus, spec: &QuadratureSpec) -> Result<f64> {
    let m = m.value();
    let v = integrate(
        |t| {
            let s2 = t.sin().powi(2);
            let d = 1.0 - m * s2;
            s2 * s2 / (d * d * d.sqrt())
        },
        0.0,
        FRAC_PI_2,
        spec,
    )?;
    Ok(0.75 * v)
}

/// `K(m)` by quadrature of `∫₀^{π/2} dθ / √(1 − m sin²θ)`.
pub fn ellip_k_oracle(m: EllipticModulus, spec: &QuadratureSpec) -> Result<f64> {
    let m = m.value();
    integrate(
        |t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(),
        0.0,
        FRAC_PI_2,
        spec,
    )
}

/// `K′(m)` by quadrature of `½ ∫₀^{π/2} sin²θ / (1 − m sin²θ)^{3/2} dθ`.
pub fn ellip_k_d1_oracle(m: EllipticModulus, spec: &QuadratureSpec) -> Result<f64> {
    let m = m.value();
    let v = integrate(
        |t| {
            let s2 = t.sin().powi(2);
            let d = 1.0 - m * s2;
            s2 / (d * d.sqrt())
        },
        0.0,
        FRAC_PI_2,
        spec,
    )?;
    Ok(0.5 * v)
}

/// `K·K″ − 3(K′)²`; nonnegative by Cauchy–Schwarz.
pub fn interpolation_margin(m: EllipticModulus) -> Result<f64> {
    let k = ellip_k(m);
    let d1 = ellip_k_d1(m);
    let d2 = ellip_k_d2(m)?;
    Ok(k * d2 - 3.0 * d1 * d1)
}

/// Checks `K·K″ − 3(K′)² ≥ −rel_tol · K·K″`.
pub fn satisfies_interpolation_bound(m: EllipticModulus, rel_tol: f64) -> Result<bool> {
    let k = ellip_k(m);
    let d1 = ellip_k_d1(m);
    let d2 = ellip_k_d2(m)?;
    Ok(k * d2 - 3.0 * d1 * d1 >= -rel_tol * k * d2)
}

/// Second central difference of `ln K` with step `h`; positive wherever
/// `ln K` is strictly convex and `h` resolves it.
pub fn log_k_second_difference(m: EllipticModulus, h: f64) -> Result<f64> {
    let center = m.value();
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let lo = EllipticModulus::new(center - h)?;
    let hi = EllipticModulus::new(center + h)?;
    let ln = |x: EllipticModulus| ellip_k(x).ln();
    Ok((ln(hi) - 2.0 * ln(m) + ln(lo)) / (h * h))
}
