//! Period functions of the two separated oscillators.
//!
//! With `Φ(x) = K((1−√(1−x))/(1+√(1−x))) / √(1+√(1−x))` on `x < 1`,
//!
//! ```text
//! τ¹_ε(c) = 2^{5/2} Φ(−8εc)      (hardening quartic, E¹)
//! τ²_ε(c) = 2^{5/2} Φ(8εc)       (softening quartic, E², bounded well)
//! ```
//!
//! The elliptic parameter `(1−s)/(1+s)` with `s = √(1−x)` is evaluated as
//! `x/(1+s)²`, and the squared turning point `(−1+√(1+8cε))/(2ε)` as
//! `4c/(1+√(1+8cε))`; both forms stay accurate as `εc → 0`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::elliptic::{ellip_k, log_k_d1, EllipticModulus};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::stark_model::FieldStrength;

/// `2^{5/2}`.
const TWO_POW_FIVE_HALVES: f64 = 5.656_854_249_492_381;

/// Separation constant `c` labelling the level sets of `E¹` and `E²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct SliceEnergy(f64);

impl SliceEnergy {
    pub fn new(c: f64) -> Result<Self> {
        if c >= 0.0 && c.is_finite() {
            Ok(Self(c))
        } else {
            Err(Error::Domain(format!(
                "slice energy must be finite and nonnegative, got {c}"
            )))
        }
    }

    /// A value on the toric slicing range `[0, 2]`.
    pub fn toric(c: f64) -> Result<Self> {
        if (0.0..=2.0).contains(&c) {
            Ok(Self(c))
        } else {
            Err(Error::Domain(format!(
                "slice energy must lie in [0, 2], got {c}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which separated oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillatorSelector {
    /// `E¹`, with `+ε z⁴/2`.
    Plus,
    /// `E²`, with `−ε z⁴/2`; only the well inside the saddles is used.
    Minus,
}

impl OscillatorSelector {
    /// `+1` for [`Plus`](Self::Plus), `−1` for [`Minus`](Self::Minus).
    pub fn sign(self) -> f64 {
        match self {
            OscillatorSelector::Plus => 1.0,
            OscillatorSelector::Minus => -1.0,
        }
    }
}

fn require_below_one(x: f64) -> Result<()> {
    if x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Φ is defined on x < 1, got {x}")))
    }
}

/// Splits `x` into `(√(1−x), elliptic parameter)`.
fn phi_parts(x: f64) -> Result<(f64, EllipticModulus)> {
    require_below_one(x)?;
    let s = (1.0 - x).sqrt();
    let m = EllipticModulus::new(x / ((1.0 + s) * (1.0 + s)))?;
    Ok((s, m))
}

/// `Φ(x)`.
pub fn phi(x: f64) -> Result<f64> {
    let (s, m) = phi_parts(x)?;
    Ok(ellip_k(m) / (1.0 + s).sqrt())
}

/// `(ln Φ)′(x) = 1/(4s(1+s)) + (ln K)′(m) / (s(1+s)²)`, `s = √(1−x)`.
pub fn log_phi_d1(x: f64) -> Result<f64> {
    let (s, m) = phi_parts(x)?;
    let one_plus = 1.0 + s;
    Ok(1.0 / (4.0 * s * one_plus) + log_k_d1(m) / (s * one_plus * one_plus))
}

/// Bounded-well condition `8cε < 1` for the softening oscillator.
fn require_inside_separatrix(eps: FieldStrength, c: f64) -> Result<()> {
    if 8.0 * c * eps.value() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "c = {c} is not below the separatrix energy 1/(8 eps) = {}",
            1.0 / (8.0 * eps.value())
        )))
    }
}

/// Maximal elongation of the oscillation of energy `c`, i.e. the positive
/// root of `±ε z⁴ + z² − 2c = 0`; for the softening oscillator the inner root.
pub fn turning_point(eps: FieldStrength, c: SliceEnergy, sel: OscillatorSelector) -> Result<f64> {
    let c = c.value();
    if !(c > 0.0) {
        return Err(Error::Domain(format!("turning point needs c > 0, got {c}")));
    }
    if sel == OscillatorSelector::Minus {
        require_inside_separatrix(eps, c)?;
    }
    let root = (1.0 + sel.sign() * 8.0 * c * eps.value()).sqrt();
    Ok((4.0 * c / (1.0 + root)).sqrt())
}

/// `τ¹_ε(c) = 2^{5/2} / √(1+√(1+8cε)) · K((1−√(1+8cε))/(1+√(1+8cε)))`.
pub fn tau1(eps: FieldStrength, c: SliceEnergy) -> f64 {
    let a = 8.0 * c.value() * eps.value();
    let root = (1.0 + a).sqrt();
    let m =
        EllipticModulus::new(-a / ((1.0 + root) * (1.0 + root))).expect("parameter is nonpositive");
    TWO_POW_FIVE_HALVES / (1.0 + root).sqrt() * ellip_k(m)
}

/// `τ²_ε(c) = 2^{5/2} / √(1+√(1−8cε)) · K((1−√(1−8cε))/(1+√(1−8cε)))`,
/// defined for `8cε < 1`.
pub fn tau2(eps: FieldStrength, c: SliceEnergy) -> Result<f64> {
    require_inside_separatrix(eps, c.value())?;
    let a = 8.0 * c.value() * eps.value();
    let root = (1.0 - a).sqrt();
    let m = EllipticModulus::new(a / ((1.0 + root) * (1.0 + root)))?;
    Ok(TWO_POW_FIVE_HALVES / (1.0 + root).sqrt() * ellip_k(m))
}

/// `τ¹` or `τ²` by selector.
pub fn period(eps: FieldStrength, c: SliceEnergy, sel: OscillatorSelector) -> Result<f64> {
    match sel {
        OscillatorSelector::Plus => Ok(tau1(eps, c)),
        OscillatorSelector::Minus => tau2(eps, c),
    }
}

/// `(ln τ)′(c) = ∓8ε (ln Φ)′(∓8εc)`.
pub fn log_period_d1(eps: FieldStrength, c: SliceEnergy, sel: OscillatorSelector) -> Result<f64> {
    let scale = 8.0 * eps.value();
    match sel {
        OscillatorSelector::Plus => Ok(-scale * log_phi_d1(-scale * c.value())?),
        OscillatorSelector::Minus => {
            require_inside_separatrix(eps, c.value())?;
            Ok(scale * log_phi_d1(scale * c.value())?)
        }
    }
}

/// `(ln τ²)′(c) + (ln τ¹)′(2−c) = 8ε((ln Φ)′(8εc) − (ln Φ)′(8εc − 16ε))`.
pub fn log_period_derivative_sum(eps: FieldStrength, c: SliceEnergy) -> Result<f64> {
    let e = eps.value();
    let c = c.value();
    require_inside_separatrix(eps, c)?;
    Ok(8.0 * e * (log_phi_d1(8.0 * e * c)? - log_phi_d1(8.0 * e * c - 16.0 * e)?))
}

/// Period by direct quadrature of the quarter-period integral
/// `4 ∫₀^{z_max} dz / √(2c − z² ∓ ε z⁴)`.
///
/// With `z = z_max sin θ` and `2c = z_max² ± ε z_max⁴` the integrand becomes
/// `1 / √(1 ± ε z_max² (1 + sin²θ))`, regular on `[0, π/2]`; at `c = 0` it
/// is identically one.
pub fn period_oracle(
    eps: FieldStrength,
    c: SliceEnergy,
    sel: OscillatorSelector,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let z_max = if c.value() == 0.0 {
        0.0
    } else {
        turning_point(eps, c, sel)?
    };
    let k = sel.sign() * eps.value() * z_max * z_max;
    let quarter = integrate(
        |t| 1.0 / (1.0 + k * (1.0 + t.sin().powi(2))).sqrt(),
        0.0,
        FRAC_PI_2,
        spec,
    )?;
    Ok(4.0 * quarter)
}
