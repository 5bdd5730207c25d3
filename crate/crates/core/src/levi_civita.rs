//! Levi-Civita regularization.
//!
//! The base map `z ↦ z²/2` (parabolic coordinates) lifts to the two-to-one
//! symplectic map `L(z, w) = (z²/2, w/z̄)`. Pulling back `H_ε + 1/2` and
//! multiplying by `R = |z|²` gives the regularized energy
//!
//! ```text
//! E_ε = E¹_ε(z₁, w₁) + E²_ε(z₂, w₂) − 2
//! E¹_ε = w₁²/2 + z₁²/2 + ε z₁⁴/2
//! E²_ε = w₂²/2 + z₂²/2 − ε z₂⁴/2
//! ```
//!
//! which is smooth on all of `T*ℂ` and separates.
//!
//! Complex numbers are handled as `[re, im]` pairs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stark_model::{FieldStrength, PlanarState};

/// A point `(z, w)` of `T*ℂ ≅ ℝ⁴`. `z = 0` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RegularizedState {
    pub z: [f64; 2],
    pub w: [f64; 2],
}

impl RegularizedState {
    pub fn new(z: [f64; 2], w: [f64; 2]) -> Self {
        Self { z, w }
    }

    /// Components in `(z₁, w₁, z₂, w₂)` order.
    pub fn to_array(&self) -> [f64; 4] {
        [self.z[0], self.w[0], self.z[1], self.w[1]]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            z: [a[0], a[2]],
            w: [a[1], a[3]],
        }
    }
}

/// Values of the two separated Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySplit {
    pub e1: f64,
    pub e2: f64,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.e1 + self.e2 - 2.0
    }
}

/// `ℓ(z) = z²/2 = (½(z₁² − z₂²), z₁z₂)`.
pub fn lc_base(z: [f64; 2]) -> [f64; 2] {
    [0.5 * (z[0] * z[0] - z[1] * z[1]), z[0] * z[1]]
}

/// `L(z, w) = (z²/2, w/z̄)`, with `w/z̄ = w z / |z|²`.
pub fn lc_lift(s: &RegularizedState) -> Result<PlanarState> {
    let r2 = conformal_factor(s);
    if r2 == 0.0 {
        return Err(Error::Domain(
            "the fiber over the origin has no unregularized image".into(),
        ));
    }
    let [z1, z2] = s.z;
    let [w1, w2] = s.w;
    let p = [(w1 * z1 - w2 * z2) / r2, (w1 * z2 + w2 * z1) / r2];
    PlanarState::new(lc_base(s.z), p)
}

/// `E¹_ε(z₁, w₁) = w₁²/2 + z₁²/2 + ε z₁⁴/2`.
pub fn energy_plus(z: f64, w: f64, eps: FieldStrength) -> f64 {
    let z2 = z * z;
    0.5 * w * w + 0.5 * z2 + 0.5 * eps.value() * z2 * z2
}

/// `E²_ε(z₂, w₂) = w₂²/2 + z₂²/2 − ε z₂⁴/2`.
pub fn energy_minus(z: f64, w: f64, eps: FieldStrength) -> f64 {
    let z2 = z * z;
    0.5 * w * w + 0.5 * z2 - 0.5 * eps.value() * z2 * z2
}

pub fn energy_split(s: &RegularizedState, eps: FieldStrength) -> EnergySplit {
    EnergySplit {
        e1: energy_plus(s.z[0], s.w[0], eps),
        e2: energy_minus(s.z[1], s.w[1], eps),
    }
}

/// `E_ε = E¹_ε + E²_ε − 2`.
pub fn regularized_energy(s: &RegularizedState, eps: FieldStrength) -> f64 {
    energy_split(s, eps).total()
}

/// `R(z, w) = |z|²`.
pub fn conformal_factor(s: &RegularizedState) -> f64 {
    s.z[0] * s.z[0] + s.z[1] * s.z[1]
}
