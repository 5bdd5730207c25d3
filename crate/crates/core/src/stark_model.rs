//! The planar Stark Hamiltonian `H_ε(q, p) = |p|²/2 − 1/|q| + ε q₁` and its
//! Hill's region at the normalized energy `−1/2`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

/// Energy level all Hill's-region and toric computations are normalized to.
pub const NORMALIZED_ENERGY: f64 = -0.5;

/// Field strength at which the normalized energy becomes critical.
pub const CRITICAL_EPS: f64 = 1.0 / 16.0;

/// Strength `ε` of the constant field.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct FieldStrength(f64);

impl FieldStrength {
    /// `eps` must be finite and strictly positive.
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Self(eps))
        } else {
            Err(Error::Domain(format!(
                "field strength must be finite and positive, got {eps}"
            )))
        }
    }

    /// The field-free limit `ε = 0` (Kepler problem; a round 3-sphere after
    /// regularization). Only accepted by operations that make sense there.
    pub fn unperturbed() -> Self {
        Self(0.0)
    }

    /// Accepts only `0 < ε < 1/16`, where the bounded component is toric.
    pub fn toric(eps: f64) -> Result<Self> {
        Self::new(eps)?.require_toric()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_toric(self) -> bool {
        self.0 > 0.0 && self.0 < CRITICAL_EPS
    }

    pub fn require_toric(self) -> Result<Self> {
        if self.is_toric() {
            Ok(self)
        } else {
            Err(Error::Regime {
                eps: self.0,
                required: "0 < eps < 1/16",
            })
        }
    }

    fn require_positive(self) -> Result<Self> {
        if self.0 > 0.0 {
            Ok(self)
        } else {
            Err(Error::Regime {
                eps: self.0,
                required: "eps > 0",
            })
        }
    }
}

/// A point `(q, p)` of `T*(ℝ² ∖ {0})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarState {
    pub q: [f64; 2],
    pub p: [f64; 2],
}

impl PlanarState {
    pub fn new(q: [f64; 2], p: [f64; 2]) -> Result<Self> {
        if q == [0.0, 0.0] {
            return Err(Error::Domain("configuration excludes the origin".into()));
        }
        Ok(Self { q, p })
    }

    pub fn radius(&self) -> f64 {
        self.q[0].hypot(self.q[1])
    }
}

/// Classification of a configuration point against the Hill's region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HillClass {
    Bounded,
    Unbounded,
    Forbidden,
    CollisionLocus,
}

impl HillClass {
    /// One-letter raster code; the collision locus folds into the bounded component.
    pub fn code(self) -> char {
        match self {
            HillClass::Bounded | HillClass::CollisionLocus => 'B',
            HillClass::Unbounded => 'U',
            HillClass::Forbidden => 'F',
        }
    }
}

/// `V_ε(q) = −1/|q| + ε q₁`.
pub fn potential(q: [f64; 2], eps: FieldStrength) -> Result<f64> {
    let r = q[0].hypot(q[1]);
    if r == 0.0 {
        return Err(Error::Domain("potential is singular at the origin".into()));
    }
    Ok(-1.0 / r + eps.value() * q[0])
}

/// `H_ε(q, p) = |p|²/2 + V_ε(q)`.
pub fn hamiltonian(s: &PlanarState, eps: FieldStrength) -> Result<f64> {
    let kinetic = 0.5 * (s.p[0] * s.p[0] + s.p[1] * s.p[1]);
    Ok(kinetic + potential(s.q, eps)?)
}

/// The unique critical point `(−1/√ε, 0, 0, 0)`.
pub fn critical_point(eps: FieldStrength) -> Result<PlanarState> {
    let eps = eps.require_positive()?;
    PlanarState::new([-1.0 / eps.value().sqrt(), 0.0], [0.0, 0.0])
}

/// The unique critical value `−2√ε`.
pub fn critical_value(eps: FieldStrength) -> Result<f64> {
    Ok(-2.0 * eps.require_positive()?.value().sqrt())
}

/// The conformally symplectic rescaling `(q, p) ↦ (a q, p/√a)`, under which
/// `H_ε ∘ φ_a = H_{a²ε} / a`.
pub fn rescale_state(a: f64, s: &PlanarState) -> Result<PlanarState> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "rescaling factor must be positive, got {a}"
        )));
    }
    let inv_sqrt = 1.0 / a.sqrt();
    PlanarState::new(
        [a * s.q[0], a * s.q[1]],
        [s.p[0] * inv_sqrt, s.p[1] * inv_sqrt],
    )
}

/// Whether `q` lies in `{V_ε ≤ −1/2}`; the origin counts as allowed.
fn is_allowed(q: [f64; 2], eps: f64) -> bool {
    let r = q[0].hypot(q[1]);
    r == 0.0 || -1.0 / r + eps * q[0] <= NORMALIZED_ENERGY
}

const UNLABELED: u32 = u32::MAX;
const FORBIDDEN: u32 = u32::MAX - 1;

/// Connected-component labelling of the Hill's region on a square grid.
///
/// The grid covers `[−R, R]²` with `R = max(4/√ε, 1/ε)`, so the unbounded
/// component (which starts near `q₁ = −1/(2ε)`) is always inside. Cells are
/// 4-connected; a cell is allowed when the potential at its center is at most
/// `−1/2`.
#[derive(Debug, Clone)]
pub struct HillMap {
    eps: FieldStrength,
    half_width: f64,
    cells: usize,
    labels: Vec<u32>,
    component_count: usize,
    bounded_label: Option<u32>,
}

impl HillMap {
    /// Labels a `cells × cells` grid.
    pub fn compute(eps: FieldStrength, cells: usize) -> Result<Self> {
        let eps = eps.require_toric()?;
        if cells < 8 {
            return Err(Error::Domain(format!(
                "Hill grid needs at least 8 cells per side, got {cells}"
            )));
        }
        let e = eps.value();
        let half_width = (4.0 / e.sqrt()).max(1.0 / e);
        let h = 2.0 * half_width / cells as f64;
        let center = |i: usize| -half_width + (i as f64 + 0.5) * h;

        let mut labels = vec![UNLABELED; cells * cells];
        for j in 0..cells {
            for i in 0..cells {
                if !is_allowed([center(i), center(j)], e) {
                    labels[j * cells + i] = FORBIDDEN;
                }
            }
        }

        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..labels.len() {
            if labels[start] != UNLABELED {
                continue;
            }
            labels[start] = next;
            queue.push_back(start);
            while let Some(idx) = queue.pop_front() {
                let (i, j) = (idx % cells, idx / cells);
                let mut visit = |n: usize| {
                    if labels[n] == UNLABELED {
                        labels[n] = next;
                        queue.push_back(n);
                    }
                };
                if i > 0 {
                    visit(idx - 1);
                }
                if i + 1 < cells {
                    visit(idx + 1);
                }
                if j > 0 {
                    visit(idx - cells);
                }
                if j + 1 < cells {
                    visit(idx + cells);
                }
            }
            next += 1;
        }

        let mut map = Self {
            eps,
            half_width,
            cells,
            labels,
            component_count: next as usize,
            bounded_label: None,
        };
        // Seed just to the right of the collision point.
        map.bounded_label = map.label_at([0.01, 0.0]);
        Ok(map)
    }

    /// Refines the grid by doubling from `initial_cells` until the component
    /// count agrees at two successive resolutions.
    pub fn compute_stable(
        eps: FieldStrength,
        initial_cells: usize,
        max_cells: usize,
    ) -> Result<Self> {
        let mut cells = initial_cells.max(8);
        let mut current = Self::compute(eps, cells)?;
        while cells * 2 <= max_cells {
            cells *= 2;
            let finer = Self::compute(eps, cells)?;
            let stable = finer.component_count == current.component_count;
            current = finer;
            if stable {
                break;
            }
        }
        Ok(current)
    }

    pub fn eps(&self) -> FieldStrength {
        self.eps
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn cell_size(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of connected components of the allowed region.
    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// Center of cell `(i, j)`; `i` runs along `q₁`, `j` along `q₂`.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.cell_size();
        [
            -self.half_width + (i as f64 + 0.5) * h,
            -self.half_width + (j as f64 + 0.5) * h,
        ]
    }

    /// Class of cell `(i, j)` as labelled by the flood fill.
    pub fn cell_class(&self, i: usize, j: usize) -> HillClass {
        match self.labels[j * self.cells + i] {
            FORBIDDEN => HillClass::Forbidden,
            l if Some(l) == self.bounded_label => HillClass::Bounded,
            _ => HillClass::Unbounded,
        }
    }

    fn cell_index(&self, q: [f64; 2]) -> Option<(usize, usize)> {
        let h = self.cell_size();
        let i = ((q[0] + self.half_width) / h).floor();
        let j = ((q[1] + self.half_width) / h).floor();
        let n = self.cells as f64;
        if i < 0.0 || j < 0.0 || i >= n || j >= n {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// Label of the allowed cell containing `q`, or of the nearest allowed
    /// cell in its 5×5 neighbourhood when `q` sits on a cell that rounds to
    /// forbidden.
    fn label_at(&self, q: [f64; 2]) -> Option<u32> {
        let (i, j) = self.cell_index(q)?;
        let own = self.labels[j * self.cells + i];
        if own != FORBIDDEN {
            return Some(own);
        }
        let h = self.cell_size();
        let mut best: Option<(f64, u32)> = None;
        for dj in -2i64..=2 {
            for di in -2i64..=2 {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= self.cells as i64 || nj >= self.cells as i64 {
                    continue;
                }
                let label = self.labels[nj as usize * self.cells + ni as usize];
                if label == FORBIDDEN {
                    continue;
                }
                let cx = -self.half_width + (ni as f64 + 0.5) * h;
                let cy = -self.half_width + (nj as f64 + 0.5) * h;
                let d = (cx - q[0]).hypot(cy - q[1]);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, label));
                }
            }
        }
        best.map(|(_, l)| l)
    }

    /// Classifies a configuration point.
    pub fn classify(&self, q: [f64; 2]) -> HillClass {
        if q == [0.0, 0.0] {
            return HillClass::CollisionLocus;
        }
        if !is_allowed(q, self.eps.value()) {
            return HillClass::Forbidden;
        }
        match (self.label_at(q), self.bounded_label) {
            (Some(l), Some(b)) if l == b => HillClass::Bounded,
            // Allowed points off the grid are far from the origin.
            _ => HillClass::Unbounded,
        }
    }
}

/// Default resolution for one-off classification.
const CLASSIFY_CELLS: usize = 256;
const CLASSIFY_MAX_CELLS: usize = 2048;

/// Classifies `q` against the Hill's region `{V_ε ≤ −1/2}`.
///
/// Builds a [`HillMap`]; callers classifying many points should build one map
/// and reuse it.
pub fn hill_classify(q: [f64; 2], eps: FieldStrength) -> Result<HillClass> {
    let map = HillMap::compute_stable(eps, CLASSIFY_CELLS, CLASSIFY_MAX_CELLS)?;
    Ok(map.classify(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(e: f64) -> FieldStrength {
        FieldStrength::new(e).unwrap()
    }

    #[test]
    fn field_strength_validation() {
        assert!(FieldStrength::new(0.0).is_err());
        assert!(FieldStrength::new(-0.1).is_err());
        assert!(FieldStrength::new(f64::NAN).is_err());
        assert!(FieldStrength::toric(0.0625).is_err());
        assert!(FieldStrength::toric(0.0624).is_ok());
        assert!(!FieldStrength::unperturbed().is_toric());
    }

    #[test]
    fn potential_examples() {
        assert!((potential([1.0, 0.0], fs(0.05)).unwrap() + 0.95).abs() < 1e-15);
        assert_eq!(potential([0.0, 1.0], fs(0.3)).unwrap(), -1.0);
        assert!(potential([0.0, 0.0], fs(0.05)).is_err());
        assert!(PlanarState::new([0.0, 0.0], [1.0, 0.0]).is_err());
    }

    #[test]
    fn critical_structure() {
        assert_eq!(critical_point(fs(1.0 / 16.0)).unwrap().q, [-4.0, 0.0]);
        assert!((critical_point(fs(0.01)).unwrap().q[0] + 10.0).abs() < 1e-12);
        assert_eq!(critical_value(fs(1.0 / 16.0)).unwrap(), -0.5);
        assert_eq!(critical_value(fs(0.25)).unwrap(), -1.0);
        assert!((critical_value(fs(0.04)).unwrap() + 0.4).abs() < 1e-15);
        assert!(critical_point(FieldStrength::unperturbed()).is_err());
        let s = critical_point(fs(1.0 / 16.0)).unwrap();
        assert_eq!(hamiltonian(&s, fs(1.0 / 16.0)).unwrap(), -0.5);
    }

    #[test]
    fn rescale_rejects_nonpositive() {
        let s = PlanarState::new([1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!(rescale_state(0.0, &s).is_err());
        assert!(rescale_state(-2.0, &s).is_err());
        assert_eq!(rescale_state(1.0, &s).unwrap(), s);
    }

    #[test]
    fn hill_regime_error() {
        assert!(matches!(
            hill_classify([0.1, 0.0], fs(0.2)),
            Err(Error::Regime { .. })
        ));
        assert!(HillMap::compute(fs(1.0 / 16.0), 64).is_err());
    }

    #[test]
    fn origin_is_collision_locus() {
        assert_eq!(
            hill_classify([0.0, 0.0], fs(0.05)).unwrap(),
            HillClass::CollisionLocus
        );
        assert_eq!(HillClass::CollisionLocus.code(), 'B');
    }
}
