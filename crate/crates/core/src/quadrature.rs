//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Intervals are bisected in order of largest estimated error until the
//! summed estimate meets `max(abs_tol, rel_tol * |I|)`. The error estimate
//! follows the QUADPACK rescaling, which is sharp for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and refinement budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    abs_tol: f64,
    rel_tol: f64,
    max_refinements: u32,
}

impl QuadratureSpec {
    /// `max_refinements` bounds the bisection depth of any subinterval.
    pub fn new(abs_tol: f64, rel_tol: f64, max_refinements: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) || !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be positive, got abs {abs_tol}, rel {rel_tol}"
            )));
        }
        if max_refinements == 0 {
            return Err(Error::Domain("max_refinements must be at least 1".into()));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_refinements,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_refinements(&self) -> u32 {
        self.max_refinements
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_refinements: 30,
        }
    }
}

/// Upper bound on the number of live subintervals.
const MAX_INTERVALS: usize = 20_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One 15-point Kronrod panel: (integral, error estimate, estimate is at the
/// round-off floor).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, bool) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let integral = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half).abs();

    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let mut at_floor = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err <= floor {
        err = floor;
        at_floor = true;
    }
    (integral, err, at_floor)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
    at_floor: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]`. An empty range returns exactly zero.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err, at_floor) = gk15(&f, a, b);
    if !value.is_finite() {
        return Err(Error::Domain(format!("non-finite integrand on [{a}, {b}]")));
    }

    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        err,
        depth: 0,
        at_floor,
    });
    let mut total = value;
    let mut total_err = err;

    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        // Splitting cannot improve on a panel already limited by round-off.
        if heap.peek().is_some_and(|p| p.at_floor) {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        if worst.depth >= spec.max_refinements || heap.len() + 2 > MAX_INTERVALS {
            return Err(Error::ToleranceNotMet {
                estimate: total_err,
                target,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1, f1) = gk15(&f, worst.a, mid);
        let (v2, e2, f2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        let depth = worst.depth + 1;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
            depth,
            at_floor: f1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
            depth,
            at_floor: f2,
        });
    }

    // Re-sum from the panels to shed the drift of the running total.
    let sum: f64 = heap.into_sorted_vec().iter().map(|p| p.value).sum();
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let spec = QuadratureSpec::default();
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &spec).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let spec = QuadratureSpec::default();
        let fwd = integrate(f64::sin, 0.0, PI, &spec).unwrap();
        let rev = integrate(f64::sin, PI, 0.0, &spec).unwrap();
        assert!((fwd - 2.0).abs() < 1e-12);
        assert!((fwd + rev).abs() < 1e-14);
    }

    #[test]
    fn peaked_integrand_refines() {
        let spec = QuadratureSpec::new(1e-12, 1e-12, 40).unwrap();
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &spec).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 2).unwrap();
        let err = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-9, 10).is_err());
        assert!(QuadratureSpec::new(1e-9, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-9, 1e-9, 0).is_err());
        assert!(QuadratureSpec::new(1e-9, 1e-9, 1).is_ok());
    }
}
