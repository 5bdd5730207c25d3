#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use approx::assert_relative_eq;
use stark_toric::elliptic::*;
use stark_toric::quadrature::QuadratureSpec;

fn m(x: f64) -> EllipticModulus {
    EllipticModulus::new(x).unwrap()
}

// Golden values computed with mpmath at 40 digits.
const K_HALF: f64 = 1.854_074_677_301_371_9;
const K_MINUS_ONE: f64 = 1.311_028_777_146_059_9;
const K_POINT_NINE: f64 = 2.578_092_113_348_173_3;
const K_MINUS_TEN: f64 = 0.790_871_890_238_738_48;
const K_D1_HALF: f64 = 0.847_213_084_793_979_09;
const K_D2_POINT_THREE: f64 = 0.926_328_931_788_757_95;
const K_D2_MINUS_TWO: f64 = 0.043_539_587_444_864_339;

#[test]
fn k_at_zero_is_half_pi() {
    assert_eq!(ellip_k(m(0.0)), PI / 2.0);
}

#[test]
fn k_golden_values() {
    assert_relative_eq!(ellip_k(m(0.5)), K_HALF, max_relative = 1e-15);
    assert_relative_eq!(ellip_k(m(-1.0)), K_MINUS_ONE, max_relative = 1e-15);
    assert_relative_eq!(ellip_k(m(-1.0)), K_HALF / 2f64.sqrt(), max_relative = 1e-15);
    assert_relative_eq!(ellip_k(m(0.9)), K_POINT_NINE, max_relative = 1e-15);
    assert_relative_eq!(ellip_k(m(-10.0)), K_MINUS_TEN, max_relative = 1e-15);
}

#[test]
fn k_near_one_stays_finite() {
    let k = ellip_k(m(1.0 - 1e-15));
    assert!(k.is_finite() && k > 18.0);
}

#[test]
fn modulus_rejects_one_and_above() {
    assert!(EllipticModulus::new(1.0).is_err());
    assert!(EllipticModulus::new(1.5).is_err());
    assert!(EllipticModulus::try_from(f64::NAN).is_err());
}

#[test]
fn oracle_agrees_with_agm() {
    let spec = QuadratureSpec::default();
    assert!((ellip_k_oracle(m(0.0), &spec).unwrap() - PI / 2.0).abs() <= spec.abs_tol());
    for x in [0.9, -10.0, 0.5, -1.0] {
        let oracle = ellip_k_oracle(m(x), &spec).unwrap();
        assert!((oracle - ellip_k(m(x))).abs() < 1e-10, "m = {x}");
    }
}

#[test]
fn first_derivative() {
    assert_relative_eq!(ellip_k_d1(m(0.0)), PI / 8.0, max_relative = 1e-15);
    assert_relative_eq!(ellip_k_d1(m(0.5)), K_D1_HALF, max_relative = 1e-13);
    let spec = QuadratureSpec::default();
    let oracle = ellip_k_d1_oracle(m(0.5), &spec).unwrap();
    assert!((oracle - ellip_k_d1(m(0.5))).abs() < 1e-9);
    for k in 0..=180 {
        let x = -0.9 + 0.01 * k as f64;
        assert!(ellip_k_d1(m(x)) > 0.0, "m = {x}");
    }
}

#[test]
fn second_derivative() {
    assert_relative_eq!(
        ellip_k_d2(m(0.0)).unwrap(),
        9.0 * PI / 64.0,
        max_relative = 1e-13
    );
    assert_relative_eq!(
        ellip_k_d2(m(0.3)).unwrap(),
        K_D2_POINT_THREE,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        ellip_k_d2(m(-2.0)).unwrap(),
        K_D2_MINUS_TWO,
        max_relative = 1e-12
    );

    let h = 1e-4;
    for x in [0.3, -2.0] {
        let fd = (ellip_k(m(x + h)) - 2.0 * ellip_k(m(x)) + ellip_k(m(x - h))) / (h * h);
        let d2 = ellip_k_d2(m(x)).unwrap();
        assert!(d2 > 0.0);
        assert!((fd - d2).abs() < 1e-5, "m = {x}: fd {fd} vs {d2}");
    }
}

#[test]
fn log_derivative() {
    assert_relative_eq!(log_k_d1(m(0.0)), 0.25, max_relative = 1e-15);
    let x = m(0.7);
    assert_relative_eq!(
        log_k_d1(x),
        ellip_k_d1(x) / ellip_k(x),
        max_relative = 1e-14
    );
}

#[test]
fn interpolation_margin_examples() {
    // Relative margins (K K'' - 3K'^2) / (K K'') at selected points.
    for (x, rel) in [(-10.0, 0.226), (0.0, 1.0 / 3.0), (0.99, 0.602)] {
        let margin = interpolation_margin(m(x)).unwrap();
        let kk2 = ellip_k(m(x)) * ellip_k_d2(m(x)).unwrap();
        assert!(
            (margin / kk2 - rel).abs() < 1e-3,
            "m = {x}: {}",
            margin / kk2
        );
        assert!(satisfies_interpolation_bound(m(x), 1e-9).unwrap());
    }
}

#[test]
fn log_k_is_convex_on_a_grid() {
    for k in 0..100 {
        let x = -9.9 + 0.1 * k as f64;
        assert!(
            log_k_second_difference(m(x), 1e-3).unwrap() > 0.0,
            "m = {x}"
        );
    }
    assert!(log_k_second_difference(m(0.0), 0.0).is_err());
    assert!(log_k_second_difference(m(0.9995), 1e-3).is_err());
}
