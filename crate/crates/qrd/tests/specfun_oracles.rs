//! Oracle checks for the special-function layer.
//!
//! Each implementation path is compared against an independent route:
//! Stirling's series for ln Gamma, and integral representations (evaluated
//! with tanh-sinh quadrature) for K_nu, Psi and Q. The frozen constants were
//! produced by these oracles ahead of the implementation.

#![allow(clippy::excessive_precision)]

use qrd::quad::integrate_0_inf;
use qrd::specfun::{bessel_k, beta, ln_gamma, q_function, tricomi_u};
use std::f64::consts::PI;

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Stirling series with argument shift: ln Gamma(x) = ln Gamma(x + n) - sum
/// of logs, with the series evaluated at x + n >= 30 where the Bernoulli
/// tail is far below 1e-16.
fn ln_gamma_oracle(x: f64) -> f64 {
    // B_2k / (2k (2k-1)) for 2k = 2..14
    const STIRLING: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let mut shift = 0.0;
    let mut z = x;
    while z < 30.0 {
        shift += z.ln();
        z += 1.0;
    }
    let mut series = 0.0;
    let mut zp = z;
    for c in STIRLING {
        series += c / zp;
        zp *= z * z;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// K_nu(x) = \int_0^inf e^{-x cosh t} cosh(nu t) dt.
fn bessel_k_oracle(nu: f64, x: f64) -> f64 {
    integrate_0_inf(|t| (-x * t.cosh()).exp() * (nu * t).cosh(), 1e-13).unwrap()
}

/// Psi(a, b; x) = x^{-a}/Gamma(a) \int_0^inf e^{-w} w^{a-1} (1 + w/x)^{b-a-1} dw.
fn tricomi_oracle(a: f64, b: f64, x: f64) -> f64 {
    let lg = ln_gamma_oracle(a);
    let integral = integrate_0_inf(
        |w| (-w + (a - 1.0) * w.ln() + (b - a - 1.0) * (w / x).ln_1p()).exp(),
        1e-13,
    )
    .unwrap();
    x.powf(-a) * (-lg).exp() * integral
}

/// Q(x) = \int_x^inf N(0,1) via the substitution u = t - x.
fn q_oracle(x: f64) -> f64 {
    integrate_0_inf(
        |u| (-(x + u) * (x + u) / 2.0).exp() / (2.0 * PI).sqrt(),
        1e-13,
    )
    .unwrap()
}

#[test]
fn ln_gamma_matches_stirling_oracle() {
    // frozen oracle value for the spec'd point x = 7.3
    let frozen = 7.147_892_523_022_249_0_f64;
    assert!(rel_err(ln_gamma_oracle(7.3), frozen) < 1e-14);
    assert!(rel_err(ln_gamma(7.3).unwrap(), frozen) < 1e-13);

    let mut x = 1e-3;
    while x <= 1e3 {
        let want = ln_gamma_oracle(x);
        let got = ln_gamma(x).unwrap();
        let err = if want.abs() > 1e-6 {
            rel_err(got, want)
        } else {
            (got - want).abs()
        };
        assert!(err < 1e-12, "x={x}: {got} vs {want}");
        x *= 1.37;
    }
}

#[test]
fn beta_via_ln_gamma_oracle() {
    let want = (ln_gamma_oracle(2.5) * 2.0 - ln_gamma_oracle(5.0)).exp();
    let frozen = 0.073_631_077_818_510_78_f64;
    assert!(rel_err(want, frozen) < 1e-13);
    assert!(rel_err(beta(2.5, 2.5).unwrap(), frozen) < 1e-13);
}

#[test]
fn bessel_k_matches_integral_oracle() {
    // frozen oracle value for nu = 0.7, x = 2
    let frozen = 0.126_013_271_306_610_64_f64;
    assert!(rel_err(bessel_k_oracle(0.7, 2.0), frozen) < 1e-11);
    assert!(rel_err(bessel_k(0.7, 2.0).unwrap(), frozen) < 1e-12);

    for &nu in &[0.0, 0.3, 0.7, 1.2, 2.4, 3.5, 4.9] {
        for &x in &[1e-6, 1e-4, 0.01, 0.3, 1.0, 1.9, 2.1, 5.0, 12.0, 50.0] {
            let want = bessel_k_oracle(nu, x);
            let got = bessel_k(nu, x).unwrap();
            assert!(
                rel_err(got, want) < 1e-10,
                "nu={nu} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn tricomi_matches_integral_oracle() {
    // frozen oracle values, one per evaluation branch
    for (a, b, x, frozen) in [
        (0.5, 0.3, 1.2, 0.685_693_397_115_032_97),   // Kummer connection
        (2.1, -1.4, 20.0, 1.237_467_964_252_268_5e-3), // ODE bridge
        (4.0, 3.1, 30.0, 9.820_374_915_545_538e-7),  // ODE bridge
    ] {
        assert!(rel_err(tricomi_oracle(a, b, x), frozen) < 1e-10, "oracle {a} {b} {x}");
        let got = tricomi_u(a, b, x).unwrap();
        assert!(rel_err(got, frozen) < 1e-8, "{a} {b} {x}: {got} vs {frozen}");
    }

    // parameter pairs produced by the channel layer: (a, b) = (eps, eps+1-zeta)
    let params = [(0.5, 0.3), (2.1, -1.4), (4.0, 3.1), (1.9, -1.1), (0.5, 1.5)];
    for &(a, b) in &params {
        let mut x = 1e-4;
        while x <= 1.2e3 {
            let want = tricomi_oracle(a, b, x);
            let got = tricomi_u(a, b, x).unwrap();
            assert!(
                rel_err(got, want) < 1e-8,
                "a={a} b={b} x={x}: {got} vs {want} (rel {})",
                rel_err(got, want)
            );
            x *= 1.9;
        }
    }
}

#[test]
fn q_function_matches_tail_integral_oracle() {
    let frozen = 0.158_655_253_931_457_05_f64;
    assert!(rel_err(q_oracle(1.0), frozen) < 1e-11);
    assert!((q_function(1.0).unwrap() - frozen).abs() < 1e-14);
    for &x in &[-3.0, -0.5, 0.0, 0.7, 2.5, 6.0] {
        assert!((q_function(x).unwrap() - q_oracle(x)).abs() < 1e-12, "x={x}");
    }
}
