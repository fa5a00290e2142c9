//! Pairwise error probabilities, the union-bound SER, high-SNR asymptotics
//! and the optimal rotation/split design.
//!
//! With joint ML detection the twelve ordered codeword pairs collapse into
//! two classes by the number of flipped BPSK positions. A single-position
//! flip has rotated difference u = R(θ)(±2α, 0)ᵀ (or the slot-swapped
//! version); a double flip has u = R(θ)(±2α, ±2α)ᵀ. The per-symbol union
//! bound weights these as 2·PEP₁ + PEP₂.

use crate::channel::{self, GammaGammaParams, IrradiancePair};
use crate::error::{Error, Result};
use crate::link::{rotate, ModulationDesign, PhotonBudget};
use crate::quad::GaussLegendre;
use crate::specfun::{beta, ln_gamma, q_function};
use std::f64::consts::{FRAC_PI_2, PI};

/// Representative difference vectors for the two pairwise-error classes:
/// `[0]` single-position flip, `[1]` double flip.
pub fn difference_vectors(design: &ModulationDesign) -> [[f64; 2]; 2] {
    let a = design.alpha();
    let th = design.theta();
    [rotate(th, [2.0 * a, 0.0]), rotate(th, [2.0 * a, 2.0 * a])]
}

/// PEP between two codewords at known irradiance,
/// Q(√(η e^{2r}(I₁u₁² + I₂u₂²)/2)).
pub fn pep_conditional(
    eta: f64,
    design: &ModulationDesign,
    u: [f64; 2],
    fading: &IrradiancePair,
) -> f64 {
    let e2r = (2.0 * design.squeezing()).exp();
    let arg = eta * e2r * (fading.i1 * u[0] * u[0] + fading.i2 * u[1] * u[1]) / 2.0;
    q_function(arg.sqrt()).expect("argument is finite")
}

/// One Craig-form integrand factor pair integrated over (0, π/2) with a
/// fixed Gauss-Legendre rule. `c1`, `c2` are the per-slot Laplace scales.
fn craig_product(params: &GammaGammaParams, c1: f64, c2: f64, rule: &GaussLegendre) -> Result<f64> {
    let failed = std::cell::Cell::new(false);
    let val = rule.integrate(0.0, FRAC_PI_2, |phi| {
        let inv = 1.0 / (phi.sin().powi(2));
        let f1 = if c1 > 0.0 {
            channel::laplace_exact(params, c1 * inv)
        } else {
            Ok(1.0)
        };
        let f2 = if c2 > 0.0 {
            channel::laplace_exact(params, c2 * inv)
        } else {
            Ok(1.0)
        };
        match (f1, f2) {
            (Ok(a), Ok(b)) => a * b,
            _ => {
                failed.set(true);
                0.0
            }
        }
    });
    if failed.get() {
        return Err(Error::NonConvergence(
            "Laplace transform evaluation failed inside the Craig integral".into(),
        ));
    }
    Ok(val / PI)
}

fn craig_product_adaptive(params: &GammaGammaParams, c1: f64, c2: f64) -> Result<f64> {
    let mut prev = craig_product(params, c1, c2, &GaussLegendre::new(16))?;
    let mut n = 32;
    while n <= 512 {
        let cur = craig_product(params, c1, c2, &GaussLegendre::new(n))?;
        let scale = cur.abs().max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= 1e-8 * scale {
            return Ok(cur);
        }
        prev = cur;
        n *= 2;
    }
    Err(Error::NonConvergence(format!(
        "Craig integral did not stabilize to 1e-8 (c1={c1:.3e}, c2={c2:.3e})"
    )))
}

/// Fading-averaged PEP for difference vector `u`.
pub fn pep_average(
    eta: f64,
    design: &ModulationDesign,
    u: [f64; 2],
    params: &GammaGammaParams,
) -> Result<f64> {
    let e2r = (2.0 * design.squeezing()).exp();
    let c1 = eta * e2r * u[0] * u[0] / 4.0;
    let c2 = eta * e2r * u[1] * u[1] / 4.0;
    craig_product_adaptive(params, c1, c2)
}

/// Union-bound SER of the rotated scheme, 2·PEP₁ + PEP₂.
pub fn ser_union_qrd(
    eta: f64,
    design: &ModulationDesign,
    params: &GammaGammaParams,
) -> Result<f64> {
    let [u1, u2] = difference_vectors(design);
    Ok(2.0 * pep_average(eta, design, u1, params)? + pep_average(eta, design, u2, params)?)
}

/// Exact SER of the unrotated single-slot reference,
/// (1/π)∫ L(η e^{2r}α²/sin²φ) dφ.
pub fn ser_baseline(
    eta: f64,
    design: &ModulationDesign,
    params: &GammaGammaParams,
) -> Result<f64> {
    let e2r = (2.0 * design.squeezing()).exp();
    let c = eta * e2r * design.alpha().powi(2);
    craig_product_adaptive(params, c, 0.0)
}

/// Leading asymptotic coefficient of one balanced PEP,
/// 2^{6g-1} Λ² (η sin2θ)^{-2g} B(2g+½, 2g+½)/π, so that
/// PEP ≈ C₀ (e^{2r}α²)^{-2g}.
pub fn c0_constant(eta: f64, theta: f64, params: &GammaGammaParams) -> f64 {
    let g = params.g();
    let lam = channel::lambda_constant(params);
    let ubar_prod = 4.0 * (2.0 * theta).sin().powi(2);
    lam * lam * (2.0f64).powf(8.0 * g - 1.0) * eta.powf(-2.0 * g) * ubar_prod.powf(-g)
        * beta(2.0 * g + 0.5, 2.0 * g + 0.5).expect("argument is positive")
        / PI
}

/// Union-bound asymptotic coefficient at the balanced angle, written out in
/// Gamma-function form: 3·2^{6g-1} Λ² (η sin2θ)^{-2g} Γ(2g+½)²/(π Γ(4g+1)).
pub fn c1_constant(eta: f64, theta: f64, params: &GammaGammaParams) -> f64 {
    let g = params.g();
    let lam = channel::lambda_constant(params);
    let lg = (2.0 * ln_gamma(2.0 * g + 0.5).expect("argument is positive")
        - ln_gamma(4.0 * g + 1.0).expect("argument is positive"))
        .exp();
    3.0 * (2.0f64).powf(6.0 * g - 1.0) * lam * lam * (eta * (2.0 * theta).sin()).powf(-2.0 * g)
        * lg
        / PI
}

/// High-SNR union bound at arbitrary θ,
/// K·[2(4sin²2θ)^{-g} + (16cos²2θ)^{-g}]·(e^{2r}α²)^{-2g}.
/// Diverges at θ = 0 where the double-diversity slope is lost.
pub fn asymptotic_ser_qrd(
    eta: f64,
    design: &ModulationDesign,
    params: &GammaGammaParams,
) -> f64 {
    let g = params.g();
    let lam = channel::lambda_constant(params);
    let k = lam * lam * (2.0f64).powf(8.0 * g - 1.0) * eta.powf(-2.0 * g)
        * beta(2.0 * g + 0.5, 2.0 * g + 0.5).expect("argument is positive")
        / PI;
    let s2 = (2.0 * design.theta()).sin().powi(2);
    let c2 = (2.0 * design.theta()).cos().powi(2);
    let shape = 2.0 * (4.0 * s2).powf(-g) + (16.0 * c2).powf(-g);
    let x = (2.0 * design.squeezing()).exp() * design.alpha().powi(2);
    k * shape * x.powf(-2.0 * g)
}

/// High-SNR reference SER, C_b (e^{2r}α²)^{-g} with
/// C_b = 2^{2g-1} Λ η^{-g} B(g+½, g+½)/π.
pub fn asymptotic_ser_baseline(
    eta: f64,
    design: &ModulationDesign,
    params: &GammaGammaParams,
) -> f64 {
    let x = (2.0 * design.squeezing()).exp() * design.alpha().powi(2);
    cb_constant(eta, params) * x.powf(-params.g())
}

pub fn cb_constant(eta: f64, params: &GammaGammaParams) -> f64 {
    let g = params.g();
    channel::lambda_constant(params) * (2.0f64).powf(2.0 * g - 1.0) * eta.powf(-g)
        * beta(g + 0.5, g + 0.5).expect("argument is positive")
        / PI
}

/// Asymptotic behaviour SER ≈ c·N^{-d} as the photon budget N grows with a
/// fixed squeezing fraction β.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticGains {
    /// Diversity order with respect to the photon number.
    pub diversity: f64,
    /// Matching prefactor c.
    pub prefactor: f64,
    /// Maximum coding gain c^{-1/d}.
    pub gc_max: f64,
}

/// The four regimes: rotated or reference scheme, with (β > 0, so
/// e^{2r}α² ~ 4β(1-β)N²) or without (e^{2r}α² = N) squeezing.
pub fn asymptotic_gains(
    eta: f64,
    beta: f64,
    theta: f64,
    rotated: bool,
    params: &GammaGammaParams,
) -> Result<AsymptoticGains> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain(format!(
            "asymptotic split must satisfy 0 <= beta < 1, got {beta}"
        )));
    }
    let g = params.g();
    let (snr_order, snr_gain) = if beta > 0.0 {
        (2.0, 4.0 * beta * (1.0 - beta))
    } else {
        (1.0, 1.0)
    };
    let (d_snr, c_snr) = if rotated {
        let design = ModulationDesign::from_split(PhotonBudget::new(1.0)?, beta, theta)?;
        let base = asymptotic_ser_qrd(eta, &design, params);
        let x = (2.0 * design.squeezing()).exp() * design.alpha().powi(2);
        // strip the unit-budget proxy back out to recover the bare coefficient
        (2.0 * g, base * x.powf(2.0 * g))
    } else {
        (g, cb_constant(eta, params))
    };
    let diversity = d_snr * snr_order;
    let prefactor = c_snr * snr_gain.powf(-d_snr);
    Ok(AsymptoticGains {
        diversity,
        prefactor,
        gc_max: prefactor.powf(-1.0 / diversity),
    })
}

/// Maximizes a unimodal function on [a, b] by golden-section search.
/// Returns (argmax, max).
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (lo, hi) = (a, b);
    // below ~1e-6 the bracketing comparisons are dominated by rounding
    // noise in f; finish with a parabolic fit instead
    let gs_tol = tol.max(1e-6);
    while (b - a) > gs_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut x = 0.5 * (a + b);
    if tol < gs_tol {
        let h = 1e-5 * (1.0 + x.abs());
        if x - h >= lo && x + h <= hi {
            let (f0, f1, f2) = (f(x - h), f(x), f(x + h));
            let denom = f0 - 2.0 * f1 + f2;
            if denom < 0.0 {
                let step = 0.5 * h * (f0 - f2) / denom;
                if step.abs() <= h {
                    x += step;
                }
            }
        }
    }
    (x, f(x))
}

/// The displacement-scale objective e^{2r}(1-β) = (√(βN)+√(βN+1))²(1-β);
/// maximizing it over β maximizes the effective scale e^{2r}α².
pub fn split_objective(beta: f64, n: f64) -> f64 {
    let bn = beta * n;
    (bn.sqrt() + (bn + 1.0).sqrt()).powi(2) * (1.0 - beta)
}

/// The jointly optimal design in closed form: θ* = ½ arctan 2 and
/// β* = N/(2N+1).
pub fn optimal_design_closed_form(budget: PhotonBudget) -> Result<ModulationDesign> {
    let n = budget.n_total();
    ModulationDesign::from_split(budget, n / (2.0 * n + 1.0), 0.5 * 2.0f64.atan())
}

/// Minimizes the union-bound SER over (θ, β) numerically: a coarse grid
/// scan followed by golden-section coordinate descent.
pub fn optimal_design_numeric(
    eta: f64,
    budget: PhotonBudget,
    params: &GammaGammaParams,
) -> Result<ModulationDesign> {
    let coarse = GaussLegendre::new(64);
    let union_fixed = |theta: f64, bet: f64| -> f64 {
        let design = match ModulationDesign::from_split(budget, bet, theta) {
            Ok(d) => d,
            Err(_) => return f64::INFINITY,
        };
        let [u1, u2] = difference_vectors(&design);
        let e2r = (2.0 * design.squeezing()).exp();
        let pep = |u: [f64; 2]| {
            craig_product(
                params,
                eta * e2r * u[0] * u[0] / 4.0,
                eta * e2r * u[1] * u[1] / 4.0,
                &coarse,
            )
            .unwrap_or(f64::INFINITY)
        };
        2.0 * pep(u1) + pep(u2)
    };

    let beta_max = 0.999;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for it in 0..46 {
        let theta = it as f64 * (PI / 4.0) / 45.0;
        for ib in 0..=50 {
            let bet = ib as f64 * beta_max / 50.0;
            let v = union_fixed(theta, bet);
            if v < best.0 {
                best = (v, theta, bet);
            }
        }
    }
    let (_, mut theta, mut bet) = best;
    let dth = (PI / 4.0) / 45.0;
    let dbe = beta_max / 50.0;
    for _ in 0..3 {
        let b = bet;
        (theta, _) = golden_section_max(
            |t| -union_fixed(t, b),
            (theta - dth).max(0.0),
            (theta + dth).min(PI / 4.0),
            1e-10,
        );
        let t = theta;
        (bet, _) = golden_section_max(
            |be| -union_fixed(t, be),
            (bet - dbe).max(0.0),
            (bet + dbe).min(beta_max),
            1e-10,
        );
    }
    ModulationDesign::from_split(budget, bet, theta)
}
