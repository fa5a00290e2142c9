//! Transmit side: photon-budget accounting, displacement/squeezing split,
//! the rotation codebook and the homodyne observation model.
//!
//! A symbol pair (x₁, x₂) ∈ {±α}² is rotated by R(θ) before transmission;
//! each rotated amplitude displaces a squeezed vacuum state, and homodyne
//! detection of the in-phase quadrature yields
//!
//! y_i = √(η I_i) x'_i + n_i,   n_i ~ N(0, σ_q²),   σ_q² = ½ e^{-2r}.

use crate::channel::{GammaGammaParams, IrradiancePair};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Mean photon number available per transmitted symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget(f64);

impl PhotonBudget {
    pub fn new(n_total: f64) -> Result<Self> {
        if !n_total.is_finite() || n_total < 0.0 {
            return Err(Error::domain(format!(
                "photon budget must be >= 0, got {n_total}"
            )));
        }
        Ok(PhotonBudget(n_total))
    }

    pub fn n_total(&self) -> f64 {
        self.0
    }
}

/// Displacement/squeezing design for a given photon budget.
///
/// The squeezing fraction β fixes sinh²(r) = βN; the remaining photons go
/// to the displacement, α² = (1-β)N, so the budget is used exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationDesign {
    n_total: f64,
    beta: f64,
    alpha: f64,
    r: f64,
    theta: f64,
    sigma_q_sq: f64,
}

impl ModulationDesign {
    /// Builds a design from the split β ∈ [0, 1] and rotation angle θ
    /// (radians). r = ln(√(βN) + √(βN+1)), the nonnegative root.
    pub fn from_split(budget: PhotonBudget, beta: f64, theta: f64) -> Result<Self> {
        let n = budget.n_total();
        if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
            return Err(Error::domain(format!("beta must lie in [0, 1], got {beta}")));
        }
        // canonical range is [0, pi/4]; angles up to pi/2 produce mirrored
        // but valid constellations and are accepted for symmetry studies
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(Error::domain(format!(
                "theta must lie in [0, pi/2] radians, got {theta}"
            )));
        }
        let bn = beta * n;
        let r = (bn.sqrt() + (bn + 1.0).sqrt()).ln();
        Ok(ModulationDesign {
            n_total: n,
            beta,
            alpha: ((1.0 - beta) * n).sqrt(),
            r,
            theta,
            sigma_q_sq: 0.5 * (-2.0 * r).exp(),
        })
    }

    pub fn n_total(&self) -> f64 {
        self.n_total
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn squeezing(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Quadrature noise variance σ_q² = ½ e^{-2r}.
    pub fn sigma_q_sq(&self) -> f64 {
        self.sigma_q_sq
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::from_split(PhotonBudget::new(self.n_total)?, self.beta, theta)
    }
}

/// Applies R(θ) to a two-slot vector.
pub fn rotate(theta: f64, x: [f64; 2]) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [x[0] * c - x[1] * s, x[0] * s + x[1] * c]
}

/// The four rotated two-slot BPSK codewords.
///
/// Index order is fixed: bit pattern b₁b₂ with bit 0 ↦ +α, so
/// index 0 = (+α,+α), 1 = (+α,-α), 2 = (-α,+α), 3 = (-α,-α).
#[derive(Debug, Clone, Copy)]
pub struct Codebook {
    symbols: [[f64; 2]; 4],
    codewords: [[f64; 2]; 4],
}

impl Codebook {
    pub fn new(design: &ModulationDesign) -> Self {
        let a = design.alpha();
        let symbols = [[a, a], [a, -a], [-a, a], [-a, -a]];
        let codewords = symbols.map(|s| rotate(design.theta(), s));
        Codebook { symbols, codewords }
    }

    /// Un-rotated BPSK symbol pairs.
    pub fn symbols(&self) -> &[[f64; 2]; 4] {
        &self.symbols
    }

    /// Rotated (transmitted) codewords.
    pub fn codewords(&self) -> &[[f64; 2]; 4] {
        &self.codewords
    }
}

/// Full link parameterization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkConfig {
    pub eta: f64,
    pub channel: GammaGammaParams,
    pub design: ModulationDesign,
    pub seed: u64,
}

impl LinkConfig {
    pub fn new(
        eta: f64,
        channel: GammaGammaParams,
        design: ModulationDesign,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::domain(format!("eta must lie in [0, 1], got {eta}")));
        }
        Ok(LinkConfig {
            eta,
            channel,
            design,
            seed,
        })
    }
}

/// One homodyne observation of a transmitted codeword through the faded link.
pub fn homodyne_observe<R: Rng + ?Sized>(
    cfg: &LinkConfig,
    codeword: [f64; 2],
    fading: &IrradiancePair,
    noise: &mut R,
) -> [f64; 2] {
    let sigma = cfg.design.sigma_q_sq().sqrt();
    let dist = Normal::new(0.0, sigma).expect("sigma is finite and nonnegative");
    [
        (cfg.eta * fading.i1).sqrt() * codeword[0] + dist.sample(noise),
        (cfg.eta * fading.i2).sqrt() * codeword[1] + dist.sample(noise),
    ]
}

/// The effective decision-statistic scale e^{2r} α².
pub fn effective_snr_proxy(design: &ModulationDesign) -> f64 {
    (2.0 * design.squeezing()).exp() * design.alpha().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn design(n: f64, beta: f64, theta: f64) -> ModulationDesign {
        ModulationDesign::from_split(PhotonBudget::new(n).unwrap(), beta, theta).unwrap()
    }

    #[test]
    fn rotation_basics() {
        let a = 1.7;
        assert_eq!(rotate(0.0, [a, -a]), [a, -a]);
        let out = rotate(FRAC_PI_4, [a, a]);
        assert!(out[0].abs() < 1e-15);
        assert!((out[1] - a * 2.0f64.sqrt()).abs() < 1e-14);
        // norm preservation across angles
        for i in 0..40 {
            let th = i as f64 * PI / 80.0;
            let out = rotate(th, [a, -a]);
            let n2 = out[0] * out[0] + out[1] * out[1];
            assert!((n2 - 2.0 * a * a).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_orthonormality() {
        for i in 0..=90 {
            let th = i as f64 * PI / 180.0;
            let e1 = rotate(th, [1.0, 0.0]);
            let e2 = rotate(th, [0.0, 1.0]);
            assert!((e1[0] * e1[0] + e1[1] * e1[1] - 1.0).abs() < 1e-15);
            assert!((e2[0] * e2[0] + e2[1] * e2[1] - 1.0).abs() < 1e-15);
            assert!((e1[0] * e2[0] + e1[1] * e2[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn design_no_squeezing() {
        let d = design(10.0, 0.0, 0.0);
        assert_eq!(d.squeezing(), 0.0);
        assert!((d.alpha() - 10.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.sigma_q_sq(), 0.5);
    }

    #[test]
    fn design_budget_exactness() {
        for &n in &[0.5, 10.0, 80.0, 1000.0] {
            for i in 0..=20 {
                let beta = i as f64 / 20.0;
                let d = design(n, beta, 0.3);
                let used = d.alpha().powi(2) + d.squeezing().sinh().powi(2);
                assert!(
                    ((used - n) / n).abs() < 1e-12,
                    "n={n} beta={beta}: used={used}"
                );
            }
        }
    }

    #[test]
    fn design_optimal_split_closed_form() {
        // beta = N/(2N+1) gives r = ln(2N+1)/2 and alpha^2 = N(N+1)/(2N+1)
        for &n in &[1.0, 10.0, 80.0, 500.0] {
            let beta = n / (2.0 * n + 1.0);
            let d = design(n, beta, 0.0);
            let r_want = 0.5 * (2.0 * n + 1.0).ln();
            let a_want = (n * (n + 1.0) / (2.0 * n + 1.0)).sqrt();
            assert!((d.squeezing() - r_want).abs() < 1e-12, "n={n}");
            assert!((d.alpha() - a_want).abs() < 1e-12, "n={n}");
        }
        // N = 80 spot values
        let d = design(80.0, 80.0 / 161.0, 0.0);
        assert!((d.squeezing() - 0.5 * 161.0f64.ln()).abs() < 1e-12);
        assert!((d.squeezing() - 2.5407).abs() < 1e-4);
        assert!((d.beta() - 0.4969).abs() < 1e-4);
    }

    #[test]
    fn design_rejects_bad_input() {
        let b = PhotonBudget::new(10.0).unwrap();
        assert!(ModulationDesign::from_split(b, -0.1, 0.0).is_err());
        assert!(ModulationDesign::from_split(b, 1.1, 0.0).is_err());
        assert!(ModulationDesign::from_split(b, 0.5, -0.2).is_err());
        assert!(PhotonBudget::new(-1.0).is_err());
    }

    #[test]
    fn sigma_q_decreasing_in_r() {
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let d = design(40.0, i as f64 / 20.0, 0.0);
            if d.squeezing() > 0.0 {
                assert!(d.sigma_q_sq() < prev);
            }
            prev = d.sigma_q_sq();
        }
    }

    #[test]
    fn codebook_difference_structure() {
        let theta = 0.3;
        let d = design(25.0, 0.4, theta);
        let cb = Codebook::new(&d);
        let a = d.alpha();
        let a4 = a.powi(4);
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let si = cb.symbols()[i];
                let sj = cb.symbols()[j];
                let diff_positions =
                    (si[0] != sj[0]) as usize + (si[1] != sj[1]) as usize;
                let u = [
                    cb.codewords()[i][0] - cb.codewords()[j][0],
                    cb.codewords()[i][1] - cb.codewords()[j][1],
                ];
                let prod = u[0] * u[0] * u[1] * u[1];
                let sum = u[0] * u[0] + u[1] * u[1];
                let dx = [si[0] - sj[0], si[1] - sj[1]];
                let want_sum = dx[0] * dx[0] + dx[1] * dx[1];
                assert!(((sum - want_sum) / want_sum).abs() < 1e-12);
                let want_prod = match diff_positions {
                    1 => 4.0 * a4 * (2.0 * theta).sin().powi(2),
                    2 => 16.0 * a4 * (2.0 * theta).cos().powi(2),
                    _ => unreachable!(),
                };
                assert!(
                    ((prod - want_prod) / want_prod).abs() < 1e-11,
                    "pair ({i},{j})"
                );
            }
        }
        // closed under global sign flip
        for i in 0..4 {
            let c = cb.codewords()[i];
            let flipped = cb.codewords()[3 - i];
            assert!((c[0] + flipped[0]).abs() < 1e-14);
            assert!((c[1] + flipped[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn effective_snr_values() {
        let d0 = design(80.0, 0.0, 0.0);
        assert!((effective_snr_proxy(&d0) - 80.0).abs() < 1e-10);
        // e^{2r} alpha^2 / N^2 -> 4 beta (1-beta) as N grows
        for &beta in &[0.25, 0.5, 0.7] {
            let d = design(1e8, beta, 0.0);
            let ratio = effective_snr_proxy(&d) / 1e16;
            assert!(
                (ratio - 4.0 * beta * (1.0 - beta)).abs() < 1e-3,
                "beta={beta}: {ratio}"
            );
        }
    }

    #[test]
    fn homodyne_noise_moments() {
        let channel = GammaGammaParams::new(0.5, 1.2).unwrap();
        let d = design(20.0, 0.3, 0.2);
        let cfg = LinkConfig::new(0.8, channel, d, 7).unwrap();
        let cb = Codebook::new(&d);
        let fading = IrradiancePair::new(0.7, 1.4).unwrap();
        let mut rng = substream(cfg.seed, 0);
        let n = 500_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let y = homodyne_observe(&cfg, cb.codewords()[1], &fading, &mut rng);
            for (slot, &yi) in y.iter().enumerate() {
                let i = if slot == 0 { fading.i1 } else { fading.i2 };
                let resid = yi - (cfg.eta * i).sqrt() * cb.codewords()[1][slot];
                sum += resid;
                sumsq += resid * resid;
            }
        }
        let m = sum / (2.0 * n as f64);
        let v = sumsq / (2.0 * n as f64) - m * m;
        let want = d.sigma_q_sq();
        // var of the sample variance ~ 2 sigma^4 / n
        let se = (2.0 * want * want / (2.0 * n as f64)).sqrt();
        assert!((v - want).abs() < 3.0 * se, "v={v} want={want}");
    }
}
