//! Joint maximum-likelihood detection and the Monte Carlo SER engine.
//!
//! The receiver knows the fading pair (I₁, I₂) and minimizes the Euclidean
//! distance between the observation and the four faded codewords. A symbol
//! spans both slots, so one trial yields one symbol decision.

use crate::channel::{GammaGammaSampler, IrradiancePair};
use crate::error::Result;
use crate::link::{homodyne_observe, Codebook, LinkConfig};
use crate::rng::substream;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

/// Picks the codeword index minimizing ||y - √(ηI) ∘ c||². Ties resolve to
/// the lowest index (strict improvement required to switch).
pub fn ml_detect(eta: f64, codebook: &Codebook, fading: &IrradiancePair, y: [f64; 2]) -> usize {
    let g1 = (eta * fading.i1).sqrt();
    let g2 = (eta * fading.i2).sqrt();
    let mut best = 0usize;
    let mut best_metric = f64::INFINITY;
    for (k, c) in codebook.codewords().iter().enumerate() {
        let d1 = y[0] - g1 * c[0];
        let d2 = y[1] - g2 * c[1];
        let metric = d1 * d1 + d2 * d2;
        if metric < best_metric {
            best_metric = metric;
            best = k;
        }
    }
    best
}

/// A Monte Carlo symbol-error-rate estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ser: f64,
    /// 95% normal-approximation half width, 1.96·√(p(1-p)/n).
    pub ci_half_width: f64,
    pub seed: u64,
}

impl SerEstimate {
    fn from_counts(errors: u64, trials: u64, seed: u64) -> Self {
        let p = if trials == 0 {
            f64::NAN
        } else {
            errors as f64 / trials as f64
        };
        let ci = if trials == 0 {
            f64::NAN
        } else {
            1.96 * (p * (1.0 - p) / trials as f64).sqrt()
        };
        SerEstimate {
            errors,
            trials,
            ser: p,
            ci_half_width: ci,
            seed,
        }
    }
}

/// Monte Carlo run controls.
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    /// Upper bound on codeword trials (rounded up to whole blocks).
    pub trials: u64,
    /// Codeword trials per RNG block.
    pub block_size: u64,
    /// Stop once at least this many symbol errors have accumulated,
    /// checked at round boundaries so the result is thread-independent.
    pub target_errors: Option<u64>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            trials: 1_000_000,
            block_size: 8192,
            target_errors: Some(200),
        }
    }
}

const BLOCKS_PER_ROUND: u64 = 32;

fn run_blocked<F>(opts: &McOptions, seed: u64, block_fn: F) -> SerEstimate
where
    F: Fn(u64) -> u64 + Sync,
{
    let block_size = opts.block_size.max(1);
    let n_blocks = opts.trials.div_ceil(block_size).max(1);
    let mut errors = 0u64;
    let mut blocks_done = 0u64;
    while blocks_done < n_blocks {
        let round_end = (blocks_done + BLOCKS_PER_ROUND).min(n_blocks);
        // fold per-block counts in index order so the total is independent
        // of how rayon schedules the blocks
        let counts: Vec<u64> = (blocks_done..round_end)
            .into_par_iter()
            .map(&block_fn)
            .collect();
        errors += counts.iter().sum::<u64>();
        blocks_done = round_end;
        if let Some(target) = opts.target_errors {
            if errors >= target {
                break;
            }
        }
    }
    let trials = blocks_done * block_size;
    SerEstimate::from_counts(errors, trials, seed)
}

/// Estimates the joint-detection SER for the rotated two-slot scheme.
pub fn run_monte_carlo(cfg: &LinkConfig, opts: &McOptions) -> Result<SerEstimate> {
    let sampler = GammaGammaSampler::new(&cfg.channel)?;
    let codebook = Codebook::new(&cfg.design);
    let block_size = opts.block_size.max(1);
    Ok(run_blocked(opts, cfg.seed, |block| {
        let mut rng = substream(cfg.seed, block);
        let mut errs = 0u64;
        for _ in 0..block_size {
            let fading = sampler.sample_pair(&mut rng);
            let sent = rng.gen_range(0..4usize);
            let y = homodyne_observe(cfg, codebook.codewords()[sent], &fading, &mut rng);
            if ml_detect(cfg.eta, &codebook, &fading, y) != sent {
                errs += 1;
            }
        }
        errs
    }))
}

/// Estimates the SER of the unrotated single-slot reference scheme with the
/// same photon budget and squeezing split.
pub fn run_monte_carlo_baseline(cfg: &LinkConfig, opts: &McOptions) -> Result<SerEstimate> {
    let sampler = GammaGammaSampler::new(&cfg.channel)?;
    let alpha = cfg.design.alpha();
    let sigma = cfg.design.sigma_q_sq().sqrt();
    let eta = cfg.eta;
    let block_size = opts.block_size.max(1);
    Ok(run_blocked(opts, cfg.seed, |block| {
        let mut rng = substream(cfg.seed, block);
        let noise = Normal::new(0.0, sigma).expect("sigma is finite and nonnegative");
        let mut errs = 0u64;
        for _ in 0..block_size {
            let i = sampler.sample(&mut rng);
            let plus = rng.gen_bool(0.5);
            let x = if plus { alpha } else { -alpha };
            let y = (eta * i).sqrt() * x + noise.sample(&mut rng);
            // sign detection, y = 0 decided as +alpha
            if (y >= 0.0) != plus {
                errs += 1;
            }
        }
        errs
    }))
}
