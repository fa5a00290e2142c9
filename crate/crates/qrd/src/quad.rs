//! Numerical quadrature: fixed-node Gauss-Legendre rules and a tanh-sinh
//! (double-exponential) rule on (0, 1) for integrands with endpoint
//! singularities.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Gauss-Legendre rule with nodes/weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence up to degree n and its derivative
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let xm = 0.5 * (b + a);
        let xr = 0.5 * (b - a);
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(xm + xr * x);
        }
        sum * xr
    }
}

/// Tanh-sinh quadrature of `f` over (0, 1).
///
/// The integrand receives both `t` and `1 - t` so that it can resolve the
/// endpoint neighbourhoods to full precision. The step is halved until two
/// successive levels agree to `rel_tol`.
pub fn tanh_sinh_01<F: Fn(f64, f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    // u-axis cutoff: beyond this the weight underflows
    const U_MAX: f64 = 4.0;
    let eval = |u: f64| -> f64 {
        let w = 0.5 * PI * u.sinh();
        if w.abs() > 350.0 {
            return 0.0;
        }
        // t = (1 + tanh w)/2, computed from e^{-2|w|} to keep both tails exact
        let q = (-2.0 * w.abs()).exp();
        let small = q / (1.0 + q); // min(t, 1-t)
        let large = 1.0 / (1.0 + q); // max(t, 1-t)
        let (t, omt) = if w >= 0.0 { (large, small) } else { (small, large) };
        let c = w.cosh();
        let weight = 0.25 * PI * u.cosh() / (c * c);
        let v = f(t, omt);
        if v.is_finite() {
            weight * v
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let mut sum = eval(0.0);
    {
        let mut k = 1.0;
        while k * h <= U_MAX {
            sum += eval(k * h) + eval(-k * h);
            k += 1.0;
        }
    }
    let mut prev = sum * h;
    for _level in 0..14 {
        h *= 0.5;
        // add the new midpoints (odd multiples of the new h)
        let mut k = 1.0;
        while k * h <= U_MAX {
            sum += eval(k * h) + eval(-k * h);
            k += 2.0;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "tanh_sinh_01 did not reach rel_tol={rel_tol}"
    )))
}

/// Adaptive integral of `f` over (0, ∞) through the substitution
/// z = t/(1-t).
pub fn integrate_0_inf<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    tanh_sinh_01(
        |t, omt| {
            let z = t / omt;
            f(z) / (omt * omt)
        },
        rel_tol,
    )
}
