//! Simulation and analysis of rotation-diversity BPSK with displaced
//! squeezed states over Gamma-Gamma turbulence channels.
//!
//! The crate is organized in layers:
//!
//! - [`specfun`]: the special functions everything else is built on
//! - [`quad`]: Gauss-Legendre and tanh-sinh quadrature
//! - [`channel`]: Gamma-Gamma irradiance statistics and sampling
//! - [`link`]: photon budget, rotation codebook, homodyne observation model
//! - [`detector`]: joint ML detection and the Monte Carlo SER engine
//! - [`analysis`]: pairwise error probabilities, union-bound and asymptotic
//!   SER, diversity/coding gains, and the optimal-design solver
//! - [`experiment`]: experiment configuration, sweeps and CSV/JSON emission

pub mod analysis;
pub mod channel;
pub mod detector;
pub mod error;
pub mod experiment;
pub mod link;
pub mod quad;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
