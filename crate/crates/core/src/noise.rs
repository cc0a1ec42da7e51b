//! Stochastic magnetic-noise model: stationary Ornstein–Uhlenbeck process.
//!
//! The RNG is ChaCha12, a counter-based stream cipher generator: a master
//! seed keys the cipher and each trajectory gets its own stream index, so
//! ensembles are reproducible and trivially parallel.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    OrnsteinUhlenbeck,
}

/// Scalar noise f(t) multiplying a fixed noise operator.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Stationary standard deviation of f(t), rad/s.
    pub sigma: f64,
    /// Correlation time, seconds.
    pub tau_c: f64,
    /// Master seed.
    pub seed: u64,
}

impl NoiseModel {
    pub fn ornstein_uhlenbeck(sigma: f64, tau_c: f64, seed: u64) -> Result<Self> {
        if sigma < 0.0 {
            return Err(Error::InvalidParameter("noise sigma must be ≥ 0".into()));
        }
        if tau_c <= 0.0 {
            return Err(Error::InvalidParameter("noise tau_c must be > 0".into()));
        }
        Ok(Self {
            kind: NoiseKind::OrnsteinUhlenbeck,
            sigma,
            tau_c,
            seed,
        })
    }

    /// RNG for a given trajectory: master seed, per-trajectory stream.
    pub fn trajectory_rng(&self, trajectory: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(trajectory);
        rng
    }
}

/// Sample an OU path at spacing `dt` with `n_samples` points, stationary
/// start. The exact update x_{k+1} = x_k·e^{−dt/τ} + σ√(1−e^{−2dt/τ})·ξ_k is
/// distribution-exact at any dt; the dt < τ_c/10 precondition keeps the path
/// smooth on the integrator grid.
pub fn sample_noise_path(
    model: &NoiseModel,
    dt: f64,
    n_samples: usize,
    trajectory: u64,
) -> Result<Vec<f64>> {
    if dt <= 0.0 {
        return Err(Error::InvalidParameter("noise dt must be > 0".into()));
    }
    if dt >= model.tau_c / 10.0 {
        return Err(Error::StepSize {
            dt,
            required: model.tau_c / 10.0,
        });
    }
    let mut rng = model.trajectory_rng(trajectory);
    let decay = (-dt / model.tau_c).exp();
    let kick = model.sigma * (1.0 - decay * decay).sqrt();
    let mut path = Vec::with_capacity(n_samples);
    let mut x: f64 = model.sigma * rng.sample::<f64, _>(StandardNormal);
    path.push(x);
    for _ in 1..n_samples {
        let xi: f64 = rng.sample(StandardNormal);
        x = x * decay + kick * xi;
        path.push(x);
    }
    Ok(path)
}
