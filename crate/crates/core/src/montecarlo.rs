//! Trajectory-averaged stochastic dephasing: a scalar noise path multiplies a
//! fixed noise operator on top of a static Hamiltonian.
//!
//! Trajectories are independent jobs and run in parallel; the reduction is
//! accumulated in trajectory-index order, so results are bitwise identical
//! run to run for a fixed master seed.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{
    evolve_schrodinger_td, spectral_bound, EvolveOptions, NamedObservable, Observable,
};
use crate::error::{Error, Result};
use crate::noise::{sample_noise_path, NoiseModel};
use crate::operator::{Operator, StateVector};

/// What to average over the ensemble.
#[derive(Debug, Clone)]
pub enum EnsembleObservable {
    /// Complex ⟨a|ψ⟩⟨ψ|b⟩ averaged over trajectories; reported as twice the
    /// magnitude of the mean (fringe contrast) plus its phase.
    Coherence(StateVector, StateVector),
    /// ⟨s|ψ⟩|² averaged over trajectories.
    Population(StateVector),
}

#[derive(Debug, Clone)]
pub struct MonteCarloSpec {
    pub h_static: Operator,
    /// Operator multiplied by the scalar noise path (the Jz block).
    pub noise_op: Operator,
    pub noise: NoiseModel,
    pub psi0: StateVector,
    pub observable: EnsembleObservable,
    pub n_traj: usize,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
}

/// Ensemble mean series with standard errors.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// Contrast (coherence case) or mean population.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Unwrapped phase of the mean coherence (coherence case only).
    pub phase: Vec<f64>,
    pub seed_used: u64,
    pub n_traj: usize,
}

/// Run one noisy trajectory and return the complex samples of the observable.
fn run_trajectory(spec: &MonteCarloSpec, traj: u64) -> Result<Vec<C64>> {
    let opts = EvolveOptions::new(spec.dt, spec.t_final, spec.sample_every);
    let steps = (spec.t_final / spec.dt).ceil().max(1.0) as usize;
    let dt = spec.t_final / steps as f64;
    // Noise sampled on the half-step grid so all RK4 stages see exact values.
    let path = sample_noise_path(&spec.noise, 0.5 * dt, 2 * steps + 1, traj)?;
    let hmat = spec.h_static.mat().clone();
    let nmat = spec.noise_op.mat().clone();
    let dim = spec.h_static.dim();
    let build = move |t: f64, out: &mut Array2<C64>| {
        let idx = ((t / (0.5 * dt)).round() as usize).min(2 * steps);
        let f = path[idx];
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] = hmat[(i, j)] + f * nmat[(i, j)];
            }
        }
    };
    let bound = spectral_bound(&spec.h_static)
        + 6.0 * spec.noise.sigma * spec.noise_op.max_abs()
        + 1.0 / spec.noise.tau_c;
    let obs = match &spec.observable {
        EnsembleObservable::Coherence(a, b) => vec![NamedObservable::new(
            "c",
            Observable::Coherence(a.clone(), b.clone()),
        )],
        EnsembleObservable::Population(s) => {
            vec![NamedObservable::new("p", Observable::Population(s.clone()))]
        }
    };
    // A rough (non-differentiable) noise path costs RK4 two orders in the
    // stochastic part, so the drift tripwire is looser than the smooth-H
    // contract; drift at this level is far below ensemble statistics.
    let r = evolve_schrodinger_td(build, bound, &spec.psi0, &opts, &obs)?;
    if r.norm_drift > 1e-4 {
        return Err(Error::NumericalContract(format!(
            "trajectory {traj} norm drift {:.3e}",
            r.norm_drift
        )));
    }
    match &spec.observable {
        EnsembleObservable::Coherence(_, _) => {
            let re = r.series("c_re").unwrap();
            let im = r.series("c_im").unwrap();
            Ok(re.iter().zip(im).map(|(&x, &y)| C64::new(x, y)).collect())
        }
        EnsembleObservable::Population(_) => Ok(r
            .series("p")
            .unwrap()
            .iter()
            .map(|&x| C64::new(x, 0.0))
            .collect()),
    }
}

/// Trajectory-averaged dephasing experiment. Deterministic for a fixed master
/// seed: per-trajectory noise comes from independent ChaCha streams and the
/// reduction runs in index order.
pub fn monte_carlo_dephasing(spec: &MonteCarloSpec) -> Result<EnsembleResult> {
    if spec.n_traj < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 trajectories".into(),
        ));
    }
    let samples: Vec<Result<Vec<C64>>> = (0..spec.n_traj as u64)
        .into_par_iter()
        .map(|traj| run_trajectory(spec, traj))
        .collect();
    let mut per_traj = Vec::with_capacity(spec.n_traj);
    for s in samples {
        per_traj.push(s?);
    }
    let n_times = per_traj[0].len();
    let n = spec.n_traj as f64;

    let mut mean = Vec::with_capacity(n_times);
    let mut stderr = Vec::with_capacity(n_times);
    let mut phase = Vec::with_capacity(n_times);
    for k in 0..n_times {
        let mut acc = C64::new(0.0, 0.0);
        let mut acc2 = 0.0;
        for t in &per_traj {
            acc += t[k];
            acc2 += t[k].norm_sqr();
        }
        let m = acc / n;
        let var = ((acc2 / n - m.norm_sqr()).max(0.0)) * n / (n - 1.0);
        let scale = match spec.observable {
            EnsembleObservable::Coherence(_, _) => 2.0,
            EnsembleObservable::Population(_) => 1.0,
        };
        mean.push(scale * m.norm());
        stderr.push(scale * (var / n).sqrt());
        phase.push(m.arg());
    }
    crate::fitting::unwrap_phases(&mut phase);

    // Reconstruct the sampled time grid exactly as the integrator did.
    let steps = (spec.t_final / spec.dt).ceil().max(1.0) as usize;
    let dt = spec.t_final / steps as f64;
    let mut times = vec![0.0];
    for step in 0..steps {
        if (step + 1) % spec.sample_every.max(1) == 0 || step + 1 == steps {
            times.push((step + 1) as f64 * dt);
        }
    }
    Ok(EnsembleResult {
        times,
        mean,
        stderr,
        phase,
        seed_used: spec.noise.seed,
        n_traj: spec.n_traj,
    })
}
