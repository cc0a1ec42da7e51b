//! Simulator for protected ("dark") qubit subspaces built by continuous
//! dynamical decoupling in multilevel systems, with a full ⁴⁰Ca⁺ realization:
//! drive assembly and rotating-wave reduction, protected-subspace search,
//! unitary/stochastic/Lindblad time evolution, perturbative error budgets,
//! single-qubit gates and ion–cavity coupling with QND photon counting.
//!
//! All frequencies, Rabi rates and magnetic fields are angular (rad/s)
//! internally; the config layer converts from Hz-style inputs.

pub mod analysis;
pub mod cavity;
pub mod config;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod gates;
pub mod levels;
pub mod linalg;
pub mod montecarlo;
pub mod noise;
pub mod operator;
pub mod pumping;
pub mod scenario;
pub mod subspace;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
