//! Numerical simulator for the quantum kicked harmonic oscillator (KHO) and
//! its classical stroboscopic map.
//!
//! The quantum Floquet step is `U = R_α V_K`: a cosine kick
//! `exp(-i K cos(Q + φ) / ħ)` followed by a harmonic rotation
//! `e^{iα/2} exp(i α (Q² + P²) / 2ħ)` of phase space. States live on a uniform
//! position grid; an independent dense number-basis propagator
//! ([`oracle::FockOracle`]) cross-checks the grid dynamics.
//!
//! Module map:
//!
//! * [`grid`], [`state`], [`params`]: grids, wave functions, Gaussian
//!   preparation, inner products and observables.
//! * [`propagators`]: kick, fractional Fourier rotation, KHO/SHO evolution.
//! * [`oracle`]: truncated number-basis reference propagator.
//! * [`wigner`]: Wigner transform, negativity, fringe scale, linear
//!   phase-space maps.
//! * [`classical`]: classical map, stochastic web, manifold evolution,
//!   Liouville histograms.
//! * [`decoherence`]: fidelity amplitude, qubit dephasing, purity sweeps,
//!   polarization tomography.
//! * [`optics`]: optical design formulas and ray matrices.
//! * [`export`]: CSV, PGM and JSON sidecar writers.
//!
//! Data-parallel loops (Wigner rows, Monte Carlo samples, web seeds, sweep
//! cells) run on rayon when the `parallel` feature is enabled and fall back to
//! sequential iteration otherwise. Results are identical either way.

pub mod classical;
pub mod decoherence;
pub mod error;
pub mod export;
mod fft;
pub mod grid;
pub mod optics;
pub mod oracle;
mod par;
pub mod params;
pub mod propagators;
pub mod state;
pub mod wigner;

pub use error::{KhoError, Result};
pub use grid::GridSpec;
pub use params::{KhoParams, KickSign};
pub use state::{GaussianSpec, Observables, QuantumState};

pub use num_complex::Complex64;
