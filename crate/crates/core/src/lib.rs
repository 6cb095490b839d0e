//! Floquet-Markov steady-state simulator for strongly driven Josephson
//! circuits: a transmon or an inductively shunted transmon coupled to a
//! harmonic oscillator, pumped far off resonance and weakly damped through
//! the oscillator.
//!
//! The pipeline computes one-period propagators, Floquet modes and
//! quasi-energies, golden-rule transition rates between Floquet modes, and
//! the asymptotic steady state as a mixture of Floquet modes. Observables
//! include eigenbasis populations, impurity, AC Stark lines, and Kerr
//! strengths. A dense Lindblad propagator at small truncation provides an
//! independent cross-check.

// Links the system BLAS/LAPACK used by ndarray-linalg.
extern crate openblas_src;

pub mod bessel;
pub mod circuits;
pub mod floquet;
pub mod dissipator;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod observables;

pub use error::{Error, Result};
