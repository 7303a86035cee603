//! Fourier spectral eigensolvers for quasiperiodic elliptic operators.
//!
//! The operator -∇·(α∇u) + u with a quasiperiodic coefficient α(x) =
//! 𝒜(Pᵀx) is lifted to the n-torus carrying the parent field 𝒜, where it
//! becomes periodic and a Fourier collocation discretization applies. The
//! crate provides:
//!
//! * [`lattice`] — projection matrices, truncated frequency boxes and
//!   their linearization, modular index arithmetic;
//! * [`qpfield`] — parent trig fields, grid transforms, truncation and
//!   interpolation, coefficient-space Sobolev norms;
//! * [`operator`] — the discretized form Q = A∘W + I, dense or applied
//!   matrix-free through FFTs;
//! * [`eigensolver`] — smallest eigenpairs with the Frobenius-optimal
//!   diagonal preconditioner, dense and block-iterative paths;
//! * [`pam`] — the periodic-approximation baseline for the 1D photonic
//!   quasicrystal, with Diophantine-error bookkeeping;
//! * [`harness`] — built-in experiment definitions, convergence studies
//!   with eigenpair tracking, condition-number reports, CSV emission.

pub mod eigensolver;
pub mod error;
pub mod lattice;
pub mod qpfield;
pub mod operator;

mod dense;
mod fft;

pub use error::{QeoError, Result};
