//! Time observable of a free quantum clock, realized as a positive-operator-valued
//! measure on a discretized momentum space.
//!
//! The clock has `H = p²/2` (units ħ = m = 1) and the symmetrized time operator
//! `T = (2p)⁻¹q + q(2p)⁻¹`. Its weak eigenfunctions
//! `ψ_{tα}(p) = θ(αp) √|p| exp(−itp²/2) / √(2π)` generate the measure
//! `τ(X) = Σ_α ∫_X |t,α⟩⟨t,α| dt`, which is positive, normalized, covariant under
//! time translations and not projection valued.
//!
//! Modules:
//!
//! * [`hilbert`]: momentum grids, states, inner products, free evolution.
//! * [`clock`]: eigenfunctions, time amplitudes, arrival-time densities and the
//!   matrices of `τ(X)`.
//! * [`matrix`]: dense and banded Hermitian operator matrices.
//! * [`operators`]: finite-difference `q`, `p`, `H`, `T` and the uncertainty quantities.
//! * [`oracle`]: independent numerical checks of every identity the model obeys.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature pulls in `std`
//! and rayon for the O(m·n) time-amplitude loops; results do not depend on the
//! thread schedule.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod clock;
mod error;
pub mod hilbert;
pub mod matrix;
pub mod operators;
pub mod oracle;
mod par;

pub use clock::{
    amplitudes, eigenfunction, mean_and_variance, povm_element, time_distribution, Interval,
    Moments, PovmElement, TimeAmplitudes, TimeDistribution, TimeGrid, TimeQuadrature,
};
pub use error::{Error, Result};
pub use hilbert::{evolve, gaussian_state, inner, make_grid, Branch, GaussianStateSpec, MomentumGrid, WaveFunction};
pub use matrix::OperatorMatrix;
pub use num_complex::Complex64;
pub use operators::{build_operators, commutator_residual, expectation, sigma, uncertainty_product, ClockOperators};
