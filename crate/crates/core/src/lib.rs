//! Numerical laboratory for SDEs with singular drift and coefficients in
//! mixed-norm Lebesgue spaces.
//!
//! The crate is `no_std` and only needs `alloc`. It provides
//!
//! * periodic tensor grids and sampled fields ([`grid`]) together with the
//!   spectral operators acting on them ([`spectral`]),
//! * iterated mixed-norm space/time norms, Bessel-potential norms, the
//!   subcriticality checker and the anisotropic maximal operator
//!   ([`mixed_norm`]),
//! * the forward and dual parabolic solvers with empirical
//!   maximal-regularity probes ([`parabolic`]),
//! * the Zvonkin change of variables ([`zvonkin`]),
//! * Brownian paths, Euler-Maruyama and the Monte-Carlo probes for
//!   pathwise uniqueness, Krylov, Girsanov and Khasminskii functionals
//!   ([`sde`]).
//!
//! File formats, configuration, parallel executors and the CLI live in the
//! `snl` companion crate.

#![no_std]
// When std is linked anywhere in the build (tests, the CLI), its inherent
// float methods shadow `num_traits::Float` and the import looks unused.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod fft;
pub mod grid;
pub mod linalg;
pub mod mixed_norm;
pub mod parabolic;
pub mod rng;
pub mod sde;
pub mod spectral;
pub mod zvonkin;

pub use error::{Error, Result};
pub use grid::{Codomain, GridFunction, SpaceTimeField, TensorGrid};
pub use mixed_norm::{Exponent, MixedExponent};
