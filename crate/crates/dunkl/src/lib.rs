//! Rank-one Dunkl analysis at desk scale.
//!
//! The crate evaluates the objects of one-dimensional Dunkl harmonic analysis
//! with the weight |x|^(2 lambda) dx — the Dunkl kernel and transform, the
//! lambda-Poisson, conjugate lambda-Poisson and lambda-Hilbert kernels and
//! their integrals, and polynomial atoms with vanishing weighted moments —
//! and ships a verification harness that checks the quantitative estimates
//! these objects satisfy (kernel integral bounds, atom boundedness, far-field
//! decay envelopes, sup-norm decay exponents, and a Paley-type inequality for
//! the transform of atomic sums).
//!
//! Everything is pure computation: no global mutable state beyond immutable
//! quadrature-rule caches, so all entry points are safe to call concurrently.

mod dd;
pub mod error;
pub mod special;

pub mod quadrature;

pub mod atoms;
pub mod kernels;
pub mod transform;

pub mod verify;

pub use error::{DunklError, Result};
pub use special::DunklParam;
