//! Numerical machinery for Marcinkiewicz-type interpolation between weak
//! Orlicz classes, at finite-dimensional desk scale.
//!
//! The crate has four layers:
//!
//! * [`young`]: Young functions (power, `t(1+log2+ t)^alpha`, the L_infinity
//!   indicator, tabulated custom kinds), their doubling envelopes
//!   `M_Phi(t) = sup_s Phi(st)/Phi(s)`, and Matuszewska-Orlicz growth
//!   indices estimated by slope extrapolation.
//! * [`interp`]: the interpolation constants `F` and `G` built from dyadic
//!   series of Young-function values, optimal coefficient sequences, and
//!   diagnostics (growth-exponent fits, little-o monotonicity ratios).
//! * [`specmat`]: tracial matrix/diagonal algebras; spectral projections,
//!   singular-number step functions, dilation and submajorization,
//!   binary (dyadic) decomposition of positive elements, and the small
//!   operator-inequality lemmas used by the weak-type pipeline.
//! * [`maximal`]: dyadic and matrix filtrations, maximal families,
//!   Cuculescu-style projections, weak-type projection chains with their
//!   majorizers, and empirical weak-Orlicz constant estimation.
//!
//! The `orlicz-interp` binary exposes the same operations as subcommands;
//! see [`cli`].

pub mod cli;
pub mod error;
pub mod interp;
pub mod maximal;
pub mod sampling;
pub mod specmat;
pub mod young;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
