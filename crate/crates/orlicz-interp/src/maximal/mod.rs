//! Filtrations of tracial algebras, maximal operators over them, stopping
//! projections, weak-type projection chains, and empirical weak-Orlicz
//! estimation.

pub mod chain;
pub mod estimate;
pub mod filtration;
pub mod operators;

pub use chain::{majorizer_z, verify_proposition, weak_type_projection_chain, ProjectionChain, PropositionReport};
pub use estimate::{
    dyadic_threshold_grid, estimate_weak_orlicz_constant, maximal_lp_ratio,
    separable_strong_ratio, strong_maximal_lp_lower, RatioReport, WeakOrliczEstimate,
};
pub use filtration::{Filtration, Level};
pub use operators::{
    commutative_sup, cuculescu_projection, lp_linf_norm_positive, maximal_family,
    CuculescuResult, LinfNormBound,
};
