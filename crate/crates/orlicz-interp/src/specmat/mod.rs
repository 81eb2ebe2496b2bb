//! Tracial matrix algebras, step-function rearrangements, and spectral
//! operations (interval projections, dyadic digit decompositions, pinching
//! and corner checks).

pub mod algebra;
pub mod spectral;
pub mod step;

pub use algebra::{psd_leq, CMatrix, Element, ElementData, Projection, Structure, TracialAlgebra};
pub use spectral::{
    binary_decomposition, binary_sandwich_check, corner_identity_check,
    diagonal_domination_check, distribution, singular_numbers, spectral_projection,
    BinaryDecomposition, DominationReport, SandwichCheck,
};
pub use step::{majorizes, StepFunction};
