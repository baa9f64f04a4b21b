//! Affine conjugation symmetries.
//!
//! `N` is the set of affine automorphisms `β` such that `f^n ∘ β ∘ f^-n`
//! stays affine for every `n`. It is computed by conjugating a parametric
//! affine ansatz, reading off the coefficients that must vanish, solving
//! them with a small set of exact elimination rules, and repeating until a
//! round adds nothing new.

mod affine;
mod group;
mod solve;

pub use affine::{
    affinity_constraints, conjugate, generic_affine, indeterminacy_mask, shape_constraints,
    AffineMask, ParametricAffineMap,
};
pub use group::{
    affine_conjugate, check_preserves_green, compute_n, enumerate_elements, enumerate_numeric, inverse_element,
    shared_iterate_search, verify_membership, GreenPreservation, NComputation, SearchError,
};
pub use solve::{cyclotomic, divide_univariate, solve_constraints, ConstraintSet, Relation, SolutionFamily, Status};

use thiserror::Error;

use crate::automorphism::MapError;
use crate::poly::PolyError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("parameter space mismatch")]
    ParamMismatch,
    #[error("family is not finite with unit cyclotomic relations: {0}")]
    NotEnumerable(String),
    #[error("conjugate is not affine after applying the solution")]
    NotAffine,
}
