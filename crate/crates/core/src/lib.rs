//! Exact and numerical tools for regular polynomial automorphisms of C^k
//! (Hénon–Sibony maps): polynomial arithmetic over Gaussian rationals,
//! composition and regularity checks, symbolic computation of the affine
//! conjugation group, Green-function estimates and slice rendering.

pub mod automorphism;
pub mod dsl;
pub mod green;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod suite;
pub mod symmetry;

pub use automorphism::{PolyMap, RegularityReport};
pub use poly::{Budget, Monomial, ParamPoly, Poly, PolyError, Polynomial};
pub use scalar::{GaussianRational, Ring};
