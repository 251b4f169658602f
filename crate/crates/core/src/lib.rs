//! Numerical toolkit for one-sided harmonic analysis.
//!
//! Sampled functions on uniform grids ([`grid`]), one-sided weight classes
//! ([`weights`]), the one-sided maximal, singular-integral and discrete
//! square-function operators ([`operators`]), BMO / Lipschitz / one-sided
//! Triebel-Lizorkin functionals ([`spaces`]), commutators with their proof
//! checks ([`commutators`]) and the configuration-driven experiment harness
//! ([`verify`]).
//!
//! Every supremum in the underlying definitions is realized as a maximum over
//! an explicit finite family, so every returned "norm" or "constant" is a lower
//! bound of the true quantity. Acceptance of existential bounds is by fitted
//! constants that stay stable under grid refinement.

pub mod commutators;
pub mod dsl;
pub mod error;
pub mod grid;
pub mod operators;
pub mod spaces;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
