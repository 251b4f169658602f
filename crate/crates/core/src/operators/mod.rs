//! One-sided base operators: maximal functions, the singular integral `T^+`
//! and its kernel, dyadic averages, the vector kernel `H` and the discrete
//! square function `S^+`.

mod kernel;
mod maximal;
mod singular;
mod square;

pub use kernel::{
    default_kernel, validate_kernel, KernelCondition, KernelConstants, KernelReport, KernelSpec,
    KernelViolation, SupportSide, ValidationGrids, ValidationOptions,
};
pub use maximal::{maximal, Maximal, Side};
pub use singular::{singular, KernelPolicy, SingularIntegral};
pub use square::{
    dyadic_average, h_difference_norm, square_plus, vector_kernel_h, DyadicRange, Extension, SquareFunction,
};
