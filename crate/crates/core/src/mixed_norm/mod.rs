//! Mixed-norm Lebesgue and Bessel-potential norms, the subcriticality
//! condition and the anisotropic maximal operator.
//!
//! The iterated norm integrates `x_1` first with exponent `p_1`, then `x_2`
//! with `p_2`, and so on; the order matters, and integrating the smaller
//! exponents first gives the smaller value (Minkowski's integral
//! inequality). [`mixed_space_norm_ordered`] exposes the order explicitly.

mod exponent;
mod maximal;
mod norm;

pub use exponent::{Exponent, MixedExponent, Subcriticality};
pub use maximal::{
    check_pointwise_bound, dyadic_half_widths, maximal_operator, maximal_operator_with, BoxSearch,
    PointwiseBound,
};
pub use norm::{
    ascending_order, bessel_norm, mixed_space_norm, mixed_space_norm_ordered, mixed_spacetime_norm,
    time_norm, NormReport,
};
pub(crate) use norm::spacetime_norm_with;
