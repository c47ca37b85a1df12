//! Discrete ∂̄-complex: Wirtinger differences, adjoints, the form `Q` and the
//! Sobolev −1 norm.
//!
//! Differences are forward, with zero extension past the mask; images are kept
//! on the padded window. Adjoints are exact transposes under the `h^4`
//! weighted inner products. Form adjoints are projected onto the form degrees
//! of freedom; scalar images are not projected.

mod fields;
mod ops;
mod product;
mod sobolev;
pub(crate) mod stencil;

pub use fields::{write_dump, Field, FormField01, FormField02, ScalarField};
pub use ops::{adjoint_apply, dbar0, dbar0_adjoint, dbar1, dbar1_adjoint, q_apply, q_value, Operator, QOperator};
pub use product::{FactorKind, FactorSplit, PlanarOperator, SeparableForm};
pub use sobolev::{sobolev_minus1, sobolev_minus1_form, SOLVE_TOL};

#[cfg(test)]
mod tests;
