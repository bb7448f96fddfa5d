//! Hardy and Rellich inequalities for antisymmetric and odd functions.
//!
//! * [`polynomials`]: the Vandermonde determinant and odd linear form with
//!   their differential identities, in floating point and exact arithmetic.
//! * [`constants`]: closed-form constants with admissibility checks.
//! * [`minimax`]: the scalar max–min behind the vector-field certificate.
//! * [`fields`]: the certificate field, its divergence and the pointwise
//!   inequality on the symmetry sectors.
//! * [`trials`]: separable trial functions and symmetry projectors.
//! * [`quadrature`]: Monte Carlo, product and factorized integration of the
//!   functionals, Rayleigh quotients with error bars.
//! * [`cli`]: the `hardy` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod constants;
pub mod error;
pub mod fields;
pub mod minimax;
pub mod polynomials;
pub mod quadrature;
pub mod trials;

pub use constants::{FunctionClass, Params};
pub use error::{Error, Result};
pub use polynomials::AngularFactor;
pub use quadrature::{Functional, QuadratureConfig};
pub use trials::TrialFunction;
