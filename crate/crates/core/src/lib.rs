//! Residual evaluators, Lie-group integrators, and a solution catalog for
//! harmonic and biharmonic maps into Riemannian symmetric spaces, phrased
//! through the pull-back of the Maurer-Cartan form.
//!
//! The crate covers four target families (spheres, complex and quaternion
//! projective spaces, Euclidean type), curve and plane-domain residual
//! equations in both matrix-bracket and reduced vector form, a
//! constraint-monitoring lift integrator, and constructors for the explicit
//! solution families together with their expected classifications.

pub mod catalog;
pub mod curves;
pub mod error;
pub mod frenet;
pub mod integrator;
pub mod liealg;
pub mod numdiff;
pub mod planar;
pub mod spaces;

pub use error::{Error, Result};
