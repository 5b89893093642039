//! Numerical verification toolkit for time-dependent Lagrangian and
//! Hamiltonian mechanics.
//!
//! Scalar fields are expressions over named coordinates, differentiated by
//! forward-mode dual numbers. On top of that sit Lagrangian systems
//! (Lagrange operator, Noether and symmetry currents, energy functions),
//! Hamiltonian systems (Poisson bracket, Hamiltonian vector fields,
//! integrals of motion, inverse Noether construction), an adaptive
//! integrator, and the Kepler problem with its global momentum maps and
//! action-angle charts.

pub mod checks;
pub mod diff;
pub mod dual;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod hamiltonian;
pub mod integrate;
pub mod kepler;
pub mod lagrangian;
pub mod linalg;
pub mod par;
pub mod sampling;
pub mod scalar;
pub mod systems;

pub use error::{Error, Result};
pub use field::{Frame, Params, ScalarField};
pub use scalar::Scalar;
