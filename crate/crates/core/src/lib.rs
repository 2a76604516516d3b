//! C¹-conforming spline macro-elements on convex quadrilaterals.
//!
//! The element and mesh code is generic over the scalar type (`f32` or
//! `f64`); the global solver works in `f64`. Aliases for the common `f64`
//! instantiations live at the crate root.

pub mod biharmonic;
pub mod bs_element;
pub mod error;
pub mod functions;
pub mod global_space;
pub mod interpolation;
pub mod linalg;
pub mod mesh_gen;
pub mod quad_mesh;
pub mod quadrature;
pub mod scalar;
pub mod spline_basis;

pub use error::{Error, Result};
pub use scalar::{Scalar, Vec2};

pub type Mesh = quad_mesh::QuadMesh<f64>;
pub type Knots = spline_basis::KnotVector<f64>;
pub type Space = global_space::GlobalSpace<f64>;
pub type Basis = bs_element::LocalBasis<f64>;
