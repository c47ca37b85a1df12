//! Discrete ∂̄-Neumann lab on domains in C^2.
//!
//! Regions and lattices live in [`geometry`], planar cubature in
//! [`quadrature`], the discrete operators in [`dbar`], eigenvalue estimation in
//! [`spectral`], the explicit test-form construction in [`witness`], the
//! weighted identity check in [`mkh`] and experiment drivers in [`studies`].

pub mod dbar;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mkh;
pub mod quadrature;
pub mod spectral;
pub mod studies;
pub mod witness;

pub use error::{Error, Result};
pub use geometry::{
    build_grid, FacePolicy, GridDomain, HalfPlaneSide, Lattice4, ModelConstants, NeighborhoodFamily, PlanarRegion,
    ProductDomain, ProductGrid, Region4, TracePolicy,
};
pub use quadrature::{integrate, integrate_real, QuadOptions, QuadResult};
