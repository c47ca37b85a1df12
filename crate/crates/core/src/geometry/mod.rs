//! Planar regions, product domains in C^2 and their lattice embeddings.

mod domain;
mod grid;
mod product_grid;
mod region;

pub use domain::{
    z1, z2, Ball4, Box4, FlatPiece, ModelConstants, NeighborhoodFamily, Point4, ProductDomain, PseudoconvexModel,
    Region4,
};
pub use grid::{build_grid, FacePolicy, GridDomain, Lattice4, TracePolicy, PAD};
pub use product_grid::{Lattice2, PlanarGrid, ProductGrid};
pub use region::{HalfPlaneSide, PlanarRegion};
pub(crate) use region::unwrap_angle as region_unwrap;
pub(crate) use region::PolarFrame;

/// Whether `point` lies in `region` (strict inequality).
pub fn region_contains(region: &PlanarRegion, point: num_complex::Complex64) -> bool {
    region.contains(point)
}

/// Lebesgue area of `region`.
pub fn region_area(region: &PlanarRegion) -> crate::Result<f64> {
    region.area()
}
