//! The discrete Sobolev −1 norm `‖u‖²₋₁ = ⟨(I − Δ_h)⁻¹u, u⟩`.

use num_complex::Complex64;

use super::fields::{FormField01, ScalarField};
use super::stencil::{dot, Stencil};
use crate::error::Result;
use crate::geometry::GridDomain;
use crate::linalg::conjugate_gradient;

/// Relative residual of the inner solve.
pub const SOLVE_TOL: f64 = 1e-10;

fn minus1_component(grid: &GridDomain, v: &[Complex64]) -> Result<f64> {
    let s = Stencil::<4> {
        dims: grid.lattice.dims,
        h: grid.h(),
        cut: grid.cut(),
        cut_axis: 3,
    };
    let mask = grid.mask();
    let b: Vec<Complex64> = v.iter().zip(mask).map(|(x, &m)| if m { *x } else { Complex64::new(0.0, 0.0) }).collect();
    let apply = |x: &[Complex64]| {
        let mut y = s.neg_laplacian(x, mask);
        y.iter_mut().zip(x).zip(mask).for_each(|((yi, xi), &m)| {
            if m {
                *yi += xi;
            }
        });
        y
    };
    let (x, _) = conjugate_gradient(apply, &b, SOLVE_TOL, 20_000)?;
    Ok(dot(&x, &b).re.max(0.0) * grid.h().powi(4))
}

/// `‖u‖²₋₁` with the Dirichlet 9-point Laplacian on the mask.
pub fn sobolev_minus1(grid: &GridDomain, u: &ScalarField) -> Result<f64> {
    minus1_component(grid, &u.values)
}

/// Sum of the component `−1` norms of a (0,1)-form.
pub fn sobolev_minus1_form(grid: &GridDomain, f: &FormField01) -> Result<f64> {
    Ok(minus1_component(grid, &f.f1)? + minus1_component(grid, &f.f2)?)
}
