//! The discrete ∂̄-complex on a [`GridDomain`].

use num_complex::Complex64;

use super::fields::{dof_masks, Field, FormField01, FormField02, ScalarField};
use super::stencil::{norm_sqr, project, Stencil};
use crate::error::{Error, Result};
use crate::geometry::{FacePolicy, GridDomain};

fn stencil(grid: &GridDomain) -> Stencil<'_, 4> {
    Stencil {
        dims: grid.lattice.dims,
        h: grid.h(),
        cut: grid.cut(),
        cut_axis: 3,
    }
}

fn free(p: FacePolicy) -> bool {
    p == FacePolicy::Free
}

/// `u ↦ (∂̄1 u, ∂̄2 u)`, stored over the whole window.
pub fn dbar0(grid: &GridDomain, u: &ScalarField) -> FormField01 {
    let s = stencil(grid);
    let fr = free(grid.policy.scalar);
    FormField01 {
        f1: s.dbar(&u.values, 0, fr),
        f2: s.dbar(&u.values, 1, fr),
    }
}

/// `f ↦ ∂̄1 f2 − ∂̄2 f1`.
pub fn dbar1(grid: &GridDomain, f: &FormField01) -> FormField02 {
    let s = stencil(grid);
    let a = s.dbar(&f.f2, 0, free(grid.policy.f2));
    let b = s.dbar(&f.f1, 1, free(grid.policy.f1));
    FormField02 {
        f12: a.iter().zip(&b).map(|(x, y)| x - y).collect(),
    }
}

/// Adjoint of [`dbar0`].
///
/// Scalars carry no boundary condition (∂̄ on functions is the maximal
/// operator), so the image keeps its values on the ghost layer around the
/// mask; projecting them away would hide the boundary jump of forms that are
/// holomorphic in `z1` inside the mask.
pub fn dbar0_adjoint(grid: &GridDomain, f: &FormField01) -> ScalarField {
    let s = stencil(grid);
    let fr = free(grid.policy.scalar);
    let a = s.dbar_adj(&f.f1, 0, fr);
    let b = s.dbar_adj(&f.f2, 1, fr);
    ScalarField {
        values: a.iter().zip(&b).map(|(x, y)| x + y).collect(),
    }
}

/// Adjoint of [`dbar1`], onto the degrees of freedom of each component.
pub fn dbar1_adjoint(grid: &GridDomain, w: &FormField02) -> FormField01 {
    let s = stencil(grid);
    let (k1, k2) = dof_masks(grid);
    let f2 = s.dbar_adj(&w.f12, 0, free(grid.policy.f2));
    let f1: Vec<Complex64> = s.dbar_adj(&w.f12, 1, free(grid.policy.f1)).into_iter().map(|v| -v).collect();
    FormField01 {
        f1: project(f1, &k1),
        f2: project(f2, &k2),
    }
}

/// Which operator of the complex an adjoint refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    Dbar0,
    Dbar1,
}

/// Applies the adjoint of `op` to a field of its output grade.
pub fn adjoint_apply(grid: &GridDomain, op: Operator, w: &Field) -> Result<Field> {
    match (op, w) {
        (Operator::Dbar0, Field::Form01(f)) => Ok(Field::Scalar(dbar0_adjoint(grid, f))),
        (Operator::Dbar1, Field::Form02(f)) => Ok(Field::Form01(dbar1_adjoint(grid, f))),
        _ => Err(Error::InvalidParameter(format!("{op:?} adjoint applied to a field of the wrong grade"))),
    }
}

/// `(∂̄*∂̄ + ∂̄∂̄*) f`, projected onto the degrees of freedom.
pub fn q_apply(grid: &GridDomain, f: &FormField01) -> FormField01 {
    let a = dbar1_adjoint(grid, &dbar1(grid, f));
    let b = dbar0(grid, &dbar0_adjoint(grid, f)).projected(grid);
    FormField01 {
        f1: a.f1.iter().zip(&b.f1).map(|(x, y)| x + y).collect(),
        f2: a.f2.iter().zip(&b.f2).map(|(x, y)| x + y).collect(),
    }
}

/// `‖∂̄f‖² + ‖∂̄*f‖²`.
pub fn q_value(grid: &GridDomain, f: &FormField01) -> f64 {
    let w = grid.h().powi(4);
    (norm_sqr(&dbar1(grid, f).f12) + norm_sqr(&dbar0_adjoint(grid, f).values)) * w
}

/// `Q` on a grid as a Hermitian matrix acting on packed degree-of-freedom
/// vectors: first the `dz̄1` dofs, then the `dz̄2` dofs, in node order.
///
/// The packed Euclidean inner product is the field inner product divided by
/// `h^4`, so Rayleigh quotients agree.
pub struct QOperator<'a> {
    pub grid: &'a GridDomain,
    dofs1: Vec<usize>,
    dofs2: Vec<usize>,
}

impl<'a> QOperator<'a> {
    pub fn new(grid: &'a GridDomain) -> Self {
        QOperator {
            grid,
            dofs1: grid.dof_nodes(1),
            dofs2: grid.dof_nodes(2),
        }
    }

    pub fn dim(&self) -> usize {
        self.dofs1.len() + self.dofs2.len()
    }

    pub fn pack(&self, f: &FormField01) -> Vec<Complex64> {
        self.dofs1
            .iter()
            .map(|&i| f.f1[i])
            .chain(self.dofs2.iter().map(|&i| f.f2[i]))
            .collect()
    }

    pub fn unpack(&self, x: &[Complex64]) -> FormField01 {
        let mut f = FormField01::zeros(self.grid);
        let n1 = self.dofs1.len();
        for (k, &i) in self.dofs1.iter().enumerate() {
            f.f1[i] = x[k];
        }
        for (k, &i) in self.dofs2.iter().enumerate() {
            f.f2[i] = x[n1 + k];
        }
        f
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.pack(&q_apply(self.grid, &self.unpack(x)))
    }

    /// Dense matrix by columns; for small problems and oracles.
    pub fn assemble_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            for (r, v) in self.apply(&e).into_iter().enumerate() {
                m[(r, c)] = v;
            }
            e[c] = Complex64::new(0.0, 0.0);
        }
        m
    }
}
