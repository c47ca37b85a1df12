//! Factor operators on product grids.
//!
//! On `M1 × M2` with equal scalar and `dz̄1` policies the cross terms of `Q`
//! cancel, and `Q` splits into `C1 ⊗ I + I ⊗ B2` on the `dz̄1` component and
//! `A1 ⊗ I + I ⊗ E2` on the `dz̄2` component, where for the planar factor
//! difference `d` (∂̄ in that variable), `A`, `B` are `P d* d` and `C`, `E` are
//! `P d d*` on the relevant dof sets.

use num_complex::Complex64;

use super::stencil::{norm_sqr, project, Stencil};
use crate::error::{Error, Result};
use crate::geometry::{FacePolicy, PlanarGrid, ProductGrid};
use crate::linalg::conjugate_gradient;

/// Which compression of `d*d` or `dd*` a factor operator is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// `x ↦ P d* d x`, the energy `‖dx‖²`.
    Dbar,
    /// `x ↦ P d d* x`, the energy `‖d* x‖²`.
    DbarStar,
}

/// One planar factor operator, acting on packed dof vectors.
pub struct PlanarOperator<'a> {
    pub grid: &'a PlanarGrid,
    pub kind: FactorKind,
    free: bool,
    dofs: Vec<usize>,
    dof_mask: Vec<bool>,
}

impl<'a> PlanarOperator<'a> {
    /// `pin_cut` drops nodes whose `+y` arm is cut from the dof set.
    pub fn new(grid: &'a PlanarGrid, kind: FactorKind, free: bool, pin_cut: bool) -> Self {
        let dof_mask: Vec<bool> = grid
            .mask()
            .iter()
            .zip(grid.cut())
            .map(|(&m, &c)| m && !(pin_cut && c))
            .collect();
        let dofs = (0..grid.len()).filter(|&i| dof_mask[i]).collect();
        PlanarOperator {
            grid,
            kind,
            free,
            dofs,
            dof_mask,
        }
    }

    fn stencil(&self) -> Stencil<'_, 2> {
        Stencil {
            dims: self.grid.lattice.dims,
            h: self.grid.h(),
            cut: self.grid.cut(),
            cut_axis: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn pack(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.dofs.iter().map(|&i| x[i]).collect()
    }

    pub fn unpack(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (k, &i) in self.dofs.iter().enumerate() {
            out[i] = x[k];
        }
        out
    }

    /// The operator on a window vector supported on the dofs.
    pub fn apply_window(&self, x: &[Complex64]) -> Vec<Complex64> {
        let s = self.stencil();
        let y = match self.kind {
            FactorKind::Dbar => s.dbar_adj(&s.dbar(x, 0, self.free), 0, self.free),
            FactorKind::DbarStar => s.dbar(&s.dbar_adj(x, 0, self.free), 0, self.free),
        };
        project(y, &self.dof_mask)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.pack(&self.apply_window(&self.unpack(x)))
    }

    /// `⟨Tx, x⟩` for a window vector, unweighted.
    pub fn energy(&self, x: &[Complex64]) -> f64 {
        let s = self.stencil();
        let x = project(x.to_vec(), &self.dof_mask);
        match self.kind {
            FactorKind::Dbar => norm_sqr(&s.dbar(&x, 0, self.free)),
            FactorKind::DbarStar => norm_sqr(&s.dbar_adj(&x, 0, self.free)),
        }
    }
}

/// The four factor operators of a product grid.
pub struct FactorSplit<'a> {
    /// `dz̄1` block, `z1` factor.
    pub c1: PlanarOperator<'a>,
    /// `dz̄1` block, `z2` factor.
    pub b2: PlanarOperator<'a>,
    /// `dz̄2` block, `z1` factor.
    pub a1: PlanarOperator<'a>,
    /// `dz̄2` block, `z2` factor.
    pub e2: PlanarOperator<'a>,
}

impl<'a> FactorSplit<'a> {
    pub fn new(grid: &'a ProductGrid) -> Result<Self> {
        let p = grid.policy;
        if p.scalar != p.f1 {
            return Err(Error::NotSeparable(
                "scalar and dz̄1 policies differ, so the cross terms of Q do not cancel".into(),
            ));
        }
        let free = |f: FacePolicy| f == FacePolicy::Free;
        let pin = p.f2 == FacePolicy::Dirichlet;
        Ok(FactorSplit {
            c1: PlanarOperator::new(&grid.z1, FactorKind::DbarStar, free(p.scalar), false),
            b2: PlanarOperator::new(&grid.z2, FactorKind::Dbar, free(p.f1), false),
            a1: PlanarOperator::new(&grid.z1, FactorKind::Dbar, free(p.f2), false),
            e2: PlanarOperator::new(&grid.z2, FactorKind::DbarStar, free(p.scalar), pin),
        })
    }
}

/// The form `F(z1) G(z2) dz̄1` on a product grid; `F`, `G` are window
/// vectors of the two planar factors.
#[derive(Clone, Debug)]
pub struct SeparableForm {
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl SeparableForm {
    /// Samples `f` on the `z1` mask and `g` on the `z2` mask.
    pub fn sample<F, G>(grid: &ProductGrid, f: F, g: G) -> Self
    where
        F: Fn(Complex64) -> Complex64,
        G: Fn(Complex64) -> Complex64,
    {
        let sample = |pg: &PlanarGrid, u: &dyn Fn(Complex64) -> Complex64| -> Vec<Complex64> {
            (0..pg.len())
                .map(|i| if pg.mask()[i] { u(pg.lattice.coord(i)) } else { Complex64::new(0.0, 0.0) })
                .collect()
        };
        SeparableForm {
            f: sample(&grid.z1, &f),
            g: sample(&grid.z2, &g),
        }
    }

    pub fn norm_sqr(&self, grid: &ProductGrid) -> f64 {
        norm_sqr(&self.f) * norm_sqr(&self.g) * grid.cell_volume()
    }

    /// `‖∂̄φ‖² + ‖∂̄*φ‖² = ⟨F, C1 F⟩‖G‖² + ‖F‖²⟨G, B2 G⟩`.
    pub fn q_value(&self, grid: &ProductGrid) -> Result<f64> {
        let split = FactorSplit::new(grid)?;
        let q = split.c1.energy(&self.f) * norm_sqr(&self.g) + norm_sqr(&self.f) * split.b2.energy(&self.g);
        Ok(q * grid.cell_volume())
    }

    /// `‖φ‖²₋₁` by conjugate gradients on the tensor of the two masks.
    pub fn sobolev_minus1(&self, grid: &ProductGrid, tol: f64) -> Result<f64> {
        let nb1 = neighbours(&grid.z1);
        let nb2 = neighbours(&grid.z2);
        let (n1, n2) = (nb1.nodes.len(), nb2.nodes.len());
        let b: Vec<Complex64> = nb1
            .nodes
            .iter()
            .flat_map(|&a| nb2.nodes.iter().map(move |&c| (a, c)))
            .map(|(a, c)| self.f[a] * self.g[c])
            .collect();
        let (w1, w2) = (grid.z1.h().powi(-2), grid.z2.h().powi(-2));
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            use rayon::prelude::*;
            (0..n1 * n2)
                .into_par_iter()
                .map(|k| {
                    let (a, c) = (k / n2, k % n2);
                    let mut r = x[k] * (1.0 + 4.0 * (w1 + w2));
                    for &a2 in &nb1.adj[a] {
                        r -= x[a2 * n2 + c] * w1;
                    }
                    for &c2 in &nb2.adj[c] {
                        r -= x[a * n2 + c2] * w2;
                    }
                    r
                })
                .collect()
        };
        let (x, _) = conjugate_gradient(apply, &b, tol, 20_000)?;
        let v: Complex64 = x.iter().zip(&b).map(|(p, q)| p * q.conj()).sum();
        Ok(v.re.max(0.0) * grid.cell_volume())
    }
}

struct Neighbours {
    nodes: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

/// Mask nodes of a planar grid and, per node, the packed indices of its mask
/// neighbours.
fn neighbours(pg: &PlanarGrid) -> Neighbours {
    let nodes = pg.mask_nodes();
    let mut packed = vec![usize::MAX; pg.len()];
    for (k, &i) in nodes.iter().enumerate() {
        packed[i] = k;
    }
    let d = pg.lattice.dims;
    let adj = nodes
        .iter()
        .map(|&i| {
            let m = pg.lattice.multi(i);
            let mut out = Vec::with_capacity(4);
            let mut push = |j: usize| {
                if packed[j] != usize::MAX {
                    out.push(packed[j]);
                }
            };
            if m[0] + 1 < d[0] {
                push(i + d[1]);
            }
            if m[0] >= 1 {
                push(i - d[1]);
            }
            if m[1] + 1 < d[1] {
                push(i + 1);
            }
            if m[1] >= 1 {
                push(i - 1);
            }
            out
        })
        .collect();
    Neighbours { nodes, adj }
}
