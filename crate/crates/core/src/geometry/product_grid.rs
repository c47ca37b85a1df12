//! Lattices over product domains kept in factored form.
//!
//! A product grid stores one planar mask per factor; the 4-D mask is their
//! tensor product. Operators on it are applied factor by factor, which keeps
//! fine spacings tractable where a dense 4-D window would not fit in memory.

use num_complex::Complex64;
use rayon::prelude::*;

use super::domain::{FlatPiece, ProductDomain};
use super::grid::{GridDomain, Lattice4, TracePolicy, PAD};
use super::region::PlanarRegion;
use crate::error::{Error, Result};

/// Window of the planar lattice `h Z^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice2 {
    pub h: f64,
    pub lo: [i64; 2],
    pub dims: [usize; 2],
}

impl Lattice2 {
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn multi(&self, idx: usize) -> [usize; 2] {
        [idx / self.dims[1], idx % self.dims[1]]
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> Complex64 {
        let m = self.multi(idx);
        Complex64::new(
            (self.lo[0] + m[0] as i64) as f64 * self.h,
            (self.lo[1] + m[1] as i64) as f64 * self.h,
        )
    }
}

/// A planar region on a lattice, with `+y` arms through flat pieces marked.
#[derive(Clone, Debug)]
pub struct PlanarGrid {
    pub lattice: Lattice2,
    mask: Vec<bool>,
    cut: Vec<bool>,
}

impl PlanarGrid {
    pub fn build(region: &PlanarRegion, flat: &[FlatPiece], h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter("h must be positive".into()));
        }
        let bb = region.bounding_box();
        let mut lo = [0i64; 2];
        let mut dims = [0usize; 2];
        for a in 0..2 {
            let (l, u) = bb[a];
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::UnboundedRegion);
            }
            let i0 = (l / h).floor() as i64;
            let i1 = (u / h).ceil() as i64;
            lo[a] = i0 - PAD as i64;
            dims[a] = (i1 - i0 + 1) as usize + 2 * PAD;
        }
        let lattice = Lattice2 { h, lo, dims };
        let (mask, cut): (Vec<bool>, Vec<bool>) = (0..lattice.len())
            .into_par_iter()
            .map(|i| {
                let z = lattice.coord(i);
                let c = flat
                    .iter()
                    .any(|fp| z.im < fp.y2 && z.im + h >= fp.y2 && z.re > fp.x2.0 && z.re < fp.x2.1);
                (region.contains(z), c)
            })
            .unzip();
        PlanarGrid { lattice, mask, cut }.cropped().ok_or(Error::EmptyMask { h })
    }

    pub fn h(&self) -> f64 {
        self.lattice.h
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn cut(&self) -> &[bool] {
        &self.cut
    }

    pub fn node_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn mask_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn restrict(&self, region: &PlanarRegion) -> Result<Self> {
        let mask = (0..self.len())
            .map(|i| self.mask[i] && region.contains(self.lattice.coord(i)))
            .collect();
        PlanarGrid {
            lattice: self.lattice.clone(),
            mask,
            cut: self.cut.clone(),
        }
        .cropped()
        .ok_or(Error::EmptyIntersection)
    }

    fn cropped(&self) -> Option<Self> {
        let mut mn = [usize::MAX; 2];
        let mut mx = [0usize; 2];
        let mut any = false;
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                any = true;
                let mi = self.lattice.multi(i);
                for a in 0..2 {
                    mn[a] = mn[a].min(mi[a]);
                    mx[a] = mx[a].max(mi[a]);
                }
            }
        }
        if !any {
            return None;
        }
        let old = &self.lattice;
        let lo = [
            old.lo[0] + mn[0] as i64 - PAD as i64,
            old.lo[1] + mn[1] as i64 - PAD as i64,
        ];
        let dims = [mx[0] - mn[0] + 1 + 2 * PAD, mx[1] - mn[1] + 1 + 2 * PAD];
        let lattice = Lattice2 { h: old.h, lo, dims };
        let mut mask = vec![false; lattice.len()];
        let mut cut = vec![false; lattice.len()];
        for i in 0..lattice.len() {
            let m = lattice.multi(i);
            let g = [lattice.lo[0] + m[0] as i64, lattice.lo[1] + m[1] as i64];
            let o = [g[0] - old.lo[0], g[1] - old.lo[1]];
            if o[0] >= 0 && o[1] >= 0 && (o[0] as usize) < old.dims[0] && (o[1] as usize) < old.dims[1] {
                let j = o[0] as usize * old.dims[1] + o[1] as usize;
                mask[i] = self.mask[j];
                cut[i] = self.cut[j];
            }
        }
        Some(PlanarGrid { lattice, mask, cut })
    }
}

/// Lattice over `factor1 × factor2`, stored as two planar grids.
#[derive(Clone, Debug)]
pub struct ProductGrid {
    pub z1: PlanarGrid,
    pub z2: PlanarGrid,
    pub policy: TracePolicy,
}

impl ProductGrid {
    pub fn build(domain: &ProductDomain, h: f64) -> Result<Self> {
        Self::build_with_spacings(domain, h, h)
    }

    /// Separate spacings `h1` in `z1` and `h2` in `z2`. The factors never
    /// couple, so each may be resolved at its own scale.
    pub fn build_with_spacings(domain: &ProductDomain, h1: f64, h2: f64) -> Result<Self> {
        Ok(ProductGrid {
            z1: PlanarGrid::build(&domain.factor1, &[], h1)?,
            z2: PlanarGrid::build(&domain.factor2, &domain.flat_pieces, h2)?,
            policy: TracePolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: TracePolicy) -> Self {
        self.policy = policy;
        self
    }

    /// The coarser of the two factor spacings.
    pub fn h(&self) -> f64 {
        self.z1.h().max(self.z2.h())
    }

    /// Volume `h1² h2²` of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        (self.z1.h() * self.z2.h()).powi(2)
    }

    /// Intersection with another product region, on the same lattice.
    pub fn restrict(&self, support: &ProductDomain) -> Result<Self> {
        Ok(ProductGrid {
            z1: self.z1.restrict(&support.factor1)?,
            z2: self.z2.restrict(&support.factor2)?,
            policy: self.policy,
        })
    }

    pub fn node_count(&self) -> usize {
        self.z1.node_count() * self.z2.node_count()
    }

    /// The same grid as an explicit 4-D window; needs equal spacings.
    pub fn to_dense(&self) -> Result<GridDomain> {
        let (l1, l2) = (&self.z1.lattice, &self.z2.lattice);
        if l1.h != l2.h {
            return Err(Error::InvalidParameter("a dense window needs equal factor spacings".into()));
        }
        let lattice = Lattice4 {
            h: self.h(),
            origin: [0.0; 4],
            lo: [l1.lo[0], l1.lo[1], l2.lo[0], l2.lo[1]],
            dims: [l1.dims[0], l1.dims[1], l2.dims[0], l2.dims[1]],
        };
        let n2 = l2.len();
        let mut mask = vec![false; lattice.len()];
        let mut cut = vec![false; lattice.len()];
        for a in 0..l1.len() {
            for b in 0..n2 {
                let i = a * n2 + b;
                mask[i] = self.z1.mask[a] && self.z2.mask[b];
                cut[i] = self.z2.cut[b];
            }
        }
        Ok(GridDomain::from_parts(lattice, mask, cut, self.policy))
    }
}
