//! Masked uniform lattices in R^4.
//!
//! Nodes sit at `origin + i * h` for integer multi-indices `i`; the mask marks
//! nodes strictly inside the domain. Every grid keeps a margin of
//! [`PAD`] unmasked layers around its mask so that stencil images of
//! mask-supported fields fit inside the window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{Point4, Region4};
use crate::error::{Error, Result};

pub const PAD: usize = 2;
const MAX_NODES: usize = 60_000_000;

/// Boundary treatment of one field component on flat boundary pieces.
/// Faces that are not flat pieces are always Dirichlet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacePolicy {
    /// Zero extension across the face.
    Dirichlet,
    /// Stencil arms through the face are dropped.
    Free,
}

/// Per-component policy on flat pieces: scalars, the `dz̄1` and `dz̄2` components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePolicy {
    pub scalar: FacePolicy,
    pub f1: FacePolicy,
    pub f2: FacePolicy,
}

impl TracePolicy {
    /// The tangential `dz̄1` component and scalars are free on flat pieces,
    /// the normal `dz̄2` component vanishes there.
    pub fn flat_piece() -> Self {
        TracePolicy {
            scalar: FacePolicy::Free,
            f1: FacePolicy::Free,
            f2: FacePolicy::Dirichlet,
        }
    }

    pub fn all_dirichlet() -> Self {
        TracePolicy {
            scalar: FacePolicy::Dirichlet,
            f1: FacePolicy::Dirichlet,
            f2: FacePolicy::Dirichlet,
        }
    }
}

impl Default for TracePolicy {
    fn default() -> Self {
        TracePolicy::flat_piece()
    }
}

/// Window of the integer lattice `origin + h Z^4`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice4 {
    pub h: f64,
    pub origin: Point4,
    pub lo: [i64; 4],
    pub dims: [usize; 4],
}

impl Lattice4 {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> [usize; 4] {
        let d = self.dims;
        [d[1] * d[2] * d[3], d[2] * d[3], d[3], 1]
    }

    #[inline]
    pub fn multi(&self, idx: usize) -> [usize; 4] {
        let d = self.dims;
        let i3 = idx % d[3];
        let r = idx / d[3];
        let i2 = r % d[2];
        let r = r / d[2];
        [r / d[1], r % d[1], i2, i3]
    }

    #[inline]
    pub fn index(&self, m: [usize; 4]) -> usize {
        let s = self.strides();
        m[0] * s[0] + m[1] * s[1] + m[2] * s[2] + m[3]
    }

    #[inline]
    pub fn coord_of(&self, m: [usize; 4]) -> Point4 {
        std::array::from_fn(|a| self.origin[a] + (self.lo[a] + m[a] as i64) as f64 * self.h)
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> Point4 {
        self.coord_of(self.multi(idx))
    }

    /// Global integer position of a window node.
    pub fn global(&self, idx: usize) -> [i64; 4] {
        let m = self.multi(idx);
        std::array::from_fn(|a| self.lo[a] + m[a] as i64)
    }

    /// Window index of a global position, if inside the window.
    pub fn local(&self, g: [i64; 4]) -> Option<usize> {
        let mut m = [0usize; 4];
        for a in 0..4 {
            let o = g[a] - self.lo[a];
            if o < 0 || o as usize >= self.dims[a] {
                return None;
            }
            m[a] = o as usize;
        }
        Some(self.index(m))
    }
}

/// A domain laid on a 4-D lattice.
#[derive(Clone, Debug)]
pub struct GridDomain {
    pub lattice: Lattice4,
    mask: Vec<bool>,
    /// `cut[p]`: the `+y2` arm from `p` crosses a flat boundary piece.
    cut: Vec<bool>,
    pub policy: TracePolicy,
}

fn check_spacing(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter("h must be positive".into()));
    }
    Ok(())
}

/// Lays `domain` onto the lattice `h Z^4`.
pub fn build_grid(domain: &dyn Region4, h: f64) -> Result<GridDomain> {
    check_spacing(h)?;
    let bb = domain.bounding_box();
    let mut lo = [0i64; 4];
    let mut dims = [0usize; 4];
    for a in 0..4 {
        let (l, u) = bb[a];
        if !l.is_finite() || !u.is_finite() {
            return Err(Error::UnboundedRegion);
        }
        let i0 = (l / h).floor() as i64;
        let i1 = (u / h).ceil() as i64;
        lo[a] = i0 - PAD as i64;
        dims[a] = (i1 - i0 + 1) as usize + 2 * PAD;
    }
    let lattice = Lattice4 {
        h,
        origin: [0.0; 4],
        lo,
        dims,
    };
    if lattice.len() > MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "lattice window of {} nodes exceeds the limit of {MAX_NODES}",
            lattice.len()
        )));
    }
    let (mask, cut): (Vec<bool>, Vec<bool>) = (0..lattice.len())
        .into_par_iter()
        .map(|idx| {
            let p = lattice.coord(idx);
            (domain.contains(&p), domain.crosses_flat(&p, h))
        })
        .unzip();
    let grid = GridDomain {
        lattice,
        mask,
        cut,
        policy: TracePolicy::default(),
    };
    grid.cropped().ok_or(Error::EmptyMask { h })
}

impl GridDomain {
    pub(crate) fn from_parts(lattice: Lattice4, mask: Vec<bool>, cut: Vec<bool>, policy: TracePolicy) -> Self {
        debug_assert_eq!(mask.len(), lattice.len());
        debug_assert_eq!(cut.len(), lattice.len());
        GridDomain {
            lattice,
            mask,
            cut,
            policy,
        }
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

    pub fn in_mask(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn node_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn with_policy(mut self, policy: TracePolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Mask nodes carrying the given form component (1 or 2) as a degree of
    /// freedom. The `dz̄2` component is pinned to zero below Dirichlet flat faces.
    pub fn dof_nodes(&self, component: usize) -> Vec<usize> {
        let pin = component == 2 && self.policy.f2 == FacePolicy::Dirichlet;
        (0..self.len())
            .filter(|&i| self.mask[i] && !(pin && self.cut[i]))
            .collect()
    }

    pub fn mask_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mask[i]).collect()
    }

    /// Sub-grid of nodes that also lie in `support`, on the same lattice.
    pub fn restrict(&self, support: &dyn Region4) -> Result<GridDomain> {
        self.restrict_with(|p| support.contains(p))
    }

    pub fn restrict_with<F: Fn(&Point4) -> bool + Sync>(&self, keep: F) -> Result<GridDomain> {
        let mask: Vec<bool> = (0..self.len())
            .into_par_iter()
            .map(|i| self.mask[i] && keep(&self.lattice.coord(i)))
            .collect();
        let g = GridDomain {
            lattice: self.lattice.clone(),
            mask,
            cut: self.cut.clone(),
            policy: self.policy,
        };
        g.cropped().ok_or(Error::EmptyIntersection)
    }

    /// Shrinks the window to the mask's bounding box plus [`PAD`] layers.
    fn cropped(&self) -> Option<GridDomain> {
        let mut mn = [usize::MAX; 4];
        let mut mx = [0usize; 4];
        let mut any = false;
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                any = true;
                let mi = self.lattice.multi(i);
                for a in 0..4 {
                    mn[a] = mn[a].min(mi[a]);
                    mx[a] = mx[a].max(mi[a]);
                }
            }
        }
        if !any {
            return None;
        }
        let old = &self.lattice;
        let mut lo = [0i64; 4];
        let mut dims = [0usize; 4];
        for a in 0..4 {
            lo[a] = old.lo[a] + mn[a] as i64 - PAD as i64;
            dims[a] = mx[a] - mn[a] + 1 + 2 * PAD;
        }
        let lattice = Lattice4 {
            h: old.h,
            origin: old.origin,
            lo,
            dims,
        };
        let mut mask = vec![false; lattice.len()];
        let mut cut = vec![false; lattice.len()];
        for (i, (m, c)) in mask.iter_mut().zip(cut.iter_mut()).enumerate() {
            if let Some(j) = old.local(lattice.global(i)) {
                *m = self.mask[j];
                *c = self.cut[j];
            }
        }
        Some(GridDomain {
            lattice,
            mask,
            cut,
            policy: self.policy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::{ModelConstants, ProductDomain};
    use crate::geometry::region::PlanarRegion;

    #[test]
    fn unit_cube_quarter_spacing() {
        let g = build_grid(&ProductDomain::cube(1.0), 0.25).unwrap();
        assert_eq!(g.node_count(), 81);
    }

    #[test]
    fn node_count_matches_brute_force_scan() {
        let dom = ProductDomain::new(PlanarRegion::centered_disc(2.0 / 3.0), PlanarRegion::lower_half_disc(1.0));
        let h = 0.125;
        let g = build_grid(&dom, h).unwrap();
        let mut count = 0;
        let n = (2.0 / h) as i64 + 2;
        for a in -n..=n {
            for b in -n..=n {
                for c in -n..=n {
                    for d in -n..=n {
                        let p = [a as f64 * h, b as f64 * h, c as f64 * h, d as f64 * h];
                        if dom.contains(&p) {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(g.node_count(), count);
        for i in g.mask_nodes() {
            assert!(dom.contains(&g.lattice.coord(i)));
        }
    }

    #[test]
    fn coarse_spacing_is_an_error() {
        let err = build_grid(&ProductDomain::cube(1.0), 10.0).unwrap_err();
        assert!(matches!(err, Error::EmptyMask { .. }));
        assert!(build_grid(&ProductDomain::cube(1.0), -1.0).is_err());
    }

    #[test]
    fn cut_marks_top_row_below_flat_piece() {
        let omega = ModelConstants::default().omega();
        let h = 0.25;
        let g = build_grid(&omega, h).unwrap();
        for i in 0..g.len() {
            let p = g.lattice.coord(i);
            if g.in_mask(i) {
                let top = (p[3] + h).abs() < 1e-12 && p[2].abs() < 1.0;
                assert_eq!(g.cut()[i], top, "{p:?}");
            }
        }
        let n1 = g.dof_nodes(1).len();
        let n2 = g.dof_nodes(2).len();
        assert_eq!(n1, g.node_count());
        assert!(n2 < n1);
    }

    #[test]
    fn restriction_keeps_lattice_anchor() {
        let g = build_grid(&ProductDomain::cube(1.0), 0.125).unwrap();
        let sub = g
            .restrict(&crate::geometry::domain::Box4 {
                bounds: [(0.2, 0.6); 4],
            })
            .unwrap();
        for i in sub.mask_nodes() {
            let gi = sub.lattice.global(i);
            let j = g.lattice.local(gi).unwrap();
            assert!(g.in_mask(j));
            assert_eq!(sub.lattice.coord(i), g.lattice.coord(j));
        }
        assert_eq!(sub.node_count(), 3usize.pow(4));
    }

    #[test]
    fn volume_converges_under_refinement() {
        let dom = ProductDomain::new(PlanarRegion::centered_disc(0.5), PlanarRegion::lower_half_disc(0.5));
        let exact = dom.volume().unwrap();
        let mut prev = f64::INFINITY;
        for h in [0.1, 0.05, 0.025] {
            let g = build_grid(&dom, h).unwrap();
            let err = (g.node_count() as f64 * h.powi(4) - exact).abs() / exact;
            assert!(err < prev, "h = {h}: {err} !< {prev}");
            prev = err;
        }
    }
}
