//! Rank-generic forward Wirtinger stencils on a lattice window.

use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Window geometry needed to apply difference stencils.
#[derive(Clone, Copy)]
pub(crate) struct Stencil<'a, const N: usize> {
    pub dims: [usize; N],
    pub h: f64,
    /// Nodes whose `+` arm along `cut_axis` crosses a flat piece.
    pub cut: &'a [bool],
    pub cut_axis: usize,
}

impl<'a, const N: usize> Stencil<'a, N> {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    fn stride(&self, a: usize) -> usize {
        self.dims[a + 1..].iter().product()
    }

    #[inline]
    fn pos(&self, idx: usize, a: usize, s: usize) -> usize {
        (idx / s) % self.dims[a]
    }

    #[inline]
    fn dropped(&self, idx: usize, a: usize, free: bool) -> bool {
        free && a == self.cut_axis && self.cut[idx]
    }

    /// `D_a x` at `idx`, zero extension beyond the window.
    #[inline]
    fn fwd(&self, x: &[Complex64], idx: usize, a: usize, s: usize, free: bool) -> Complex64 {
        if self.dropped(idx, a, free) {
            return Complex64::new(0.0, 0.0);
        }
        let next = if self.pos(idx, a, s) + 1 < self.dims[a] {
            x[idx + s]
        } else {
            Complex64::new(0.0, 0.0)
        };
        (next - x[idx]) / self.h
    }

    /// `D_a^T v` at `idx`: the transpose of [`Self::fwd`].
    #[inline]
    fn fwd_t(&self, v: &[Complex64], idx: usize, a: usize, s: usize, free: bool) -> Complex64 {
        let mut r = Complex64::new(0.0, 0.0);
        if self.pos(idx, a, s) >= 1 && !self.dropped(idx - s, a, free) {
            r += v[idx - s];
        }
        if !self.dropped(idx, a, free) {
            r -= v[idx];
        }
        r / self.h
    }

    /// `½(D_x + i D_y) x` for the complex coordinate on axes `(2k, 2k + 1)`.
    pub fn dbar(&self, x: &[Complex64], k: usize, free: bool) -> Vec<Complex64> {
        let (ax, ay) = (2 * k, 2 * k + 1);
        let (sx, sy) = (self.stride(ax), self.stride(ay));
        (0..self.len())
            .into_par_iter()
            .map(|i| 0.5 * (self.fwd(x, i, ax, sx, free) + I * self.fwd(x, i, ay, sy, free)))
            .collect()
    }

    /// Conjugate transpose of [`Self::dbar`]; not projected.
    pub fn dbar_adj(&self, v: &[Complex64], k: usize, free: bool) -> Vec<Complex64> {
        let (ax, ay) = (2 * k, 2 * k + 1);
        let (sx, sy) = (self.stride(ax), self.stride(ay));
        (0..self.len())
            .into_par_iter()
            .map(|i| 0.5 * (self.fwd_t(v, i, ax, sx, free) - I * self.fwd_t(v, i, ay, sy, free)))
            .collect()
    }

    /// `-Δ_h x` with zero values off `mask`, evaluated on `mask` only.
    pub fn neg_laplacian(&self, x: &[Complex64], mask: &[bool]) -> Vec<Complex64> {
        let strides: [usize; N] = std::array::from_fn(|a| self.stride(a));
        let h2 = self.h * self.h;
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                if !mask[i] {
                    return Complex64::new(0.0, 0.0);
                }
                let mut r = x[i] * (2 * N) as f64;
                for a in 0..N {
                    let s = strides[a];
                    let m = self.pos(i, a, s);
                    if m + 1 < self.dims[a] && mask[i + s] {
                        r -= x[i + s];
                    }
                    if m >= 1 && mask[i - s] {
                        r -= x[i - s];
                    }
                }
                r / h2
            })
            .collect()
    }
}

/// Zeroes entries outside `keep`.
pub(crate) fn project(mut x: Vec<Complex64>, keep: &[bool]) -> Vec<Complex64> {
    x.iter_mut().zip(keep).for_each(|(v, &k)| {
        if !k {
            *v = Complex64::new(0.0, 0.0);
        }
    });
    x
}

/// `Σ a_i conj(b_i)`, summed in index order.
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}
