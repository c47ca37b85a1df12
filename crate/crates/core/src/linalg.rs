//! Small Hermitian solvers: conjugate gradients and smallest eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dbar::stencil::{dot, norm_sqr};
use crate::error::{Error, Result};

/// Largest problem handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 4000;

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Solves `A x = b` for Hermitian positive definite `A`, to relative
/// residual `tol`. Returns the solution and the iteration count.
pub fn conjugate_gradient<F>(apply: F, b: &[Complex64], tol: f64, max_iter: usize) -> Result<(Vec<Complex64>, usize)>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let bn = norm_sqr(b).sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bn == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = norm_sqr(&r);
    for it in 0..max_iter {
        if rr.sqrt() <= tol * bn {
            return Ok((x, it));
        }
        let ap = apply(&p);
        let alpha = rr / dot(&ap, &p).re;
        axpy(&mut x, Complex64::new(alpha, 0.0), &p);
        axpy(&mut r, Complex64::new(-alpha, 0.0), &ap);
        let rr_new = norm_sqr(&r);
        let beta = rr_new / rr;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + *pi * beta);
        rr = rr_new;
    }
    if rr.sqrt() <= tol * bn {
        return Ok((x, max_iter));
    }
    Err(Error::SolverNonConvergence {
        solver: "conjugate gradient",
        residual: rr.sqrt() / bn,
        iterations: max_iter,
    })
}

/// An eigenpair with its residual `‖Av − λv‖` for unit `v`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenpair of a dense Hermitian matrix.
pub fn smallest_dense(m: &DMatrix<Complex64>) -> Result<EigenPair> {
    let n = m.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit { dofs: n, limit: DENSE_LIMIT });
    }
    if n == 0 {
        return Err(Error::EmptyIntersection);
    }
    // symmetrise away roundoff before the Hermitian solver sees it
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let vector: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
    let mv = m * nalgebra::DVector::from_column_slice(&vector);
    let residual = mv
        .iter()
        .zip(&vector)
        .map(|(a, b)| (a - b * value).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(EigenPair {
        value,
        vector,
        residual,
        iterations: 1,
    })
}

#[derive(Clone, Debug)]
pub struct IterOptions {
    /// Residual target `‖Av − λv‖ ≤ tol` for unit `v`.
    pub tol: f64,
    pub seed: u64,
    pub max_basis: usize,
    pub keep: usize,
    pub max_iter: usize,
}

impl IterOptions {
    pub fn new(tol: f64, seed: u64) -> Self {
        IterOptions {
            tol,
            seed,
            max_basis: 96,
            keep: 16,
            max_iter: 60_000,
        }
    }
}

/// Smallest eigenpair of a Hermitian operator by thick-restarted Lanczos.
///
/// The basis is expanded by the residual of the current smallest Ritz pair,
/// which spans the same Krylov space as the three-term recurrence but keeps
/// full orthogonality and restarts cleanly.
pub fn smallest_lanczos<F>(n: usize, apply: F, opts: &IterOptions) -> Result<EigenPair>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if n == 0 {
        return Err(Error::EmptyIntersection);
    }
    let m = opts.max_basis.min(n).max(1);
    let keep = opts.keep.min(m.saturating_sub(1)).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random = || -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect()
    };

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut proj = DMatrix::<Complex64>::zeros(m, m);
    let mut next = random();
    let mut best = (f64::INFINITY, vec![], f64::INFINITY);
    for it in 0..opts.max_iter {
        // orthogonalise twice against the basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&next, b);
                axpy(&mut next, -c, b);
            }
        }
        let nn = norm_sqr(&next).sqrt();
        if nn < 1e-13 || !nn.is_finite() {
            if basis.len() == n {
                // the basis spans everything; the Ritz pair is exact
                return Ok(EigenPair {
                    value: best.0,
                    vector: best.1,
                    residual: best.2,
                    iterations: it,
                });
            }
            next = random();
            continue;
        }
        next.iter_mut().for_each(|v| *v /= nn);
        let img = apply(&next);
        let k = basis.len();
        basis.push(std::mem::take(&mut next));
        images.push(img);
        for i in 0..=k {
            let v = dot(&images[k], &basis[i]);
            proj[(i, k)] = v;
            proj[(k, i)] = v.conj();
        }
        let size = basis.len();
        let h = proj.view((0, 0), (size, size)).into_owned();
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta = eig.eigenvalues[order[0]];
        let y = eig.eigenvectors.column(order[0]);
        let combine = |vs: &[Vec<Complex64>], y: nalgebra::DVectorView<Complex64>| {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (v, c) in vs.iter().zip(y.iter()) {
                axpy(&mut out, *c, v);
            }
            out
        };
        let x = combine(&basis, y.as_view());
        let ax = combine(&images, y.as_view());
        let r: Vec<Complex64> = ax.iter().zip(&x).map(|(a, b)| a - b * theta).collect();
        let rn = norm_sqr(&r).sqrt();
        best = (theta, x, rn);
        if rn <= opts.tol {
            let (value, vector, residual) = best;
            return Ok(EigenPair {
                value,
                vector,
                residual,
                iterations: it + 1,
            });
        }
        next = r;
        if size == m {
            // thick restart on the `keep` lowest Ritz vectors
            let mut nb = Vec::with_capacity(m);
            let mut ni = Vec::with_capacity(m);
            proj.fill(Complex64::new(0.0, 0.0));
            for (slot, &c) in order.iter().take(keep).enumerate() {
                let yc = eig.eigenvectors.column(c);
                nb.push(combine(&basis, yc.as_view()));
                ni.push(combine(&images, yc.as_view()));
                proj[(slot, slot)] = Complex64::new(eig.eigenvalues[c], 0.0);
            }
            basis = nb;
            images = ni;
        }
    }
    Err(Error::SolverNonConvergence {
        solver: "lanczos",
        residual: best.2,
        iterations: opts.max_iter,
    })
}
