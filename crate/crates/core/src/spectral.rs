//! Smallest-eigenvalue estimates of `Q` on support neighbourhoods and the
//! compactness-estimate probe.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbar::{
    q_value, sobolev_minus1_form, FactorSplit, FormField01, PlanarOperator, QOperator, SeparableForm, SOLVE_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{GridDomain, ProductDomain, ProductGrid, Region4};
use crate::linalg::{smallest_dense, smallest_lanczos, EigenPair, IterOptions, DENSE_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dense,
    Iterative,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual target `‖Qv − λv‖ ≤ tol ‖v‖`.
    pub tol: f64,
    pub seed: u64,
    /// Problems with at most this many dofs go to the dense solver.
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            seed: 0,
            dense_threshold: 1200,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerance must be positive".into()));
        }
        if self.dense_threshold > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "dense threshold {} exceeds {DENSE_LIMIT}",
                self.dense_threshold
            )));
        }
        Ok(())
    }
}

/// Smallest eigenvalue, minimiser and residual.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub lambda: f64,
    pub form: FormField01,
    pub residual: f64,
}

fn to_eigen(q: &QOperator, p: EigenPair) -> Eigen {
    Eigen {
        lambda: p.value,
        form: q.unpack(&p.vector),
        residual: p.residual,
    }
}

/// Exact Hermitian eigensolve of the assembled `Q`; at most [`DENSE_LIMIT`] dofs.
pub fn smallest_eig_dense(q: &QOperator) -> Result<Eigen> {
    if q.dim() > DENSE_LIMIT {
        return Err(Error::SizeLimit {
            dofs: q.dim(),
            limit: DENSE_LIMIT,
        });
    }
    Ok(to_eigen(q, smallest_dense(&q.assemble_dense())?))
}

/// Thick-restarted Lanczos; deterministic for a fixed seed.
pub fn smallest_eig_iterative(q: &QOperator, tol: f64, seed: u64) -> Result<Eigen> {
    let p = smallest_lanczos(q.dim(), |x| q.apply(x), &IterOptions::new(tol, seed))?;
    Ok(to_eigen(q, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub lambda: f64,
    pub residual: f64,
    pub solver: SolverKind,
    pub h: f64,
    pub neighborhood: String,
    pub dofs: usize,
}

/// `λ` of `Q` over fields supported on the nodes of `domain` inside `u`.
pub fn lambda_estimate(domain: &GridDomain, u: &dyn Region4, neighborhood: &str, opts: &SolverOptions) -> Result<LambdaReport> {
    Ok(lambda_with_minimiser(domain, u, neighborhood, opts)?.0)
}

/// As [`lambda_estimate`], also returning the minimiser on the restricted grid.
pub fn lambda_with_minimiser(
    domain: &GridDomain,
    u: &dyn Region4,
    neighborhood: &str,
    opts: &SolverOptions,
) -> Result<(LambdaReport, Eigen, GridDomain)> {
    opts.validate()?;
    let grid = domain.restrict(u)?;
    let q = QOperator::new(&grid);
    let (eig, solver) = if q.dim() <= opts.dense_threshold {
        (smallest_eig_dense(&q)?, SolverKind::Dense)
    } else {
        (smallest_eig_iterative(&q, opts.tol, opts.seed)?, SolverKind::Iterative)
    };
    let report = LambdaReport {
        lambda: eig.lambda,
        residual: eig.residual,
        solver,
        h: grid.h(),
        neighborhood: neighborhood.to_string(),
        dofs: q.dim(),
    };
    drop(q);
    Ok((report, eig, grid))
}

fn factor_eig(op: &PlanarOperator, opts: &SolverOptions) -> Result<(EigenPair, SolverKind)> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::EmptyIntersection);
    }
    if n <= opts.dense_threshold {
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            for (r, v) in op.apply(&e).into_iter().enumerate() {
                m[(r, c)] = v;
            }
            e[c] = Complex64::new(0.0, 0.0);
        }
        Ok((smallest_dense(&m)?, SolverKind::Dense))
    } else {
        // each factor residual enters the tensor residual in quadrature
        let tol = opts.tol / std::f64::consts::SQRT_2;
        Ok((smallest_lanczos(n, |x| op.apply(x), &IterOptions::new(tol, opts.seed))?, SolverKind::Iterative))
    }
}

/// Per-factor eigenvalues behind a separated `λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSpectrum {
    pub c1: f64,
    pub b2: f64,
    pub a1: f64,
    pub e2: f64,
}

impl FactorSpectrum {
    /// The `dz̄1` block minimum and the `dz̄2` block minimum.
    pub fn blocks(&self) -> (f64, f64) {
        (self.c1 + self.b2, self.a1 + self.e2)
    }
}

/// `λ` on a product grid restricted to the product neighbourhood `u`, by
/// separation of variables; the minimiser is a tensor product of factor
/// eigenvectors.
pub fn lambda_estimate_product(
    grid: &ProductGrid,
    u: &ProductDomain,
    neighborhood: &str,
    opts: &SolverOptions,
) -> Result<(LambdaReport, FactorSpectrum)> {
    opts.validate()?;
    let g = grid.restrict(u).map_err(|_| Error::EmptyIntersection)?;
    let split = FactorSplit::new(&g)?;
    let (c1, k1) = factor_eig(&split.c1, opts)?;
    let (b2, k2) = factor_eig(&split.b2, opts)?;
    let (a1, k3) = factor_eig(&split.a1, opts)?;
    let (e2, k4) = factor_eig(&split.e2, opts)?;
    let spec = FactorSpectrum {
        c1: c1.value,
        b2: b2.value,
        a1: a1.value,
        e2: e2.value,
    };
    let (l1, l2) = spec.blocks();
    let (lambda, residual) = if l1 <= l2 {
        (l1, c1.residual.hypot(b2.residual))
    } else {
        (l2, a1.residual.hypot(e2.residual))
    };
    let solver = if [k1, k2, k3, k4].contains(&SolverKind::Iterative) {
        SolverKind::Iterative
    } else {
        SolverKind::Dense
    };
    let dofs = split.c1.dim() * split.b2.dim() + split.a1.dim() * split.e2.dim();
    Ok((
        LambdaReport {
            lambda,
            residual,
            solver,
            h: g.h(),
            neighborhood: neighborhood.to_string(),
            dofs,
        },
        spec,
    ))
}

/// One form's entry in a probe ledger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub norm_sqr: f64,
    pub q: f64,
    pub minus1: f64,
}

impl ProbeEntry {
    /// Measures a grid form.
    pub fn measure(grid: &GridDomain, f: &FormField01) -> Result<Self> {
        Ok(ProbeEntry {
            norm_sqr: f.norm_sqr(grid),
            q: q_value(grid, f),
            minus1: sobolev_minus1_form(grid, f)?,
        })
    }

    /// Measures a separable form on a product grid.
    pub fn measure_separable(grid: &ProductGrid, f: &SeparableForm) -> Result<Self> {
        Ok(ProbeEntry {
            norm_sqr: f.norm_sqr(grid),
            q: f.q_value(grid)?,
            minus1: f.sobolev_minus1(grid, SOLVE_TOL)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub epsilon: f64,
    pub d_min: f64,
    pub family: String,
    pub ledger: Vec<ProbeEntry>,
}

impl ProbeReport {
    /// Largest violation of `‖g‖² ≤ ε Q(g) + d_min ‖g‖²₋₁` over the ledger.
    pub fn worst_slack(&self) -> f64 {
        self.ledger
            .iter()
            .map(|e| e.norm_sqr - self.epsilon * e.q - self.d_min * e.minus1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Least `D` with `‖g‖² ≤ ε Q(g) + D ‖g‖²₋₁` on every ledger entry.
pub fn compactness_probe(family: &str, ledger: Vec<ProbeEntry>, epsilon: f64) -> Result<ProbeReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let mut d_min: f64 = 0.0;
    for (index, e) in ledger.iter().enumerate() {
        if !(e.norm_sqr > 0.0) || !(e.minus1 > 0.0) {
            return Err(Error::ZeroForm { index });
        }
        d_min = d_min.max((e.norm_sqr - epsilon * e.q).max(0.0) / e.minus1);
    }
    Ok(ProbeReport {
        epsilon,
        d_min,
        family: family.to_string(),
        ledger,
    })
}

/// A CSV row of a lambda study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub experiment: String,
    pub domain: String,
    pub neighborhood: String,
    pub h: f64,
    pub dofs: usize,
    pub lambda: f64,
    pub residual: f64,
    pub witness_bound: Option<f64>,
}

impl LambdaReport {
    pub fn row(&self, experiment: &str, domain: &str, witness_bound: Option<f64>) -> LambdaRow {
        LambdaRow {
            experiment: experiment.to_string(),
            domain: domain.to_string(),
            neighborhood: self.neighborhood.clone(),
            h: self.h,
            dofs: self.dofs,
            lambda: self.lambda,
            residual: self.residual,
            witness_bound,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Writes rows with a header line.
pub fn write_lambda_csv<W: Write>(w: W, rows: &[LambdaRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}
