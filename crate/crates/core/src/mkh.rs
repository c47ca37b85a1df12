//! Check of the weighted inequality
//! `Σ_jk ∫ e^b b_jk u_j ū_k ≤ ‖∂̄u‖² + ‖∂̄*u‖²` for (0,1)-forms and `b ≤ 0`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbar::{q_value, FormField01};
use crate::error::{Error, Result};
use crate::geometry::{GridDomain, Point4};

/// Complex Hessian `∂²b/∂z_j∂z̄_k`.
pub type Hessian = [[Complex64; 2]; 2];

/// A non-positive weight `b` with its analytic complex Hessian.
#[derive(Clone)]
pub struct WeightSpec {
    pub name: String,
    pub b: Arc<dyn Fn(&Point4) -> f64 + Send + Sync>,
    pub hessian: Arc<dyn Fn(&Point4) -> Hessian + Send + Sync>,
}

fn scaled_identity(s: f64) -> Hessian {
    let z = Complex64::new(0.0, 0.0);
    [[Complex64::new(s, 0.0), z], [z, Complex64::new(s, 0.0)]]
}

fn norm_sqr(p: &Point4) -> f64 {
    p.iter().map(|x| x * x).sum()
}

impl WeightSpec {
    /// `b ≡ 0`.
    pub fn zero() -> Self {
        WeightSpec {
            name: "zero".into(),
            b: Arc::new(|_| 0.0),
            hessian: Arc::new(|_| scaled_identity(0.0)),
        }
    }

    /// `b = |z|² − R²`, non-positive on `B(0, R)`; Hessian the identity.
    pub fn ball(radius: f64) -> Self {
        WeightSpec {
            name: format!("ball(R={radius})"),
            b: Arc::new(move |p| norm_sqr(p) - radius * radius),
            hessian: Arc::new(|_| scaled_identity(1.0)),
        }
    }

    /// `b = −δ(R² − |z|²)`; Hessian `δ` times the identity.
    pub fn scaled_ball(delta: f64, radius: f64) -> Self {
        WeightSpec {
            name: format!("scaled_ball(delta={delta}, R={radius})"),
            b: Arc::new(move |p| -delta * (radius * radius - norm_sqr(p))),
            hessian: Arc::new(move |_| scaled_identity(delta)),
        }
    }
}

/// Largest Hessian asymmetry tolerated before symmetrisation.
const HERMITIAN_TOL: f64 = 1e-12;

/// `Σ_nodes e^b Σ_jk b_jk u_j conj(u_k) h^4`.
pub fn mkh_lhs(w: &WeightSpec, u: &FormField01, grid: &GridDomain) -> Result<f64> {
    let mut acc = 0.0;
    for node in grid.mask_nodes() {
        let (a, b) = (u.f1[node], u.f2[node]);
        if a == Complex64::new(0.0, 0.0) && b == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = grid.lattice.coord(node);
        let bv = (w.b)(&p);
        if bv > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weight {} is positive ({bv}) at node {node}",
                w.name
            )));
        }
        let m = (w.hessian)(&p);
        let scale = m.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
        let defect = (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs());
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitianHessian { node, defect });
        }
        let off = 0.5 * (m[0][1] + m[1][0].conj());
        let form = m[0][0].re * a.norm_sqr() + m[1][1].re * b.norm_sqr() + 2.0 * (off * b * a.conj()).re;
        acc += bv.exp() * form;
    }
    Ok(acc * grid.h().powi(4))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MkhReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl MkhReport {
    /// `max(0, lhs − rhs)`.
    pub fn violation(&self) -> f64 {
        (self.lhs - self.rhs).max(0.0)
    }
}

/// Compares the weighted term with `Q(u)`; passes iff `lhs ≤ rhs + slack`.
pub fn mkh_check(w: &WeightSpec, u: &FormField01, grid: &GridDomain, slack: f64) -> Result<MkhReport> {
    let lhs = mkh_lhs(w, u, grid)?;
    let rhs = q_value(grid, u);
    Ok(MkhReport {
        lhs,
        rhs,
        slack,
        pass: lhs <= rhs + slack,
    })
}

/// The discretisation allowance `c h (‖u‖² + Q(u))`.
pub fn refinement_slack(c: f64, grid: &GridDomain, u: &FormField01) -> f64 {
    c * grid.h() * (u.norm_sqr(grid) + q_value(grid, u))
}
