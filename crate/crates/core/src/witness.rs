//! Witness forms `φ_j = f(z1) g_j(z2) dz̄1` with `g_j = χ_j(|z2|²)/(z2 − iα_j)`.
//!
//! The admissible `α_j` is far below double-precision range for moderate `j`
//! (`ln α_j` grows like `j^4`), so shifts are carried as `ln α`. On the plateau
//! `|z| < 1/(2j)` where `χ_j = 1` the radial integral of `|z − iα|^{-2}` is
//! done in closed form, leaving a smooth angular integral; everywhere else the
//! integrands are insensitive to `α` at that scale and go to the cubature.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbar::{FormField01, SeparableForm};
use crate::error::{Error, Result};
use crate::geometry::{GridDomain, ModelConstants, PlanarRegion, ProductGrid};
use crate::quadrature::{integrate_1d, integrate_real, QuadOptions, QuadResult};

/// `e(x) = exp(-1/x)` for `x > 0`, else 0.
fn e(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// C^∞ step from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn smoothstep(x: f64) -> f64 {
    let (a, b) = (e(x), e(1.0 - x));
    a / (a + b)
}

fn smoothstep_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (e(x), e(1.0 - x));
    a * b * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x))) / ((a + b) * (a + b))
}

/// Transition profile of a cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `e(x)/(e(x) + e(1 − x))` with `e(x) = exp(−1/x)`.
    Smoothstep,
}

/// Even cutoff `χ_j`: 1 on `|t| ≤ 1/(4j²)`, 0 on `|t| ≥ 1/j²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub j: u32,
    pub t0: f64,
    pub t1: f64,
    pub profile: Profile,
}

impl CutoffSpec {
    pub fn new(j: u32) -> Self {
        let jf = j as f64;
        CutoffSpec {
            j,
            t0: 1.0 / (4.0 * jf * jf),
            t1: 1.0 / (jf * jf),
            profile: Profile::Smoothstep,
        }
    }

    /// Plateau radius in `z`: `|z|² ≤ t0`.
    pub fn plateau_radius(&self) -> f64 {
        self.t0.sqrt()
    }

    /// Support radius in `z`.
    pub fn support_radius(&self) -> f64 {
        self.t1.sqrt()
    }
}

pub fn chi(spec: &CutoffSpec, t: f64) -> f64 {
    let a = t.abs();
    if a <= spec.t0 {
        1.0
    } else if a >= spec.t1 {
        0.0
    } else {
        smoothstep((spec.t1 - a) / (spec.t1 - spec.t0))
    }
}

/// Exact derivative of [`chi`].
pub fn chi_prime(spec: &CutoffSpec, t: f64) -> f64 {
    let a = t.abs();
    if a <= spec.t0 || a >= spec.t1 {
        return 0.0;
    }
    let w = spec.t1 - spec.t0;
    -smoothstep_prime((spec.t1 - a) / w) / w * t.signum()
}

/// Radial bump `f(z) = exp(1 − 1/(1 − (|z|/radius)²))`, 0 outside the radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub radius: f64,
}

pub fn default_bump() -> Bump {
    Bump { radius: 2.0 / 3.0 }
}

impl Bump {
    pub fn profile(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn profile_prime(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s * s;
        -self.profile(r) * 2.0 * s / (d * d) / self.radius
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.profile(z.norm()), 0.0)
    }

    /// `∂f/∂z = ½ f'(r) z̄/r`.
    pub fn d_dz(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        z.conj() * (0.5 * self.profile_prime(r) / r)
    }

    /// `C_f = ‖∂f/∂z‖²/‖f‖²` over `D1`.
    pub fn c_f(&self, tol: f64) -> Result<f64> {
        let d1 = ModelConstants::default().d1();
        let o = QuadOptions::new(tol).with_abs_floor(0.0);
        let num = integrate_real(&d1, |z| self.d_dz(z).norm_sqr(), &o)?;
        let den = integrate_real(&d1, |z| self.profile(z.norm()).powi(2), &o)?;
        Ok(num.value / den.value)
    }
}

/// `C_f` of the default bump, computed once.
pub fn default_c_f() -> f64 {
    static CF: OnceLock<f64> = OnceLock::new();
    *CF.get_or_init(|| default_bump().c_f(1e-10).expect("default bump cubature converges"))
}

/// `atan(x)/x`, continuous at 0 and at infinity.
fn atan_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else if x.is_infinite() {
        0.0
    } else {
        x.atan() / x
    }
}

/// `∫_0^ρ r dr / |r e^{iθ} − iα|²` minus `ln(ρ/α)`, with `α = exp(log_alpha)`.
fn plateau_radial_excess(theta: f64, rho: f64, log_alpha: f64) -> f64 {
    let alpha = log_alpha.exp();
    let s = (-theta.sin()).max(0.0);
    let c = theta.cos().abs();
    let q = alpha / rho;
    let tail = if alpha == 0.0 {
        0.0
    } else {
        s * alpha / (rho + alpha * s) * atan_ratio(alpha * c / (rho + alpha * s))
    };
    0.5 * (2.0 * q * s + q * q).ln_1p() - atan_ratio(c / s) + tail
}

/// `∫` over the plateau sector `{r < ρ, θ ∈ (θ0, θ1)}` of `|z − iα|^{-2}`.
fn plateau_integral(theta: (f64, f64), rho: f64, log_alpha: f64, tol: f64) -> Result<QuadResult<f64>> {
    let r = integrate_1d(|t| plateau_radial_excess(t, rho, log_alpha), theta.0, theta.1, tol.min(1e-10))?;
    let span = theta.1 - theta.0;
    Ok(QuadResult {
        value: span * (rho.ln() - log_alpha) + r.value,
        error_estimate: r.error_estimate,
        cells_used: r.cells_used,
    })
}

/// `α` for the annulus integrands; below `1e-200` the shift is immaterial.
fn shift(log_alpha: f64) -> Complex64 {
    Complex64::new(0.0, log_alpha.exp())
}

fn annulus(cut: &CutoffSpec, theta: (f64, f64)) -> PlanarRegion {
    PlanarRegion::annular_sector(cut.plateau_radius(), cut.support_radius(), theta.0, theta.1)
}

const W1: (f64, f64) = (-2.0 * PI / 3.0, -PI / 3.0);
const W2: (f64, f64) = (-4.0 * PI / 3.0, PI / 3.0);
const HALF: (f64, f64) = (-PI, 0.0);

fn opts(tol: f64, log_alpha: f64) -> QuadOptions {
    QuadOptions::new(tol)
        .with_abs_floor(0.0)
        .with_hot_points(vec![shift(log_alpha)])
}

fn check_j(j: u32) -> Result<()> {
    if j < 2 {
        return Err(Error::InvalidParameter(format!("witness index j = {j} must be at least 2")));
    }
    Ok(())
}

/// `∫_{W2 ∩ B(0,1/j)} |χ_j'(|z|²)|² / |z − iα|²`, with `α = exp(log_alpha)`.
pub fn alpha_lhs_log(j: u32, log_alpha: f64, tol: f64) -> Result<QuadResult<f64>> {
    check_j(j)?;
    let cut = CutoffSpec::new(j);
    let a = shift(log_alpha);
    integrate_real(
        &annulus(&cut, W2),
        |z| chi_prime(&cut, z.norm_sqr()).powi(2) / (z - a).norm_sqr(),
        &opts(tol, log_alpha),
    )
}

/// `∫_{W1 ∩ B(0,1/j)} |χ_j(|z|²)|² / |z − iα|²`, with `α = exp(log_alpha)`.
pub fn alpha_rhs_log(j: u32, log_alpha: f64, tol: f64) -> Result<QuadResult<f64>> {
    check_j(j)?;
    let cut = CutoffSpec::new(j);
    let a = shift(log_alpha);
    let outer = integrate_real(
        &annulus(&cut, W1),
        |z| chi(&cut, z.norm_sqr()).powi(2) / (z - a).norm_sqr(),
        &opts(tol, log_alpha),
    )?;
    let inner = plateau_integral(W1, cut.plateau_radius(), log_alpha, tol)?;
    Ok(QuadResult {
        value: outer.value + inner.value,
        error_estimate: outer.error_estimate + inner.error_estimate,
        cells_used: outer.cells_used + inner.cells_used,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

pub fn alpha_lhs(j: u32, alpha: f64, tol: f64) -> Result<QuadResult<f64>> {
    check_alpha(alpha)?;
    alpha_lhs_log(j, alpha.ln(), tol)
}

pub fn alpha_rhs(j: u32, alpha: f64, tol: f64) -> Result<QuadResult<f64>> {
    check_alpha(alpha)?;
    alpha_rhs_log(j, alpha.ln(), tol)
}

/// Relative margin demanded of a certified shift.
pub const REQUIRED_MARGIN: f64 = 0.05;

/// A certified shift: the inequality `lhs ≤ rhs` with margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    pub j: u32,
    /// `ln α_j`.
    pub log_alpha: f64,
    /// `α_j = α_0 2^{-halvings}` with `α_0 = 1/(4j²)`.
    pub halvings: u64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs: f64,
    pub rhs_error: f64,
    /// `(rhs − lhs)/rhs`.
    pub margin: f64,
    pub quad_tol: f64,
}

impl AlphaCertificate {
    /// `α_j` as a double; 0 when it underflows.
    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// Whether the stored values meet the margin rule.
    pub fn passes(&self) -> bool {
        let gap = self.rhs - self.lhs;
        gap >= REQUIRED_MARGIN * self.rhs && gap > self.lhs_error + self.rhs_error
    }

    fn holds(lhs: &QuadResult<f64>, rhs: &QuadResult<f64>) -> bool {
        let gap = rhs.value - lhs.value;
        gap >= REQUIRED_MARGIN * rhs.value && gap > lhs.error_estimate + rhs.error_estimate
    }

    /// Recomputes both sides and checks the margin again.
    pub fn revalidate(&self) -> Result<()> {
        let lhs = alpha_lhs_log(self.j, self.log_alpha, self.quad_tol)?;
        let rhs = alpha_rhs_log(self.j, self.log_alpha, self.quad_tol)?;
        if !Self::holds(&lhs, &rhs) {
            return Err(Error::StaleCertificate {
                j: self.j,
                margin: (rhs.value - lhs.value) / rhs.value,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and revalidates.
    pub fn from_json(s: &str) -> Result<Self> {
        let c: AlphaCertificate = serde_json::from_str(s)?;
        c.revalidate()?;
        Ok(c)
    }
}

/// Halving count beyond which the search gives up.
const MAX_HALVINGS: u64 = 1 << 40;

/// Smallest halving count of `α_0 = 1/(4j²)` whose shift satisfies the
/// inequality with [`REQUIRED_MARGIN`] and beyond the quadrature errors.
pub fn alpha_bisect(j: u32, tol: f64) -> Result<AlphaCertificate> {
    check_j(j)?;
    let jf = j as f64;
    let log_alpha0 = -(4.0 * jf * jf).ln();
    let eval = |n: u64| -> Result<(QuadResult<f64>, QuadResult<f64>, f64)> {
        let la = log_alpha0 - n as f64 * LN_2;
        Ok((alpha_lhs_log(j, la, tol)?, alpha_rhs_log(j, la, tol)?, la))
    };
    let ok = |n: u64| -> Result<bool> {
        let (l, r, _) = eval(n)?;
        Ok(AlphaCertificate::holds(&l, &r))
    };
    // grow the halving count geometrically, then bisect back
    let (mut lo, mut hi) = (0u64, 0u64);
    if !ok(0)? {
        hi = 1;
        while !ok(hi)? {
            lo = hi;
            hi *= 2;
            if hi > MAX_HALVINGS {
                return Err(Error::AlphaSearchFailed { j, halvings: hi });
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let (l, r, la) = eval(hi)?;
    Ok(AlphaCertificate {
        j,
        log_alpha: la,
        halvings: hi,
        lhs: l.value,
        lhs_error: l.error_estimate,
        rhs: r.value,
        rhs_error: r.error_estimate,
        margin: (r.value - l.value) / r.value,
        quad_tol: tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub j: u32,
    pub log_alpha: f64,
    pub cutoff: CutoffSpec,
    pub bump: Bump,
}

impl WitnessSpec {
    pub fn new(j: u32, log_alpha: f64, bump: Bump) -> Self {
        WitnessSpec {
            j,
            log_alpha,
            cutoff: CutoffSpec::new(j),
            bump,
        }
    }

    pub fn from_certificate(c: &AlphaCertificate) -> Self {
        WitnessSpec::new(c.j, c.log_alpha, default_bump())
    }

    /// `g_j(z) = χ_j(|z|²)/(z − iα)`.
    pub fn g(&self, z: Complex64) -> Complex64 {
        let c = chi(&self.cutoff, z.norm_sqr());
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        c / (z - shift(self.log_alpha))
    }

    /// `∂g_j/∂z̄ = χ_j'(|z|²) z/(z − iα)`.
    pub fn dg_dzbar(&self, z: Complex64) -> Complex64 {
        let c = chi_prime(&self.cutoff, z.norm_sqr());
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        c * z / (z - shift(self.log_alpha))
    }

    /// Samples `φ_j` on a product grid.
    pub fn sample_product(&self, grid: &ProductGrid) -> SeparableForm {
        SeparableForm::sample(grid, |z| self.bump.value(z), |z| self.g(z))
    }

    /// Samples `φ_j` on a dense grid.
    pub fn sample_dense(&self, grid: &GridDomain) -> FormField01 {
        FormField01::sample(grid, |p| {
            let v = self.bump.value(Complex64::new(p[0], p[1])) * self.g(Complex64::new(p[2], p[3]));
            (v, Complex64::new(0.0, 0.0))
        })
    }
}

/// `(φ's dz̄1 component, (0,2) component of ∂̄φ, ∂̄*φ)` at `(z1, z2)`.
pub fn witness_eval(spec: &WitnessSpec, z1: Complex64, z2: Complex64) -> (Complex64, Complex64, Complex64) {
    let f = spec.bump.value(z1);
    let g = spec.g(z2);
    (f * g, -f * spec.dg_dzbar(z2), -g * spec.bump.d_dz(z1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessQuotient {
    pub j: u32,
    /// `R_j`.
    pub r: f64,
    /// `‖∂g/∂z̄‖²` over `H_j`.
    pub dbar_term: f64,
    /// `‖g‖²` over `H_j`.
    pub g_norm_sqr: f64,
    pub c_f: f64,
    /// Propagated quadrature error of `R_j`.
    pub error: f64,
}

impl WitnessQuotient {
    /// `1/j² + C_f`.
    pub fn bound(&self) -> f64 {
        1.0 / (self.j as f64).powi(2) + self.c_f
    }
}

/// `R_j = ‖∂g/∂z̄‖²/‖g‖² over H_j = {Im z < 0, |z| < 1/j}, plus C_f`.
pub fn witness_quotient(spec: &WitnessSpec, tol: f64) -> Result<WitnessQuotient> {
    check_j(spec.j)?;
    let cut = &spec.cutoff;
    let a = shift(spec.log_alpha);
    let o = opts(tol, spec.log_alpha);
    let num = integrate_real(
        &annulus(cut, HALF),
        |z| chi_prime(cut, z.norm_sqr()).powi(2) * z.norm_sqr() / (z - a).norm_sqr(),
        &o,
    )?;
    let outer = integrate_real(&annulus(cut, HALF), |z| chi(cut, z.norm_sqr()).powi(2) / (z - a).norm_sqr(), &o)?;
    let inner = plateau_integral(HALF, cut.plateau_radius(), spec.log_alpha, tol)?;
    let den = outer.value + inner.value;
    let c_f = if spec.bump == default_bump() {
        default_c_f()
    } else {
        spec.bump.c_f(1e-10)?
    };
    let ratio = num.value / den;
    let error = ratio * (num.error_estimate / num.value + (outer.error_estimate + inner.error_estimate) / den);
    Ok(WitnessQuotient {
        j: spec.j,
        r: ratio + c_f,
        dbar_term: num.value,
        g_norm_sqr: den,
        c_f,
        error,
    })
}

/// Per-`j` record for reuse across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub alpha: AlphaCertificate,
    pub quotient: WitnessQuotient,
}

impl WitnessCertificate {
    pub fn compute(j: u32, tol: f64) -> Result<Self> {
        let alpha = alpha_bisect(j, tol)?;
        let quotient = witness_quotient(&WitnessSpec::from_certificate(&alpha), tol)?;
        Ok(WitnessCertificate { alpha, quotient })
    }

    /// Parses and revalidates the stored shift.
    pub fn from_json(s: &str) -> Result<Self> {
        let c: WitnessCertificate = serde_json::from_str(s)?;
        c.alpha.revalidate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests;
