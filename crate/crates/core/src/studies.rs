//! Drivers for the standard experiments.
//!
//! Each driver is deterministic given its arguments and returns plain records;
//! the command-line runner and the acceptance suite both sit on top of these.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dbar::FormField01;
use crate::error::{Error, Result};
use crate::geometry::{
    build_grid, Ball4, GridDomain, ModelConstants, NeighborhoodFamily, PlanarRegion, Point4, ProductDomain,
    ProductGrid, PseudoconvexModel, Region4, TracePolicy,
};
use crate::mkh::{mkh_check, refinement_slack, MkhReport, WeightSpec};
use crate::quadrature::{integrate_real, QuadOptions};
use crate::spectral::{
    lambda_estimate, lambda_estimate_product, FactorSpectrum, LambdaReport, ProbeEntry, SolverOptions,
};
use crate::witness::{WitnessCertificate, WitnessSpec};

/// Allowance on `R_j ≤ 1/j² + C_f`.
pub const BOUND_SLACK: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscRow {
    pub certificate: WitnessCertificate,
    pub witness_bound: f64,
    pub pass: bool,
}

/// Certifies the shift for `j` and evaluates the witness quotient.
pub fn disc_example(j: u32, quad_tol: f64) -> Result<DiscRow> {
    let certificate = WitnessCertificate::compute(j, quad_tol)?;
    let q = &certificate.quotient;
    let witness_bound = q.bound();
    Ok(DiscRow {
        pass: certificate.alpha.passes() && q.r <= witness_bound + BOUND_SLACK,
        certificate,
        witness_bound,
    })
}

/// Lattice points per `z2` radius of a neighbourhood.
pub const POINTS_PER_RADIUS: f64 = 16.0;

/// `z1` spacing on `U_j` grids; the `z1` factor stays at unit scale for all `j`.
pub const U_Z1_SPACING: f64 = 1.0 / 48.0;

/// `λ_h` on a neighbourhood, and the quotient of the sampled witness there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodLambda {
    pub report: LambdaReport,
    pub spectrum: FactorSpectrum,
    pub h1: f64,
    pub h2: f64,
    pub witness_quotient: f64,
}

impl NeighbourhoodLambda {
    /// Gap in the exact min property `λ_h ≤ q_h(φ)/‖φ‖²`; non-negative when it holds.
    pub fn min_gap(&self) -> f64 {
        self.witness_quotient - self.report.lambda
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub j: u32,
    /// On `U_j ∩ Ω`, with the witness truncated to that mask.
    pub u: NeighbourhoodLambda,
    /// On `V_j ∩ Ω`, which holds the whole witness support.
    pub v: NeighbourhoodLambda,
}

fn neighbourhood_lambda(
    omega: &ProductDomain,
    nb: &ProductDomain,
    name: &str,
    (h1, h2): (f64, f64),
    spec: &WitnessSpec,
    opts: &SolverOptions,
) -> Result<NeighbourhoodLambda> {
    let grid = ProductGrid::build_with_spacings(omega, h1, h2)?.with_policy(TracePolicy::flat_piece());
    let (report, spectrum) = lambda_estimate_product(&grid, nb, name, opts)?;
    let sub = grid.restrict(nb)?;
    let phi = spec.sample_product(&sub);
    let witness_quotient = phi.q_value(&sub)? / phi.norm_sqr(&sub);
    Ok(NeighbourhoodLambda {
        report,
        spectrum,
        h1,
        h2,
        witness_quotient,
    })
}

/// `λ_h(U_j)` and `λ_h(V_j)` on the model domain with the flat-piece policy.
///
/// `U_j` gets `z2` spacing `j^-2/16` and `z1` spacing [`U_Z1_SPACING`];
/// `V_j` gets `1/(16 j)` in both factors.
pub fn witness_transfer(cert: &WitnessCertificate, opts: &SolverOptions) -> Result<TransferRow> {
    let j = cert.alpha.j;
    let jf = j as f64;
    let omega = ModelConstants::default().omega();
    let spec = WitnessSpec::from_certificate(&cert.alpha);
    let hu = 1.0 / (POINTS_PER_RADIUS * jf * jf);
    let hv = 1.0 / (POINTS_PER_RADIUS * jf);
    let u = neighbourhood_lambda(
        &omega,
        &NeighborhoodFamily.neighborhood(j),
        &format!("U_{j}"),
        (U_Z1_SPACING, hu),
        &spec,
        opts,
    )?;
    let v = neighbourhood_lambda(
        &omega,
        &NeighborhoodFamily.witness_neighborhood(j),
        &format!("V_{j}"),
        (hv, hv),
        &spec,
        opts,
    )?;
    Ok(TransferRow { j, u, v })
}

/// Quotient of the sampled witness on `V_j ∩ Ω` at equal spacing `h`.
pub fn grid_witness_quotient(spec: &WitnessSpec, h: f64) -> Result<f64> {
    let omega = ModelConstants::default().omega();
    let grid = ProductGrid::build(&omega, h)?
        .with_policy(TracePolicy::flat_piece())
        .restrict(&NeighborhoodFamily.witness_neighborhood(spec.j))?;
    let phi = spec.sample_product(&grid);
    Ok(phi.q_value(&grid)? / phi.norm_sqr(&grid))
}

/// Half-width of the box around the strictly pseudoconvex model.
pub const MODEL_HALF_WIDTH: f64 = 1.0;

/// The part of the pseudoconvex model inside a ball, so that only the ball's
/// lattice window is built.
struct ModelNear {
    model: PseudoconvexModel,
    ball: Ball4,
}

impl Region4 for ModelNear {
    fn contains(&self, p: &Point4) -> bool {
        self.ball.contains(p) && self.model.contains(p)
    }

    fn bounding_box(&self) -> [(f64, f64); 4] {
        let (a, b) = (self.ball.bounding_box(), self.model.bounding_box());
        std::array::from_fn(|k| (a[k].0.max(b[k].0), a[k].1.min(b[k].1)))
    }

    fn crosses_flat(&self, p: &Point4, step: f64) -> bool {
        self.model.crosses_flat(p, step)
    }
}

/// `λ_h` of `{Im z2 < -|z1|²}` near the origin over balls of the given radii,
/// each at spacing `radius / points_per_radius`.
pub fn shrink_study(radii: &[f64], points_per_radius: f64, opts: &SolverOptions) -> Result<Vec<LambdaReport>> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("radius list is empty".into()));
    }
    let model = PseudoconvexModel {
        half_width: MODEL_HALF_WIDTH,
    };
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) || r >= MODEL_HALF_WIDTH {
                return Err(Error::InvalidParameter(format!("radius {r} outside (0, {MODEL_HALF_WIDTH})")));
            }
            let ball = Ball4 {
                center: [0.0; 4],
                radius: r,
            };
            let near = ModelNear { model, ball };
            let grid = build_grid(&near, r / points_per_radius)?.with_policy(TracePolicy::flat_piece());
            lambda_estimate(&grid, &ball, &format!("B(0,{r})"), opts)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorRow {
    pub report: LambdaReport,
    pub exact: f64,
    pub rel_error: f64,
}

/// `λ_h` of the cube `(0, side)^4` against `4π²/side² / 4 = π²/side²`.
pub fn cube_anchor(side: f64, hs: &[f64], opts: &SolverOptions) -> Result<Vec<AnchorRow>> {
    let exact = PI * PI / (side * side);
    let everything = Ball4 {
        center: [0.5 * side; 4],
        radius: 2.0 * side,
    };
    hs.iter()
        .map(|&h| {
            let grid = build_grid(&ProductDomain::cube(side), h)?;
            let report = lambda_estimate(&grid, &everything, "cube", opts)?;
            let rel_error = (report.lambda - exact).abs() / exact;
            Ok(AnchorRow {
                report,
                exact,
                rel_error,
            })
        })
        .collect()
}

/// Lattice spacing of the nested-pair base grid.
pub const NESTED_SPACING: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedPair {
    pub outer: LambdaReport,
    pub inner: LambdaReport,
}

impl NestedPair {
    /// `λ(V) − λ(U)`; non-negative up to solver tolerance.
    pub fn excess(&self) -> f64 {
        self.inner.lambda - self.outer.lambda
    }
}

fn random_ball(rng: &mut ChaCha8Rng) -> Ball4 {
    Ball4 {
        center: [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-0.4..0.4),
            rng.random_range(-0.5..0.0),
        ],
        radius: rng.random_range(0.5..0.8),
    }
}

/// Seeded balls `V ⊂ U` on the model domain and `λ` of both restrictions.
pub fn nested_pairs(count: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<NestedPair>> {
    let grid = build_grid(&ModelConstants::default().omega(), NESTED_SPACING)?.with_policy(TracePolicy::flat_piece());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = random_ball(&mut rng);
        let r = rng.random_range(0.5..0.9) * u.radius;
        let mut center = u.center;
        let room = u.radius - r;
        for c in center.iter_mut() {
            *c += rng.random_range(-0.5..0.5) * room;
        }
        let v = Ball4 { center, radius: r };
        // a draw whose inner ball misses every node is redrawn
        let inner = match lambda_estimate(&grid, &v, "V", opts) {
            Err(Error::EmptyIntersection) => continue,
            other => other?,
        };
        let outer = lambda_estimate(&grid, &u, "U", opts)?;
        out.push(NestedPair { outer, inner });
    }
    Ok(out)
}

/// `R²` of the weight `|z|² − R²`: the model domain lies in `|z|² < 4 + 1`.
pub const MKH_RADIUS_SQR: f64 = 5.0;

/// Support radius of the random forms of the inequality suite.
pub const MKH_SUPPORT: f64 = 0.45;

/// One seeded smooth form, compactly supported in a ball inside the model domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothForm {
    pub support: Ball4,
    /// Per component, `(coefficient, wave vector)` terms.
    pub modes: [Vec<(Complex64, Point4)>; 2],
}

impl SmoothForm {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let r1 = rng.random_range(0.0..1.2);
        let t1 = rng.random_range(0.0..2.0 * PI);
        let center = [r1 * t1.cos(), r1 * t1.sin(), rng.random_range(-0.2..0.2), -0.5];
        let mode = |rng: &mut ChaCha8Rng| {
            let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let k = [(); 4].map(|_| rng.random_range(-3.0..3.0));
            (c, k)
        };
        let modes = [(0..3).map(|_| mode(rng)).collect(), (0..3).map(|_| mode(rng)).collect()];
        SmoothForm {
            support: Ball4 {
                center,
                radius: MKH_SUPPORT,
            },
            modes,
        }
    }

    pub fn eval(&self, p: &Point4) -> (Complex64, Complex64) {
        let s: f64 = p
            .iter()
            .zip(&self.support.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (self.support.radius * self.support.radius);
        if s >= 1.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let bump = (1.0 - 1.0 / (1.0 - s)).exp();
        let wave = |terms: &[(Complex64, Point4)]| -> Complex64 {
            terms
                .iter()
                .map(|(c, k)| c * Complex64::from_polar(1.0, k.iter().zip(p).map(|(a, b)| a * b).sum()))
                .sum()
        };
        (bump * wave(&self.modes[0]), bump * wave(&self.modes[1]))
    }

    /// Samples the form on its own support grid at spacing `h`.
    pub fn sample(&self, h: f64) -> Result<(GridDomain, FormField01)> {
        let grid = build_grid(&self.support, h)?;
        let u = FormField01::sample(&grid, |p| self.eval(p));
        Ok((grid, u))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MkhLevel {
    pub h: f64,
    pub reports: Vec<MkhReport>,
}

impl MkhLevel {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| !r.pass).count()
    }

    /// Largest `lhs − rhs` relative to `‖u‖² + rhs`, zero when no form violates.
    pub fn max_violation(&self) -> f64 {
        self.reports.iter().map(|r| r.violation()).fold(0.0, f64::max)
    }
}

/// The weighted inequality with `b = |z|² − R²` on `count` seeded forms, per spacing.
pub fn mkh_suite(hs: &[f64], count: usize, seed: u64, c: f64) -> Result<Vec<MkhLevel>> {
    let w = WeightSpec::ball(MKH_RADIUS_SQR.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms: Vec<SmoothForm> = (0..count).map(|_| SmoothForm::random(&mut rng)).collect();
    hs.iter()
        .map(|&h| {
            let reports = forms
                .iter()
                .map(|f| {
                    let (grid, u) = f.sample(h)?;
                    let scale = u.norm_sqr(&grid) + crate::dbar::q_value(&grid, &u);
                    let r = mkh_check(&w, &u, &grid, refinement_slack(c, &grid, &u))?;
                    // normalised so levels compare
                    Ok(MkhReport {
                        lhs: r.lhs / scale,
                        rhs: r.rhs / scale,
                        slack: r.slack / scale,
                        pass: r.pass,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MkhLevel { h, reports })
        })
        .collect()
}

/// The inequality for the sampled witness `φ_j` on `V_j ∩ Ω` at spacing `h`.
pub fn mkh_witness(spec: &WitnessSpec, h: f64, c: f64) -> Result<MkhReport> {
    let grid = ProductGrid::build(&ModelConstants::default().omega(), h)?
        .with_policy(TracePolicy::flat_piece())
        .restrict(&NeighborhoodFamily.witness_neighborhood(spec.j))?
        .to_dense()?;
    let u = spec.sample_dense(&grid);
    let w = WeightSpec::ball(MKH_RADIUS_SQR.sqrt());
    mkh_check(&w, &u, &grid, refinement_slack(c, &grid, &u))
}

/// `z1` spacing of the probe grids; the bump factor is smooth at unit scale.
pub const PROBE_Z1_SPACING: f64 = 1.0 / 24.0;

/// Ledger of the sampled witnesses `φ_j` on `V_j ∩ Ω`, with `z2` spacing `1/(16 j)`.
pub fn witness_ledger(certs: &[WitnessCertificate]) -> Result<Vec<ProbeEntry>> {
    let omega = ModelConstants::default().omega();
    certs
        .iter()
        .map(|c| {
            let j = c.alpha.j;
            let h2 = 1.0 / (POINTS_PER_RADIUS * j as f64);
            let grid = ProductGrid::build_with_spacings(&omega, PROBE_Z1_SPACING, h2)?
                .with_policy(TracePolicy::flat_piece())
                .restrict(&NeighborhoodFamily.witness_neighborhood(j))?;
            let phi = WitnessSpec::from_certificate(&c.alpha).sample_product(&grid);
            ProbeEntry::measure_separable(&grid, &phi)
        })
        .collect()
}

/// `ε = 1/(16 M)` with `M` the largest witness quotient.
pub fn probe_epsilon(certs: &[WitnessCertificate]) -> f64 {
    let m = certs.iter().map(|c| c.quotient.r).fold(0.0, f64::max);
    1.0 / (16.0 * m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadAnchor {
    pub name: String,
    pub value: f64,
    pub exact: f64,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl QuadAnchor {
    pub fn pass(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

/// Areas and log-divergent integrals with closed forms.
pub fn quadrature_anchors(tol: f64) -> Result<Vec<QuadAnchor>> {
    let origin = vec![Complex64::new(0.0, 0.0)];
    let inv_sqr = |z: Complex64| 1.0 / z.norm_sqr();
    let delta: f64 = 1e-4;
    let log = (1.0 / delta).ln();
    let cases: Vec<(&str, PlanarRegion, Box<dyn Fn(Complex64) -> f64>, f64)> = vec![
        ("disc area r=0.7", PlanarRegion::centered_disc(0.7), Box::new(|_| 1.0), PI * 0.49),
        ("sector area", PlanarRegion::sector(0.5, -2.0 * PI / 3.0, -PI / 3.0), Box::new(|_| 1.0), PI / 24.0),
        ("half-disc area", PlanarRegion::lower_half_disc(1.0), Box::new(|_| 1.0), PI / 2.0),
        ("1/|z|^2 on annulus", PlanarRegion::annular_sector(delta, 1.0, -PI, PI), Box::new(inv_sqr), 2.0 * PI * log),
        (
            "1/|z|^2 on half annulus",
            PlanarRegion::annular_sector(delta, 1.0, -PI, 0.0),
            Box::new(inv_sqr),
            PI * log,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, region, f, exact)| {
            let opts = QuadOptions::new(tol).with_hot_points(origin.clone());
            let r = integrate_real(&region, |z| f(z), &opts)?;
            Ok(QuadAnchor {
                name: name.to_string(),
                value: r.value,
                exact,
                rel_error: (r.value - exact).abs() / exact,
                tolerance: 1e-6,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region4;

    #[test]
    fn smooth_forms_sit_inside_the_model() {
        let omega = ModelConstants::default().omega();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let f = SmoothForm::random(&mut rng);
            let (grid, u) = f.sample(0.25).unwrap();
            for i in grid.mask_nodes() {
                let p = grid.lattice.coord(i);
                assert!(omega.contains(&p));
                let r2: f64 = p.iter().map(|x| x * x).sum();
                assert!(r2 < MKH_RADIUS_SQR);
            }
            assert!(u.norm_sqr(&grid) > 0.0);
        }
    }

    #[test]
    fn nested_pairs_are_reproducible() {
        let o = SolverOptions::default();
        let a = nested_pairs(2, 9, &o).unwrap();
        let b = nested_pairs(2, 9, &o).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.excess() >= -2.0 * o.tol));
    }

    #[test]
    fn bad_radii_are_rejected() {
        let o = SolverOptions::default();
        assert!(shrink_study(&[], 6.0, &o).is_err());
        assert!(shrink_study(&[1.5], 6.0, &o).is_err());
    }

    #[test]
    fn quadrature_anchor_table() {
        let rows = quadrature_anchors(1e-8).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.pass()), "{rows:?}");
    }

    #[test]
    fn probe_epsilon_uses_largest_quotient() {
        let a = disc_example(2, 1e-8).unwrap().certificate;
        let b = disc_example(4, 1e-8).unwrap().certificate;
        let eps = probe_epsilon(&[a.clone(), b.clone()]);
        assert_eq!(eps, 1.0 / (16.0 * a.quotient.r.max(b.quotient.r)));
    }
}
