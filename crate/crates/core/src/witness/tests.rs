use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::quadrature::gauss_legendre;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn cutoff_plateau_and_support() {
    let s = CutoffSpec::new(2);
    assert_eq!(chi(&s, 0.0), 1.0);
    assert_eq!(chi(&s, 0.25), 0.0);
    assert_eq!(chi(&s, -0.25), 0.0);
    assert_eq!(chi(&s, 1.0 / 16.0), 1.0);
    assert!(chi(&s, 0.1) > 0.0 && chi(&s, 0.1) < 1.0);
}

#[test]
fn cutoff_derivative_matches_finite_differences() {
    let s = CutoffSpec::new(2);
    let d = 1e-7;
    for k in 0..100 {
        let t = -0.3 + 0.6 * (k as f64 + 0.5) / 100.0;
        let fd = (chi(&s, t + d) - chi(&s, t - d)) / (2.0 * d);
        assert!((fd - chi_prime(&s, t)).abs() < 1e-6 * (1.0 + fd.abs()), "t = {t}");
    }
}

proptest! {
    #[test]
    fn cutoff_is_even_and_bounded(j in 2u32..20, t in -1.0f64..1.0) {
        let s = CutoffSpec::new(j);
        prop_assert_eq!(chi(&s, t), chi(&s, -t));
        prop_assert!((0.0..=1.0).contains(&chi(&s, t)));
        prop_assert_eq!(chi_prime(&s, t), -chi_prime(&s, -t));
    }
}

#[test]
fn lhs_stays_bounded_as_shift_vanishes() {
    let a = alpha_lhs(2, 1e-3, 1e-8).unwrap().value;
    let b = alpha_lhs(2, 1e-4, 1e-8).unwrap().value;
    assert!((a - b).abs() <= 0.05 * a, "{a} {b}");
    assert!(a >= 0.0 && b >= 0.0);
}

#[test]
fn rhs_grows_as_shift_vanishes() {
    for alpha in [1e-2, 1e-3] {
        let big = alpha_rhs(2, alpha, 1e-8).unwrap().value;
        let small = alpha_rhs(2, alpha / 2.0, 1e-8).unwrap().value;
        assert!(small > big);
        assert!(big >= 0.0);
    }
}

#[test]
fn plateau_closed_form_matches_cubature() {
    for (alpha, theta) in [(0.05, W1), (0.01, HALF), (0.3, HALF)] {
        let rho = 0.25;
        let closed = plateau_integral(theta, rho, f64::ln(alpha), 1e-10).unwrap().value;
        let region = PlanarRegion::sector(rho, theta.0, theta.1);
        let o = QuadOptions::new(1e-10).with_hot_points(vec![c(0.0, alpha)]);
        let direct = integrate_real(&region, |z| 1.0 / (z - c(0.0, alpha)).norm_sqr(), &o).unwrap().value;
        assert!((closed - direct).abs() <= 1e-8 * direct, "α = {alpha}: {closed} vs {direct}");
    }
}

#[test]
fn bisection_certifies_with_margin() {
    for j in [2, 3] {
        let cert = alpha_bisect(j, 1e-8).unwrap();
        assert!(cert.margin >= REQUIRED_MARGIN);
        assert!(cert.rhs - cert.lhs > cert.lhs_error + cert.rhs_error);
        let alpha0 = 1.0 / (4.0 * (j * j) as f64);
        assert!(cert.log_alpha <= alpha0.ln());
        // the next halving down would not have sufficed: minimality
        if cert.halvings > 0 {
            let la = cert.log_alpha + LN_2;
            let l = alpha_lhs_log(j, la, 1e-8).unwrap();
            let r = alpha_rhs_log(j, la, 1e-8).unwrap();
            assert!(!AlphaCertificate::holds(&l, &r));
        }
        // still valid under a tighter tolerance
        let tight = AlphaCertificate { quad_tol: 1e-10, ..cert.clone() };
        tight.revalidate().unwrap();
    }
}

#[test]
fn certificate_round_trip_and_staleness() {
    let cert = alpha_bisect(2, 1e-8).unwrap();
    let back = AlphaCertificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert_eq!(back, cert);
    let stale = AlphaCertificate {
        log_alpha: (1.0f64 / 16.0).ln(),
        ..cert
    };
    let s = serde_json::to_string(&stale).unwrap();
    assert!(matches!(AlphaCertificate::from_json(&s), Err(Error::StaleCertificate { j: 2, .. })));
}

#[test]
fn rejects_small_index() {
    assert!(alpha_bisect(1, 1e-8).is_err());
}

fn moderate_spec() -> WitnessSpec {
    WitnessSpec::new(2, f64::ln(0.01), default_bump())
}

#[test]
fn witness_vanishes_on_plateau_and_outside_support() {
    let s = moderate_spec();
    let (_, d, _) = witness_eval(&s, c(0.1, 0.0), c(0.05, -0.1));
    assert_eq!(d, c(0.0, 0.0));
    let (a, b, e) = witness_eval(&s, c(0.7, 0.0), c(0.1, -0.3));
    assert_eq!((a, b, e), (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
    let (a, b, e) = witness_eval(&s, c(0.1, 0.1), c(0.0, -0.51));
    assert_eq!((a, b, e), (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
}

#[test]
fn witness_derivatives_match_finite_differences() {
    let s = moderate_spec();
    let (z1, z2) = (c(0.2, -0.1), c(0.15, -0.3));
    let fg = |a: Complex64, b: Complex64| s.bump.value(a) * s.g(b);
    let d = 1e-6;
    let dbar2 = 0.5 * ((fg(z1, z2 + d) - fg(z1, z2 - d)) + c(0.0, 1.0) * (fg(z1, z2 + c(0.0, d)) - fg(z1, z2 - c(0.0, d)))) / (2.0 * d);
    let f = |a: Complex64| s.bump.value(a);
    let d1 = 0.5 * ((f(z1 + d) - f(z1 - d)) - c(0.0, 1.0) * (f(z1 + c(0.0, d)) - f(z1 - c(0.0, d)))) / (2.0 * d);
    let (v, dv, sv) = witness_eval(&s, z1, z2);
    assert_eq!(v, fg(z1, z2));
    assert!((dv + dbar2).norm() < 1e-6 * (1.0 + dbar2.norm()), "{dv} vs {dbar2}");
    assert!((sv + s.g(z2) * d1).norm() < 1e-6 * (1.0 + sv.norm()));
}

#[test]
fn dbar_integrand_lives_on_the_annulus() {
    let s = moderate_spec();
    for k in 0..200 {
        let r = 0.6 * k as f64 / 200.0;
        let z = Complex64::from_polar(r, -1.0);
        let d = s.dg_dzbar(z);
        if r <= 0.25 || r >= 0.5 {
            assert_eq!(d, c(0.0, 0.0));
        }
    }
}

#[test]
fn default_bump_profile() {
    let b = default_bump();
    assert_eq!(b.value(c(0.0, 0.0)), c(1.0, 0.0));
    assert_eq!(b.value(c(2.0 / 3.0, 0.0)), c(0.0, 0.0));
    assert_eq!(b.value(c(0.5, 0.5)), c(0.0, 0.0));
    let a = b.c_f(1e-8).unwrap();
    let t = b.c_f(5e-9).unwrap();
    assert!((a - t).abs() < 1e-4);
    assert!((default_c_f() - a).abs() < 1e-4);
}

#[test]
fn quotient_respects_the_bound() {
    let cert = alpha_bisect(2, 1e-8).unwrap();
    let q = witness_quotient(&WitnessSpec::from_certificate(&cert), 1e-8).unwrap();
    assert!(q.r <= q.bound() + 1e-3, "{} > {}", q.r, q.bound());
}

#[test]
fn two_term_quotient_equals_product_ratio() {
    // a shift above the real axis keeps every integrand smooth enough for a
    // fixed tensor rule over the 4-D polar product
    let s = WitnessSpec::new(2, f64::ln(0.2), default_bump());
    let q = witness_quotient(&s, 1e-10).unwrap();
    let gl = gauss_legendre(48);
    let map = |x: f64, a: f64, b: f64| (0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a));
    let (mut num, mut den) = (0.0, 0.0);
    let rd = 2.0 / 3.0;
    let rs = s.cutoff.support_radius();
    // z1 over D1, z2 over H_j; the z1 angle is trivial for a radial bump but
    // is integrated anyway so the rule is genuinely four-dimensional
    for &(x1, w1) in &gl {
        let (r1, j1) = map(x1, 0.0, rd);
        for &(t1, v1) in gl.iter().step_by(6) {
            let (th1, k1) = map(t1, -PI, PI);
            let z1 = Complex64::from_polar(r1, th1);
            let (fv, fd) = (s.bump.value(z1).norm_sqr(), s.bump.d_dz(z1).norm_sqr());
            let wz1 = w1 * j1 * r1 * v1 * k1;
            for &(x2, w2) in &gl {
                let (r2, j2) = map(x2, 0.0, rs);
                for &(t2, v2) in &gl {
                    let (th2, k2) = map(t2, -PI, 0.0);
                    let z2 = Complex64::from_polar(r2, th2);
                    let w = wz1 * w2 * j2 * r2 * v2 * k2;
                    let g = s.g(z2).norm_sqr();
                    num += w * (fv * s.dg_dzbar(z2).norm_sqr() + fd * g);
                    den += w * fv * g;
                }
            }
        }
    }
    let direct = num / den;
    assert!((direct - q.r).abs() <= 1e-5 * q.r, "{direct} vs {}", q.r);
}
