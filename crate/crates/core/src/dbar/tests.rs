use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{
    build_grid, FlatPiece, GridDomain, ModelConstants, PlanarRegion, Point4, ProductDomain, ProductGrid,
    PseudoconvexModel, TracePolicy,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cube_grid(side: f64, h: f64) -> GridDomain {
    build_grid(&ProductDomain::cube(side), h).unwrap()
}

fn test_masks() -> Vec<GridDomain> {
    vec![
        cube_grid(1.0, 0.25),
        build_grid(&ModelConstants::default().omega(), 0.5).unwrap(),
        build_grid(&PseudoconvexModel { half_width: 0.75 }, 0.25)
            .unwrap()
            .with_policy(TracePolicy::all_dirichlet()),
    ]
}

fn node_at(grid: &GridDomain, p: Point4) -> usize {
    let g = std::array::from_fn(|a| (p[a] / grid.h()).round() as i64);
    grid.lattice.local(g).unwrap()
}

/// Mask nodes whose lattice neighbours within `depth` steps are all in the mask.
fn deep_nodes(grid: &GridDomain, depth: i64) -> Vec<usize> {
    grid.mask_nodes()
        .into_iter()
        .filter(|&i| {
            let g = grid.lattice.global(i);
            (0..4).all(|a| {
                (-depth..=depth).all(|d| {
                    let mut q = g;
                    q[a] += d;
                    grid.lattice.local(q).map(|j| grid.in_mask(j)).unwrap_or(false)
                })
            })
        })
        .collect()
}

#[test]
fn impulse_stencil() {
    let grid = cube_grid(2.0, 0.25);
    let h = grid.h();
    let p = node_at(&grid, [1.0; 4]);
    let mut u = ScalarField::zeros(&grid);
    u.values[p] = c(1.0, 0.0);
    let f = dbar0(&grid, &u);
    let s = grid.lattice.strides();
    // x- and y-arms of each component: +1/(2h) and +i/(2h) one step back,
    // -1/(2h) - i/(2h) at the node itself
    for (comp, (ax, ay)) in [(&f.f1, (0, 1)), (&f.f2, (2, 3))] {
        assert_eq!(comp.iter().filter(|v| **v != ZERO).count(), 3);
        assert!((comp[p - s[ax]] - c(0.5 / h, 0.0)).norm() < 1e-12);
        assert!((comp[p - s[ay]] - c(0.0, 0.5 / h)).norm() < 1e-12);
        assert!((comp[p] - c(-0.5 / h, -0.5 / h)).norm() < 1e-12);
    }
}

#[test]
fn conjugate_coordinate_and_holomorphic_samples() {
    let grid = cube_grid(2.0, 0.25);
    let zbar = dbar0(&grid, &ScalarField::sample(&grid, |p| c(p[0], -p[1])));
    let holo = dbar0(
        &grid,
        &ScalarField::sample(&grid, |p| c(p[0], p[1]) * c(p[2], p[3])),
    );
    for i in deep_nodes(&grid, 2) {
        assert!((zbar.f1[i] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(zbar.f2[i].norm() < 1e-12);
        assert!(holo.f1[i].norm() < 1e-12 && holo.f2[i].norm() < 1e-12);
    }
}

#[test]
fn conjugate_second_coordinate_gives_minus_one() {
    let grid = cube_grid(2.0, 0.25);
    let f = FormField01::sample(&grid, |p| (c(p[2], -p[3]), ZERO));
    let w = dbar1(&grid, &f);
    for i in deep_nodes(&grid, 2) {
        assert!((w.f12[i] + c(1.0, 0.0)).norm() < 1e-12);
    }
}

/// Independent node-by-node implementation of `dbar1` with zero extension
/// beyond the window and the flat-piece cut on the `y2` arm.
fn dbar1_oracle(grid: &GridDomain, f: &FormField01) -> Vec<Complex64> {
    let lat = &grid.lattice;
    let h = grid.h();
    let val = |v: &[Complex64], g: [i64; 4]| lat.local(g).map(|j| v[j]).unwrap_or(ZERO);
    (0..grid.len())
        .map(|i| {
            let g = lat.global(i);
            let step = |a: usize| {
                let mut q = g;
                q[a] += 1;
                q
            };
            let d = |v: &[Complex64], a: usize, free: bool| {
                if free && a == 3 && grid.cut()[i] {
                    ZERO
                } else {
                    (val(v, step(a)) - v[i]) / h
                }
            };
            let free1 = grid.policy.f1 == crate::geometry::FacePolicy::Free;
            let free2 = grid.policy.f2 == crate::geometry::FacePolicy::Free;
            let d1f2 = 0.5 * (d(&f.f2, 0, free2) + c(0.0, 1.0) * d(&f.f2, 1, free2));
            let d2f1 = 0.5 * (d(&f.f1, 2, free1) + c(0.0, 1.0) * d(&f.f1, 3, free1));
            d1f2 - d2f1
        })
        .collect()
}

#[test]
fn dbar1_matches_stencil_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for grid in test_masks() {
        let f = FormField01::random(&grid, &mut rng);
        let w = dbar1(&grid, &f);
        let o = dbar1_oracle(&grid, &f);
        for (a, b) in w.f12.iter().zip(&o) {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }
}

#[test]
fn adjoint_matrix_is_conjugate_transpose_on_toy_mask() {
    let grid = cube_grid(0.75, 0.25);
    assert_eq!(grid.node_count(), 16);
    let n = grid.len();
    let unit = |k: usize| {
        let mut v = vec![ZERO; n];
        v[k] = c(1.0, 0.0);
        v
    };
    let mask = grid.mask_nodes();
    // dbar0 column for scalar dof j, row for form entry (component, node)
    for &j in &mask {
        let col = dbar0(&grid, &ScalarField { values: unit(j) });
        for i in 0..n {
            for (comp, entry) in [(0, col.f1[i]), (1, col.f2[i])] {
                let w = if comp == 0 {
                    FormField01 { f1: unit(i), f2: vec![ZERO; n] }
                } else {
                    FormField01 { f1: vec![ZERO; n], f2: unit(i) }
                };
                let adj = dbar0_adjoint(&grid, &w).values[j];
                assert!((adj - entry.conj()).norm() < 1e-13);
            }
        }
    }
    let k1 = grid.mask_nodes();
    for &j in &k1 {
        let col = dbar1(&grid, &FormField01 { f1: unit(j), f2: vec![ZERO; n] });
        for i in 0..n {
            let adj = dbar1_adjoint(&grid, &FormField02 { f12: unit(i) }).f1[j];
            assert!((adj - col.f12[i].conj()).norm() < 1e-13);
        }
    }
}

#[test]
fn q_is_hermitian_psd_against_dense_assembly() {
    for grid in test_masks().into_iter().take(2) {
        let q = QOperator::new(&grid);
        if q.dim() > 1500 {
            continue;
        }
        let m = q.assemble_dense();
        let defect = (&m - m.adjoint()).norm();
        assert!(defect <= 1e-12 * m.norm(), "defect {defect}");
        let eig = nalgebra::SymmetricEigen::new((&m + m.adjoint()) * c(0.5, 0.0));
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12 * m.norm()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FormField01::random(&grid, &mut rng);
        let qa = q_apply(&grid, &f).inner(&f, &grid);
        assert!((qa.re - q_value(&grid, &f)).abs() <= 1e-12 * qa.norm());
        assert!(qa.im.abs() <= 1e-12 * qa.norm());
    }
}

#[test]
fn zero_form_has_zero_energy() {
    let grid = cube_grid(1.0, 0.25);
    assert_eq!(q_value(&grid, &FormField01::zeros(&grid)), 0.0);
    assert_eq!(sobolev_minus1(&grid, &ScalarField::zeros(&grid)).unwrap(), 0.0);
}

#[test]
fn interior_bump_energy_is_sum_of_component_derivatives() {
    let grid = cube_grid(2.0, 1.0 / 8.0);
    let bump = |p: &Point4| {
        let r2: f64 = p.iter().map(|x| (x - 1.0) * (x - 1.0)).sum();
        if r2 < 0.36 {
            c((1.0 - 1.0 / (1.0 - r2 / 0.36)).exp(), 0.3)
        } else {
            ZERO
        }
    };
    let f = FormField01::sample(&grid, |p| (bump(p), ZERO));
    let u = ScalarField { values: f.f1.clone() };
    let d = dbar0(&grid, &u);
    let w = grid.h().powi(4);
    let direct: f64 = d.f1.iter().chain(&d.f2).map(|v| v.norm_sqr()).sum::<f64>() * w;
    let q = q_value(&grid, &f);
    assert!((q - direct).abs() <= 1e-12 * direct, "{q} vs {direct}");
}

fn flat_box_grid(h: f64, policy: TracePolicy) -> GridDomain {
    let d = ProductDomain::with_flat_pieces(
        PlanarRegion::rect((-0.5, 0.5), (-0.5, 0.5)),
        PlanarRegion::rect((-0.5, 0.5), (-0.5, 0.0)),
        vec![FlatPiece { y2: 0.0, x2: (-0.5, 0.5) }],
    );
    build_grid(&d, h).unwrap().with_policy(policy)
}

fn tangential_form(grid: &GridDomain) -> FormField01 {
    FormField01::sample(grid, |p| {
        let s = |x: f64| (PI * x).cos().powi(2);
        let eta = (PI * (p[3] + 0.5)).sin().powi(2);
        (c(s(p[0]) * s(p[1]) * s(p[2]) * eta, 0.0), ZERO)
    })
}

#[test]
fn free_face_adds_no_penalty_dirichlet_face_does() {
    let quotient = |h: f64, p: TracePolicy| {
        let g = flat_box_grid(h, p);
        let f = tangential_form(&g);
        q_value(&g, &f) / f.norm_sqr(&g)
    };
    let free: Vec<f64> = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]
        .iter()
        .map(|&h| quotient(h, TracePolicy::flat_piece()))
        .collect();
    let dir: Vec<f64> = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]
        .iter()
        .map(|&h| quotient(h, TracePolicy::all_dirichlet()))
        .collect();
    for w in free.windows(2) {
        assert!(w[1] <= 1.1 * w[0], "free quotient grows: {free:?}");
    }
    // the face penalty is a jump of size O(1) over one layer: O(1/h) per node
    // layer of relative measure O(h), so the excess over the free value doubles
    let excess: Vec<f64> = dir.iter().zip(&free).map(|(d, f)| d - f).collect();
    for w in excess.windows(2) {
        assert!(w[1] >= 1.8 * w[0], "dirichlet penalty does not blow up: {dir:?} vs {free:?}");
    }
}

#[test]
fn minus1_norm_of_lowest_laplacian_mode() {
    // on the 4-cube, sin products are exact eigenvectors of the 9-point Laplacian
    let l = 1.0;
    let h = 1.0 / 6.0;
    let grid = cube_grid(l, h);
    let u = ScalarField::sample(&grid, |p| c(p.iter().map(|x| (PI * x / l).sin()).product(), 0.0));
    let mu = 4.0 * (2.0 - 2.0 * (PI * h / l).cos()) / (h * h);
    let norm = u.norm_sqr(&grid);
    let m1 = sobolev_minus1(&grid, &u).unwrap();
    assert!((m1 - norm / (1.0 + mu)).abs() <= 1e-8 * norm / (1.0 + mu));
}

#[test]
fn lowest_mode_eigenvalue_matches_dense_laplacian() {
    // dense oracle for the closed form used above, at a tiny size
    let grid = cube_grid(0.75, 0.25);
    let nodes = grid.mask_nodes();
    let n = nodes.len();
    let h = grid.h();
    let m = nalgebra::DMatrix::from_fn(n, n, |r, s| {
        let (a, b) = (grid.lattice.global(nodes[r]), grid.lattice.global(nodes[s]));
        let dist: i64 = (0..4).map(|k| (a[k] - b[k]).abs()).sum();
        match dist {
            0 => 8.0 / (h * h),
            1 => -1.0 / (h * h),
            _ => 0.0,
        }
    });
    let eig = nalgebra::SymmetricEigen::new(m);
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let closed = 4.0 * (2.0 - 2.0 * (PI * h / 0.75).cos()) / (h * h);
    assert!((lo - closed).abs() < 1e-9 * closed);
}

#[test]
fn product_split_matches_dense_q() {
    let pg = ProductGrid::build(&ModelConstants::default().omega(), 0.25).unwrap();
    let g = pg.to_dense().unwrap();
    let f = |z: Complex64| c((1.0 - z.norm_sqr() / 0.6).max(0.0), z.im);
    let gfn = |z: Complex64| c(z.re * z.im, 1.0 + z.re);
    let sep = SeparableForm::sample(&pg, f, gfn);
    let dense = FormField01::sample(&g, |p| (f(c(p[0], p[1])) * gfn(c(p[2], p[3])), ZERO));
    let (qs, qd) = (sep.q_value(&pg).unwrap(), q_value(&g, &dense));
    assert!((qs - qd).abs() <= 1e-10 * qd, "{qs} vs {qd}");
    assert!((sep.norm_sqr(&pg) - dense.norm_sqr(&g)).abs() <= 1e-12 * dense.norm_sqr(&g));
    let ms = sep.sobolev_minus1(&pg, 1e-11).unwrap();
    let md = sobolev_minus1_form(&g, &dense).unwrap();
    assert!((ms - md).abs() <= 1e-8 * md, "{ms} vs {md}");
}

#[test]
fn mismatched_policies_are_not_separable() {
    let pg = ProductGrid::build(&ModelConstants::default().omega(), 0.5)
        .unwrap()
        .with_policy(TracePolicy {
            scalar: crate::geometry::FacePolicy::Dirichlet,
            ..TracePolicy::flat_piece()
        });
    assert!(matches!(FactorSplit::new(&pg), Err(crate::Error::NotSeparable(_))));
}

#[test]
fn adjoint_apply_checks_grade() {
    let grid = cube_grid(1.0, 0.25);
    let u = Field::Scalar(ScalarField::zeros(&grid));
    assert!(adjoint_apply(&grid, Operator::Dbar0, &u).is_err());
    let f = Field::Form01(FormField01::zeros(&grid));
    assert!(matches!(adjoint_apply(&grid, Operator::Dbar0, &f), Ok(Field::Scalar(_))));
}

#[test]
fn dump_lists_nonzero_entries() {
    let grid = cube_grid(1.0, 0.25);
    let mut u = ScalarField::zeros(&grid);
    u.values[node_at(&grid, [0.5; 4])] = c(1.0, -2.0);
    let mut out = Vec::new();
    write_dump(&mut out, &Field::Scalar(u)).unwrap();
    let s = String::from_utf8(out).unwrap();
    assert_eq!(s.lines().count(), 1);
    assert!(s.contains(" 0 1.00000000000000000e0 -2.00000000000000000e0"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn adjoint_identities_hold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for grid in test_masks() {
            let u = ScalarField::random(&grid, &mut rng);
            let v = FormField01::random(&grid, &mut rng);
            // arbitrary window-valued test field for the image side
            let mut w = FormField01::zeros(&grid);
            for i in 0..grid.len() {
                w.f1[i] = v.f1[i] + c(0.1 * i as f64 % 1.0, 0.0);
                w.f2[i] = v.f2[i] - c(0.0, 0.3 * (i % 7) as f64);
            }
            let lhs = dbar0(&grid, &u).inner(&w, &grid);
            let rhs = u.inner(&dbar0_adjoint(&grid, &w), &grid);
            let scale = u.norm_sqr(&grid).sqrt() * w.norm_sqr(&grid).sqrt();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);

            let z = FormField02::random(&grid, &mut rng);
            let lhs = dbar1(&grid, &v).inner(&z, &grid);
            let rhs = v.inner(&dbar1_adjoint(&grid, &z), &grid);
            let scale = v.norm_sqr(&grid).sqrt() * z.norm_sqr(&grid).sqrt();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn dbar_squared_vanishes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for grid in test_masks() {
            let u = ScalarField::random(&grid, &mut rng);
            let f = dbar0(&grid, &u);
            let w = dbar1(&grid, &f);
            let scale = u.norm_sqr(&grid).sqrt() / grid.h().powi(2);
            prop_assert!(w.norm_sqr(&grid).sqrt() <= 1e-14 * scale);
        }
    }

    #[test]
    fn minus1_norm_is_bounded_by_l2(seed in any::<u64>()) {
        let grid = cube_grid(1.0, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = ScalarField::random(&grid, &mut rng);
        let m = sobolev_minus1(&grid, &u).unwrap();
        prop_assert!(m >= 0.0 && m <= u.norm_sqr(&grid) * (1.0 + 1e-10));
    }
}
