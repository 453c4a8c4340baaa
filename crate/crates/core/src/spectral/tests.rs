use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::bundles::BundleWithConnection;
use crate::graded::{circle_distance, GradedForm, Grid, Numerics, StructuredManifold};
use crate::linalg::c;

fn circle(length: f64, n: usize) -> Arc<Grid> {
    Grid::new(&StructuredManifold::circle(length), Numerics::uniform(n, 8, 8)).unwrap()
}

fn three_torus(n: usize) -> Arc<Grid> {
    Grid::new(&StructuredManifold::torus(&[1.0, 1.0, 1.0]), Numerics::uniform(n, 8, 8)).unwrap()
}

fn eta_bar(theta: f64) -> f64 {
    reduced_eta(&SpectralModel::circle(1.0, theta).unwrap()).unwrap().value
}

/// `u^-1 f(x) dx` on a 1-torus.
fn circle_one_form(g: &Arc<Grid>, a: f64, b: f64) -> GradedForm {
    GradedForm::from_fn(g, -2, 0b1, |_, x| c(a + b * (2.0 * PI * x[0]).cos(), 0.0)).unwrap()
}

#[test]
fn circle_spectrum_examples() {
    let s0 = circle_spectrum(&SpectralModel::circle(2.0, 0.0).unwrap()).unwrap();
    assert_eq!(s0.kernel_dim(), 1);
    assert_eq!(s0.lowest(1), vec![0.0]);
    let s_half = circle_spectrum(&SpectralModel::circle(2.0, 0.5).unwrap()).unwrap();
    assert!(s_half.is_symmetric());
    assert_eq!(s_half.kernel_dim(), 0);
    let low = s_half.lowest(4);
    assert!((low[0] + low[1]).abs() < 1e-15 && (low[2] + low[3]).abs() < 1e-15);
    let s_q = circle_spectrum(&SpectralModel::circle(2.0, 0.25).unwrap()).unwrap();
    assert!((s_q.lowest(1)[0] - PI / 4.0).abs() < 1e-15);
    assert!(!s_q.is_symmetric());
    assert!(circle_spectrum(&SpectralModel::new(&StructuredManifold::torus(&[1.0, 1.0]), &[0.0, 0.0], None).unwrap())
        .is_err());
}

#[test]
fn model_validation() {
    let t3 = StructuredManifold::torus(&[1.0, 1.0, 1.0]);
    assert!(SpectralModel::new(&t3, &[0.0; 3], Some(1)).is_err());
    assert!(SpectralModel::new(&t3, &[0.0; 2], None).is_err());
    assert!(SpectralModel::new(&StructuredManifold::sphere(1.0), &[0.0, 0.0], None).is_err());
    let m = SpectralModel::circle(1.0, 1.25).unwrap();
    assert!((m.twist()[0] - 0.25).abs() < 1e-15);
    assert!(reduced_eta(&SpectralModel::new(&StructuredManifold::torus(&[1.0; 5]), &[0.1; 5], None).unwrap()).is_err());
}

#[test]
fn reduced_eta_examples() {
    let e0 = reduced_eta(&SpectralModel::circle(1.0, 0.0).unwrap()).unwrap();
    assert_eq!(e0.u_power, -1);
    assert!((e0.value - 0.5).abs() < 1e-15);
    assert!(circle_distance(eta_bar(0.5), 0.0) < 1e-15);
    // zeta oracle at theta = 1/4, for two circle lengths
    for length in [1.0, 3.0] {
        let z = circle_eta_zeta(0.25, length, 0.0).unwrap();
        let e = reduced_eta(&SpectralModel::circle(length, 0.25).unwrap()).unwrap();
        assert!(circle_distance(e.value, z / 2.0) < 1e-8);
        assert!(circle_distance(e.value, 0.25) < 1e-8);
    }
}

#[test]
fn closed_form_matches_both_oracles_on_97_points() {
    for k in 0..97 {
        let t = k as f64 / 97.0;
        let kernel = if k == 0 { 1.0 } else { 0.0 };
        let z = (circle_eta_zeta(t, 1.0, 0.0).unwrap() + kernel) / 2.0;
        let r = (circle_eta_richardson(t) + kernel) / 2.0;
        assert!(circle_distance(eta_bar(t), z) < 1e-8, "zeta at {t}");
        assert!(circle_distance(eta_bar(t), r) < 1e-8, "regulated at {t}");
    }
}

#[test]
fn spin_offset_shifts_the_twist() {
    let m = SpectralModel::circle(1.0, 0.0).unwrap().with_spin(&[0.5]).unwrap();
    assert!(circle_distance(reduced_eta(&m).unwrap().value, 0.0) < 1e-15);
    let g = circle(1.0, 16);
    let x = DKClassEven::from_bundle(BundleWithConnection::trivial(&g, 1).unwrap(), 0).unwrap();
    assert!(circle_distance(eta_class(&x, &[]).unwrap().value, 0.5) < 1e-12);
    assert!(circle_distance(eta_class(&x, &[0.5]).unwrap().value, 0.0) < 1e-12);
    assert!(eta_class(&x, &[0.3]).is_err());
}

#[test]
fn three_torus_flat_eta_vanishes() {
    let t3 = StructuredManifold::torus(&[1.0, 2.0, 1.5]);
    for theta in [[0.0, 0.0, 0.0], [0.2, 0.7, 0.4], [0.0, 0.0, 0.3], [0.5, 0.0, 0.0]] {
        let e = reduced_eta(&SpectralModel::new(&t3, &theta, None).unwrap()).unwrap();
        assert_eq!(e.u_power, -2);
        assert!(circle_distance(e.value, 0.0) < 1e-15, "{theta:?}");
    }
}

#[test]
fn torus_kernel_dims_match_the_landau_oracle() {
    let t2 = StructuredManifold::torus(&[1.0, 1.0]);
    for n in [1, -2, 3, -1] {
        let m = SpectralModel::new(&t2, &[0.0, 0.0], Some(n)).unwrap();
        let closed = torus_kernel_dim(&m).unwrap();
        assert_eq!(closed, landau_kernel_dim(n, 64).unwrap(), "flux {n}");
        assert_eq!(closed.0 as i64 - closed.1 as i64, n);
    }
    let flat = SpectralModel::new(&t2, &[1.0 / 3.0, 1.0 / 3.0], None).unwrap();
    assert_eq!(torus_kernel_dim(&flat).unwrap(), (0, 0));
    assert_eq!(torus_kernel_dim(&SpectralModel::new(&t2, &[0.0, 0.0], None).unwrap()).unwrap(), (1, 1));
    assert!(landau_kernel_dim(0, 64).is_err());
}

#[test]
fn kernel_index_equals_chern_flux() {
    let g = Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), Numerics::uniform(12, 8, 8)).unwrap();
    for n in -3..=3i64 {
        let p = BundleWithConnection::poincare(&g, n).unwrap();
        let c1 = crate::charforms::c1_form(&p).unwrap();
        let flux = ReferenceCycle::new(g.manifold(), &[0, 1]).unwrap().period(&c1).unwrap().real_coeff(-2);
        let flux_model = if n == 0 { None } else { Some(n) };
        let twist = if n == 0 { [0.3, 0.1] } else { [0.0, 0.0] };
        let k = torus_kernel_dim(&SpectralModel::new(g.manifold(), &twist, flux_model).unwrap()).unwrap();
        assert_eq!(k.0 as i64 - k.1 as i64, flux.round() as i64);
        assert!((flux - flux.round()).abs() < 1e-10);
    }
}

#[test]
fn eta_class_examples() {
    let g = circle(1.0, 24);
    let phi = circle_one_form(&g, 0.37, 0.4);
    let e = eta_class(&DKClassEven::j(&phi).unwrap(), &[]).unwrap();
    assert_eq!(e.u_power, -1);
    assert!(circle_distance(e.value, 0.37) < 1e-12);
    let x = DKClassEven::from_bundle(BundleWithConnection::flat_line(&g, &[0.25]).unwrap(), 0).unwrap();
    assert!(circle_distance(eta_class(&x, &[]).unwrap().value, 0.25) < 1e-8);
    // graded: L(a) - L(b)
    let a = BundleWithConnection::flat_line(&g, &[0.1]).unwrap();
    let b = BundleWithConnection::flat_line(&g, &[0.35]).unwrap();
    let diff = DKClassEven::from_bundle(a.direct_sum(&b.opposite().unwrap()).unwrap(), 0).unwrap();
    let expect = eta_bar(0.1) - eta_bar(0.35);
    assert!(circle_distance(eta_class(&diff, &[]).unwrap().value, expect) < 1e-9);
    // rank two with integer coefficient
    let sum = DKClassEven::generator(a.direct_sum(&b).unwrap(), phi.clone(), 0).unwrap().scale(3);
    let expect = 3.0 * (eta_bar(0.1) + eta_bar(0.35) + 0.37);
    assert!(circle_distance(eta_class(&sum, &[]).unwrap().value, expect) < 1e-9);
}

#[test]
fn eta_class_rejects_curved_bundles() {
    let g = circle(1.0, 16);
    let x = DKClassEven::from_bundle(BundleWithConnection::trivial(&g, 1).unwrap(), 0).unwrap();
    assert!(eta_class(&x, &[]).is_ok());
    let s = Grid::new(&StructuredManifold::sphere(1.0), Numerics::uniform(8, 8, 8)).unwrap();
    let y = DKClassEven::from_bundle(BundleWithConnection::trivial(&s, 1).unwrap(), 0).unwrap();
    assert!(eta_class(&y, &[]).is_err());
    let t2 = Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), Numerics::uniform(8, 8, 8)).unwrap();
    let z = DKClassEven::from_bundle(BundleWithConnection::trivial(&t2, 1).unwrap(), 0).unwrap();
    assert!(eta_class(&z, &[]).is_err());
}

#[test]
fn eta_class_is_invariant_under_the_split_relation() {
    let g = circle(1.0, 24);
    for (t, t2) in [(0.2, 0.65), (0.8, 0.1), (0.0, 0.45)] {
        let l = BundleWithConnection::flat_line(&g, &[t]).unwrap();
        let l2 = BundleWithConnection::flat_line(&g, &[t2]).unwrap();
        let empty = BundleWithConnection::trivial(&g, 0).unwrap();
        let x = DKClassEven::generator(l, circle_one_form(&g, 0.1, 0.3), 0).unwrap();
        let y = x.rewrite_split(0, &empty, &l2, &circle_one_form(&g, -0.4, 0.2)).unwrap();
        assert_eq!(y.generators().len(), 2);
        let ex = eta_class(&x, &[]).unwrap();
        let ey = eta_class(&y, &[]).unwrap();
        assert!(ex.distance(&ey) < 1e-7, "{t} -> {t2}: {ex:?} vs {ey:?}");
    }
}

#[test]
fn three_torus_product_twist() {
    let g = three_torus(8);
    let t2 = Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), Numerics::uniform(8, 8, 8)).unwrap();
    let s1 = circle(1.0, 8);
    for (n, theta) in [(1i64, 0.3), (2, 0.15), (-1, 0.0)] {
        let p = BundleWithConnection::poincare(&t2, n).unwrap().pullback(&g, &[0, 1]).unwrap();
        let l = BundleWithConnection::flat_line(&s1, &[theta]).unwrap().pullback(&g, &[2]).unwrap();
        let x = DKClassEven::from_bundle(p.tensor(&l).unwrap(), 0).unwrap();
        let e = eta_class(&x, &[]).unwrap();
        assert_eq!(e.u_power, -2);
        assert!(circle_distance(e.value, n as f64 * eta_bar(theta)) < 1e-8, "flux {n}, theta {theta}: {e:?}");
    }
    let flat = BundleWithConnection::flat_line(&g, &[0.2, 0.4, 0.7]).unwrap();
    let x = DKClassEven::from_bundle(flat, 0).unwrap();
    assert!(circle_distance(eta_class(&x, &[]).unwrap().value, 0.0) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection(t in 0.001f64..0.999) {
        prop_assert!(circle_distance(eta_bar(t) + eta_bar(1.0 - t), 0.0) < 1e-8);
    }

    #[test]
    fn variation_is_minus_delta(t in 0.01f64..0.9, d in 0.0f64..0.08) {
        prop_assert!(circle_distance(eta_bar(t + d) - eta_bar(t), -d) < 1e-6);
    }

    #[test]
    fn zeta_continuation_is_smooth(t in 0.05f64..0.95, s in -0.3f64..0.3) {
        // small-s values approach eta(0) linearly
        let e0 = circle_eta_zeta(t, 1.0, 0.0).unwrap();
        let es = circle_eta_zeta(t, 1.0, s).unwrap();
        prop_assert!((es - e0).abs() < 10.0 * s.abs() + 1e-12);
    }
}
