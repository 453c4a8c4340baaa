use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::bundles::{BundleWithConnection, ConnectionPath, TrigTerm};
use crate::graded::{Grid, Numerics, SlicePoint, StructuredManifold};
use crate::linalg::{zeros, CMat, MatForm};

fn torus(n: usize) -> Arc<Grid> {
    Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), Numerics::uniform(n, 8, 8)).unwrap()
}

fn sphere() -> Arc<Grid> {
    Grid::new(&StructuredManifold::sphere(1.0), Numerics::uniform(8, 16, 32)).unwrap()
}

fn herm(a: f64, b: f64, cc: f64, d: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, cc), c(b, -cc), c(d, 0.0)])
}

fn perturbed_rank2(g: &Arc<Grid>, s: f64) -> BundleWithConnection {
    let p = BundleWithConnection::poincare(g, 1).unwrap();
    let base = p.direct_sum(&BundleWithConnection::trivial(g, 1).unwrap()).unwrap();
    base.perturb_trig(vec![
        TrigTerm { coord: 0, freq: vec![0, 1], phase: 0.4, h: herm(0.3 * s, 0.5 * s, 0.2, -0.1) },
        TrigTerm { coord: 1, freq: vec![1, -1], phase: 1.1, h: herm(-0.2, 0.1, -0.4 * s, 0.6) },
    ])
    .unwrap()
}

/// Integral of the one-form part over the circle factor `keep`, with the other at node `j`.
fn loop_integral(f: &GradedForm, keep: usize, j: usize, u_degree: i32) -> f64 {
    let r = f.restrict(&[keep], &[SlicePoint::CircleNode(j)]).unwrap();
    r.integrate().unwrap().real_coeff(u_degree)
}

#[test]
fn trivial_and_flat_chern_forms() {
    let g = torus(8);
    let e = BundleWithConnection::trivial(&g, 3).unwrap();
    let w = chern_form(&e, 2).unwrap();
    assert_eq!(w.components().count(), 1);
    assert!((w.value(2, 0, 0, 5) - c(3.0, 0.0)).norm() < 1e-15);
    let l = BundleWithConnection::flat_line(&g, &[0.2, 0.7]).unwrap();
    let w = chern_form(&l, 0).unwrap();
    assert!(w.sub(&GradedForm::constant(&g, 0, c(1.0, 0.0))).unwrap().max_norm() < 1e-15);
    assert!(chern_form(&l, 1).is_err());
}

#[test]
fn monopole_flux_and_closedness() {
    let g = sphere();
    for n in [-2i64, 1, 3] {
        let e = BundleWithConnection::monopole(&g, n).unwrap();
        let w = chern_form(&e, 0).unwrap();
        let flux = w.integrate().unwrap().real_coeff(-2);
        assert!((flux - n as f64).abs() < 1e-8, "n = {n}: {flux}");
        assert!(w.d().max_norm() < 1e-6);
        w.assert_real().unwrap();
        let c1 = c1_form(&e).unwrap().integrate().unwrap().real_coeff(-2);
        assert!((c1 - n as f64).abs() < 1e-8);
    }
}

#[test]
fn c1_is_additive_and_vanishes_on_trivial() {
    let g = torus(12);
    assert!(c1_form(&BundleWithConnection::trivial(&g, 2).unwrap()).unwrap().max_norm() < 1e-15);
    let a = BundleWithConnection::poincare(&g, 2).unwrap();
    let b = BundleWithConnection::poincare(&g, -1)
        .unwrap()
        .perturb_trig(vec![TrigTerm { coord: 1, freq: vec![1, 0], phase: 0.0, h: CMat::from_element(1, 1, c(0.4, 0.0)) }])
        .unwrap();
    let sum = c1_form(&a).unwrap().add(&c1_form(&b).unwrap()).unwrap();
    let t = c1_form(&a.tensor(&b).unwrap()).unwrap();
    assert!(t.sub(&sum).unwrap().max_norm() < 1e-8);
}

#[test]
fn perturbed_monopole_keeps_its_period() {
    let g = sphere();
    let h: Vec<Vec<CMat>> = (0..3)
        .map(|a| (0..3).map(|b| CMat::from_element(1, 1, c(0.1 * (a as f64 - b as f64) + 0.05 * (a * b) as f64, 0.0))).collect())
        .collect();
    let e = BundleWithConnection::monopole(&g, 1).unwrap().perturb_ambient(0, h).unwrap();
    let w = chern_form(&e, 0).unwrap();
    assert!((w.integrate().unwrap().real_coeff(-2) - 1.0).abs() < 1e-6);
    assert!(w.chart_overlap_residual() < 1e-10);
}

#[test]
fn chern_form_is_multiplicative() {
    let g = torus(12);
    let a = perturbed_rank2(&g, 1.0);
    let b = BundleWithConnection::poincare(&g, -1).unwrap();
    let lhs = chern_form(&a.tensor(&b).unwrap(), 0).unwrap();
    let rhs = chern_form(&a, 0).unwrap().wedge(&chern_form(&b, 0).unwrap()).unwrap();
    assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-6);
}

#[test]
fn periods_are_integers() {
    let g = torus(16);
    let a = perturbed_rank2(&g, 0.7);
    let w = chern_form(&a, 0).unwrap();
    assert!(w.d().max_norm() < 1e-6);
    let p = w.integrate().unwrap().real_coeff(-2);
    assert!((p - 1.0).abs() < 1e-6, "{p}");
    let sg = sphere();
    let s = BundleWithConnection::monopole(&sg, 2).unwrap().direct_sum(&BundleWithConnection::monopole(&sg, -3).unwrap()).unwrap();
    let p = chern_form(&s, 0).unwrap().integrate().unwrap().real_coeff(-2);
    assert!((p + 1.0).abs() < 1e-6);
}

#[test]
fn a_hat_and_todd_on_surfaces() {
    let g = torus(8);
    let flat = SpinCStructure::standard(&g, false).unwrap();
    let one = GradedForm::constant(&g, 0, c(1.0, 0.0));
    assert!(a_hat_form(&flat.tangent).unwrap().sub(&one).unwrap().max_norm() < 1e-15);
    assert!(flat.todd().unwrap().sub(&one).unwrap().max_norm() < 1e-15);
    let sg = sphere();
    let round = SpinCStructure::standard(&sg, true).unwrap();
    let one_s = GradedForm::constant(&sg, 0, c(1.0, 0.0));
    assert!(a_hat_form(&round.tangent).unwrap().sub(&one_s).unwrap().max_norm() < 1e-15);
    assert!((round.todd_genus().unwrap() - 1.0).abs() < 1e-8);
    let spin = SpinCStructure::standard(&sg, false).unwrap();
    assert!(spin.todd_genus().unwrap().abs() < 1e-12);
    assert!(todd_form(&round.tangent, &round.tangent).is_err());
}

#[test]
fn a_hat_four_form_on_synthetic_block() {
    let m = StructuredManifold::torus(&[1.0; 4]);
    let g = Grid::new(&m, Numerics::uniform(4, 8, 8)).unwrap();
    let (a, b) = (0.7, -1.3);
    let j = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let mut omega = MatForm::zero(2);
    omega.add_comp(0b0011, &j * c(a, 0.0));
    omega.add_comp(0b1100, &j * c(b, 0.0));
    let w = constant_curvature_bundle(&g, vec![zeros(2); 4], omega, "block").unwrap();
    let ah = a_hat_form(&w).unwrap();
    let coeff = ah.value(-4, 0b1111, 0, 3).re;
    // theta / sin(theta) = 1 + theta^2 / 6 with theta = u^-1 (a dx01 + b dx23) / 2
    let series = (a * b / 12.0) * (-1.0 / (4.0 * PI * PI));
    let p1 = a * b / (2.0 * PI * PI);
    assert!((coeff - series).abs() < 1e-7);
    assert!((coeff + p1 / 24.0).abs() < 1e-7);
}

#[test]
fn cs_two_of_flat_lines_and_constant_path() {
    let g = Grid::new(&StructuredManifold::circle(1.0), Numerics::default()).unwrap();
    let (t0, t1) = (0.15, 0.6);
    let a = BundleWithConnection::flat_line(&g, &[t0]).unwrap();
    let b = BundleWithConnection::flat_line(&g, &[t1]).unwrap();
    let cs = cs_two(&ConnectionPath::new(a.clone(), b).unwrap(), 0).unwrap();
    let v = cs.integrate().unwrap().real_coeff(-2);
    assert!((v - (t1 - t0)).abs() < 1e-7, "{v}");
    let z = cs_two(&ConnectionPath::new(a.clone(), a).unwrap(), 0).unwrap();
    assert!(z.max_norm() < 1e-15);
}

#[test]
fn cs_two_transgresses_and_is_a_cocycle() {
    let g = torus(12);
    let e0 = perturbed_rank2(&g, 1.0);
    let e1 = perturbed_rank2(&g, -0.5);
    let e2 = perturbed_rank2(&g, 2.0);
    let cs01 = cs_two(&ConnectionPath::new(e0.clone(), e1.clone()).unwrap(), 0).unwrap();
    let diff = chern_form(&e0, 0).unwrap().sub(&chern_form(&e1, 0).unwrap()).unwrap();
    assert!(cs01.d().sub(&diff).unwrap().max_norm() < 1e-6);
    let cs02 = cs_two(&ConnectionPath::new(e0.clone(), e2.clone()).unwrap(), 0).unwrap();
    let cs12 = cs_two(&ConnectionPath::new(e1, e2).unwrap(), 0).unwrap();
    let cyc = cs02.sub(&cs01).unwrap().sub(&cs12).unwrap();
    for keep in 0..2 {
        for j in [0, 5] {
            assert!(loop_integral(&cyc, keep, j, -2).abs() < 1e-6);
        }
    }
}

#[test]
fn cs_three_examples() {
    let g = torus(12);
    let e1 = perturbed_rank2(&g, 0.3);
    let e3 = BundleWithConnection::poincare(&g, 1).unwrap();
    let sum = e1.direct_sum(&e3).unwrap();
    assert!(cs_three(&e1, &sum, &e3, 0).unwrap().max_norm() < 1e-14);
    // a 2 + 1 split with off-diagonal coupling
    let off = CMat::from_row_slice(3, 3, &[
        c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.2),
        c(0.0, 0.0), c(0.1, 0.0), c(-0.2, 0.0),
        c(0.3, -0.2), c(-0.2, 0.0), c(0.0, 0.0),
    ]);
    let e2 = sum.perturb_trig(vec![TrigTerm { coord: 1, freq: vec![1, 1], phase: 0.2, h: off }]).unwrap();
    let cs = cs_three(&e1, &e2, &e3, 0).unwrap();
    let expect = chern_form(&e2, 0)
        .unwrap()
        .sub(&chern_form(&e1, 0).unwrap())
        .unwrap()
        .sub(&chern_form(&e3, 0).unwrap())
        .unwrap();
    assert!(cs.d().sub(&expect).unwrap().max_norm() < 1e-6);
    let empty = BundleWithConnection::trivial(&g, 0).unwrap();
    let via_two = cs_two(&ConnectionPath::new(e3.clone(), e3.perturb_constant(&[herm1(0.2), herm1(-0.1)]).unwrap()).unwrap(), 0).unwrap();
    let via_three = cs_three(&empty, &e3, &e3.perturb_constant(&[herm1(0.2), herm1(-0.1)]).unwrap(), 0).unwrap();
    assert!(via_two.sub(&via_three).unwrap().max_norm() < 1e-14);
    assert!(cs_three(&e1, &e3, &e3, 0).is_err());
}

fn herm1(x: f64) -> CMat {
    CMat::from_element(1, 1, c(x, 0.0))
}

#[test]
fn odd_chern_form_counts_windings() {
    let g = Grid::new(&StructuredManifold::circle(2.0), Numerics::default()).unwrap();
    let e = BundleWithConnection::trivial(&g, 1).unwrap();
    let id = UnitaryAutomorphism::identity(&e).unwrap();
    assert!(odd_chern_form(&id, -1).unwrap().max_norm() < 1e-15);
    for k in [1i64, 3, -2] {
        let u = UnitaryAutomorphism::phase(&e, &[k]).unwrap();
        let w = odd_chern_form(&u, -1).unwrap().integrate().unwrap().real_coeff(-2);
        assert!((w - k as f64).abs() < 1e-7, "k = {k}: {w}");
    }
    assert!(odd_chern_form(&id, 0).is_err());
}

#[test]
fn odd_chern_form_is_closed_on_a_torus() {
    let g = torus(12);
    let e = perturbed_rank2(&g, 1.0);
    let u = UnitaryAutomorphism::phase(&e, &[1, -1]).unwrap();
    let w = odd_chern_form(&u, -1).unwrap();
    assert!(w.d().max_norm() < 1e-6);
    for j in [0, 7] {
        assert!((loop_integral(&w, 0, j, -2) - 2.0).abs() < 1e-6);
        assert!((loop_integral(&w, 1, j, -2) + 2.0).abs() < 1e-6);
    }
}

#[test]
fn cs_aut_transgresses_products() {
    let g = Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), Numerics { circle_points: 10, sphere_theta: 8, sphere_phi: 8, interval_order: 16 }).unwrap();
    let e = perturbed_rank2(&g, 0.8);
    let u1 = UnitaryAutomorphism::diagonal(&e, &[vec![1, 0], vec![0, 1]]).unwrap();
    let u2 = UnitaryAutomorphism::phase(&e, &[0, 1]).unwrap();
    let cs = cs_aut(&u1, &u2, -1).unwrap();
    let expect = odd_chern_form(&u1.compose(&u2).unwrap(), -1)
        .unwrap()
        .sub(&odd_chern_form(&u1, -1).unwrap())
        .unwrap()
        .sub(&odd_chern_form(&u2, -1).unwrap())
        .unwrap();
    assert!(cs.d().sub(&expect).unwrap().max_norm() < 1e-6);
    let id = UnitaryAutomorphism::identity(&e).unwrap();
    assert!(cs_aut(&u1, &id, -1).unwrap().d().max_norm() < 1e-6);
}

#[test]
fn cs_aut_abelian_on_circle() {
    let g = Grid::new(&StructuredManifold::circle(1.0), Numerics::default()).unwrap();
    let e = BundleWithConnection::flat_line(&g, &[0.3]).unwrap();
    let u1 = UnitaryAutomorphism::phase(&e, &[2]).unwrap();
    let u2 = UnitaryAutomorphism::phase(&e, &[-1]).unwrap();
    let a = cs_aut(&u1, &u2, -1).unwrap();
    let b = cs_aut(&u2, &u1, -1).unwrap();
    let expect = odd_chern_form(&u1.compose(&u2).unwrap(), -1)
        .unwrap()
        .sub(&odd_chern_form(&u1, -1).unwrap())
        .unwrap()
        .sub(&odd_chern_form(&u2, -1).unwrap())
        .unwrap();
    assert!(a.d().sub(&expect).unwrap().max_norm() < 1e-6);
    assert!(a.sub(&b).unwrap().d().integrate().unwrap().max_abs() < 1e-6);
    assert!(a.sub(&b).unwrap().max_norm() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn chern_forms_closed_with_integral_periods(s in -1.5f64..1.5, n in -2i64..3) {
        let g = torus(12);
        let e = perturbed_rank2(&g, s).tensor(&BundleWithConnection::poincare(&g, n).unwrap()).unwrap();
        let w = chern_form(&e, 0).unwrap();
        prop_assert!(w.d().max_norm() < 1e-6);
        let p = w.integrate().unwrap().real_coeff(-2);
        prop_assert!((p - p.round()).abs() < 1e-6);
        prop_assert!((p - (1.0 + 2.0 * n as f64)).abs() < 1e-6);
    }
}
