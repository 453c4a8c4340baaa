use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::bundles::{BundleWithConnection, ConnectionPath, TrigTerm};
use crate::charforms::{chern_form, odd_chern_form, UnitaryAutomorphism};
use crate::graded::{Grid, Numerics, StructuredManifold};
use crate::linalg::{c, det, CMat};

fn circle(n: usize) -> Arc<Grid> {
    Grid::new(&StructuredManifold::circle(1.0), Numerics { interval_order: 16, ..Numerics::uniform(n, 8, 8) }).unwrap()
}

fn torus(n: usize) -> Arc<Grid> {
    Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), Numerics { interval_order: 16, ..Numerics::uniform(n, 8, 8) })
        .unwrap()
}

fn sphere() -> Arc<Grid> {
    Grid::new(&StructuredManifold::sphere(1.0), Numerics::uniform(8, 16, 32)).unwrap()
}

fn herm(a: f64, b: f64, cc: f64, d: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, cc), c(b, -cc), c(d, 0.0)])
}

fn h1(x: f64) -> CMat {
    CMat::from_element(1, 1, c(x, 0.0))
}

/// `u^-1 (a + b sin 2 pi x_1) dx_0 + u^-1 b' cos(2 pi x_0) dx_1` on a 2-torus.
fn torus_phi(g: &Arc<Grid>, a: f64, b: f64, b2: f64) -> GradedForm {
    let p = GradedForm::from_fn(g, -2, 0b01, |_, x| c(a + b * (2.0 * PI * x[1]).sin(), 0.0)).unwrap();
    let q = GradedForm::from_fn(g, -2, 0b10, |_, x| c(b2 * (2.0 * PI * x[0]).cos(), 0.0)).unwrap();
    p.add(&q).unwrap()
}

/// `u^-1 f(x)` with `f` a trigonometric polynomial on a 2-torus.
fn torus_zero_form(g: &Arc<Grid>) -> GradedForm {
    GradedForm::from_fn(g, -2, 0, |_, x| c(0.2 * (2.0 * PI * (x[0] - x[1])).cos() + 0.05, 0.0)).unwrap()
}

fn perturbed_line(g: &Arc<Grid>, theta: &[f64], s: f64) -> BundleWithConnection {
    BundleWithConnection::flat_line(g, theta)
        .unwrap()
        .perturb_trig(vec![
            TrigTerm { coord: 0, freq: vec![0, 1], phase: 0.3, h: h1(0.4 * s) },
            TrigTerm { coord: 1, freq: vec![1, 0], phase: -0.7, h: h1(0.25) },
        ])
        .unwrap()
}

fn cyc(m: &StructuredManifold, f: &[usize]) -> ReferenceCycle {
    ReferenceCycle::new(m, f).unwrap()
}

#[test]
fn omega_of_trivial_generator_is_the_rank() {
    let g = torus(8);
    let x = DKClassEven::from_bundle(BundleWithConnection::trivial(&g, 2).unwrap(), 0).unwrap();
    let w = x.omega().unwrap();
    assert!(w.sub(&GradedForm::constant(&g, 0, c(2.0, 0.0))).unwrap().max_norm() < 1e-14);
    let obs = x.observable().unwrap();
    assert_eq!(obs.rank, 2);
    assert!((obs.periods[&cyc(g.manifold(), &[])].real_coeff(0) - 2.0).abs() < 1e-14);
    assert!(obs.periods[&cyc(g.manifold(), &[0, 1])].max_abs() < 1e-14);
    assert_eq!(obs.periods.len(), 2);
}

#[test]
fn j_is_exact_and_linear() {
    let g = torus(10);
    let a1 = torus_phi(&g, 0.3, 0.5, -0.2);
    let a2 = torus_phi(&g, -0.1, 0.2, 0.7);
    let j1 = DKClassEven::j(&a1).unwrap();
    assert_eq!(j1.degree(), 0);
    assert!(j1.omega().unwrap().sub(&a1.d()).unwrap().max_norm() < 1e-12);
    assert!(j1.observable().unwrap().max_abs() < 1e-12);
    let sum = j1.add(&DKClassEven::j(&a2).unwrap()).unwrap();
    let joint = DKClassEven::j(&a1.add(&a2).unwrap()).unwrap();
    assert!(sum.observable().unwrap().distance(&joint.observable().unwrap()) < 1e-12);
    assert!(sum.omega().unwrap().sub(&joint.omega().unwrap()).unwrap().max_norm() < 1e-12);
    // a closed form
    let closed = GradedForm::from_fn(&g, -2, 0b01, |_, _| c(0.4, 0.0)).unwrap();
    assert!(DKClassEven::j(&closed).unwrap().omega().unwrap().max_norm() < 1e-14);
}

#[test]
fn omega_is_closed_with_integral_periods() {
    let g = torus(10);
    let e = perturbed_line(&g, &[0.2, 0.6], 1.0).tensor(&BundleWithConnection::poincare(&g, 2).unwrap()).unwrap();
    let x = DKClassEven::generator(e, torus_phi(&g, 0.3, 0.2, 0.1), 0)
        .unwrap()
        .add(&DKClassEven::from_bundle(BundleWithConnection::poincare(&g, -1).unwrap(), 0).unwrap().scale(3))
        .unwrap();
    let w = x.omega().unwrap();
    assert!(w.d().max_norm() < 1e-6);
    let obs = x.observable().unwrap();
    assert_eq!(obs.rank, 4);
    assert!(obs.lattice_defect() < 1e-6);
    assert!((obs.periods[&cyc(g.manifold(), &[0, 1])].real_coeff(-2) - (2.0 - 3.0)).abs() < 1e-8);

    let s = sphere();
    let m = DKClassEven::from_bundle(BundleWithConnection::monopole(&s, 1).unwrap(), 0).unwrap();
    let w = m.omega().unwrap();
    assert!(w.d().max_norm() < 1e-6);
    let obs = m.observable().unwrap();
    assert!((obs.periods[&cyc(s.manifold(), &[0])].real_coeff(-2) - 1.0).abs() < 1e-8);
    assert!(obs.lattice_defect() < 1e-6);
}

#[test]
fn product_is_multiplicative() {
    let g = torus(10);
    let a = DKClassEven::generator(perturbed_line(&g, &[0.1, 0.3], 1.0), torus_phi(&g, 0.2, 0.4, 0.0), 0).unwrap();
    let b = DKClassEven::generator(BundleWithConnection::poincare(&g, 1).unwrap(), torus_phi(&g, 0.0, -0.3, 0.5), 0)
        .unwrap()
        .add(&DKClassEven::from_bundle(BundleWithConnection::trivial(&g, 2).unwrap(), 0).unwrap())
        .unwrap();
    let ab = a.product(&b).unwrap();
    let lhs = ab.omega().unwrap();
    let rhs = a.omega().unwrap().wedge(&b.omega().unwrap()).unwrap();
    assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-6);
    assert_eq!(ab.rank(), a.rank() * b.rank());
    let unit = DKClassEven::unit(&g).unwrap();
    assert!(a.product(&unit).unwrap().observable().unwrap().distance(&a.observable().unwrap()) < 1e-12);
    let ba = b.product(&a).unwrap();
    assert!(ab.observable().unwrap().distance(&ba.observable().unwrap()) < 1e-8);
    // j-module identity
    let alpha = torus_phi(&g, 0.1, 0.2, 0.3);
    let ja_b = DKClassEven::j(&alpha).unwrap().product(&b).unwrap();
    let j_ab = DKClassEven::j(&alpha.wedge(&b.omega().unwrap()).unwrap()).unwrap();
    assert!(ja_b.omega().unwrap().sub(&j_ab.omega().unwrap()).unwrap().max_norm() < 1e-6);
    assert!(ja_b.observable().unwrap().max_abs() < 1e-6);
}

#[test]
fn homotopy_comparison_vanishes() {
    let g = circle(24);
    let l0 = BundleWithConnection::flat_line(&g, &[0.1]).unwrap();
    let constant = DKClassEven::from_bundle(l0.cylinder(&l0).unwrap(), 0).unwrap();
    let h = homotopy_compare(&constant).unwrap();
    assert!(h.certificate.max_norm() < 1e-12);
    assert!(h.observable_residual < 1e-12);

    let l1 = BundleWithConnection::flat_line(&g, &[0.45]).unwrap();
    let path = ConnectionPath::new(l0, l1).unwrap();
    let fam = DKClassEven::from_bundle(path.cylinder().unwrap(), 0).unwrap();
    let h = homotopy_compare(&fam).unwrap();
    assert!(h.observable_residual < 1e-6, "{}", h.observable_residual);
    assert!(h.form_residual < 1e-6, "{}", h.form_residual);
    // the certificate carries the change of holonomy: int_{S^1} = -(theta_1 - theta_0)
    let p = cyc(g.manifold(), &[0]).period(&h.certificate).unwrap().real_coeff(-2);
    assert!((p + 0.35).abs() < 1e-8, "{p}");

    let s = sphere();
    let m0 = BundleWithConnection::monopole(&s, 1).unwrap();
    let hh = vec![vec![h1(0.0), h1(0.3), h1(-0.2)], vec![h1(0.1), h1(0.0), h1(0.4)], vec![h1(0.2), h1(-0.1), h1(0.0)]];
    let m1 = m0.perturb_ambient(0, hh).unwrap();
    let fam = DKClassEven::from_bundle(m0.cylinder(&m1).unwrap(), 0).unwrap();
    let h = homotopy_compare(&fam).unwrap();
    assert!(h.observable_residual < 1e-6, "{}", h.observable_residual);
    assert!(h.form_residual < 1e-6, "{}", h.form_residual);
}

fn odd_circle_battery(g: &Arc<Grid>) -> Vec<DKClassOdd> {
    let t = BundleWithConnection::trivial(g, 1).unwrap();
    let pt = t.perturb_trig(vec![TrigTerm { coord: 0, freq: vec![1], phase: 0.2, h: h1(0.3) }]).unwrap();
    let two = BundleWithConnection::trivial(g, 2).unwrap();
    let phi = GradedForm::from_fn(g, -2, 0, |_, x| c(0.1 + 0.2 * (2.0 * PI * x[0]).cos(), 0.0)).unwrap();
    vec![
        DKClassOdd::from_aut(UnitaryAutomorphism::phase(&t, &[1]).unwrap(), -1).unwrap(),
        DKClassOdd::generator(UnitaryAutomorphism::phase(&pt, &[-2]).unwrap(), phi.clone(), -1).unwrap(),
        DKClassOdd::from_aut(UnitaryAutomorphism::diagonal(&two, &[vec![1], vec![3]]).unwrap(), -1).unwrap(),
        DKClassOdd::from_aut(UnitaryAutomorphism::identity(&t).unwrap(), -1).unwrap(),
    ]
}

fn assert_same_odd(a: &DKClassOdd, b: &DKClassOdd, what: &str) {
    let d = a.observable().unwrap().distance(&b.observable().unwrap());
    assert!(d < 1e-6, "{what}: observables differ by {d}");
    let dc = a.det_circle().unwrap().distance(&b.det_circle().unwrap()).unwrap();
    assert!(dc < 1e-6, "{what}: det circles differ by {dc}");
}

#[test]
fn desuspension_inverts_suspension_on_circle() {
    let g = circle(16);
    for (k, x) in odd_circle_battery(&g).iter().enumerate() {
        let s = x.suspend().unwrap();
        assert_eq!(s.degree(), 0);
        let back = s.desuspend().unwrap();
        assert_same_odd(x, &back, &format!("battery {k}"));
        let w = x.omega().unwrap();
        let wb = back.omega().unwrap();
        assert!(w.sub(&wb).unwrap().max_norm() < 1e-6, "battery {k}");
        // omega transgresses through the circle, with the fiber-first sign on d phi
        let fib = s.omega().unwrap().fiber_integrate(&[0]).unwrap();
        let mut expect = GradedForm::zero(&g, -1);
        for gen in x.generators() {
            let v = odd_chern_form(&gen.aut, -1).unwrap().sub(&gen.phi.d()).unwrap();
            expect = expect.add(&v.scale_real(gen.coeff as f64)).unwrap();
        }
        assert!(fib.sub(&expect).unwrap().max_norm() < 1e-6, "battery {k}");
    }
}

#[test]
fn winding_and_det_circle() {
    let g = circle(16);
    let battery = odd_circle_battery(&g);
    let loop0 = cyc(g.manifold(), &[0]);
    let expected = [1.0, -2.0, 4.0, 0.0];
    for (x, e) in battery.iter().zip(expected) {
        let dc = x.det_circle().unwrap();
        assert!(dc.modulus_defect() < 1e-12);
        assert!((dc.winding(&loop0).unwrap() - e).abs() < 1e-9);
        let p = x.observable().unwrap().periods[&loop0].real_coeff(-2);
        assert!((p - e).abs() < 1e-8, "{p} vs {e}");
    }
    let id = battery[3].det_circle().unwrap();
    assert!((0..16).all(|i| (id.value(0, i) - c(1.0, 0.0)).norm() < 1e-14));
}

#[test]
fn desuspension_inverts_suspension_on_torus() {
    let g = torus(10);
    let l = perturbed_line(&g, &[0.2, 0.7], 1.0);
    let two = BundleWithConnection::poincare(&g, 1)
        .unwrap()
        .direct_sum(&BundleWithConnection::trivial(&g, 1).unwrap())
        .unwrap();
    let rot = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
    let t2 = BundleWithConnection::trivial(&g, 2).unwrap();
    let battery = vec![
        DKClassOdd::generator(UnitaryAutomorphism::phase(&l, &[1, -1]).unwrap(), torus_zero_form(&g), -1).unwrap(),
        DKClassOdd::from_aut(UnitaryAutomorphism::diagonal(&two, &[vec![0, 1], vec![2, 0]]).unwrap(), -1).unwrap(),
        DKClassOdd::from_aut(UnitaryAutomorphism::phase_times(&t2, &[1, 0], &rot).unwrap(), -1).unwrap(),
    ];
    for (k, x) in battery.iter().enumerate() {
        let back = x.suspend().unwrap().desuspend().unwrap();
        assert_same_odd(x, &back, &format!("torus battery {k}"));
        assert!(x.observable().unwrap().lattice_defect() < 1e-6);
    }
}

#[test]
fn desuspension_of_pullbacks_and_poincare() {
    let g = circle(12);
    let st = Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), g.numerics()).unwrap();
    let e = DKClassEven::from_bundle(BundleWithConnection::flat_line(&g, &[0.3]).unwrap(), 0).unwrap();
    // pulled back along the second factor: trivial in the suspension direction
    let pulled = e.pullback(&st, &[1]).unwrap();
    let d = pulled.desuspend().unwrap();
    let u = &d.generators()[0].aut;
    assert!(u.value_distance(&UnitaryAutomorphism::identity(u.bundle()).unwrap()).unwrap() < 1e-9);

    let p = DKClassEven::from_bundle(BundleWithConnection::poincare(&st, 1).unwrap(), 0).unwrap();
    let d = p.desuspend().unwrap();
    let w = d.det_circle().unwrap().winding(&cyc(g.manifold(), &[0])).unwrap();
    assert!((w - 1.0).abs() < 1e-9, "{w}");
    // basepoint independence
    let d2 = p.desuspend_at(0.37).unwrap();
    assert!(d.observable().unwrap().distance(&d2.observable().unwrap()) < 1e-6);
    let w2 = d2.det_circle().unwrap().winding(&cyc(g.manifold(), &[0])).unwrap();
    assert!((w2 - 1.0).abs() < 1e-9);
}

#[test]
fn double_suspension_integrates_back() {
    let g = circle(10);
    let l = BundleWithConnection::flat_line(&g, &[0.25])
        .unwrap()
        .perturb_trig(vec![TrigTerm { coord: 0, freq: vec![1], phase: 0.1, h: h1(0.5) }])
        .unwrap();
    let phi = GradedForm::from_fn(&g, -2, 0b1, |_, x| c(0.2 * (2.0 * PI * x[0]).sin() + 0.1, 0.0)).unwrap();
    let e = DKClassEven::generator(l, phi, 0)
        .unwrap()
        .add(&DKClassEven::from_bundle(BundleWithConnection::trivial(&g, 2).unwrap(), 0).unwrap())
        .unwrap();
    let s2 = e.double_suspend().unwrap();
    assert_eq!(s2.degree(), 2);
    assert_eq!(s2.rank(), e.rank());
    let w = s2.omega().unwrap();
    let tgrid = Grid::new(&StructuredManifold::torus(&[1.0, 1.0]), g.numerics()).unwrap();
    let p = BundleWithConnection::poincare(&tgrid, 1).unwrap();
    let wp = chern_form(&p, 2).unwrap().pullback(s2.grid(), &[0, 1]).unwrap();
    let we = e.omega().unwrap().pullback(s2.grid(), &[2]).unwrap();
    assert!(w.sub(&wp.wedge(&we).unwrap()).unwrap().max_norm() < 1e-6);
    let fib = w.fiber_integrate(&[0, 1]).unwrap();
    assert!(fib.sub(&e.omega().unwrap()).unwrap().max_norm() < 1e-6);
}

#[test]
fn det_line_holonomies() {
    let g = torus(12);
    let (theta, h, ph) = (0.3, 0.4, 0.3);
    let l = perturbed_line(&g, &[theta, 0.6], 1.0);
    let plain = DKClassEven::from_bundle(l.clone(), 0).unwrap().det_line().unwrap();
    let loop0 = cyc(g.manifold(), &[0]);
    let direct = l.holonomy(0, 0, &g.chart(0).point(0)).unwrap()[(0, 0)];
    assert!((plain.holonomy(&loop0).unwrap() - direct).norm() < 1e-10);

    let a = 0.17;
    let x = DKClassEven::generator(l, torus_phi(&g, a, 0.3, 0.2), 0).unwrap();
    let expect = (c(0.0, 2.0 * PI * theta + h * f64::cos(ph) - 2.0 * PI * a)).exp();
    let got = x.det_line().unwrap().holonomy(&loop0).unwrap();
    assert!((got - expect).norm() < 1e-8, "{got} vs {expect}");

    // rank two: the det-holonomy is the determinant of the matrix holonomy
    let e = BundleWithConnection::poincare(&g, 1)
        .unwrap()
        .direct_sum(&BundleWithConnection::flat_line(&g, &[0.1, 0.2]).unwrap())
        .unwrap()
        .perturb_trig(vec![TrigTerm { coord: 1, freq: vec![1, 0], phase: 0.5, h: herm(0.2, 0.3, -0.1, 0.4) }])
        .unwrap();
    let loop1 = cyc(g.manifold(), &[1]);
    let x = DKClassEven::generator(e.clone(), torus_phi(&g, 0.0, 0.0, 0.3), 0).unwrap();
    let dh = det(&e.holonomy(1, 0, &g.chart(0).point(0)).unwrap());
    let expect = dh * (c(0.0, -2.0 * PI * 0.3)).exp();
    assert!((x.det_line().unwrap().holonomy(&loop1).unwrap() - expect).norm() < 1e-8);
    let c1 = x.det_line().unwrap().first_chern(&cyc(g.manifold(), &[0, 1])).unwrap();
    assert!((c1 - 1.0).abs() < 1e-8);
}

#[test]
fn even_relation_rewrite_is_invisible() {
    let g = torus(10);
    let l1 = perturbed_line(&g, &[0.1, 0.4], 1.0);
    let l3 = BundleWithConnection::poincare(&g, 1).unwrap();
    let off = herm(0.0, 0.3, 0.2, 0.0);
    let e2 = l1
        .direct_sum(&l3)
        .unwrap()
        .perturb_trig(vec![
            TrigTerm { coord: 0, freq: vec![0, 1], phase: 0.0, h: off.clone() },
            TrigTerm { coord: 1, freq: vec![0, 0], phase: 0.0, h: herm(0.1, 0.0, 0.0, -0.3) },
        ])
        .unwrap();
    let x = DKClassEven::generator(e2, torus_phi(&g, 0.1, 0.2, 0.0), 0).unwrap();
    let y = x.rewrite_split(0, &l1, &l3, &torus_phi(&g, -0.3, 0.0, 0.4)).unwrap();
    assert_eq!(y.generators().len(), 2);
    assert!(x.omega().unwrap().sub(&y.omega().unwrap()).unwrap().max_norm() < 1e-6);
    assert!(x.observable().unwrap().distance(&y.observable().unwrap()) < 1e-6);
    let (dx, dy) = (x.det_line().unwrap(), y.det_line().unwrap());
    for cy in circle_cycles(g.manifold()) {
        let (a, b) = (dx.holonomy(&cy).unwrap(), dy.holonomy(&cy).unwrap());
        assert!((a - b).norm() < 1e-6, "{cy}: {a} vs {b}");
    }
    assert!(x.rewrite_split(0, &l1, &l1, &torus_phi(&g, 0.0, 0.0, 0.0)).is_err());
}

#[test]
fn odd_relation_one_rewrite_is_invisible() {
    let g = circle(12);
    let t = BundleWithConnection::trivial(&g, 1).unwrap();
    let g1 = t.perturb_trig(vec![TrigTerm { coord: 0, freq: vec![1], phase: 0.0, h: h1(0.2) }]).unwrap();
    let g3 = t.clone();
    let g2 = g1
        .direct_sum(&g3)
        .unwrap()
        .perturb_trig(vec![TrigTerm { coord: 0, freq: vec![2], phase: 0.4, h: herm(0.1, 0.3, -0.2, 0.0) }])
        .unwrap();
    let u1 = UnitaryAutomorphism::phase(&g1, &[1]).unwrap();
    let u3 = UnitaryAutomorphism::phase(&g3, &[-2]).unwrap();
    let u2 = UnitaryAutomorphism::diagonal(&g2, &[vec![1], vec![-2]]).unwrap();
    let phi = GradedForm::from_fn(&g, -2, 0, |_, x| c(0.3 * (2.0 * PI * x[0]).sin(), 0.0)).unwrap();
    let x = DKClassOdd::generator(u2, phi.clone(), -1).unwrap();
    let y = x.rewrite_split(0, &u1, &u3, &GradedForm::zero(&g, -2)).unwrap();
    assert!(x.omega().unwrap().sub(&y.omega().unwrap()).unwrap().max_norm() < 1e-6);
    assert_same_odd(&x, &y, "relation (1)");
    let bad = UnitaryAutomorphism::phase(&g3, &[3]).unwrap();
    assert!(x.rewrite_split(0, &u1, &bad, &phi).is_err());
}

#[test]
fn odd_relation_two_rewrite_is_invisible() {
    let g = torus(8);
    let e = BundleWithConnection::trivial(&g, 2)
        .unwrap()
        .perturb_trig(vec![TrigTerm { coord: 0, freq: vec![0, 1], phase: 0.2, h: herm(0.1, 0.2, 0.1, -0.2) }])
        .unwrap();
    let rot = CMat::from_row_slice(2, 2, &[c(0.8, 0.0), c(-0.6, 0.0), c(0.6, 0.0), c(0.8, 0.0)]);
    let u1 = UnitaryAutomorphism::phase_times(&e, &[1, 0], &rot).unwrap();
    let u2 = UnitaryAutomorphism::diagonal(&e, &[vec![0, 1], vec![1, -1]]).unwrap();
    let x = DKClassOdd::from_aut(u1, -1).unwrap().add(&DKClassOdd::from_aut(u2, -1).unwrap()).unwrap();
    let y = x.rewrite_merge(0, 1).unwrap();
    assert_eq!(y.generators().len(), 1);
    assert!(x.omega().unwrap().sub(&y.omega().unwrap()).unwrap().max_norm() < 1e-6);
    assert_same_odd(&x, &y, "relation (2)");
    let z = y.generators()[0].aut.eval(0, &[0.3, 0.4]);
    assert!((det(&z) - det(&x.generators()[0].aut.eval(0, &[0.3, 0.4])) * det(&x.generators()[1].aut.eval(0, &[0.3, 0.4]))).norm() < 1e-12);
}

#[test]
fn odd_j_and_errors() {
    let g = circle(12);
    let alpha = GradedForm::from_fn(&g, -2, 0, |_, x| c((2.0 * PI * x[0]).cos(), 0.0)).unwrap();
    let j = DKClassOdd::j(&alpha).unwrap();
    assert!(j.omega().unwrap().sub(&alpha.d()).unwrap().max_norm() < 1e-12);
    assert!(j.observable().unwrap().max_abs() < 1e-12);
    let t = BundleWithConnection::trivial(&g, 1).unwrap();
    let u = UnitaryAutomorphism::phase(&t, &[1]).unwrap();
    assert!(DKClassOdd::generator(u.clone(), GradedForm::zero(&g, -1), -1).is_err());
    assert!(DKClassOdd::from_aut(u, 0).is_err());
    assert!(DKClassEven::from_bundle(t.clone(), 1).is_err());
    let other = torus(8);
    let x = DKClassEven::unit(&g).unwrap();
    assert!(x.add(&DKClassEven::unit(&other).unwrap()).is_err());
    assert!(x.desuspend().is_ok());
    assert!(DKClassEven::unit(&sphere()).unwrap().desuspend().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, .. ProptestConfig::default() })]
    #[test]
    fn random_classes_have_integral_periods(
        n1 in -2i64..3, n2 in -2i64..3, k1 in -3i64..4, s in -1.0f64..1.0, a in -0.5f64..0.5
    ) {
        let g = torus(8);
        let x = DKClassEven::generator(perturbed_line(&g, &[0.2, 0.5], s), torus_phi(&g, a, s, 0.1), 0)
            .unwrap()
            .scale(n1)
            .add(&DKClassEven::from_bundle(BundleWithConnection::poincare(&g, k1).unwrap(), 0).unwrap().scale(n2))
            .unwrap();
        let obs = x.observable().unwrap();
        prop_assert!(obs.lattice_defect() < 1e-6);
        prop_assert_eq!(obs.rank, n1 + n2);
        let flux = obs.periods[&ReferenceCycle::new(g.manifold(), &[0, 1]).unwrap()].real_coeff(-2);
        prop_assert!((flux - (n2 * k1) as f64).abs() < 1e-8);
    }
}
