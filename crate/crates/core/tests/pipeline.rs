//! End-to-end use of the public API: bundles to classes to invariants.

use dkt_core::bundles::BundleWithConnection;
use dkt_core::charforms::c1_form;
use dkt_core::diffk::DKClassEven;
use dkt_core::graded::{circle_distance, Grid, Numerics, StructuredManifold};
use dkt_core::index::{verify_index_theorem, FiberGeometry, KunnethBasis, KunnethClass};
use dkt_core::spectral::{eta_class, reduced_eta, SpectralModel};

#[test]
fn monopole_degrees_integrate_to_integers() {
    let s2 = Grid::new(&StructuredManifold::sphere(1.0), Numerics::uniform(16, 24, 32)).unwrap();
    for n in [-2, 1, 3] {
        let v = c1_form(&BundleWithConnection::monopole(&s2, n).unwrap()).unwrap().integrate().unwrap();
        assert!((v.real_coeff(-2) - n as f64).abs() < 1e-9, "n = {n}: {v:?}");
    }
}

#[test]
fn flat_circle_eta_matches_the_closed_form() {
    let s1 = Grid::new(&StructuredManifold::circle(1.0), Numerics::uniform(32, 8, 8)).unwrap();
    for theta in [0.1, 0.3, 0.75] {
        let direct = reduced_eta(&SpectralModel::circle(1.0, theta).unwrap()).unwrap().value;
        assert!(circle_distance(direct, 0.5 - theta) < 1e-10, "{theta}: {direct}");
        let x = DKClassEven::from_bundle(BundleWithConnection::flat_line(&s1, &[theta]).unwrap(), 0).unwrap();
        let e = eta_class(&x, &[0.0]).unwrap();
        assert!(circle_distance(e.value, direct) < 1e-8, "{theta}: {} vs {direct}", e.value);
    }
}

#[test]
fn sphere_family_over_a_circle_satisfies_the_index_theorem() {
    let n = Numerics::uniform(16, 12, 16);
    let s2 = Grid::new(&StructuredManifold::sphere(1.0), n).unwrap();
    let s1 = Grid::new(&StructuredManifold::circle(1.0), n).unwrap();
    let basis = KunnethBasis::standard(FiberGeometry::new(&s2, false).unwrap()).unwrap();
    let e1 = DKClassEven::from_bundle(BundleWithConnection::flat_line(&s1, &[0.2]).unwrap(), 0).unwrap();
    let e2 = DKClassEven::from_bundle(BundleWithConnection::flat_line(&s1, &[0.65]).unwrap(), 0).unwrap();
    let k = KunnethClass::new(basis, e1, e2, None).unwrap();
    let rep = verify_index_theorem(k.family(), Some(&k));
    assert!(rep.max_residual < 1e-8, "{rep:?}");
    assert_eq!(rep.rank_difference, Some(0));
}
