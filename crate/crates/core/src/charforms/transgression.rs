//! Transgression forms on cylinders and simplices.
//!
//! All transgressions integrate a Chern form over the leading interval factors of an
//! interpolating family, with the fiber-first convention of
//! [`GradedForm::fiber_integrate`].

use super::{chern_form, UnitaryAutomorphism};
use crate::bundles::{BundleWithConnection, ConnectionPath};
use crate::graded::GradedForm;
use crate::{DktError, Result};

/// Chern-Simons form with `d cs_two = omega(path.start) - omega(path.end)`; total degree `r - 1`.
pub fn cs_two(path: &ConnectionPath, r: i32) -> Result<GradedForm> {
    let cyl = path.end.cylinder(&path.start)?;
    chern_form(&cyl, r)?.fiber_integrate(&[0])
}

/// Transgression of a splitting `E_2 = E_1 (+) E_3`:
/// `d cs_three = omega(E_2) - omega(E_1) - omega(E_3)`.
pub fn cs_three(
    e1: &BundleWithConnection,
    e2: &BundleWithConnection,
    e3: &BundleWithConnection,
    r: i32,
) -> Result<GradedForm> {
    if e1.rank() + e3.rank() != e2.rank() {
        return Err(DktError::Rank(format!(
            "rank {} is not the sum of {} and {}",
            e2.rank(),
            e1.rank(),
            e3.rank()
        )));
    }
    let split = e1.direct_sum(e3)?;
    cs_two(&ConnectionPath::new(e2.clone(), split)?, r)
}

/// Odd Chern form of an automorphism, total degree `r` (odd): the transgression along
/// the path from `A` to `U . A`. Its `u^{(r-1)/2}` one-form part integrates over loops
/// to winding numbers of `det U`.
pub fn odd_chern_form(u: &UnitaryAutomorphism, r: i32) -> Result<GradedForm> {
    if r % 2 == 0 {
        return Err(DktError::Degree(format!("odd_chern_form needs an odd degree, got {r}")));
    }
    let b = u.bundle();
    let cyl = b.cylinder(&u.moved_bundle()?)?;
    chern_form(&cyl, r + 1)?.fiber_integrate(&[0])
}

/// Transgression over the simplex `(1 - t1 - t2) A + t1 U1.A + t2 (U1 U2).A`, total degree `r - 1`:
/// `d cs_aut = omega(U1 U2) - omega(U1) - omega(U2)`.
pub fn cs_aut(u1: &UnitaryAutomorphism, u2: &UnitaryAutomorphism, r: i32) -> Result<GradedForm> {
    if r % 2 == 0 {
        return Err(DktError::Degree(format!("cs_aut needs an odd degree, got {r}")));
    }
    u1.bundle().check_same_bundle(u2.bundle())?;
    let b = u1.bundle();
    let a1 = u1.moved_bundle()?;
    let a12 = u1.compose(u2)?.moved_bundle()?;
    let family = BundleWithConnection::simplex_family(b, &a1, &a12)?;
    chern_form(&family, r + 1)?.fiber_integrate(&[0, 1])
}
