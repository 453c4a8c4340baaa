//! Pushforward of classes written in the basis `{u 1, u x}` of the fiber K-group.

use std::sync::Arc;

use super::{todd_pushforward, FiberGeometry, ProductFamily};
use crate::bundles::BundleWithConnection;
use crate::diffk::DKClassEven;
use crate::graded::{Factor, GradedForm, Grid};
use crate::{DktError, Result};

/// Tolerance on `pi_*(u 1) = 0` and `pi_*(u x) = 1`.
const NORMALIZATION_TOL: f64 = 1e-6;

/// `e_1 = u 1` and `e_2 = u x`, `x = [H] - [1]`, with `H` the degree-one monopole on `S^2`
/// or the flux-one line on `T^2`.
#[derive(Clone, Debug)]
pub struct KunnethBasis {
    fiber: FiberGeometry,
    one: DKClassEven,
    x: DKClassEven,
}

impl KunnethBasis {
    pub fn standard(fiber: FiberGeometry) -> Result<Self> {
        let g = fiber.grid().clone();
        let m = g.manifold();
        let h = match m.factors() {
            [Factor::Sphere2 { .. }] => BundleWithConnection::monopole(&g, 1)?,
            [Factor::Circle { .. }, Factor::Circle { .. }] => BundleWithConnection::poincare(&g, 1)?,
            _ => return Err(DktError::Unsupported(format!("no Kunneth basis on {m:?}"))),
        };
        let n = fiber.dim() as i32;
        let one = DKClassEven::from_bundle(BundleWithConnection::trivial(&g, 1)?, n)?;
        let x = DKClassEven::from_bundle(h, n)?.sub(&one)?;
        Ok(Self { fiber, one, x })
    }

    pub fn fiber(&self) -> &FiberGeometry {
        &self.fiber
    }

    pub fn one(&self) -> &DKClassEven {
        &self.one
    }

    pub fn x(&self) -> &DKClassEven {
        &self.x
    }

    /// `(pi_*(e_1), pi_*(e_2))` by quadrature.
    pub fn normalization(&self) -> Result<(f64, f64)> {
        Ok((self.fiber.raw_index(&self.one)?, self.fiber.raw_index(&self.x)?))
    }

    pub fn check(&self) -> Result<()> {
        let (a, b) = self.normalization()?;
        if a.abs() > NORMALIZATION_TOL || (b - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DktError::Invalid(format!(
                "basis normalization fails: pi_*(u 1) = {a}, pi_*(u x) = {b}; spheres need the spin structure"
            )));
        }
        Ok(())
    }
}

/// `E = sum_{i=1,2} p^* E_i^Z . pi^* E_i^B + j(phi)`, with `E_i^Z` the basis elements up to `j`-terms.
#[derive(Clone, Debug)]
pub struct KunnethClass {
    basis: KunnethBasis,
    family: ProductFamily,
}

impl KunnethClass {
    pub fn new(basis: KunnethBasis, e1: DKClassEven, e2: DKClassEven, phi: Option<GradedForm>) -> Result<Self> {
        let base = e1.grid().clone();
        let degree = basis.one.degree() + e1.degree();
        let mut family = ProductFamily::new(basis.fiber.clone(), &base, degree)?;
        family.add_term(basis.one.clone(), e1)?;
        family.add_term(basis.x.clone(), e2)?;
        if let Some(phi) = phi {
            family = family.with_phi(phi)?;
        }
        Ok(Self { basis, family })
    }

    pub fn basis(&self) -> &KunnethBasis {
        &self.basis
    }

    pub fn family(&self) -> &ProductFamily {
        &self.family
    }

    pub fn base(&self) -> &Arc<Grid> {
        self.family.base()
    }

    /// `E_i^Z -> E_i^Z + j(a_i^Z)`, `E_i^B -> E_i^B + j(a_i^B)` and
    /// `phi -> phi - sum_i (a_i^Z ^ omega(E_i^B) + omega(E_i^Z) ^ a_i^B)`, with `omega(E_i^Z)`
    /// taken after the move so that the class is unchanged up to an exact form.
    pub fn gauge_move(&self, alpha_fiber: [&GradedForm; 2], alpha_base: [&GradedForm; 2]) -> Result<Self> {
        let f = &self.family;
        let mut family = ProductFamily::new(f.fiber().clone(), f.base(), f.degree())?;
        let mut phi = f.phi().clone();
        for (i, t) in f.terms().iter().enumerate() {
            let fz = t.fiber.add(&DKClassEven::j(alpha_fiber[i])?)?;
            let fb = t.base.add(&DKClassEven::j(alpha_base[i])?)?;
            let az = alpha_fiber[i].pullback(f.total(), &f.fiber_factors())?;
            let wb = t.base.omega()?.pullback(f.total(), &f.base_factor_map())?;
            let wz = fz.omega()?.pullback(f.total(), &f.fiber_factors())?;
            let ab = alpha_base[i].pullback(f.total(), &f.base_factor_map())?;
            phi = phi.sub(&az.wedge(&wb)?)?.sub(&wz.wedge(&ab)?)?;
            family.add_term(fz, fb)?;
        }
        Ok(Self { basis: self.basis.clone(), family: family.with_phi(phi)? })
    }
}

/// `E_2^B + j(pi_* phi)`.
pub fn kunneth_pushforward(k: &KunnethClass) -> Result<DKClassEven> {
    k.basis.check()?;
    let f = &k.family;
    let e2 = &f.terms()[1].base;
    e2.add(&DKClassEven::j(&todd_pushforward(f.phi(), f)?)?)
}
