//! Odd indices: `D . ind . S` for even fibers and `D . ind . S^2` for odd fibers.

use std::sync::Arc;

use super::{analytic_index_product, FiberGeometry, IndexResult, ProductFamily};
use crate::bundles::BundleWithConnection;
use crate::diffk::{unit_dt, DKClassEven, DKClassOdd, ReferenceCycle};
use crate::graded::{EtaValue, GradedForm, Grid, StructuredManifold};
use crate::spectral::{bundle_eta, torus_kernel_dim, SpectralModel};
use crate::{DktError, Result, C64};

/// `sum_i p^* E_i^Z . pi^* G_i^B + j(phi)` with odd base classes `G_i^B`.
#[derive(Clone, Debug)]
pub struct OddProductFamily {
    fiber: FiberGeometry,
    base: Arc<Grid>,
    degree: i32,
    terms: Vec<(DKClassEven, DKClassOdd)>,
    phi: Option<GradedForm>,
}

impl OddProductFamily {
    pub fn new(fiber: FiberGeometry, base: &Arc<Grid>, degree: i32) -> Result<Self> {
        if degree % 2 == 0 {
            return Err(DktError::Degree(format!("odd family in degree {degree}")));
        }
        Ok(Self { fiber, base: base.clone(), degree, terms: Vec::new(), phi: None })
    }

    pub fn add_term(&mut self, fiber: DKClassEven, base: DKClassOdd) -> Result<()> {
        if fiber.degree() + base.degree() != self.degree {
            return Err(DktError::Degree("term degrees do not add up".into()));
        }
        if !fiber.grid().same_as(self.fiber.grid()) || !base.grid().same_as(&self.base) {
            return Err(DktError::ManifoldMismatch("term classes live on other grids".into()));
        }
        self.terms.push((fiber, base));
        Ok(())
    }

    /// Sets the `j(phi)` part, a degree `r - 1` form on `Z x B`.
    pub fn with_phi(mut self, phi: GradedForm) -> Result<Self> {
        if phi.total_degree() != self.degree - 1 {
            return Err(DktError::Degree("phi must have degree r - 1".into()));
        }
        self.phi = Some(phi);
        Ok(self)
    }

    fn total_grid(&self) -> Result<Arc<Grid>> {
        let m = self.fiber.grid().manifold().product(self.base.manifold())?;
        Grid::new(&m, self.base.numerics())
    }

    /// `omega` of the class on `Z x B`.
    pub fn omega(&self) -> Result<GradedForm> {
        let total = self.total_grid()?;
        let nz = self.fiber.grid().manifold().n_factors();
        let zmap: Vec<usize> = (0..nz).collect();
        let bmap: Vec<usize> = (nz..total.manifold().n_factors()).collect();
        let mut out = GradedForm::zero(&total, self.degree);
        for (z, b) in &self.terms {
            let w = z.omega()?.pullback(&total, &zmap)?.wedge(&b.omega()?.pullback(&total, &bmap)?)?;
            out = out.add(&w)?;
        }
        if let Some(phi) = &self.phi {
            out = out.add(&phi.d())?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct OddIndexResult {
    pub class: DKClassOdd,
    /// The index of the suspended family on `S^1 x B`.
    pub suspended: IndexResult,
}

/// `D . ind . S`: suspend the base classes, push forward along `Z x S^1 x B -> S^1 x B`,
/// desuspend.
pub fn odd_index(f: &OddProductFamily) -> Result<OddIndexResult> {
    let sb_m = StructuredManifold::circle(1.0).product(f.base.manifold())?;
    let sb = Grid::new(&sb_m, f.base.numerics())?;
    let mut pf = ProductFamily::new(f.fiber.clone(), &sb, f.degree + 1)?;
    for (z, b) in &f.terms {
        pf.add_term(z.clone(), b.suspend()?)?;
    }
    if let Some(phi) = &f.phi {
        let nz = f.fiber.grid().manifold().n_factors();
        let total = pf.total().clone();
        let map: Vec<usize> = (0..total.manifold().n_factors()).filter(|i| *i != nz).collect();
        let big = unit_dt(&total, nz)?.wedge(&phi.pullback(&total, &map)?)?;
        pf = pf.with_phi(big)?;
    }
    let suspended = analytic_index_product(&pf)?;
    let class = suspended.class.desuspend()?;
    Ok(OddIndexResult { class, suspended })
}

/// Odd index of a degree-0 class on an odd flat torus over a point.
#[derive(Clone, Debug)]
pub struct OddFiberIndex {
    pub value: EtaValue,
    /// `j` of the value, in the odd group of the point.
    pub class: DKClassOdd,
    /// `Index(D^{T^2, P})` for the Poincaré line on the suspension torus.
    pub torus_index: i64,
}

/// `D . ind . S^2` for `X -> pt` with `X` an odd flat torus, evaluated by separation of variables
/// on `T^2 x X` with the second suspension circle of length `a`:
/// `sum_i n_i Index(D^{T^2, P}) eta-bar(D^{X, E_i}) + int_{T^2 x X} Phi`.
pub fn even_class_odd_fiber_index(e: &DKClassEven, a: f64, spin: &[f64]) -> Result<OddFiberIndex> {
    let m = e.manifold();
    if !m.is_torus() || m.dim() % 2 == 0 {
        return Err(DktError::ManifoldMismatch("odd fiber index needs an odd flat torus".into()));
    }
    if e.degree() != 0 {
        return Err(DktError::Degree("odd fiber index takes degree-0 classes".into()));
    }
    let zeros = vec![0.0; m.dim()];
    let spin = if spin.is_empty() { &zeros[..] } else { spin };
    let numerics = e.grid().numerics();
    let t2 = Grid::new(&StructuredManifold::torus(&[1.0, a]), numerics)?;
    let c1 = crate::charforms::c1_form(&BundleWithConnection::poincare(&t2, 1)?)?;
    let flux = ReferenceCycle::new(t2.manifold(), &[0, 1])?.period(&c1)?.real_coeff(-2);
    if (flux - flux.round()).abs() > 1e-6 {
        return Err(DktError::Numerical(format!("Poincaré flux {flux} is not an integer")));
    }
    let (kp, km) = torus_kernel_dim(&SpectralModel::new(t2.manifold(), &[0.0, 0.0], Some(flux.round() as i64))?)?;
    let torus_index = kp as i64 - km as i64;
    let s = e.double_suspend_with(a)?;
    let n = m.dim() as i32;
    let key = -n - 1;
    let mut total = 0.0;
    for (g, sg) in e.generators().iter().zip(s.generators()) {
        let eta = bundle_eta(&g.bundle, spin)?;
        let integral = sg.phi.integrate()?.real_coeff(key);
        total += g.coeff as f64 * (torus_index as f64 * eta + integral);
    }
    let value = EtaValue::new(key / 2, total);
    let point = Grid::new(&StructuredManifold::point(), numerics)?;
    let class = DKClassOdd::j(&GradedForm::constant(&point, key, C64::new(value.value, 0.0)))?;
    Ok(OddFiberIndex { value, class, torus_index })
}
