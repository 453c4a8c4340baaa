//! Index maps for product families `Z x B -> B`, and the odd variants built from (de)suspension.

mod kunneth;
mod odd;
mod verify;


use std::sync::Arc;

pub use kunneth::{kunneth_pushforward, KunnethBasis, KunnethClass};
pub use odd::{even_class_odd_fiber_index, odd_index, OddFiberIndex, OddIndexResult, OddProductFamily};
pub use verify::{fiber_kernel, product_eta, verify_index_theorem, EtaComparison, IndexReport};

use crate::charforms::SpinCStructure;
use crate::diffk::DKClassEven;
use crate::graded::{DeltaCurrent, GradedForm, Grid, SlicePoint};
use crate::{DktError, Result};

/// Largest distance of a fiber index from an integer before the input is rejected.
pub const INDEX_REJECT: f64 = 1e-4;
/// Rounding residual above which a fiber index is flagged in the report.
pub const INDEX_WARN: f64 = 1e-6;

/// Closed even-dimensional fiber with its spin^c data and Todd form.
#[derive(Clone, Debug)]
pub struct FiberGeometry {
    grid: Arc<Grid>,
    spinc: SpinCStructure,
    todd: GradedForm,
    complex_spheres: bool,
}

impl FiberGeometry {
    /// Product structure on `grid`; spheres are complex (`Td = 1 + c_1/2`) or spin (`Td = 1`).
    pub fn new(grid: &Arc<Grid>, complex_spheres: bool) -> Result<Self> {
        let m = grid.manifold();
        if !m.is_closed() || m.dim() == 0 || m.dim() % 2 != 0 {
            return Err(DktError::ManifoldMismatch(format!("fiber must be closed and even-dimensional: {m:?}")));
        }
        let spinc = SpinCStructure::standard(grid, complex_spheres)?;
        let todd = spinc.todd()?;
        Ok(Self { grid: grid.clone(), spinc, todd, complex_spheres })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.manifold().dim()
    }

    pub fn todd(&self) -> &GradedForm {
        &self.todd
    }

    pub fn spinc(&self) -> &SpinCStructure {
        &self.spinc
    }

    pub fn complex_spheres(&self) -> bool {
        self.complex_spheres
    }

    /// `int_Z Td ^ omega(e)` in degree `deg e - dim Z`, before rounding.
    pub fn raw_index(&self, e: &DKClassEven) -> Result<f64> {
        if !e.grid().same_as(&self.grid) {
            return Err(DktError::ManifoldMismatch("fiber class lives on another grid".into()));
        }
        let w = self.todd.wedge(&e.omega()?)?;
        Ok(w.integrate()?.real_coeff(e.degree() - self.dim() as i32))
    }

    /// The fiber index rounded to an integer, with the rounding residual.
    pub fn index(&self, e: &DKClassEven) -> Result<(i64, f64)> {
        let v = self.raw_index(e)?;
        let n = v.round();
        let residual = (v - n).abs();
        if residual > INDEX_REJECT {
            return Err(DktError::Numerical(format!("fiber index {v} is not an integer")));
        }
        Ok((n as i64, residual))
    }
}

#[derive(Clone, Debug)]
pub struct ProductTerm {
    pub fiber: DKClassEven,
    pub base: DKClassEven,
}

/// `sum_i p^* E_i^Z . pi^* E_i^B + j(phi)` on `Z x B`, with the decomposition kept explicit.
#[derive(Clone, Debug)]
pub struct ProductFamily {
    fiber: FiberGeometry,
    base: Arc<Grid>,
    total: Arc<Grid>,
    degree: i32,
    terms: Vec<ProductTerm>,
    phi: GradedForm,
}

impl ProductFamily {
    pub fn new(fiber: FiberGeometry, base: &Arc<Grid>, degree: i32) -> Result<Self> {
        if degree % 2 != 0 {
            return Err(DktError::Degree(format!("product families carry even classes, got degree {degree}")));
        }
        if base.numerics() != fiber.grid.numerics() {
            return Err(DktError::Invalid("fiber and base grids must share numerics".into()));
        }
        let total_m = fiber.grid.manifold().product(base.manifold())?;
        let total = Grid::new(&total_m, base.numerics())?;
        let phi = GradedForm::zero(&total, degree - 1);
        Ok(Self { fiber, base: base.clone(), total, degree, terms: Vec::new(), phi })
    }

    pub fn add_term(&mut self, fiber: DKClassEven, base: DKClassEven) -> Result<()> {
        if !fiber.grid().same_as(&self.fiber.grid) || !base.grid().same_as(&self.base) {
            return Err(DktError::ManifoldMismatch("term classes live on other grids".into()));
        }
        if fiber.degree() + base.degree() != self.degree {
            return Err(DktError::Degree(format!(
                "term degrees {} + {} in a degree-{} family",
                fiber.degree(),
                base.degree(),
                self.degree
            )));
        }
        self.terms.push(ProductTerm { fiber, base });
        Ok(())
    }

    /// Sets the `j(phi)` part.
    pub fn with_phi(mut self, phi: GradedForm) -> Result<Self> {
        if !phi.grid().same_as(&self.total) || phi.total_degree() != self.degree - 1 {
            return Err(DktError::Degree("phi must be a degree r - 1 form on Z x B".into()));
        }
        self.phi = phi;
        Ok(self)
    }

    pub fn fiber(&self) -> &FiberGeometry {
        &self.fiber
    }

    pub fn base(&self) -> &Arc<Grid> {
        &self.base
    }

    pub fn total(&self) -> &Arc<Grid> {
        &self.total
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn phi(&self) -> &GradedForm {
        &self.phi
    }

    pub fn fiber_factors(&self) -> Vec<usize> {
        (0..self.fiber.grid.manifold().n_factors()).collect()
    }

    pub fn base_factor_map(&self) -> Vec<usize> {
        let nz = self.fiber.grid.manifold().n_factors();
        (nz..nz + self.base.manifold().n_factors()).collect()
    }

    /// The class itself on `Z x B`.
    pub fn total_class(&self) -> Result<DKClassEven> {
        let mut out = DKClassEven::zero(&self.total, self.degree)?;
        for t in &self.terms {
            let z = t.fiber.pullback(&self.total, &self.fiber_factors())?;
            let b = t.base.pullback(&self.total, &self.base_factor_map())?;
            out = out.add(&z.product(&b)?)?;
        }
        out.add(&DKClassEven::j(&self.phi)?)
    }

    /// Fiber Todd form pulled back to `Z x B`.
    pub fn todd_total(&self) -> Result<GradedForm> {
        self.fiber.todd.pullback(&self.total, &self.fiber_factors())
    }
}

/// `int_{Z x B / B} Td(Z) ^ phi`.
pub fn todd_pushforward(form: &GradedForm, family: &ProductFamily) -> Result<GradedForm> {
    family.todd_total()?.wedge(form)?.fiber_integrate(&family.fiber_factors())
}

/// `int_{Z x B / B} Td(Z) ^ delta_S ^ alpha`; the support must contain every base factor.
pub fn todd_pushforward_current(current: &DeltaCurrent, family: &ProductFamily) -> Result<GradedForm> {
    if current.ambient() != family.total.manifold() {
        return Err(DktError::ManifoldMismatch("current lives on another manifold".into()));
    }
    let m = family.total.manifold();
    let support = current.support();
    let points: Vec<SlicePoint> =
        (0..m.n_factors()).filter(|i| !support.contains(i)).map(|i| SlicePoint::basepoint(m.factor(i))).collect();
    let td = family.todd_total()?.restrict(support, &points)?;
    let smooth = td.wedge(current.smooth_part())?;
    DeltaCurrent::new(m.clone(), support.to_vec(), smooth)?.fiber_integrate(&family.fiber_factors())
}

/// Output of [`analytic_index_product`].
#[derive(Clone, Debug)]
pub struct IndexResult {
    pub class: DKClassEven,
    /// The eta form; it vanishes for product families.
    pub eta_form_used: GradedForm,
    /// Rounded fiber index and rounding residual per term.
    pub fiber_indices: Vec<(i64, f64)>,
    pub report: Vec<String>,
}

/// `sum_i ind(E_i^Z) E_i^B + j(pi_* phi)`, with `u`-powers restored when `deg E_i^Z != dim Z`.
pub fn analytic_index_product(f: &ProductFamily) -> Result<IndexResult> {
    let n = f.fiber.dim() as i32;
    let degree = f.degree - n;
    let mut class = DKClassEven::zero(&f.base, degree)?;
    let mut fiber_indices = Vec::new();
    let mut report = Vec::new();
    for (i, t) in f.terms.iter().enumerate() {
        let (k, residual) = f.fiber.index(&t.fiber)?;
        report.push(format!("term {i}: fiber index {k} (rounding residual {residual:.2e})"));
        if residual > INDEX_WARN {
            report.push(format!("term {i}: rounding residual above {INDEX_WARN:e}"));
        }
        fiber_indices.push((k, residual));
        let shifted = t.base.u_shift((t.fiber.degree() - n) / 2)?;
        class = class.add(&shifted.scale(k))?;
    }
    let push = todd_pushforward(&f.phi, f)?;
    class = class.add(&DKClassEven::j(&push)?)?;
    report.push("eta form: zero for a product family".into());
    Ok(IndexResult { class, eta_form_used: GradedForm::zero(&f.base, degree - 1), fiber_indices, report })
}
