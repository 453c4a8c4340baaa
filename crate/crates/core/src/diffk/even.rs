//! Even classes: formal sums of `(E, h, nabla, phi)`.

use std::sync::Arc;

use super::det::{determinant_line, DetLine, DetPiece};
use super::holonomy_aut::HolonomyAut;
use super::odd::{DKClassOdd, OddGenerator};
use super::{check_grid, unit_dt, KClassObservable};
use crate::bundles::BundleWithConnection;
use crate::charforms::{chern_form, cs_three, UnitaryAutomorphism};
use crate::graded::{Factor, GradedForm, Grid, SlicePoint, StructuredManifold};
use crate::{DktError, Result};

#[derive(Clone, Debug)]
pub struct EvenGenerator {
    pub coeff: i64,
    pub bundle: BundleWithConnection,
    /// Total degree `r - 1`, meaningful modulo exact forms.
    pub phi: GradedForm,
}

/// A class in the even group of degree `r`.
#[derive(Clone, Debug)]
pub struct DKClassEven {
    degree: i32,
    grid: Arc<Grid>,
    generators: Vec<EvenGenerator>,
}

impl DKClassEven {
    pub fn zero(grid: &Arc<Grid>, degree: i32) -> Result<Self> {
        if degree % 2 != 0 {
            return Err(DktError::Degree(format!("even class in degree {degree}")));
        }
        Ok(Self { degree, grid: grid.clone(), generators: Vec::new() })
    }

    /// The single generator `(E, phi)`.
    pub fn generator(bundle: BundleWithConnection, phi: GradedForm, degree: i32) -> Result<Self> {
        let mut out = Self::zero(bundle.grid(), degree)?;
        out.push(1, bundle, phi)?;
        Ok(out)
    }

    /// `(E, 0)`.
    pub fn from_bundle(bundle: BundleWithConnection, degree: i32) -> Result<Self> {
        let phi = GradedForm::zero(bundle.grid(), degree - 1);
        Self::generator(bundle, phi, degree)
    }

    /// `j(alpha)`: the rank-zero generator carrying `alpha`.
    pub fn j(alpha: &GradedForm) -> Result<Self> {
        let bundle = BundleWithConnection::trivial(alpha.grid(), 0)?;
        Self::generator(bundle, alpha.clone(), alpha.total_degree() + 1)
    }

    /// Unit of the product in degree 0.
    pub fn unit(grid: &Arc<Grid>) -> Result<Self> {
        Self::from_bundle(BundleWithConnection::trivial(grid, 1)?, 0)
    }

    pub fn push(&mut self, coeff: i64, bundle: BundleWithConnection, phi: GradedForm) -> Result<()> {
        check_grid(&self.grid, bundle.grid())?;
        check_grid(&self.grid, phi.grid())?;
        if phi.total_degree() != self.degree - 1 {
            return Err(DktError::Degree(format!(
                "phi has total degree {} in a degree-{} class",
                phi.total_degree(),
                self.degree
            )));
        }
        if coeff != 0 {
            self.generators.push(EvenGenerator { coeff, bundle, phi });
        }
        Ok(())
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn manifold(&self) -> &StructuredManifold {
        self.grid.manifold()
    }

    pub fn generators(&self) -> &[EvenGenerator] {
        &self.generators
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        check_grid(&self.grid, &other.grid)?;
        if self.degree != other.degree {
            return Err(DktError::Degree(format!("degrees {} and {}", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        out.generators.extend(other.generators.iter().cloned());
        Ok(out)
    }

    pub fn scale(&self, n: i64) -> Self {
        let mut out = self.clone();
        out.generators = if n == 0 {
            Vec::new()
        } else {
            self.generators.iter().map(|g| EvenGenerator { coeff: g.coeff * n, ..g.clone() }).collect()
        };
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `u^k x`: degree `r + 2k`, with `phi` multiplied by `u^k`.
    pub fn u_shift(&self, k: i32) -> Result<Self> {
        let mut out = Self::zero(&self.grid, self.degree + 2 * k)?;
        for g in &self.generators {
            out.push(g.coeff, g.bundle.clone(), g.phi.shift_u(k))?;
        }
        Ok(out)
    }

    /// Virtual rank of `c(x)`.
    pub fn rank(&self) -> i64 {
        self.generators.iter().map(|g| g.coeff * g.bundle.virtual_rank()).sum()
    }

    /// `omega = sum_i n_i (u^{r/2} ch(nabla_i) + d phi_i)`.
    pub fn omega(&self) -> Result<GradedForm> {
        let mut out = GradedForm::zero(&self.grid, self.degree);
        for g in &self.generators {
            let w = chern_form(&g.bundle, self.degree)?.add(&g.phi.d())?;
            out = out.add(&w.scale_real(g.coeff as f64))?;
        }
        Ok(out)
    }

    /// The observable shadow of `c(x)`.
    pub fn observable(&self) -> Result<KClassObservable> {
        KClassObservable::from_form(&self.omega()?, self.rank())
    }

    /// Generator-wise tensor product with
    /// `phi = phi_1 ^ omega(nabla_2) + omega(nabla_1) ^ phi_2 + phi_1 ^ d phi_2`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        let mut out = Self::zero(&self.grid, self.degree + other.degree)?;
        let right: Vec<(GradedForm, GradedForm)> = other
            .generators
            .iter()
            .map(|g| Ok((chern_form(&g.bundle, other.degree)?, g.phi.d())))
            .collect::<Result<_>>()?;
        for a in &self.generators {
            let wa = chern_form(&a.bundle, self.degree)?;
            for (b, (wb, dpb)) in other.generators.iter().zip(&right) {
                let phi = a.phi.wedge(wb)?.add(&wa.wedge(&b.phi)?)?.add(&a.phi.wedge(dpb)?)?;
                out.push(a.coeff * b.coeff, a.bundle.tensor(&b.bundle)?, phi)?;
            }
        }
        Ok(out)
    }

    /// Pullback along a factor projection `target -> self.manifold()`.
    pub fn pullback(&self, target: &Arc<Grid>, factor_map: &[usize]) -> Result<Self> {
        let mut out = Self::zero(target, self.degree)?;
        for g in &self.generators {
            out.push(g.coeff, g.bundle.pullback(target, factor_map)?, g.phi.pullback(target, factor_map)?)?;
        }
        Ok(out)
    }

    /// Restriction to `{t} x X` of a class on `I x X`.
    pub fn restrict_interval(&self, t: f64) -> Result<Self> {
        let m = self.manifold();
        if m.n_factors() == 0 || m.factor(0) != Factor::Interval01 {
            return Err(DktError::Factors("the leading factor must be an interval".into()));
        }
        let keep: Vec<usize> = (1..m.n_factors()).collect();
        let mut out: Option<Self> = None;
        for g in &self.generators {
            let b = g.bundle.restrict(&keep, &[t])?;
            let phi = g.phi.restrict(&keep, &[SlicePoint::Interval(t)])?;
            let target = out.get_or_insert(Self::zero(b.grid(), self.degree)?);
            target.push(g.coeff, b, phi)?;
        }
        match out {
            Some(o) => Ok(o),
            None => Self::zero(&Grid::new(&m.sub_product(&keep)?, self.grid.numerics())?, self.degree),
        }
    }

    /// Rewrites generator `index` `(E_2, phi_2)` as `(E_1, phi_1) + (E_3, phi_3)` with
    /// `phi_3 = phi_2 - phi_1 + CS(nabla_1, nabla_2, nabla_3)`, for `E_2 = E_1 (+) E_3` as bundles.
    pub fn rewrite_split(
        &self,
        index: usize,
        e1: &BundleWithConnection,
        e3: &BundleWithConnection,
        phi1: &GradedForm,
    ) -> Result<Self> {
        let g = self.generators.get(index).ok_or_else(|| DktError::Invalid(format!("no generator {index}")))?;
        g.bundle.check_same_bundle(&e1.direct_sum(e3)?)?;
        let cs = cs_three(e1, &g.bundle, e3, self.degree)?;
        let phi3 = g.phi.sub(phi1)?.add(&cs)?;
        let mut out = Self { degree: self.degree, grid: self.grid.clone(), generators: Vec::new() };
        for (i, h) in self.generators.iter().enumerate() {
            if i == index {
                out.push(g.coeff, e1.clone(), phi1.clone())?;
                out.push(g.coeff, e3.clone(), phi3.clone())?;
            } else {
                out.generators.push(h.clone());
            }
        }
        Ok(out)
    }

    /// Desuspension of a class on `S^1 x X` with basepoint `star` on the circle:
    /// restriction to `{star} x X`, holonomy around the circle, `phi = int_{S^1} Phi`.
    pub fn desuspend_at(&self, star: f64) -> Result<DKClassOdd> {
        let m = self.manifold();
        if m.n_factors() == 0 || !matches!(m.factor(0), Factor::Circle { .. }) {
            return Err(DktError::Factors("desuspension needs a leading circle factor".into()));
        }
        let keep: Vec<usize> = (1..m.n_factors()).collect();
        let base_grid = Grid::new(&m.sub_product(&keep)?, self.grid.numerics())?;
        let mut out = DKClassOdd::zero(&base_grid, self.degree - 1)?;
        for g in &self.generators {
            let slice = g.bundle.restrict(&keep, &[star])?;
            let field = Arc::new(HolonomyAut::new(g.bundle.field().clone(), &base_grid, star)?);
            let aut = UnitaryAutomorphism::new(&slice, field)?;
            let phi = g.phi.fiber_integrate(&[0])?;
            out.push(OddGenerator { coeff: g.coeff, aut, phi })?;
        }
        Ok(out)
    }

    /// Desuspension at the basepoint `0` of the circle.
    pub fn desuspend(&self) -> Result<DKClassOdd> {
        self.desuspend_at(0.0)
    }

    /// `p_1^* P (x) p_2^* E` on `T^2 x X` with `phi -> dt_1 ^ dt_2 ^ phi`; degree `r + 2`.
    pub fn double_suspend(&self) -> Result<Self> {
        self.double_suspend_with(1.0)
    }

    /// Double suspension with the second circle of length `a`.
    pub fn double_suspend_with(&self, a: f64) -> Result<Self> {
        let t2 = StructuredManifold::torus(&[1.0, a]);
        let total = t2.product(self.manifold())?;
        let grid = Grid::new(&total, self.grid.numerics())?;
        let p = BundleWithConnection::poincare(&Grid::new(&t2, self.grid.numerics())?, 1)?.pullback(&grid, &[0, 1])?;
        let map: Vec<usize> = (2..total.n_factors()).collect();
        let dt = unit_dt(&grid, 0)?.wedge(&unit_dt(&grid, 1)?)?;
        let mut out = Self::zero(&grid, self.degree + 2)?;
        for g in &self.generators {
            let e = g.bundle.pullback(&grid, &map)?;
            let phi = dt.wedge(&g.phi.pullback(&grid, &map)?)?;
            out.push(g.coeff, p.tensor(&e)?, phi)?;
        }
        Ok(out)
    }

    /// Determinant line with connection `nabla^{Lambda^max} - 2 pi i phi_(1)`, where
    /// `phi_(1)` is `u` times the `u^-1` one-form part of `phi`.
    pub fn det_line(&self) -> Result<DetLine> {
        if self.degree != 0 {
            return Err(DktError::Degree("det_line is defined in degree 0".into()));
        }
        let pieces = self
            .generators
            .iter()
            .map(|g| {
                let shift = g.phi.u_part(-2).form_degree_part(1).shift_u(1);
                Ok(DetPiece { coeff: g.coeff, line: determinant_line(&g.bundle)?, shift })
            })
            .collect::<Result<_>>()?;
        Ok(DetLine { grid: self.grid.clone(), pieces })
    }
}

/// Output of [`homotopy_compare`].
#[derive(Clone, Debug)]
pub struct HomotopyComparison {
    /// `E_1 - E_0 - j(int_0^1 omega(E'))`.
    pub difference: DKClassEven,
    /// `int_0^1 omega(E')`.
    pub certificate: GradedForm,
    /// Largest observable of the difference.
    pub observable_residual: f64,
    /// `max |omega(E_1) - omega(E_0) - d certificate|` on the grid.
    pub form_residual: f64,
}

/// Compares the ends of a class on `I x X`.
pub fn homotopy_compare(family: &DKClassEven) -> Result<HomotopyComparison> {
    let e0 = family.restrict_interval(0.0)?;
    let e1 = family.restrict_interval(1.0)?;
    let certificate = family.omega()?.fiber_integrate(&[0])?;
    let difference = e1.sub(&e0)?.sub(&DKClassEven::j(&certificate)?)?;
    let observable_residual = difference.observable()?.max_abs();
    let form_residual = difference.omega()?.max_norm();
    Ok(HomotopyComparison { difference, certificate, observable_residual, form_residual })
}
