//! Odd classes: formal sums of `(G, h, nabla, U, phi)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::det::{superdet, DetCircle};
use super::even::DKClassEven;
use super::{check_grid, unit_dt, KClassObservable};
use crate::bundles::{AutField, BundleWithConnection, FactorProjection, PullbackAut};
use crate::charforms::{cs_aut, odd_chern_form, UnitaryAutomorphism};
use crate::graded::{GradedForm, Grid, StructuredManifold};
use crate::linalg::c;
use crate::{DktError, Result};

/// Tolerance for recognising `U_2 = U_1 (+) U_3` in a splitting.
const SPLIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct OddGenerator {
    pub coeff: i64,
    pub aut: UnitaryAutomorphism,
    /// Total degree `r - 1`, meaningful modulo exact forms.
    pub phi: GradedForm,
}

impl OddGenerator {
    pub fn bundle(&self) -> &BundleWithConnection {
        self.aut.bundle()
    }
}

/// A class in the odd group of degree `r`.
#[derive(Clone, Debug)]
pub struct DKClassOdd {
    degree: i32,
    grid: Arc<Grid>,
    generators: Vec<OddGenerator>,
}

/// Odd transgression of a splitting: `int_0^1 omega(nabla^F, U_2)` on `I x X`, where
/// `nabla^F` runs from `nabla_1 (+) nabla_3` to `nabla_2`. Then
/// `d cs = omega(U_2) - omega(U_1) - omega(U_3)`; total degree `r - 1`.
pub fn cs_three_odd(
    a1: &UnitaryAutomorphism,
    a2: &UnitaryAutomorphism,
    a3: &UnitaryAutomorphism,
    r: i32,
) -> Result<GradedForm> {
    let split = a1.direct_sum(a3)?;
    let d = split.value_distance(&a2.on(split.bundle())?)?;
    if d > SPLIT_TOL {
        return Err(DktError::Invalid(format!("automorphisms do not split: defect {d:e}")));
    }
    let cyl = split.bundle().cylinder(a2.bundle())?;
    let n = a2.bundle().manifold().n_factors();
    let map: Vec<usize> = (1..=n).collect();
    let proj = FactorProjection::new(a2.bundle().manifold(), cyl.manifold(), &map)?;
    let field: Arc<dyn AutField> = Arc::new(PullbackAut { inner: a2.field().clone(), proj });
    let u = UnitaryAutomorphism::new(&cyl, field)?;
    odd_chern_form(&u, r)?.fiber_integrate(&[0])
}

impl DKClassOdd {
    pub fn zero(grid: &Arc<Grid>, degree: i32) -> Result<Self> {
        if degree % 2 == 0 {
            return Err(DktError::Degree(format!("odd class in degree {degree}")));
        }
        Ok(Self { degree, grid: grid.clone(), generators: Vec::new() })
    }

    pub fn generator(aut: UnitaryAutomorphism, phi: GradedForm, degree: i32) -> Result<Self> {
        let mut out = Self::zero(aut.bundle().grid(), degree)?;
        out.push(OddGenerator { coeff: 1, aut, phi })?;
        Ok(out)
    }

    /// `(G, nabla, U, 0)`.
    pub fn from_aut(aut: UnitaryAutomorphism, degree: i32) -> Result<Self> {
        let phi = GradedForm::zero(aut.bundle().grid(), degree - 1);
        Self::generator(aut, phi, degree)
    }

    /// `j(alpha)`: the rank-zero generator carrying `alpha`.
    pub fn j(alpha: &GradedForm) -> Result<Self> {
        let b = BundleWithConnection::trivial(alpha.grid(), 0)?;
        Self::generator(UnitaryAutomorphism::identity(&b)?, alpha.clone(), alpha.total_degree() + 1)
    }

    pub fn push(&mut self, g: OddGenerator) -> Result<()> {
        check_grid(&self.grid, g.bundle().grid())?;
        check_grid(&self.grid, g.phi.grid())?;
        if g.phi.total_degree() != self.degree - 1 {
            return Err(DktError::Degree(format!(
                "phi has total degree {} in a degree-{} class",
                g.phi.total_degree(),
                self.degree
            )));
        }
        if g.coeff != 0 {
            self.generators.push(g);
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

    pub fn generators(&self) -> &[OddGenerator] {
        &self.generators
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        if self.degree != other.degree {
            return Err(DktError::Degree(format!("degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        out.generators.extend(other.generators.iter().cloned());
        Ok(out)
    }

    pub fn scale(&self, n: i64) -> Self {
        let mut out = self.clone();
        out.generators = if n == 0 {
            Vec::new()
        } else {
            self.generators.iter().map(|g| OddGenerator { coeff: g.coeff * n, ..g.clone() }).collect()
        };
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `omega = sum_i n_i (omega(nabla_i, U_i) + d phi_i)`, total degree `r`.
    pub fn omega(&self) -> Result<GradedForm> {
        let mut out = GradedForm::zero(&self.grid, self.degree);
        for g in &self.generators {
            let w = odd_chern_form(&g.aut, self.degree)?.add(&g.phi.d())?;
            out = out.add(&w.scale_real(g.coeff as f64))?;
        }
        Ok(out)
    }

    /// Periods of `omega` over the odd reference cycles; the rank is zero.
    pub fn observable(&self) -> Result<KClassObservable> {
        KClassObservable::from_form(&self.omega()?, 0)
    }

    pub fn pullback(&self, target: &Arc<Grid>, factor_map: &[usize]) -> Result<Self> {
        let mut out = Self::zero(target, self.degree)?;
        for g in &self.generators {
            out.push(OddGenerator {
                coeff: g.coeff,
                aut: g.aut.pullback(target, factor_map)?,
                phi: g.phi.pullback(target, factor_map)?,
            })?;
        }
        Ok(out)
    }

    /// Relation (1): rewrites generator `index` `(G_2, U_2, phi_2)` as `(G_1, U_1, phi_1) + (G_3, U_3, phi_3)`
    /// with `phi_3 = phi_2 - phi_1 + CS`, for `G_2 = G_1 (+) G_3` and `U_2 = U_1 (+) U_3`.
    pub fn rewrite_split(
        &self,
        index: usize,
        a1: &UnitaryAutomorphism,
        a3: &UnitaryAutomorphism,
        phi1: &GradedForm,
    ) -> Result<Self> {
        let g = self.generators.get(index).ok_or_else(|| DktError::Invalid(format!("no generator {index}")))?;
        let cs = cs_three_odd(a1, &g.aut, a3, self.degree)?;
        let phi3 = g.phi.sub(phi1)?.add(&cs)?;
        let mut out = Self { degree: self.degree, grid: self.grid.clone(), generators: Vec::new() };
        for (i, h) in self.generators.iter().enumerate() {
            if i == index {
                out.push(OddGenerator { coeff: g.coeff, aut: a1.clone(), phi: phi1.clone() })?;
                out.push(OddGenerator { coeff: g.coeff, aut: a3.clone(), phi: phi3.clone() })?;
            } else {
                out.generators.push(h.clone());
            }
        }
        Ok(out)
    }

    /// Relation (2): merges generators `i` and `j` on the same connection into
    /// `(G, nabla, U_i U_j, phi_i + phi_j - CS(nabla, U_i, U_j))`.
    pub fn rewrite_merge(&self, i: usize, j: usize) -> Result<Self> {
        let (gi, gj) = match (self.generators.get(i), self.generators.get(j)) {
            (Some(a), Some(b)) if i != j => (a, b),
            _ => return Err(DktError::Invalid(format!("cannot merge generators {i} and {j}"))),
        };
        if gi.coeff != gj.coeff {
            return Err(DktError::Invalid("merged generators need equal coefficients".into()));
        }
        let uj = gj.aut.on(gi.bundle())?;
        let conn = gi.bundle().connection_distance(gj.bundle())?;
        if conn > SPLIT_TOL {
            return Err(DktError::Invalid(format!("merged generators need the same connection: defect {conn:e}")));
        }
        let cs = cs_aut(&gi.aut, &uj, self.degree)?;
        let phi = gi.phi.add(&gj.phi)?.sub(&cs)?;
        let merged = OddGenerator { coeff: gi.coeff, aut: gi.aut.compose(&uj)?, phi };
        let mut out = Self { degree: self.degree, grid: self.grid.clone(), generators: Vec::new() };
        for (k, h) in self.generators.iter().enumerate() {
            if k == i {
                out.generators.push(merged.clone());
            } else if k != j {
                out.generators.push(h.clone());
            }
        }
        Ok(out)
    }

    /// Suspension to `S^1 x X`: the mapping torus of `U` with the interpolated connection
    /// and `Phi = dt ^ phi`.
    pub fn suspend(&self) -> Result<DKClassEven> {
        let circle = StructuredManifold::circle(1.0);
        let total = circle.product(self.manifold())?;
        let grid = Grid::new(&total, self.grid.numerics())?;
        let map: Vec<usize> = (1..total.n_factors()).collect();
        let dt = unit_dt(&grid, 0)?;
        let mut out = DKClassEven::zero(&grid, self.degree + 1)?;
        for g in &self.generators {
            let e = g.bundle().mapping_torus(g.aut.field(), 1.0)?;
            let phi = dt.wedge(&g.phi.pullback(&grid, &map)?)?;
            out.push(g.coeff, e, phi)?;
        }
        Ok(out)
    }

    /// `x -> exp(2 pi i phi_(0)(x)) sdet U(x)`, with `phi_(0)` the `u^-1` zero-form part of
    /// `phi` times `u`. Defined in degree -1.
    pub fn det_circle(&self) -> Result<DetCircle> {
        if self.degree != -1 {
            return Err(DktError::Degree("det_circle is defined in degree -1".into()));
        }
        let grid = &self.grid;
        let mut fields: Vec<Vec<crate::C64>> = grid.charts().iter().map(|ch| vec![c(1.0, 0.0); ch.n_points]).collect();
        for g in &self.generators {
            let plus = g.bundle().plus_rank();
            for (ch, vals) in fields.iter_mut().enumerate() {
                let chart = grid.chart(ch);
                for (i, v) in vals.iter_mut().enumerate() {
                    let phi0 = g.phi.value(-2, 0, ch, i);
                    let u = g.aut.eval(ch, &chart.point(i));
                    let f = (c(0.0, 2.0 * PI) * phi0).exp() * superdet(&u, plus);
                    *v *= f.powi(g.coeff as i32);
                }
            }
        }
        let mut values = GradedForm::zero(grid, 0);
        values.set_component(0, 0, fields)?;
        Ok(DetCircle { values })
    }
}
