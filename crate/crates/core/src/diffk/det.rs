//! Determinant maps: a line with connection for even classes, a circle-valued map for odd ones.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{circle_cycles, ReferenceCycle};
use crate::bundles::{BundleWithConnection, ConnectionField, LocalConnection};
use crate::graded::{GradedForm, Grid, StructuredManifold};
use crate::linalg::{c, det, scalar, supertrace, CMat, MatForm};
use crate::{DktError, Result, C64};

/// Superdeterminant of an even matrix: `det(g_++) / det(g_--)`.
pub fn superdet(g: &CMat, plus: usize) -> C64 {
    let r = g.nrows();
    let top = det(&g.view((0, 0), (plus, plus)).into_owned());
    if plus == r {
        return top;
    }
    top / det(&g.view((plus, plus), (r - plus, r - plus)).into_owned())
}

/// `Lambda^max(E_+) (x) Lambda^max(E_-)^*` with the induced connection.
pub(crate) struct Determinant {
    pub inner: Arc<dyn ConnectionField>,
    pub plus: usize,
}

impl ConnectionField for Determinant {
    fn rank(&self) -> usize {
        1
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let lc = self.inner.eval(chart, x);
        let a = lc.a.iter().map(|m| scalar(1, supertrace(m, self.plus))).collect();
        let mut da = MatForm::zero(1);
        for (m, v) in &lc.da.comps {
            da.add_comp(*m, scalar(1, supertrace(v, self.plus)));
        }
        LocalConnection { a, da }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.seam(coord, chart, x).map(|g| scalar(1, superdet(&g, self.plus)))
    }
    fn cap(&self, sphere: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.cap(sphere, chart, x).map(|g| scalar(1, superdet(&g, self.plus)))
    }
    fn describe(&self) -> String {
        format!("det({})", self.inner.describe())
    }
}

/// Determinant line of `E` as an ungraded line bundle.
pub fn determinant_line(e: &BundleWithConnection) -> Result<BundleWithConnection> {
    BundleWithConnection::new(Arc::new(Determinant { inner: e.field().clone(), plus: e.plus_rank() }), e.grid())
}

/// One factor `(Lambda^max E, phi_(1))^coeff` of a determinant line.
#[derive(Clone, Debug)]
pub struct DetPiece {
    pub coeff: i64,
    pub line: BundleWithConnection,
    /// The real one-form `phi_(1)`; the connection is `nabla^line - 2 pi i phi_(1)`.
    pub shift: GradedForm,
}

/// Determinant line of a degree-0 class, kept as a formal product of pieces.
#[derive(Clone, Debug)]
pub struct DetLine {
    pub grid: Arc<Grid>,
    pub pieces: Vec<DetPiece>,
}

impl DetLine {
    /// Holonomy around a circle factor through the grid basepoint.
    pub fn holonomy(&self, cycle: &ReferenceCycle) -> Result<C64> {
        let m = self.grid.manifold();
        if cycle.dim != 1 || cycle.factors.len() != 1 {
            return Err(DktError::Factors("holonomy needs a single circle factor".into()));
        }
        let coord = m.coordinate_offsets()[cycle.factors[0]];
        let x = self.grid.chart(0).point(0);
        let mut out = c(1.0, 0.0);
        for p in &self.pieces {
            let h = p.line.holonomy(coord, 0, &x)?[(0, 0)];
            let flux = cycle.period(&p.shift)?.coeff(0);
            let total = h * (c(0.0, -2.0 * PI) * flux).exp();
            out *= total.powi(p.coeff as i32);
        }
        Ok(out)
    }

    /// Holonomies around every circle factor.
    pub fn holonomies(&self) -> Result<BTreeMap<ReferenceCycle, C64>> {
        circle_cycles(self.grid.manifold()).into_iter().map(|cyc| Ok((cyc.clone(), self.holonomy(&cyc)?))).collect()
    }

    /// Period of the curvature form `c_1` of the shifted connection over a 2-cycle.
    pub fn first_chern(&self, cycle: &ReferenceCycle) -> Result<f64> {
        let mut total = 0.0;
        for p in &self.pieces {
            let c1 = crate::charforms::c1_form(&p.line)?;
            let flux = c1.add(&p.shift.d().shift_u(-1))?;
            total += p.coeff as f64 * cycle.period(&flux)?.real_coeff(-2);
        }
        Ok(total)
    }

    /// The underlying line bundle, with the φ-shift dropped.
    pub fn line(&self) -> Result<BundleWithConnection> {
        let mut out = BundleWithConnection::trivial(&self.grid, 1)?;
        for p in &self.pieces {
            let base = if p.coeff < 0 { p.line.dual()? } else { p.line.clone() };
            for _ in 0..p.coeff.unsigned_abs() {
                out = out.tensor(&base)?;
            }
        }
        Ok(out)
    }
}

/// The sampled map `x -> exp(2 pi i phi_(0)(x)) sdet U(x)` of an odd class.
#[derive(Clone, Debug)]
pub struct DetCircle {
    /// Values as a 0-form at u-degree 0.
    pub values: GradedForm,
}

impl DetCircle {
    pub fn value(&self, chart: usize, idx: usize) -> C64 {
        self.values.value(0, 0, chart, idx)
    }

    /// Largest pointwise distance to another sampled map.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let d = self.values.sub(&other.values)?;
        Ok(d.max_norm())
    }

    /// Largest deviation of `|f|` from 1.
    pub fn modulus_defect(&self) -> f64 {
        let g = self.values.grid();
        let mut worst: f64 = 0.0;
        for ch in 0..g.n_charts() {
            for i in 0..g.chart(ch).n_points {
                worst = worst.max((self.value(ch, i).norm() - 1.0).abs());
            }
        }
        worst
    }

    /// Winding number around a circle factor through the basepoint.
    pub fn winding(&self, cycle: &ReferenceCycle) -> Result<f64> {
        if cycle.dim != 1 || cycle.factors.len() != 1 {
            return Err(DktError::Factors("winding needs a single circle factor".into()));
        }
        let m = self.values.manifold();
        let points: Vec<_> = (0..m.n_factors())
            .filter(|i| *i != cycle.factors[0])
            .map(|i| crate::graded::SlicePoint::basepoint(m.factor(i)))
            .collect();
        let line = self.values.restrict(&cycle.factors, &points)?;
        let vals: &Vec<C64> = &line.component(0, 0).ok_or_else(|| DktError::Numerical("empty det map".into()))?[0];
        let n = vals.len();
        let turns: f64 = (0..n).map(|k| (vals[(k + 1) % n] / vals[k]).arg()).sum();
        Ok(turns / (2.0 * PI))
    }
}
