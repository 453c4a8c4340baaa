//! Differential K-theory classes in the geometric even and odd models.
//!
//! A class is a formal integer combination of generators. Classes are compared only
//! through observables: the rank, periods of `omega` over reference cycles, and the
//! holonomies of the Det maps.

mod det;
mod even;
mod holonomy_aut;
mod odd;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use det::{DetCircle, DetLine, DetPiece};
pub use even::{homotopy_compare, DKClassEven, EvenGenerator, HomotopyComparison};
pub use odd::{cs_three_odd, DKClassOdd, OddGenerator};

use crate::graded::form::SlicePoint;
use crate::graded::{Factor, GradedForm, Grid, LaurentScalar, StructuredManifold};
use crate::{DktError, Result};

/// Sub-product of closed factors; the other factors sit at their basepoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReferenceCycle {
    pub factors: Vec<usize>,
    pub dim: usize,
}

impl fmt::Display for ReferenceCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "pt");
        }
        let parts: Vec<String> = self.factors.iter().map(|i| format!("f{i}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl ReferenceCycle {
    pub fn new(m: &StructuredManifold, factors: &[usize]) -> Result<Self> {
        let mut fs = factors.to_vec();
        fs.sort_unstable();
        fs.dedup();
        if fs.len() != factors.len() || fs.iter().any(|&i| i >= m.n_factors() || !m.factor(i).is_closed()) {
            return Err(DktError::Factors(format!("{factors:?} is not a set of closed factors of {m:?}")));
        }
        let dim = fs.iter().map(|&i| m.factor(i).dim()).sum();
        Ok(Self { factors: fs, dim })
    }

    /// `int_W form` with `W` this cycle.
    pub fn period(&self, form: &GradedForm) -> Result<LaurentScalar> {
        let m = form.manifold();
        if self.factors.len() == m.n_factors() {
            return form.integrate();
        }
        let points: Vec<SlicePoint> =
            (0..m.n_factors()).filter(|i| !self.factors.contains(i)).map(|i| SlicePoint::basepoint(m.factor(i))).collect();
        form.restrict(&self.factors, &points)?.integrate()
    }
}

/// All sub-products of closed factors, the point included.
pub fn reference_cycles(m: &StructuredManifold) -> Vec<ReferenceCycle> {
    let closed: Vec<usize> = (0..m.n_factors()).filter(|&i| m.factor(i).is_closed()).collect();
    let mut out: Vec<ReferenceCycle> = (0u32..1 << closed.len())
        .map(|bits| {
            let fs: Vec<usize> = closed.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, &f)| f).collect();
            ReferenceCycle::new(m, &fs).expect("closed factors")
        })
        .collect();
    out.sort_by(|a, b| (a.dim, &a.factors).cmp(&(b.dim, &b.factors)));
    out
}

/// The circle factors, as one-dimensional cycles.
pub fn circle_cycles(m: &StructuredManifold) -> Vec<ReferenceCycle> {
    (0..m.n_factors())
        .filter(|&i| matches!(m.factor(i), Factor::Circle { .. }))
        .map(|i| ReferenceCycle::new(m, &[i]).expect("circle"))
        .collect()
}

/// Chern-character shadow of `c(x)`: rank and periods of `omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct KClassObservable {
    pub degree: i32,
    pub rank: i64,
    pub periods: BTreeMap<ReferenceCycle, LaurentScalar>,
}

impl KClassObservable {
    /// Periods of `omega` over the cycles whose dimension has the parity of `degree`.
    pub fn from_form(omega: &GradedForm, rank: i64) -> Result<Self> {
        let degree = omega.total_degree();
        let mut periods = BTreeMap::new();
        for cyc in reference_cycles(omega.manifold()) {
            if (cyc.dim as i32 - degree) % 2 == 0 {
                let p = cyc.period(omega)?;
                periods.insert(cyc, p);
            }
        }
        Ok(Self { degree, rank, periods })
    }

    /// Largest difference; incompatible degrees or ranks are infinitely far apart.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.degree != other.degree || self.rank != other.rank {
            return f64::INFINITY;
        }
        let zero = LaurentScalar::zero();
        let mut worst: f64 = 0.0;
        for (c, p) in &self.periods {
            worst = worst.max(p.distance(other.periods.get(c).unwrap_or(&zero)));
        }
        for (c, p) in &other.periods {
            if !self.periods.contains_key(c) {
                worst = worst.max(p.max_abs());
            }
        }
        worst
    }

    /// Distance of the periods from the integral lattice: over a `k`-cycle the period
    /// must be an integer multiple of `u^{(degree - k)/2}`.
    pub fn lattice_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, p) in &self.periods {
            let key = self.degree - c.dim as i32;
            for (k, v) in p.terms() {
                let d = if k == key { (v.re - v.re.round()).abs().max(v.im.abs()) } else { v.norm() };
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.periods.values().map(|p| p.max_abs()).fold(self.rank.unsigned_abs() as f64, f64::max)
    }
}

/// `dx_k / L` on the given circle or interval factor, at u-degree 0.
pub(crate) fn unit_dt(grid: &Arc<Grid>, factor: usize) -> Result<GradedForm> {
    let m = grid.manifold();
    let len = match m.factor(factor) {
        Factor::Circle { length } => length,
        Factor::Interval01 => 1.0,
        Factor::Sphere2 { .. } => return Err(DktError::Factors("dt needs a one-dimensional factor".into())),
    };
    let k = m.coordinate_offsets()[factor];
    GradedForm::from_fn(grid, 0, 1 << k, |_, _| crate::C64::new(1.0 / len, 0.0))
}

pub(crate) fn check_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(DktError::ManifoldMismatch(format!("{:?} vs {:?}", a.manifold(), b.manifold())))
    }
}

#[cfg(test)]
mod tests;
