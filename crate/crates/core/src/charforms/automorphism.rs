//! Unitary automorphisms of bundles with connection.

use std::sync::Arc;

use crate::bundles::{
    AutField, BundleWithConnection, ComposedAut, DiagonalPhaseAut, IdentityAut, InverseAut, PhaseAut, PullbackAut,
    SumAut, TensorAut,
};
use crate::bundles::FactorProjection;
use crate::graded::{Factor, Grid};
use crate::linalg::{eye, max_abs, unitarity_defect, CMat};
use crate::{DktError, Result};

/// A unitary automorphism `U` of the bundle underlying a connection.
#[derive(Clone)]
pub struct UnitaryAutomorphism {
    bundle: BundleWithConnection,
    field: Arc<dyn AutField>,
}

impl std::fmt::Debug for UnitaryAutomorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Aut[{} on {:?}]", self.field.describe(), self.bundle)
    }
}

impl UnitaryAutomorphism {
    /// Wraps a field after checking rank, unitarity on the grid and the seam rule
    /// `U(L) = g U(0) g^-1`.
    pub fn new(bundle: &BundleWithConnection, field: Arc<dyn AutField>) -> Result<Self> {
        if field.rank() != bundle.rank() || field.base() != bundle.manifold() {
            return Err(DktError::Rank("automorphism does not act on this bundle".into()));
        }
        let out = Self { bundle: bundle.clone(), field };
        let du = out.unitarity_defect();
        if du > 1e-9 {
            return Err(DktError::Invalid(format!("automorphism is not unitary: defect {du:e}")));
        }
        let ds = out.seam_defect();
        if ds > 1e-8 {
            return Err(DktError::Invalid(format!("automorphism does not respect the gluing: defect {ds:e}")));
        }
        Ok(out)
    }

    pub fn identity(bundle: &BundleWithConnection) -> Result<Self> {
        Self::new(bundle, Arc::new(IdentityAut { base: bundle.manifold().clone(), rank: bundle.rank() }))
    }

    /// Scalar `exp(2 pi i sum_j k_j x_j / L_j)`.
    pub fn phase(bundle: &BundleWithConnection, windings: &[i64]) -> Result<Self> {
        Self::phase_times(bundle, windings, &eye(bundle.rank()))
    }

    /// Scalar phase times a constant unitary.
    pub fn phase_times(bundle: &BundleWithConnection, windings: &[i64], constant: &CMat) -> Result<Self> {
        if windings.len() != bundle.manifold().dim() {
            return Err(DktError::Invalid("one winding per coordinate is required".into()));
        }
        let field = PhaseAut { base: bundle.manifold().clone(), windings: windings.to_vec(), constant: constant.clone() };
        Self::new(bundle, Arc::new(field))
    }

    /// `diag(exp(2 pi i k^(a) . x / L))`.
    pub fn diagonal(bundle: &BundleWithConnection, windings: &[Vec<i64>]) -> Result<Self> {
        let field = DiagonalPhaseAut { base: bundle.manifold().clone(), windings: windings.to_vec() };
        Self::new(bundle, Arc::new(field))
    }

    pub fn bundle(&self) -> &BundleWithConnection {
        &self.bundle
    }

    pub fn field(&self) -> &Arc<dyn AutField> {
        &self.field
    }

    pub fn describe(&self) -> String {
        self.field.describe()
    }

    pub fn eval(&self, chart: usize, x: &[f64]) -> CMat {
        self.field.value(chart, x)
    }

    /// The connection `U . A = U A U^-1 - dU U^-1`.
    pub fn moved_bundle(&self) -> Result<BundleWithConnection> {
        self.bundle.gauge_transform(&self.field)
    }

    /// Pointwise product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.bundle.check_same_bundle(&other.bundle)?;
        Ok(Self { bundle: self.bundle.clone(), field: Arc::new(ComposedAut { a: self.field.clone(), b: other.field.clone() }) })
    }

    pub fn inverse(&self) -> Self {
        Self { bundle: self.bundle.clone(), field: Arc::new(InverseAut { inner: self.field.clone() }) }
    }

    /// Same automorphism on a different connection of the same bundle.
    pub fn on(&self, bundle: &BundleWithConnection) -> Result<Self> {
        self.bundle.check_same_bundle(bundle)?;
        Ok(Self { bundle: bundle.clone(), field: self.field.clone() })
    }

    /// `U (x) V` on `E (x) F`; graded tensor products permute the basis accordingly.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let bundle = self.bundle.tensor(&other.bundle)?;
        let raw: Arc<dyn AutField> = Arc::new(TensorAut { a: self.field.clone(), b: other.field.clone() });
        let field = match tensor_permutation(&self.bundle, &other.bundle) {
            Some(perm) => Arc::new(crate::bundles::PermutedAut { inner: raw, perm }) as Arc<dyn AutField>,
            None => raw,
        };
        Self::new(&bundle, field)
    }

    /// `U (+) V` on `E (+) F`, in the basis order of [`BundleWithConnection::direct_sum`].
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let bundle = self.bundle.direct_sum(&other.bundle)?;
        let raw: Arc<dyn AutField> = Arc::new(SumAut { a: self.field.clone(), b: other.field.clone() });
        let field = if self.bundle.is_graded() || other.bundle.is_graded() {
            let (ra, pa, pb, rb) = (self.bundle.rank(), self.bundle.plus_rank(), other.bundle.plus_rank(), other.bundle.rank());
            let perm: Vec<usize> = (0..pa).chain(ra..ra + pb).chain(pa..ra).chain(ra + pb..ra + rb).collect();
            Arc::new(crate::bundles::PermutedAut { inner: raw, perm }) as Arc<dyn AutField>
        } else {
            raw
        };
        Self::new(&bundle, field)
    }

    /// Largest difference of the values of two automorphisms at probe points of the grid.
    pub fn value_distance(&self, other: &Self) -> Result<f64> {
        self.bundle.check_same_bundle(&other.bundle)?;
        let g = self.bundle.grid();
        let mut worst: f64 = 0.0;
        for ch in 0..g.n_charts() {
            let chart = g.chart(ch);
            let stride = (chart.n_points / 64).max(1);
            for i in (0..chart.n_points).step_by(stride) {
                let x = chart.point(i);
                worst = worst.max(max_abs(&(self.eval(ch, &x) - other.eval(ch, &x))));
            }
        }
        Ok(worst)
    }

    pub fn pullback(&self, target: &Arc<Grid>, factor_map: &[usize]) -> Result<Self> {
        let bundle = self.bundle.pullback(target, factor_map)?;
        let proj = FactorProjection::new(self.bundle.manifold(), target.manifold(), factor_map)?;
        Self::new(&bundle, Arc::new(PullbackAut { inner: self.field.clone(), proj }))
    }

    /// `max |U^* U - 1|` over grid points.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.bundle.grid();
        let mut worst: f64 = 0.0;
        for ch in 0..g.n_charts() {
            let chart = g.chart(ch);
            let stride = (chart.n_points / 64).max(1);
            for i in (0..chart.n_points).step_by(stride) {
                worst = worst.max(unitarity_defect(&self.eval(ch, &chart.point(i))));
            }
        }
        worst
    }

    /// Violation of `U(L) = g U(0) g^-1` across seams and `U_S = g^-1 U_N g` across caps.
    pub fn seam_defect(&self) -> f64 {
        let m = self.bundle.manifold();
        let f = self.bundle.field();
        let offsets = m.coordinate_offsets();
        let spheres = m.sphere_factors();
        let r = self.bundle.rank();
        let mut worst: f64 = 0.0;
        for &t in &[0.19, 0.71] {
            let x: Vec<f64> = (0..m.dim()).map(|k| t * (1.0 + 0.31 * k as f64)).collect();
            for (fi, fac) in m.factors().iter().enumerate() {
                let k = offsets[fi];
                match fac {
                    Factor::Circle { length } => {
                        let mut x0 = x.clone();
                        x0[k] = 0.0;
                        let mut x1 = x.clone();
                        x1[k] = *length;
                        let g = f.seam(k, 0, &x0).unwrap_or_else(|| eye(r));
                        let expect = &g * self.eval(0, &x0) * g.adjoint();
                        worst = worst.max(max_abs(&(expect - self.eval(0, &x1))));
                    }
                    Factor::Sphere2 { .. } => {
                        let s = spheres.iter().position(|&q| q == fi).unwrap();
                        let mut y = x.clone();
                        y[k] = std::f64::consts::FRAC_PI_2;
                        let g = f.cap(s, 0, &y).unwrap_or_else(|| eye(r));
                        let expect = g.adjoint() * self.eval(0, &y) * &g;
                        worst = worst.max(max_abs(&(expect - self.eval(1 << s, &y))));
                    }
                    Factor::Interval01 => {}
                }
            }
        }
        worst
    }
}

/// Basis permutation applied by a graded tensor product, if any.
fn tensor_permutation(a: &BundleWithConnection, b: &BundleWithConnection) -> Option<Vec<usize>> {
    if !a.is_graded() && !b.is_graded() {
        return None;
    }
    let rb = b.rank();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for i in 0..a.rank() {
        for j in 0..rb {
            if (i >= a.plus_rank()) != (j >= b.plus_rank()) {
                odd.push(i * rb + j);
            } else {
                even.push(i * rb + j);
            }
        }
    }
    even.extend(odd);
    Some(even)
}
