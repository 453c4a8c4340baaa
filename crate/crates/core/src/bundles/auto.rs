//! Unitary automorphism fields.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::field::{AutField, FactorProjection};
use crate::graded::{Factor, Grid, StructuredManifold};
use crate::linalg::{block_diag, c, eye, kron, zeros, CMat};

/// `U = exp(2 pi i sum_j k_j x_j / L_j) C` for a constant unitary `C`.
pub struct PhaseAut {
    pub base: StructuredManifold,
    pub windings: Vec<i64>,
    pub constant: CMat,
}

fn lengths(m: &StructuredManifold) -> Vec<f64> {
    let mut out = Vec::new();
    for f in m.factors() {
        match f {
            Factor::Circle { length } => out.push(*length),
            Factor::Interval01 => out.push(1.0),
            Factor::Sphere2 { .. } => out.extend([PI, 2.0 * PI]),
        }
    }
    out
}

impl AutField for PhaseAut {
    fn rank(&self) -> usize {
        self.constant.nrows()
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, _chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let ls = lengths(&self.base);
        let arg: f64 = self.windings.iter().zip(x).zip(&ls).map(|((k, xi), l)| *k as f64 * xi / l).sum::<f64>() * 2.0 * PI;
        let u = &self.constant * c(0.0, arg).exp();
        let du = self.windings.iter().zip(&ls).map(|(k, l)| &u * c(0.0, 2.0 * PI * *k as f64 / l)).collect();
        (u, du)
    }
    fn describe(&self) -> String {
        format!("phase(windings={:?})", self.windings)
    }
}

/// Diagonal `U = diag(exp(2 pi i k^(a) . x / L))`, one winding vector per basis element.
pub struct DiagonalPhaseAut {
    pub base: StructuredManifold,
    pub windings: Vec<Vec<i64>>,
}

impl AutField for DiagonalPhaseAut {
    fn rank(&self) -> usize {
        self.windings.len()
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, _chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let ls = lengths(&self.base);
        let r = self.rank();
        let mut u = zeros(r);
        let mut du = vec![zeros(r); x.len()];
        for (a, w) in self.windings.iter().enumerate() {
            let arg: f64 = w.iter().zip(x).zip(&ls).map(|((k, xi), l)| *k as f64 * xi / l).sum::<f64>() * 2.0 * PI;
            let e = c(0.0, arg).exp();
            u[(a, a)] = e;
            for (j, k) in w.iter().enumerate() {
                du[j][(a, a)] = e * c(0.0, 2.0 * PI * *k as f64 / ls[j]);
            }
        }
        (u, du)
    }
    fn describe(&self) -> String {
        format!("diagonal_phases({:?})", self.windings)
    }
}

/// Pointwise product `U_1 U_2`.
pub struct ComposedAut {
    pub a: Arc<dyn AutField>,
    pub b: Arc<dyn AutField>,
}

impl AutField for ComposedAut {
    fn rank(&self) -> usize {
        self.a.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let (ua, da) = self.a.eval(chart, x);
        let (ub, db) = self.b.eval(chart, x);
        let du = da.iter().zip(&db).map(|(p, q)| p * &ub + &ua * q).collect();
        (&ua * &ub, du)
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        self.a.value(chart, x) * self.b.value(chart, x)
    }
    fn describe(&self) -> String {
        format!("{} * {}", self.a.describe(), self.b.describe())
    }
}

/// `U (x) V` on a tensor product.
pub struct TensorAut {
    pub a: Arc<dyn AutField>,
    pub b: Arc<dyn AutField>,
}

impl AutField for TensorAut {
    fn rank(&self) -> usize {
        self.a.rank() * self.b.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let (ua, da) = self.a.eval(chart, x);
        let (ub, db) = self.b.eval(chart, x);
        let du = da.iter().zip(&db).map(|(p, q)| kron(p, &ub) + kron(&ua, q)).collect();
        (kron(&ua, &ub), du)
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        kron(&self.a.value(chart, x), &self.b.value(chart, x))
    }
    fn describe(&self) -> String {
        format!("{} (x) {}", self.a.describe(), self.b.describe())
    }
}

/// `U (+) V` on a direct sum.
pub struct SumAut {
    pub a: Arc<dyn AutField>,
    pub b: Arc<dyn AutField>,
}

impl AutField for SumAut {
    fn rank(&self) -> usize {
        self.a.rank() + self.b.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let (ua, da) = self.a.eval(chart, x);
        let (ub, db) = self.b.eval(chart, x);
        let du = da.iter().zip(&db).map(|(p, q)| block_diag(p, q)).collect();
        (block_diag(&ua, &ub), du)
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        block_diag(&self.a.value(chart, x), &self.b.value(chart, x))
    }
    fn describe(&self) -> String {
        format!("{} (+) {}", self.a.describe(), self.b.describe())
    }
}

/// Constant identity.
pub struct IdentityAut {
    pub base: StructuredManifold,
    pub rank: usize,
}

impl AutField for IdentityAut {
    fn rank(&self) -> usize {
        self.rank
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, _chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        (eye(self.rank), vec![zeros(self.rank); x.len()])
    }
    fn describe(&self) -> String {
        "identity".into()
    }
}

/// Pullback along a factor projection.
pub struct PullbackAut {
    pub inner: Arc<dyn AutField>,
    pub proj: FactorProjection,
}

impl AutField for PullbackAut {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        &self.proj.target
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let (u, du) = self.inner.eval(self.proj.chart_map[chart], &self.proj.source_point(x));
        (u, self.proj.pull_one_form(&du, self.rank()))
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        self.inner.value(self.proj.chart_map[chart], &self.proj.source_point(x))
    }
    fn describe(&self) -> String {
        format!("pullback({})", self.inner.describe())
    }
}

/// Permuted basis, matching [`super::field::Permuted`].
pub struct PermutedAut {
    pub inner: Arc<dyn AutField>,
    pub perm: Vec<usize>,
}

impl AutField for PermutedAut {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let n = self.perm.len();
        let p = |m: &CMat| CMat::from_fn(n, n, |i, j| m[(self.perm[i], self.perm[j])]);
        let (u, du) = self.inner.eval(chart, x);
        (p(&u), du.iter().map(p).collect())
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        let n = self.perm.len();
        let u = self.inner.value(chart, x);
        CMat::from_fn(n, n, |i, j| u[(self.perm[i], self.perm[j])])
    }
    fn describe(&self) -> String {
        format!("permuted({})", self.inner.describe())
    }
}

/// Pointwise inverse `U^-1 = U^*`, with `d(U^-1) = -U^-1 dU U^-1`.
pub struct InverseAut {
    pub inner: Arc<dyn AutField>,
}

impl AutField for InverseAut {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let (u, du) = self.inner.eval(chart, x);
        let ui = u.adjoint();
        let d = du.iter().map(|dk| -(&ui * dk * &ui)).collect();
        (ui, d)
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        self.inner.value(chart, x).adjoint()
    }
    fn describe(&self) -> String {
        format!("inverse({})", self.inner.describe())
    }
}

/// Automorphism given only by values; derivatives by fourth-order central differences.
pub struct NumericAut {
    pub base: StructuredManifold,
    pub rank: usize,
    pub values: Arc<dyn Fn(usize, &[f64]) -> CMat + Send + Sync>,
    pub step: f64,
    pub label: String,
}

impl AutField for NumericAut {
    fn rank(&self) -> usize {
        self.rank
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let u = (self.values)(chart, x);
        let h = self.step;
        let mut du = Vec::with_capacity(x.len());
        let mut y = x.to_vec();
        for k in 0..x.len() {
            let mut at = |dx: f64| {
                y[k] = x[k] + dx;
                let v = (self.values)(chart, &y);
                y[k] = x[k];
                v
            };
            let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
            du.push(((p1 - m1) * c(8.0, 0.0) - (p2 - m2)) * c(1.0 / (12.0 * h), 0.0));
        }
        (u, du)
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        (self.values)(chart, x)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Values precomputed on the nodes of a grid; other points fall through to the inner field.
pub struct CachedAut {
    pub inner: Arc<dyn AutField>,
    cache: HashMap<(usize, Vec<u64>), (CMat, Vec<CMat>)>,
}

impl CachedAut {
    pub fn new(inner: Arc<dyn AutField>, grid: &Arc<Grid>) -> Self {
        let mut cache = HashMap::new();
        for ch in 0..grid.n_charts() {
            let chart = grid.chart(ch);
            let vals: Vec<(Vec<u64>, (CMat, Vec<CMat>))> = (0..chart.n_points)
                .into_par_iter()
                .map(|i| {
                    let p = chart.point(i);
                    (p.iter().map(|v| v.to_bits()).collect(), inner.eval(ch, &p))
                })
                .collect();
            for (k, v) in vals {
                cache.insert((ch, k), v);
            }
        }
        Self { inner, cache }
    }
}

impl AutField for CachedAut {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        let key = (chart, x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        match self.cache.get(&key) {
            Some(v) => v.clone(),
            None => self.inner.eval(chart, x),
        }
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        let key = (chart, x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        match self.cache.get(&key) {
            Some(v) => v.0.clone(),
            None => self.inner.value(chart, x),
        }
    }
    fn describe(&self) -> String {
        self.inner.describe()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn numeric_derivative_matches_exact() {
        let base = StructuredManifold::torus(&[1.0, 2.0]);
        let exact = Arc::new(PhaseAut { base: base.clone(), windings: vec![1, -2], constant: eye(1) });
        let e2 = exact.clone();
        let num = NumericAut {
            base,
            rank: 1,
            values: Arc::new(move |ch, x| e2.eval(ch, x).0),
            step: 1e-3,
            label: "num".into(),
        };
        let x = [0.3, 1.1];
        let (u, du) = exact.eval(0, &x);
        let (v, dv) = num.eval(0, &x);
        assert!(max_abs(&(u - v)) < 1e-15);
        for k in 0..2 {
            assert!(max_abs(&(&du[k] - &dv[k])) < 1e-9);
        }
    }
}
