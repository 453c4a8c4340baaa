//! Hermitian vector bundles with unitary connections on structured manifolds.

pub mod auto;
pub mod field;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

pub use auto::{
    CachedAut, ComposedAut, DiagonalPhaseAut, IdentityAut, InverseAut, NumericAut, PermutedAut, PhaseAut, PullbackAut, SumAut,
    TensorAut,
};
pub use field::{
    AffineCombination, AmbientOneForm, AutField, ConnectionField, ConstantOneForm, DirectSum, Dual, FactorProjection,
    FlatLine, GaugeTransformed, LocalConnection, LocalFormula, MatrixOneForm, Monopole, Permuted, Perturbed, Poincare, Pullback,
    Realified, Restricted, Tensor, TrigOneForm, TrigTerm, Trivial, WeightFn,
};

use crate::graded::{Factor, Grid, StructuredManifold};
use crate::linalg::{c, expm, max_abs, zeros, CMat, MatForm};
use crate::{DktError, Result};

/// Default number of Magnus steps for holonomies.
pub const HOLONOMY_STEPS: usize = 1024;

/// A bundle with connection, sampled curvature cached on a grid.
#[derive(Clone)]
pub struct BundleWithConnection {
    field: Arc<dyn ConnectionField>,
    grid: Arc<Grid>,
    plus: usize,
    graded: bool,
    curvature: Arc<Vec<Vec<MatForm>>>,
}

impl std::fmt::Debug for BundleWithConnection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bundle[{} on {:?}]", self.field.describe(), self.grid.manifold())
    }
}

impl BundleWithConnection {
    /// Ungraded bundle.
    pub fn new(field: Arc<dyn ConnectionField>, grid: &Arc<Grid>) -> Result<Self> {
        let r = field.rank();
        Self::with_grading(field, grid, r, false)
    }

    /// Graded bundle whose first `plus` basis vectors are even.
    pub fn graded(field: Arc<dyn ConnectionField>, grid: &Arc<Grid>, plus: usize) -> Result<Self> {
        Self::with_grading(field, grid, plus, true)
    }

    fn with_grading(field: Arc<dyn ConnectionField>, grid: &Arc<Grid>, plus: usize, graded: bool) -> Result<Self> {
        if field.base() != grid.manifold() {
            return Err(DktError::ManifoldMismatch(format!(
                "connection lives on {:?}, grid on {:?}",
                field.base(),
                grid.manifold()
            )));
        }
        if plus > field.rank() {
            return Err(DktError::Rank("even part larger than the bundle".into()));
        }
        let curvature = (0..grid.n_charts())
            .map(|ch| {
                let chart = grid.chart(ch);
                (0..chart.n_points).into_par_iter().map(|i| field.eval(ch, &chart.point(i)).curvature()).collect()
            })
            .collect();
        Ok(Self { field, grid: grid.clone(), plus, graded, curvature: Arc::new(curvature) })
    }

    pub fn trivial(grid: &Arc<Grid>, rank: usize) -> Result<Self> {
        Self::new(Arc::new(Trivial { base: grid.manifold().clone(), rank }), grid)
    }

    /// Graded trivial bundle `C^plus (+) C^minus`.
    pub fn trivial_graded(grid: &Arc<Grid>, plus: usize, minus: usize) -> Result<Self> {
        Self::graded(Arc::new(Trivial { base: grid.manifold().clone(), rank: plus + minus }), grid, plus)
    }

    /// Flat line on a torus with holonomy `exp(2 pi i theta_j)` around the `j`-th circle.
    pub fn flat_line(grid: &Arc<Grid>, theta: &[f64]) -> Result<Self> {
        let m = grid.manifold();
        if !m.is_torus() || m.dim() != theta.len() {
            return Err(DktError::ManifoldMismatch("flat_line needs a torus with one twist per circle".into()));
        }
        Self::new(Arc::new(FlatLine { base: m.clone(), theta: theta.to_vec() }), grid)
    }

    /// Line of degree `n` on the 2-sphere, `int c_1 = n`.
    pub fn monopole(grid: &Arc<Grid>, n: i64) -> Result<Self> {
        let m = grid.manifold();
        if m.n_factors() != 1 || !matches!(m.factor(0), Factor::Sphere2 { .. }) {
            return Err(DktError::ManifoldMismatch("monopole needs a single 2-sphere".into()));
        }
        Self::new(Arc::new(Monopole { base: m.clone(), n }), grid)
    }

    /// Flux-`n` line on a 2-torus, `int c_1 = n`.
    pub fn poincare(grid: &Arc<Grid>, n: i64) -> Result<Self> {
        let m = grid.manifold();
        if !m.is_torus() || m.dim() != 2 {
            return Err(DktError::ManifoldMismatch("poincare needs a 2-torus".into()));
        }
        Self::new(Arc::new(Poincare { base: m.clone(), n }), grid)
    }

    /// Underlying real bundle with its orthogonal connection.
    pub fn realified(&self) -> Result<Self> {
        Self::new(Arc::new(Realified { inner: self.field.clone() }), &self.grid)
    }

    pub fn field(&self) -> &Arc<dyn ConnectionField> {
        &self.field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn manifold(&self) -> &StructuredManifold {
        self.grid.manifold()
    }

    pub fn rank(&self) -> usize {
        self.field.rank()
    }

    pub fn is_graded(&self) -> bool {
        self.graded
    }

    pub fn plus_rank(&self) -> usize {
        self.plus
    }

    pub fn minus_rank(&self) -> usize {
        self.rank() - self.plus
    }

    /// Super rank `rank E+ - rank E-`.
    pub fn virtual_rank(&self) -> i64 {
        self.plus as i64 - self.minus_rank() as i64
    }

    pub fn describe(&self) -> String {
        self.field.describe()
    }

    pub fn curvature_at(&self, chart: usize, idx: usize) -> &MatForm {
        &self.curvature[chart][idx]
    }

    pub fn connection_at(&self, chart: usize, x: &[f64]) -> LocalConnection {
        self.field.eval(chart, x)
    }

    fn rewrap(&self, field: Arc<dyn ConnectionField>, grid: &Arc<Grid>) -> Result<Self> {
        Self::with_grading(field, grid, self.plus, self.graded)
    }

    /// Same bundle with the opposite grading.
    pub fn opposite(&self) -> Result<Self> {
        let (p, r) = (self.plus, self.rank());
        let perm: Vec<usize> = (p..r).chain(0..p).collect();
        let field: Arc<dyn ConnectionField> = Arc::new(Permuted { a: self.field.clone(), perm });
        Self::with_grading(field, &self.grid, r - p, true)
    }

    pub fn perturb(&self, p: Arc<dyn MatrixOneForm>) -> Result<Self> {
        if p.rank() != self.rank() {
            return Err(DktError::Rank("perturbation rank differs".into()));
        }
        self.rewrap(Arc::new(Perturbed { inner: self.field.clone(), p }), &self.grid)
    }

    /// Adds `i h_k dx_k` for constant Hermitian `h_k`.
    pub fn perturb_constant(&self, h: &[CMat]) -> Result<Self> {
        let a = h.iter().map(field::i_times).collect();
        self.perturb(Arc::new(ConstantOneForm { rank: self.rank(), a }))
    }

    /// Adds a trigonometric one-form; requires all factors to be circles.
    pub fn perturb_trig(&self, terms: Vec<TrigTerm>) -> Result<Self> {
        if !self.manifold().is_torus() {
            return Err(DktError::ManifoldMismatch("trigonometric perturbation needs a torus".into()));
        }
        self.perturb(Arc::new(TrigOneForm { base: self.manifold().clone(), rank: self.rank(), terms }))
    }

    /// Adds `i sum H_ab x_a dx_b` on one sphere factor.
    pub fn perturb_ambient(&self, sphere_factor: usize, h: Vec<Vec<CMat>>) -> Result<Self> {
        if !matches!(self.manifold().factor(sphere_factor), Factor::Sphere2 { .. }) {
            return Err(DktError::Factors("ambient perturbation needs a sphere factor".into()));
        }
        self.perturb(Arc::new(AmbientOneForm {
            base: self.manifold().clone(),
            sphere_factor,
            rank: self.rank(),
            h,
        }))
    }

    fn same_base(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(DktError::ManifoldMismatch(format!(
                "{:?} and {:?} live on different grids",
                self.manifold(),
                other.manifold()
            )));
        }
        Ok(())
    }

    /// Tensor product; graded when either factor is, with the even part first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        let (ra, rb) = (self.rank(), other.rank());
        let raw: Arc<dyn ConnectionField> = Arc::new(Tensor { a: self.field.clone(), b: other.field.clone() });
        if !self.graded && !other.graded {
            return Self::new(raw, &self.grid);
        }
        let odd = |i: usize, j: usize| (i >= self.plus) != (j >= other.plus);
        let mut even_part = Vec::new();
        let mut odd_part = Vec::new();
        for i in 0..ra {
            for j in 0..rb {
                if odd(i, j) {
                    odd_part.push(i * rb + j);
                } else {
                    even_part.push(i * rb + j);
                }
            }
        }
        let plus = even_part.len();
        even_part.extend(odd_part);
        Self::graded(Arc::new(Permuted { a: raw, perm: even_part }), &self.grid, plus)
    }

    /// Direct sum; graded sums keep the even parts first.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        let raw: Arc<dyn ConnectionField> = Arc::new(DirectSum { a: self.field.clone(), b: other.field.clone() });
        if !self.graded && !other.graded {
            return Self::new(raw, &self.grid);
        }
        let (ra, pa, pb) = (self.rank(), self.plus, other.plus);
        let rb = other.rank();
        let perm: Vec<usize> = (0..pa).chain(ra..ra + pb).chain(pa..ra).chain(ra + pb..ra + rb).collect();
        Self::graded(Arc::new(Permuted { a: raw, perm }), &self.grid, pa + pb)
    }

    pub fn dual(&self) -> Result<Self> {
        self.rewrap(Arc::new(Dual { a: self.field.clone() }), &self.grid)
    }

    /// Pullback along the factor projection `target -> self.manifold()`.
    pub fn pullback(&self, target: &Arc<Grid>, factor_map: &[usize]) -> Result<Self> {
        if target.numerics() != self.grid.numerics() {
            return Err(DktError::ManifoldMismatch("pullback requires equal numerics".into()));
        }
        let proj = FactorProjection::new(self.manifold(), target.manifold(), factor_map)?;
        self.rewrap(Arc::new(Pullback { inner: self.field.clone(), proj }), target)
    }

    /// Gauge transform by a unitary automorphism: `A -> U A U^-1 - dU U^-1`.
    pub fn gauge_transform(&self, u: &Arc<dyn AutField>) -> Result<Self> {
        if u.rank() != self.rank() || u.base() != self.manifold() {
            return Err(DktError::Rank("automorphism does not act on this bundle".into()));
        }
        self.rewrap(Arc::new(GaugeTransformed { inner: self.field.clone(), u: u.clone() }), &self.grid)
    }

    /// Restriction to `{p} x keep`; `values` lists the coordinates of `p`, dropped factors in order.
    pub fn restrict(&self, keep: &[usize], values: &[f64]) -> Result<Self> {
        let m = self.manifold();
        let target = m.sub_product(keep)?;
        let grid = Grid::new(&target, self.grid.numerics())?;
        let cf = m.coordinate_factors();
        let kept: Vec<usize> = (0..m.dim()).filter(|k| keep.contains(&cf[*k])).collect();
        let dropped: Vec<usize> = (0..m.dim()).filter(|k| !keep.contains(&cf[*k])).collect();
        if dropped.len() != values.len() {
            return Err(DktError::Invalid("one value per dropped coordinate is required".into()));
        }
        let fixed: Vec<(usize, f64)> = dropped.iter().copied().zip(values.iter().copied()).collect();
        let spheres = m.sphere_factors();
        let offsets = m.coordinate_offsets();
        let chart_lift = (0..target.n_charts())
            .map(|ct| {
                let mut cs = 0usize;
                let mut j = 0;
                for (s, &f) in spheres.iter().enumerate() {
                    if keep.contains(&f) {
                        cs |= ((ct >> j) & 1) << s;
                        j += 1;
                    } else {
                        let theta = fixed.iter().find(|(k, _)| *k == offsets[f]).map(|p| p.1).unwrap_or(0.0);
                        if theta > PI / 2.0 {
                            cs |= 1 << s;
                        }
                    }
                }
                cs
            })
            .collect();
        let field = Restricted { inner: self.field.clone(), target, kept, fixed, chart_lift };
        self.rewrap(Arc::new(field), &grid)
    }

    /// Largest difference of the potentials at probe points of the grid.
    pub fn connection_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_bundle(other)?;
        let mut worst: f64 = 0.0;
        for ch in 0..self.grid.n_charts() {
            let chart = self.grid.chart(ch);
            let stride = (chart.n_points / 64).max(1);
            for i in (0..chart.n_points).step_by(stride) {
                let x = chart.point(i);
                let (a, b) = (self.field.eval(ch, &x), other.field.eval(ch, &x));
                for (p, q) in a.a.iter().zip(&b.a) {
                    worst = worst.max(max_abs(&(p - q)));
                }
            }
        }
        Ok(worst)
    }

    /// Checks that two connections live on the same bundle by comparing transitions.
    pub fn check_same_bundle(&self, other: &Self) -> Result<()> {
        self.same_base(other)?;
        if self.rank() != other.rank() || self.plus != other.plus || self.graded != other.graded {
            return Err(DktError::Rank("bundles differ in rank or grading".into()));
        }
        let m = self.manifold();
        let offsets = m.coordinate_offsets();
        let spheres = m.sphere_factors();
        let probes = [0.137, 0.611, 0.853];
        for &t in &probes {
            let x: Vec<f64> = (0..m.dim()).map(|k| t * (1.0 + 0.37 * k as f64)).collect();
            for (fi, f) in m.factors().iter().enumerate() {
                let mut y = x.clone();
                let (a, b) = match f {
                    Factor::Circle { .. } => (self.field.seam(offsets[fi], 0, &y), other.field.seam(offsets[fi], 0, &y)),
                    Factor::Sphere2 { .. } => {
                        y[offsets[fi]] = PI / 2.0;
                        let s = spheres.iter().position(|&g| g == fi).unwrap();
                        (self.field.cap(s, 0, &y), other.field.cap(s, 0, &y))
                    }
                    Factor::Interval01 => (None, None),
                };
                let d = match (a, b) {
                    (None, None) => 0.0,
                    (Some(g), None) | (None, Some(g)) => max_abs(&(g - crate::linalg::eye(self.rank()))),
                    (Some(g), Some(h)) => max_abs(&(g - h)),
                };
                if d > 1e-9 {
                    return Err(DktError::Invalid(format!(
                        "transitions of {} and {} differ by {d:e}",
                        self.describe(),
                        other.describe()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Bundle on `parts[0].manifold()` with connection `sum_i w_i A_i`.
    pub fn affine_combination(parts: &[&Self], weights: WeightFn, label: &str) -> Result<Self> {
        for p in &parts[1..] {
            parts[0].check_same_bundle(p)?;
        }
        let field = AffineCombination {
            parts: parts.iter().map(|p| p.field.clone()).collect(),
            weights,
            extra_seam: None,
            label: label.into(),
        };
        parts[0].rewrap(Arc::new(field), &parts[0].grid)
    }

    /// Product manifold `F x X` for a new leading factor and its grid.
    fn prepend(&self, f: Factor) -> Result<(Arc<Grid>, Vec<usize>)> {
        let m = StructuredManifold::new(vec![f])?.product(self.manifold())?;
        let grid = Grid::new(&m, self.grid.numerics())?;
        let map: Vec<usize> = (1..=self.manifold().n_factors()).collect();
        Ok((grid, map))
    }

    /// Linear path from `self` at `t = 0` to `other` at `t = 1`, as a bundle on `I x X`.
    pub fn cylinder(&self, other: &Self) -> Result<Self> {
        self.check_same_bundle(other)?;
        let (grid, map) = self.prepend(Factor::Interval01)?;
        let a = self.pullback(&grid, &map)?;
        let b = other.pullback(&grid, &map)?;
        let n = grid.n_coords();
        let weights: WeightFn = Arc::new(move |x: &[f64]| {
            let mut g0 = vec![0.0; n];
            let mut g1 = vec![0.0; n];
            g0[0] = -1.0;
            g1[0] = 1.0;
            vec![(1.0 - x[0], g0), (x[0], g1)]
        });
        Self::affine_combination(&[&a, &b], weights, &format!("path({} -> {})", self.describe(), other.describe()))
    }

    /// Convex family `(1 - t1 - t2) A_0 + t1 A_1 + t2 A_2` on `I x I x X`, with
    /// `t1 = s (1 - w)`, `t2 = s w` in the coordinates `(s, w)`.
    pub fn simplex_family(a0: &Self, a1: &Self, a2: &Self) -> Result<Self> {
        a0.check_same_bundle(a1)?;
        a0.check_same_bundle(a2)?;
        let m = StructuredManifold::new(vec![Factor::Interval01, Factor::Interval01])?.product(a0.manifold())?;
        let grid = Grid::new(&m, a0.grid.numerics())?;
        let map: Vec<usize> = (2..2 + a0.manifold().n_factors()).collect();
        let p: Vec<Self> = [a0, a1, a2].iter().map(|a| a.pullback(&grid, &map)).collect::<Result<_>>()?;
        let n = grid.n_coords();
        let weights: WeightFn = Arc::new(move |x: &[f64]| {
            let (s, w) = (x[0], x[1]);
            let grad = |ds: f64, dw: f64| {
                let mut g = vec![0.0; n];
                g[0] = ds;
                g[1] = dw;
                g
            };
            vec![(1.0 - s, grad(-1.0, 0.0)), (s * (1.0 - w), grad(1.0 - w, -s)), (s * w, grad(w, s))]
        });
        Self::affine_combination(&[&p[0], &p[1], &p[2]], weights, "simplex family")
    }

    /// Mapping torus of `u` over `S^1_L x X`: glued by `u` across the new seam, with the
    /// connection moving linearly from `A` to `u . A`.
    pub fn mapping_torus(&self, u: &Arc<dyn AutField>, length: f64) -> Result<Self> {
        let moved = self.gauge_transform(u)?;
        let (grid, map) = self.prepend(Factor::Circle { length })?;
        let a = self.pullback(&grid, &map)?;
        let b = moved.pullback(&grid, &map)?;
        let proj = FactorProjection::new(self.manifold(), grid.manifold(), &map)?;
        let n = grid.n_coords();
        let weights: WeightFn = Arc::new(move |x: &[f64]| {
            let t = x[0] / length;
            let mut g0 = vec![0.0; n];
            let mut g1 = vec![0.0; n];
            g0[0] = -1.0 / length;
            g1[0] = 1.0 / length;
            vec![(1.0 - t, g0), (t, g1)]
        });
        let field = AffineCombination {
            parts: vec![a.field.clone(), b.field.clone()],
            weights,
            extra_seam: Some((0, u.clone(), proj)),
            label: format!("mapping_torus({}, {})", self.describe(), u.describe()),
        };
        self.rewrap(Arc::new(field), &grid)
    }

    /// Holonomy around the circle coordinate `coord` through the point `x`.
    ///
    /// With transport `T = P exp(-int A)` from `0` to `L` and seam `g`, the holonomy is `T^-1 g`.
    pub fn holonomy(&self, coord: usize, chart: usize, x: &[f64]) -> Result<CMat> {
        holonomy(self.field.as_ref(), coord, chart, x, HOLONOMY_STEPS)
    }

    /// Largest violation of the gluing rules at probe points, for tests.
    pub fn gluing_defect(&self) -> f64 {
        gluing_defect(self.field.as_ref())
    }
}

fn circle_length(m: &StructuredManifold, coord: usize) -> Option<f64> {
    let cf = m.coordinate_factors();
    match m.factor(cf[coord]) {
        Factor::Circle { length } => Some(length),
        _ => None,
    }
}

/// Fourth-order Magnus holonomy.
pub fn holonomy(field: &dyn ConnectionField, coord: usize, chart: usize, x: &[f64], steps: usize) -> Result<CMat> {
    let len = circle_length(field.base(), coord)
        .ok_or_else(|| DktError::Factors(format!("coordinate {coord} is not a circle coordinate")))?;
    let r = field.rank();
    let h = len / steps as f64;
    let s3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - s3 / 6.0, 0.5 + s3 / 6.0);
    let mut y = x.to_vec();
    let mut t = crate::linalg::eye(r);
    for m in 0..steps {
        let s = m as f64 * h;
        y[coord] = s + c1 * h;
        let b1 = -field.eval(chart, &y).a[coord].clone();
        y[coord] = s + c2 * h;
        let b2 = -field.eval(chart, &y).a[coord].clone();
        let comm = &b2 * &b1 - &b1 * &b2;
        let omega = (&b1 + &b2) * c(0.5 * h, 0.0) + comm * c(s3 / 12.0 * h * h, 0.0);
        t = expm(&omega) * t;
    }
    y[coord] = 0.0;
    let g = field.seam(coord, chart, &y).unwrap_or_else(|| crate::linalg::eye(r));
    Ok(t.adjoint() * g)
}

fn gluing_defect(field: &dyn ConnectionField) -> f64 {
    let m = field.base().clone();
    let offsets = m.coordinate_offsets();
    let spheres = m.sphere_factors();
    let r = field.rank();
    let fd = |f: &dyn Fn(&[f64]) -> CMat, x: &[f64], k: usize| -> CMat {
        let h = 2.5e-4;
        let at = |dx: f64| {
            let mut p = x.to_vec();
            p[k] += dx;
            f(&p)
        };
        ((at(h) - at(-h)) * c(8.0, 0.0) - (at(2.0 * h) - at(-2.0 * h))) * c(1.0 / (12.0 * h), 0.0)
    };
    let mut worst: f64 = 0.0;
    for &t in &[0.21, 0.58] {
        let x: Vec<f64> = (0..m.dim()).map(|k| t * (1.0 + 0.29 * k as f64)).collect();
        for (fi, f) in m.factors().iter().enumerate() {
            let k0 = offsets[fi];
            match f {
                Factor::Circle { length } => {
                    let mut x0 = x.clone();
                    x0[k0] = 0.0;
                    let mut x1 = x.clone();
                    x1[k0] = *length;
                    let g = field.seam(k0, 0, &x0).unwrap_or_else(|| crate::linalg::eye(r));
                    let ginv = g.adjoint();
                    let a0 = field.eval(0, &x0).a;
                    let a1 = field.eval(0, &x1).a;
                    let gf = |y: &[f64]| field.seam(k0, 0, y).unwrap_or_else(|| crate::linalg::eye(r));
                    for k in 0..m.dim() {
                        let dg = if k == k0 { zeros(r) } else { fd(&gf, &x0, k) };
                        let expect = &g * &a0[k] * &ginv - dg * &ginv;
                        worst = worst.max(max_abs(&(expect - &a1[k])));
                    }
                }
                Factor::Sphere2 { .. } => {
                    let s = spheres.iter().position(|&g| g == fi).unwrap();
                    let mut y = x.clone();
                    y[k0] = PI / 2.0 + 0.1;
                    let north_chart = 0;
                    let south_chart = 1 << s;
                    let g = field.cap(s, north_chart, &y).unwrap_or_else(|| crate::linalg::eye(r));
                    let ginv = g.adjoint();
                    let an = field.eval(north_chart, &y).a;
                    let as_ = field.eval(south_chart, &y).a;
                    let gf = |z: &[f64]| field.cap(s, north_chart, z).unwrap_or_else(|| crate::linalg::eye(r));
                    for k in 0..m.dim() {
                        let dg = fd(&gf, &y, k);
                        let expect = &ginv * &an[k] * &g + &ginv * dg;
                        worst = worst.max(max_abs(&(expect - &as_[k])));
                    }
                }
                Factor::Interval01 => {}
            }
        }
    }
    worst
}

/// Path of connections `t -> (1 - t) A_0 + t A_1` on one bundle.
#[derive(Clone, Debug)]
pub struct ConnectionPath {
    pub start: BundleWithConnection,
    pub end: BundleWithConnection,
}

impl ConnectionPath {
    pub fn new(start: BundleWithConnection, end: BundleWithConnection) -> Result<Self> {
        start.check_same_bundle(&end)?;
        Ok(Self { start, end })
    }

    /// The path as a single connection on `I x X`.
    pub fn cylinder(&self) -> Result<BundleWithConnection> {
        self.start.cylinder(&self.end)
    }

    /// The connection at time `t`.
    pub fn at(&self, t: f64) -> Result<BundleWithConnection> {
        let n = self.start.grid.n_coords();
        let weights: WeightFn = Arc::new(move |_x: &[f64]| vec![(1.0 - t, vec![0.0; n]), (t, vec![0.0; n])]);
        BundleWithConnection::affine_combination(&[&self.start, &self.end], weights, &format!("path at {t}"))
    }
}
