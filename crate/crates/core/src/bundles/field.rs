//! Connection potentials as chart formulas.
//!
//! Every bundle is described by a [`ConnectionField`] that returns, at a chart point,
//! the potential `A` (one skew-Hermitian matrix per coordinate) together with its exterior
//! derivative `dA`. Derived bundles propagate both exactly, so curvature never needs
//! numerical differentiation across a seam.
//!
//! Gluing conventions:
//! * circle seams: `(x_k = 0, v) ~ (x_k = L, g v)`, so `A(L) = g A(0) g^-1 - dg g^-1`;
//! * sphere caps: `s_north = g s_south`, so `A_S = g^-1 A_N g + g^-1 dg`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::graded::form::{chart_map, coordinate_map, mask_coords, Mask};
use crate::graded::{Factor, StructuredManifold};
use crate::linalg::{block_diag, c, eye, kron, scalar, zeros, CMat, MatForm};
use crate::C64;

/// Potential and its derivative at one point.
#[derive(Clone, Debug)]
pub struct LocalConnection {
    pub a: Vec<CMat>,
    pub da: MatForm,
}

impl LocalConnection {
    pub fn zero(rank: usize, n_coords: usize) -> Self {
        Self { a: vec![zeros(rank); n_coords], da: MatForm::zero(rank) }
    }

    /// Curvature `dA + A ^ A`.
    pub fn curvature(&self) -> MatForm {
        let a = MatForm::one_form(&self.a);
        self.da.add(&a.wedge(&a, 2))
    }
}

pub trait ConnectionField: Send + Sync {
    fn rank(&self) -> usize;
    fn base(&self) -> &StructuredManifold;
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection;
    /// Seam transition of circle coordinate `coord`, evaluated at a point of the seam.
    fn seam(&self, _coord: usize, _chart: usize, _x: &[f64]) -> Option<CMat> {
        None
    }
    /// Cap transition of sphere `sphere` at a point of the band; `chart` has that sphere north.
    fn cap(&self, _sphere: usize, _chart: usize, _x: &[f64]) -> Option<CMat> {
        None
    }
    fn describe(&self) -> String;
}

impl fmt::Debug for dyn ConnectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Unitary automorphism field with its first derivatives.
pub trait AutField: Send + Sync {
    fn rank(&self) -> usize;
    fn base(&self) -> &StructuredManifold;
    /// `U` and `dU/dx_k` for every coordinate.
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>);
    /// `U` alone; override when derivatives are expensive.
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        self.eval(chart, x).0
    }
    fn describe(&self) -> String;
}

impl fmt::Debug for dyn AutField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Matrix-valued global one-form used to deform connections.
pub trait MatrixOneForm: Send + Sync {
    fn rank(&self) -> usize;
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection;
    fn describe(&self) -> String;
}

fn circle_lengths(m: &StructuredManifold) -> Vec<Option<f64>> {
    let mut out = Vec::new();
    for f in m.factors() {
        match f {
            Factor::Circle { length } => out.push(Some(*length)),
            Factor::Interval01 => out.push(None),
            Factor::Sphere2 { .. } => {
                out.push(None);
                out.push(None);
            }
        }
    }
    out
}

/// Product connection `d` on `C^rank`.
pub struct Trivial {
    pub base: StructuredManifold,
    pub rank: usize,
}

impl ConnectionField for Trivial {
    fn rank(&self) -> usize {
        self.rank
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, _chart: usize, _x: &[f64]) -> LocalConnection {
        LocalConnection::zero(self.rank, self.base.dim())
    }
    fn describe(&self) -> String {
        format!("trivial(rank {})", self.rank)
    }
}

/// Flat line on a torus with potential `2 pi i theta_j dx_j / L_j`.
pub struct FlatLine {
    pub base: StructuredManifold,
    pub theta: Vec<f64>,
}

impl ConnectionField for FlatLine {
    fn rank(&self) -> usize {
        1
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, _chart: usize, _x: &[f64]) -> LocalConnection {
        let lens = circle_lengths(&self.base);
        let a = self.theta.iter().zip(lens).map(|(t, l)| scalar(1, c(0.0, 2.0 * PI * t / l.unwrap()))).collect();
        LocalConnection { a, da: MatForm::zero(1) }
    }
    fn describe(&self) -> String {
        format!("flat_line(theta={:?})", self.theta)
    }
}

/// Degree-`n` line bundle on a single 2-sphere.
pub struct Monopole {
    pub base: StructuredManifold,
    pub n: i64,
}

impl ConnectionField for Monopole {
    fn rank(&self) -> usize {
        1
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let n = self.n as f64;
        let sign = if chart == 0 { 1.0 } else { -1.0 };
        let theta = x[0];
        let a_phi = c(0.0, -0.5 * n * (sign - theta.cos()));
        let mut da = MatForm::zero(1);
        da.add_comp(0b11, scalar(1, c(0.0, -0.5 * n * theta.sin())));
        LocalConnection { a: vec![zeros(1), scalar(1, a_phi)], da }
    }
    fn cap(&self, _sphere: usize, _chart: usize, x: &[f64]) -> Option<CMat> {
        Some(scalar(1, c(0.0, self.n as f64 * x[1]).exp()))
    }
    fn describe(&self) -> String {
        format!("monopole({})", self.n)
    }
}

/// Flux-`n` line on a 2-torus from the potential `-2 pi i n t_1 dt_2`, glued along `t_1`.
pub struct Poincare {
    pub base: StructuredManifold,
    pub n: i64,
}

impl Poincare {
    fn lengths(&self) -> (f64, f64) {
        match (self.base.factor(0), self.base.factor(1)) {
            (Factor::Circle { length: a }, Factor::Circle { length: b }) => (a, b),
            _ => unreachable!("checked at construction"),
        }
    }
}

impl ConnectionField for Poincare {
    fn rank(&self) -> usize {
        1
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, _chart: usize, x: &[f64]) -> LocalConnection {
        let (l1, l2) = self.lengths();
        let n = self.n as f64;
        let t1 = x[0] / l1;
        let mut da = MatForm::zero(1);
        da.add_comp(0b11, scalar(1, c(0.0, -2.0 * PI * n / (l1 * l2))));
        LocalConnection { a: vec![zeros(1), scalar(1, c(0.0, -2.0 * PI * n * t1 / l2))], da }
    }
    fn seam(&self, coord: usize, _chart: usize, x: &[f64]) -> Option<CMat> {
        if coord != 0 {
            return None;
        }
        let (_, l2) = self.lengths();
        Some(scalar(1, c(0.0, 2.0 * PI * self.n as f64 * x[1] / l2).exp()))
    }
    fn describe(&self) -> String {
        format!("poincare(flux {})", self.n)
    }
}

/// `inner + P` for a global matrix one-form `P`.
pub struct Perturbed {
    pub inner: Arc<dyn ConnectionField>,
    pub p: Arc<dyn MatrixOneForm>,
}

impl ConnectionField for Perturbed {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let a = self.inner.eval(chart, x);
        let p = self.p.eval(chart, x);
        LocalConnection { a: a.a.iter().zip(&p.a).map(|(u, v)| u + v).collect(), da: a.da.add(&p.da) }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.seam(coord, chart, x)
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.cap(s, chart, x)
    }
    fn describe(&self) -> String {
        format!("{} + {}", self.inner.describe(), self.p.describe())
    }
}

fn opt_or_eye(g: Option<CMat>, n: usize) -> CMat {
    g.unwrap_or_else(|| eye(n))
}

/// `a (x) b` with the induced connection.
pub struct Tensor {
    pub a: Arc<dyn ConnectionField>,
    pub b: Arc<dyn ConnectionField>,
}

impl ConnectionField for Tensor {
    fn rank(&self) -> usize {
        self.a.rank() * self.b.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let (ra, rb) = (self.a.rank(), self.b.rank());
        let la = self.a.eval(chart, x);
        let lb = self.b.eval(chart, x);
        let (ia, ib) = (eye(ra), eye(rb));
        let a = la.a.iter().zip(&lb.a).map(|(u, v)| kron(u, &ib) + kron(&ia, v)).collect();
        let da = la.da.map(|m| kron(m, &ib)).add(&lb.da.map(|m| kron(&ia, m)));
        let da = MatForm { rank: ra * rb, comps: da.comps };
        LocalConnection { a, da }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        let (ga, gb) = (self.a.seam(coord, chart, x), self.b.seam(coord, chart, x));
        if ga.is_none() && gb.is_none() {
            return None;
        }
        Some(kron(&opt_or_eye(ga, self.a.rank()), &opt_or_eye(gb, self.b.rank())))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        let (ga, gb) = (self.a.cap(s, chart, x), self.b.cap(s, chart, x));
        if ga.is_none() && gb.is_none() {
            return None;
        }
        Some(kron(&opt_or_eye(ga, self.a.rank()), &opt_or_eye(gb, self.b.rank())))
    }
    fn describe(&self) -> String {
        format!("({}) (x) ({})", self.a.describe(), self.b.describe())
    }
}

/// `a (+) b`.
pub struct DirectSum {
    pub a: Arc<dyn ConnectionField>,
    pub b: Arc<dyn ConnectionField>,
}

impl ConnectionField for DirectSum {
    fn rank(&self) -> usize {
        self.a.rank() + self.b.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let la = self.a.eval(chart, x);
        let lb = self.b.eval(chart, x);
        let a = la.a.iter().zip(&lb.a).map(|(u, v)| block_diag(u, v)).collect();
        let mut da = MatForm::zero(self.rank());
        let masks: std::collections::BTreeSet<Mask> = la.da.comps.keys().chain(lb.da.comps.keys()).copied().collect();
        for m in masks {
            da.add_comp(m, block_diag(&la.da.component(m), &lb.da.component(m)));
        }
        LocalConnection { a, da }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        let (ga, gb) = (self.a.seam(coord, chart, x), self.b.seam(coord, chart, x));
        if ga.is_none() && gb.is_none() {
            return None;
        }
        Some(block_diag(&opt_or_eye(ga, self.a.rank()), &opt_or_eye(gb, self.b.rank())))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        let (ga, gb) = (self.a.cap(s, chart, x), self.b.cap(s, chart, x));
        if ga.is_none() && gb.is_none() {
            return None;
        }
        Some(block_diag(&opt_or_eye(ga, self.a.rank()), &opt_or_eye(gb, self.b.rank())))
    }
    fn describe(&self) -> String {
        format!("({}) (+) ({})", self.a.describe(), self.b.describe())
    }
}

/// Dual bundle: `A -> -A^T`, transitions `g -> conj(g)`.
pub struct Dual {
    pub a: Arc<dyn ConnectionField>,
}

impl ConnectionField for Dual {
    fn rank(&self) -> usize {
        self.a.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let l = self.a.eval(chart, x);
        LocalConnection {
            a: l.a.iter().map(|m| -m.transpose()).collect(),
            da: l.da.map(|m| -m.transpose()),
        }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.a.seam(coord, chart, x).map(|g| g.map(|z| z.conj()))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.a.cap(s, chart, x).map(|g| g.map(|z| z.conj()))
    }
    fn describe(&self) -> String {
        format!("dual({})", self.a.describe())
    }
}

/// Constant change of basis `e'_i = e_{perm[i]}`.
pub struct Permuted {
    pub a: Arc<dyn ConnectionField>,
    pub perm: Vec<usize>,
}

impl Permuted {
    fn apply(&self, m: &CMat) -> CMat {
        let n = self.perm.len();
        CMat::from_fn(n, n, |i, j| m[(self.perm[i], self.perm[j])])
    }
}

impl ConnectionField for Permuted {
    fn rank(&self) -> usize {
        self.a.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.a.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let l = self.a.eval(chart, x);
        LocalConnection { a: l.a.iter().map(|m| self.apply(m)).collect(), da: l.da.map(|m| self.apply(m)) }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.a.seam(coord, chart, x).map(|g| self.apply(&g))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.a.cap(s, chart, x).map(|g| self.apply(&g))
    }
    fn describe(&self) -> String {
        format!("permuted({})", self.a.describe())
    }
}

/// Coordinate bookkeeping for a factor projection `target -> source`.
#[derive(Clone, Debug)]
pub struct FactorProjection {
    pub source: StructuredManifold,
    pub target: StructuredManifold,
    pub factor_map: Vec<usize>,
    pub coord_map: Vec<usize>,
    pub chart_map: Vec<usize>,
    /// Target sphere index of each source sphere.
    pub sphere_map: Vec<usize>,
}

impl FactorProjection {
    pub fn new(source: &StructuredManifold, target: &StructuredManifold, factor_map: &[usize]) -> crate::Result<Self> {
        crate::graded::form::check_factor_map(source, target, factor_map)?;
        let ss = source.sphere_factors();
        let ts = target.sphere_factors();
        let sphere_map = ss.iter().map(|&f| ts.iter().position(|&t| t == factor_map[f]).expect("sphere")).collect();
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            factor_map: factor_map.to_vec(),
            coord_map: coordinate_map(source, target, factor_map),
            chart_map: chart_map(source, target, factor_map),
            sphere_map,
        })
    }

    pub fn source_point(&self, x: &[f64]) -> Vec<f64> {
        self.coord_map.iter().map(|&k| x[k]).collect()
    }

    /// Pulls back a matrix form, remapping masks with orientation signs.
    pub fn pull_form(&self, f: &MatForm) -> MatForm {
        let mut out = MatForm::zero(f.rank);
        for (m, v) in &f.comps {
            let mapped: Vec<usize> = mask_coords(*m).iter().map(|&k| self.coord_map[k]).collect();
            let mut s = 1.0;
            for i in 0..mapped.len() {
                for j in i + 1..mapped.len() {
                    if mapped[i] > mapped[j] {
                        s = -s;
                    }
                }
            }
            let mask = mapped.iter().fold(0 as Mask, |acc, &k| acc | (1 << k));
            out.add_comp(mask, v * c(s, 0.0));
        }
        out
    }

    pub fn pull_one_form(&self, a: &[CMat], rank: usize) -> Vec<CMat> {
        let mut out = vec![zeros(rank); self.target.dim()];
        for (k, m) in a.iter().enumerate() {
            out[self.coord_map[k]] = m.clone();
        }
        out
    }

    /// Source coordinate of a target coordinate, if any.
    pub fn source_coord(&self, k: usize) -> Option<usize> {
        self.coord_map.iter().position(|&t| t == k)
    }

    pub fn source_sphere(&self, s: usize) -> Option<usize> {
        self.sphere_map.iter().position(|&t| t == s)
    }
}

/// Pullback along a factor projection.
pub struct Pullback {
    pub inner: Arc<dyn ConnectionField>,
    pub proj: FactorProjection,
}

impl ConnectionField for Pullback {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        &self.proj.target
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let l = self.inner.eval(self.proj.chart_map[chart], &self.proj.source_point(x));
        LocalConnection { a: self.proj.pull_one_form(&l.a, self.rank()), da: self.proj.pull_form(&l.da) }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        let k = self.proj.source_coord(coord)?;
        self.inner.seam(k, self.proj.chart_map[chart], &self.proj.source_point(x))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        let ss = self.proj.source_sphere(s)?;
        self.inner.cap(ss, self.proj.chart_map[chart], &self.proj.source_point(x))
    }
    fn describe(&self) -> String {
        format!("pullback({})", self.inner.describe())
    }
}

/// Weight functions of an affine combination: value and gradient per part.
pub type WeightFn = Arc<dyn Fn(&[f64]) -> Vec<(f64, Vec<f64>)> + Send + Sync>;

/// `sum_i w_i(x) A_i` for connections on one bundle with `sum_i w_i = 1`.
pub struct AffineCombination {
    pub parts: Vec<Arc<dyn ConnectionField>>,
    pub weights: WeightFn,
    /// Extra seam on one circle coordinate, as used by mapping tori.
    pub extra_seam: Option<(usize, Arc<dyn AutField>, FactorProjection)>,
    pub label: String,
}

impl ConnectionField for AffineCombination {
    fn rank(&self) -> usize {
        self.parts[0].rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.parts[0].base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let r = self.rank();
        let n = x.len();
        let w = (self.weights)(x);
        let mut out = LocalConnection::zero(r, n);
        for (part, (wv, wg)) in self.parts.iter().zip(&w) {
            let l = part.eval(chart, x);
            for k in 0..n {
                out.a[k] += &l.a[k] * c(*wv, 0.0);
            }
            out.da = out.da.add(&l.da.scale(c(*wv, 0.0)));
            let mut dw = MatForm::zero(1);
            for (k, g) in wg.iter().enumerate() {
                if *g != 0.0 {
                    dw.add_comp(1 << k, scalar(1, c(*g, 0.0)));
                }
            }
            let dw = MatForm { rank: r, comps: dw.comps.into_iter().map(|(m, v)| (m, eye(r) * v[(0, 0)])).collect() };
            out.da = out.da.add(&dw.wedge(&MatForm::one_form(&l.a), 2));
        }
        out
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        if let Some((k, u, proj)) = &self.extra_seam {
            if *k == coord {
                return Some(u.eval(proj.chart_map[chart], &proj.source_point(x)).0);
            }
        }
        self.parts[0].seam(coord, chart, x)
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.parts[0].cap(s, chart, x)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `U . A = U A U^-1 - dU U^-1`, the connection transported by an automorphism.
pub struct GaugeTransformed {
    pub inner: Arc<dyn ConnectionField>,
    pub u: Arc<dyn AutField>,
}

impl ConnectionField for GaugeTransformed {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let l = self.inner.eval(chart, x);
        let (u, du) = self.u.eval(chart, x);
        let uinv = u.adjoint();
        let a: Vec<CMat> = l.a.iter().zip(&du).map(|(ak, duk)| &u * ak * &uinv - duk * &uinv).collect();
        let f = l.curvature().conj_by(&u, &uinv);
        let af = MatForm::one_form(&a);
        let da = f.add(&af.wedge(&af, 2).scale(c(-1.0, 0.0)));
        LocalConnection { a, da }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.seam(coord, chart, x)
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.cap(s, chart, x)
    }
    fn describe(&self) -> String {
        format!("{} . {}", self.u.describe(), self.inner.describe())
    }
}

/// Restriction to the slice where some factors sit at fixed coordinates.
pub struct Restricted {
    pub inner: Arc<dyn ConnectionField>,
    pub target: StructuredManifold,
    /// Source coordinate of each kept coordinate.
    pub kept: Vec<usize>,
    /// Values of the dropped coordinates (source index, value).
    pub fixed: Vec<(usize, f64)>,
    /// Source chart bits forced by dropped spheres.
    pub chart_lift: Vec<usize>,
}

impl Restricted {
    fn lift(&self, x: &[f64]) -> Vec<f64> {
        let n = self.kept.len() + self.fixed.len();
        let mut y = vec![0.0; n];
        for (j, &k) in self.kept.iter().enumerate() {
            y[k] = x[j];
        }
        for &(k, v) in &self.fixed {
            y[k] = v;
        }
        y
    }
}

impl ConnectionField for Restricted {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        &self.target
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let l = self.inner.eval(self.chart_lift[chart], &self.lift(x));
        let a = self.kept.iter().map(|&k| l.a[k].clone()).collect();
        let mut da = MatForm::zero(self.rank());
        for (m, v) in &l.da.comps {
            let coords = mask_coords(*m);
            if coords.iter().all(|k| self.kept.contains(k)) {
                let mask = coords
                    .iter()
                    .map(|k| self.kept.iter().position(|j| j == k).unwrap())
                    .fold(0 as Mask, |acc, j| acc | (1 << j));
                da.add_comp(mask, v.clone());
            }
        }
        LocalConnection { a, da }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.seam(self.kept[coord], self.chart_lift[chart], &self.lift(x))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        // sphere indices of the target are a subsequence of those of the source
        let src_spheres = self.inner.base().sphere_factors().len();
        let tgt_spheres = self.target.sphere_factors().len();
        if src_spheres == tgt_spheres {
            self.inner.cap(s, self.chart_lift[chart], &self.lift(x))
        } else {
            None
        }
    }
    fn describe(&self) -> String {
        format!("restrict({})", self.inner.describe())
    }
}

/// Trigonometric matrix one-form on a torus:
/// `P = i sum_terms H cos(2 pi k . t + phase) dx_j`, with `t_l = x_l / L_l` and `H` Hermitian.
pub struct TrigOneForm {
    pub base: StructuredManifold,
    pub rank: usize,
    pub terms: Vec<TrigTerm>,
}

#[derive(Clone, Debug)]
pub struct TrigTerm {
    pub coord: usize,
    pub freq: Vec<i32>,
    pub phase: f64,
    pub h: CMat,
}

impl MatrixOneForm for TrigOneForm {
    fn rank(&self) -> usize {
        self.rank
    }
    fn eval(&self, _chart: usize, x: &[f64]) -> LocalConnection {
        let lens: Vec<f64> = circle_lengths(&self.base).into_iter().map(|l| l.unwrap_or(1.0)).collect();
        let mut out = LocalConnection::zero(self.rank, x.len());
        for t in &self.terms {
            let arg: f64 = t.freq.iter().zip(x).zip(&lens).map(|((k, xi), l)| *k as f64 * xi / l).sum::<f64>()
                * 2.0
                * PI
                + t.phase;
            let ih = &t.h * c(0.0, 1.0);
            out.a[t.coord] += &ih * c(arg.cos(), 0.0);
            for (l, k) in t.freq.iter().enumerate() {
                if *k == 0 || l == t.coord {
                    continue;
                }
                let g = -arg.sin() * 2.0 * PI * *k as f64 / lens[l];
                // d(f dx_j) = df/dx_l dx_l ^ dx_j
                let (mask, s) = if l < t.coord { ((1 << l) | (1 << t.coord), 1.0) } else { ((1 << l) | (1 << t.coord), -1.0) };
                out.da.add_comp(mask as Mask, &ih * c(g * s, 0.0));
            }
        }
        out
    }
    fn describe(&self) -> String {
        format!("trig_one_form({} terms)", self.terms.len())
    }
}

/// One-form `i sum_ab H_ab x_a dx_b` on a sphere factor, with `x` the unit ambient coordinates.
pub struct AmbientOneForm {
    pub base: StructuredManifold,
    pub sphere_factor: usize,
    pub rank: usize,
    pub h: Vec<Vec<CMat>>,
}

pub fn ambient(theta: f64, phi: f64) -> ([f64; 3], [[f64; 2]; 3]) {
    let (st, ct, sp, cp) = (theta.sin(), theta.cos(), phi.sin(), phi.cos());
    let x = [st * cp, st * sp, ct];
    let dx = [[ct * cp, -st * sp], [ct * sp, st * cp], [-st, 0.0]];
    (x, dx)
}

impl MatrixOneForm for AmbientOneForm {
    fn rank(&self) -> usize {
        self.rank
    }
    fn eval(&self, _chart: usize, x: &[f64]) -> LocalConnection {
        let off = self.base.coordinate_offsets()[self.sphere_factor];
        let (p, dp) = ambient(x[off], x[off + 1]);
        let mut out = LocalConnection::zero(self.rank, x.len());
        let i = c(0.0, 1.0);
        let mut two = zeros(self.rank);
        for a in 0..3 {
            for b in 0..3 {
                let ih = &self.h[a][b] * i;
                out.a[off] += &ih * c(p[a] * dp[b][0], 0.0);
                out.a[off + 1] += &ih * c(p[a] * dp[b][1], 0.0);
                two += &ih * c(dp[a][0] * dp[b][1] - dp[a][1] * dp[b][0], 0.0);
            }
        }
        out.da.add_comp(((1 << off) | (1 << (off + 1))) as Mask, two);
        out
    }
    fn describe(&self) -> String {
        "ambient_one_form".into()
    }
}

/// Constant Hermitian matrix times `i dx_k`; flat on circles when the matrices commute.
pub struct ConstantOneForm {
    pub rank: usize,
    pub a: Vec<CMat>,
}

impl MatrixOneForm for ConstantOneForm {
    fn rank(&self) -> usize {
        self.rank
    }
    fn eval(&self, _chart: usize, _x: &[f64]) -> LocalConnection {
        LocalConnection { a: self.a.clone(), da: MatForm::zero(self.rank) }
    }
    fn describe(&self) -> String {
        "constant_one_form".into()
    }
}

pub fn i_times(h: &CMat) -> CMat {
    h * C64::new(0.0, 1.0)
}

fn realify(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut out = zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(2 * i, 2 * j)] = c(z.re, 0.0);
            out[(2 * i, 2 * j + 1)] = c(-z.im, 0.0);
            out[(2 * i + 1, 2 * j)] = c(z.im, 0.0);
            out[(2 * i + 1, 2 * j + 1)] = c(z.re, 0.0);
        }
    }
    out
}

/// Underlying real bundle, `a + ib -> [[a, -b], [b, a]]`; used for tangent bundles.
pub struct Realified {
    pub inner: Arc<dyn ConnectionField>,
}

impl ConnectionField for Realified {
    fn rank(&self) -> usize {
        2 * self.inner.rank()
    }
    fn base(&self) -> &StructuredManifold {
        self.inner.base()
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        let l = self.inner.eval(chart, x);
        LocalConnection { a: l.a.iter().map(realify).collect(), da: l.da.map(realify) }
    }
    fn seam(&self, coord: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.seam(coord, chart, x).map(|g| realify(&g))
    }
    fn cap(&self, s: usize, chart: usize, x: &[f64]) -> Option<CMat> {
        self.inner.cap(s, chart, x).map(|g| realify(&g))
    }
    fn describe(&self) -> String {
        format!("real({})", self.inner.describe())
    }
}

/// Potential given by a formula without gluing data; only its curvature is meaningful
/// across seams. Used for synthetic curvature blocks.
pub struct LocalFormula {
    pub base: StructuredManifold,
    pub rank: usize,
    pub formula: Arc<dyn Fn(usize, &[f64]) -> LocalConnection + Send + Sync>,
    pub label: String,
}

impl ConnectionField for LocalFormula {
    fn rank(&self) -> usize {
        self.rank
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, chart: usize, x: &[f64]) -> LocalConnection {
        (self.formula)(chart, x)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}
