//! Graded differential forms sampled on chart grids.
//!
//! A component is labelled by its u-degree and a bitmask of coordinate indices; the
//! coefficient of `dx^{i_1} ^ ... ^ dx^{i_k}` with `i_1 < ... < i_k` is stored per chart
//! as a flat array over the chart grid.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::grid::Grid;
use super::laurent::{two_pi_i_pow, LaurentScalar};
use super::manifold::{Factor, StructuredManifold};
use super::quadrature::pairwise_sum;
use crate::{DktError, Result, C64};

/// Coordinate multi-index as a bitmask.
pub type Mask = u16;

/// Samples of one component, one array per chart.
pub type ChartFields = Vec<Vec<C64>>;

pub fn mask_degree(m: Mask) -> usize {
    m.count_ones() as usize
}

/// Sign of `dx^a ^ dx^b` relative to the sorted basis element `dx^(a|b)`.
pub fn merge_sign(a: Mask, b: Mask) -> f64 {
    let mut count = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        // elements of a greater than j must pass j
        count += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coordinates listed by a mask, increasing.
pub fn mask_coords(m: Mask) -> Vec<usize> {
    (0..16).filter(|i| m >> i & 1 == 1).collect()
}

pub fn coords_mask(coords: &[usize]) -> Mask {
    coords.iter().fold(0, |m, &i| m | (1 << i))
}

fn permutation_sign(v: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                s = -s;
            }
        }
    }
    s
}

/// How a dropped factor is evaluated when restricting to a slice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlicePoint {
    /// Node index on a circle factor.
    CircleNode(usize),
    /// Node of a sphere factor in one cap.
    SphereNode { south: bool, theta: usize, phi: usize },
    /// Polynomial interpolation of an interval factor at `t`.
    Interval(f64),
}

impl SlicePoint {
    /// The default basepoint of a factor.
    pub fn basepoint(f: Factor) -> SlicePoint {
        match f {
            Factor::Circle { .. } => SlicePoint::CircleNode(0),
            Factor::Sphere2 { .. } => SlicePoint::SphereNode { south: false, theta: 0, phi: 0 },
            Factor::Interval01 => SlicePoint::Interval(0.0),
        }
    }
}

/// A graded form of fixed total degree.
#[derive(Clone, Debug)]
pub struct GradedForm {
    grid: Arc<Grid>,
    total_degree: i32,
    comps: BTreeMap<(i32, Mask), ChartFields>,
}

impl GradedForm {
    pub fn zero(grid: &Arc<Grid>, total_degree: i32) -> Self {
        Self { grid: grid.clone(), total_degree, comps: BTreeMap::new() }
    }

    /// Constant 0-form with Laurent coefficients; all u-degrees must equal `total_degree`.
    pub fn constant(grid: &Arc<Grid>, total_degree: i32, c: C64) -> Self {
        let mut f = Self::zero(grid, total_degree);
        if c != C64::new(0.0, 0.0) {
            f.set_component(total_degree, 0, grid.charts().iter().map(|ch| vec![c; ch.n_points]).collect())
                .expect("valid constant");
        }
        f
    }

    /// Builds one component from a chart formula `f(chart, coords)`.
    pub fn from_fn<F>(grid: &Arc<Grid>, u_degree: i32, mask: Mask, f: F) -> Result<Self>
    where
        F: Fn(usize, &[f64]) -> C64 + Sync,
    {
        let total = u_degree + mask_degree(mask) as i32;
        let mut out = Self::zero(grid, total);
        let fields = sample(grid, &f);
        out.set_component(u_degree, mask, fields)?;
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn manifold(&self) -> &StructuredManifold {
        self.grid.manifold()
    }

    pub fn total_degree(&self) -> i32 {
        self.total_degree
    }

    pub fn components(&self) -> impl Iterator<Item = (i32, Mask, &ChartFields)> {
        self.comps.iter().map(|((u, m), v)| (*u, *m, v))
    }

    pub fn component(&self, u_degree: i32, mask: Mask) -> Option<&ChartFields> {
        self.comps.get(&(u_degree, mask))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Inserts or accumulates a component.
    pub fn set_component(&mut self, u_degree: i32, mask: Mask, fields: ChartFields) -> Result<()> {
        if u_degree % 2 != 0 {
            return Err(DktError::Degree(format!("odd u-degree {u_degree}")));
        }
        if u_degree + mask_degree(mask) as i32 != self.total_degree {
            return Err(DktError::Degree(format!(
                "component (u-degree {u_degree}, form degree {}) does not have total degree {}",
                mask_degree(mask),
                self.total_degree
            )));
        }
        if mask_degree(mask) > self.grid.n_coords() || (mask >> self.grid.n_coords()) != 0 {
            return Err(DktError::Degree(format!("mask {mask:#b} exceeds dimension {}", self.grid.n_coords())));
        }
        if fields.len() != self.grid.n_charts()
            || fields.iter().zip(self.grid.charts()).any(|(f, c)| f.len() != c.n_points)
        {
            return Err(DktError::Invalid("field shape does not match grid".into()));
        }
        match self.comps.get_mut(&(u_degree, mask)) {
            Some(existing) => {
                for (e, f) in existing.iter_mut().zip(fields) {
                    for (a, b) in e.iter_mut().zip(f) {
                        *a += b;
                    }
                }
            }
            None => {
                self.comps.insert((u_degree, mask), fields);
            }
        }
        Ok(())
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(DktError::ManifoldMismatch(format!(
                "{:?} vs {:?}",
                self.grid.manifold(),
                other.grid.manifold()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        if self.total_degree != other.total_degree && !other.is_zero() && !self.is_zero() {
            return Err(DktError::Degree(format!(
                "adding forms of total degree {} and {}",
                self.total_degree, other.total_degree
            )));
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let mut out = self.clone();
        for (u, m, f) in other.components() {
            out.set_component(u, m, f.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(&self.grid, self.total_degree);
        for ((u, m), f) in &self.comps {
            out.comps.insert((*u, *m), f.iter().map(|v| v.iter().map(|x| x * c).collect()).collect());
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Multiplies by `u^k`, shifting all u-degrees by `2k`.
    pub fn shift_u(&self, k: i32) -> Self {
        let mut out = Self::zero(&self.grid, self.total_degree + 2 * k);
        for ((u, m), f) in &self.comps {
            out.comps.insert((u + 2 * k, *m), f.clone());
        }
        out
    }

    /// Keeps only components with the given u-degree.
    pub fn u_part(&self, u_degree: i32) -> Self {
        let mut out = Self::zero(&self.grid, self.total_degree);
        for ((u, m), f) in &self.comps {
            if *u == u_degree {
                out.comps.insert((*u, *m), f.clone());
            }
        }
        out
    }

    /// Keeps only components of the given form degree.
    pub fn form_degree_part(&self, k: usize) -> Self {
        let mut out = Self::zero(&self.grid, self.total_degree);
        for ((u, m), f) in &self.comps {
            if mask_degree(*m) == k {
                out.comps.insert((*u, *m), f.clone());
            }
        }
        out
    }

    /// Exterior product; the sign only involves form degrees.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut out = Self::zero(&self.grid, self.total_degree + other.total_degree);
        let n = self.grid.n_coords();
        for ((ua, ma), fa) in &self.comps {
            for ((ub, mb), fb) in &other.comps {
                if ma & mb != 0 || mask_degree(ma | mb) > n {
                    continue;
                }
                let s = merge_sign(*ma, *mb);
                let prod: ChartFields = fa
                    .iter()
                    .zip(fb)
                    .map(|(x, y)| x.iter().zip(y).map(|(a, b)| a * b * s).collect())
                    .collect();
                out.set_component(ua + ub, ma | mb, prod)?;
            }
        }
        Ok(out)
    }

    /// Exterior derivative by spectral differentiation along each axis.
    pub fn d(&self) -> Self {
        let n = self.grid.n_coords();
        let mut out = Self::zero(&self.grid, self.total_degree + 1);
        for ((u, m), f) in &self.comps {
            for k in 0..n {
                if m >> k & 1 == 1 {
                    continue;
                }
                let sign = if (m & ((1 << k) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let der: ChartFields =
                    f.iter().enumerate().map(|(c, field)| differentiate(&self.grid, c, field, k, sign)).collect();
                out.set_component(*u, m | (1 << k), der).expect("consistent degree");
            }
        }
        out
    }

    /// Integral over a closed manifold; only top-degree components contribute.
    pub fn integrate(&self) -> Result<LaurentScalar> {
        if !self.manifold().is_closed() {
            return Err(DktError::NotClosed(format!("{:?}", self.manifold())));
        }
        let top: Mask = if self.grid.n_coords() == 0 { 0 } else { ((1u32 << self.grid.n_coords()) - 1) as Mask };
        let mut out = LaurentScalar::zero();
        for ((u, m), f) in &self.comps {
            if *m != top {
                continue;
            }
            let mut chart_sums = Vec::with_capacity(f.len());
            for (c, field) in f.iter().enumerate() {
                let chart = self.grid.chart(c);
                let terms: Vec<C64> = (0..chart.n_points)
                    .into_par_iter()
                    .map(|i| field[i] * (chart.weight(i) * self.grid.partition(c, i)))
                    .collect();
                chart_sums.push(pairwise_sum(&terms));
            }
            out.add_term(*u, pairwise_sum(&chart_sums));
        }
        Ok(out)
    }

    /// Integration along the listed fiber factors.
    ///
    /// The convention is fiber-first: `dx^F ^ beta` integrates to `(int_F) beta`, so
    /// forms written with the fiber coordinates in front push forward without sign.
    /// Interval fibers are allowed; Stokes then acquires boundary terms.
    pub fn fiber_integrate(&self, fiber_factors: &[usize]) -> Result<Self> {
        let m = self.manifold();
        let mut fib = fiber_factors.to_vec();
        fib.sort_unstable();
        fib.dedup();
        if fib.len() != fiber_factors.len() || fib.iter().any(|&i| i >= m.n_factors()) {
            return Err(DktError::Factors(format!("{fiber_factors:?} is not a set of factors of {m:?}")));
        }
        let base_factors: Vec<usize> = (0..m.n_factors()).filter(|i| !fib.contains(i)).collect();
        let base_m = m.sub_product(&base_factors)?;
        let base_grid = Grid::new(&base_m, self.grid.numerics())?;
        let coord_factor = m.coordinate_factors();
        let fiber_coords: Vec<usize> = (0..m.dim()).filter(|&k| fib.contains(&coord_factor[k])).collect();
        let base_coords: Vec<usize> = (0..m.dim()).filter(|&k| !fib.contains(&coord_factor[k])).collect();
        let fmask = coords_mask(&fiber_coords);
        let fdim = fiber_coords.len() as i32;
        let spheres = m.sphere_factors();
        let mut out = GradedForm::zero(&base_grid, self.total_degree - fdim);

        // chart decomposition
        let split_chart = |c: usize| -> (usize, usize) {
            let (mut cb, mut cf, mut nb, mut nf) = (0, 0, 0, 0);
            for (s, &fi) in spheres.iter().enumerate() {
                let bit = (c >> s) & 1;
                if fib.contains(&fi) {
                    cf |= bit << nf;
                    nf += 1;
                } else {
                    cb |= bit << nb;
                    nb += 1;
                }
            }
            (cb, cf)
        };
        let n_fiber_spheres = spheres.iter().filter(|s| fib.contains(s)).count();
        let mut chart_of = vec![vec![0usize; 1 << n_fiber_spheres]; base_grid.n_charts()];
        for c in 0..self.grid.n_charts() {
            let (cb, cf) = split_chart(c);
            chart_of[cb][cf] = c;
        }

        for ((u, mk), f) in &self.comps {
            if mk & fmask != fmask {
                continue;
            }
            let rest = mk & !fmask;
            let rest_coords = mask_coords(rest);
            // fiber-first sign: move fiber coordinates in front
            let mut inv = 0;
            for &r in &rest_coords {
                inv += fiber_coords.iter().filter(|&&k| k > r).count();
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            let new_coords: Vec<usize> =
                rest_coords.iter().map(|r| base_coords.iter().position(|b| b == r).expect("base coord")).collect();
            let new_mask = coords_mask(&new_coords);
            let mut fields: ChartFields = Vec::with_capacity(base_grid.n_charts());
            for cb in 0..base_grid.n_charts() {
                let bchart = base_grid.chart(cb);
                let vals: Vec<C64> = (0..bchart.n_points)
                    .into_par_iter()
                    .map(|bi| {
                        let bmi = bchart.multi_index(bi);
                        let mut terms = Vec::new();
                        for &c in &chart_of[cb] {
                            let chart = self.grid.chart(c);
                            let fshape: Vec<usize> = fiber_coords.iter().map(|&k| chart.shape[k]).collect();
                            let nf: usize = fshape.iter().product();
                            let mut mi = vec![0usize; m.dim()];
                            for (j, &k) in base_coords.iter().enumerate() {
                                mi[k] = bmi[j];
                            }
                            for fi in 0..nf {
                                let mut r = fi;
                                for j in (0..fiber_coords.len()).rev() {
                                    mi[fiber_coords[j]] = r % fshape[j];
                                    r /= fshape[j];
                                }
                                let idx = chart.flat_index(&mi);
                                let mut w = 1.0;
                                for &k in &fiber_coords {
                                    w *= chart.axes[k].weights[mi[k]];
                                }
                                w *= fiber_partition(&self.grid, c, &mi, &fib);
                                terms.push(f[c][idx] * w);
                            }
                        }
                        pairwise_sum(&terms) * sign
                    })
                    .collect();
                fields.push(vals);
            }
            out.set_component(*u, new_mask, fields)?;
        }
        Ok(out)
    }

    /// Pullback along a factor projection `target -> source`.
    ///
    /// `factor_map[i]` is the target factor carrying source factor `i`.
    pub fn pullback(&self, target: &Arc<Grid>, factor_map: &[usize]) -> Result<Self> {
        let src = self.manifold();
        let tgt = target.manifold();
        check_factor_map(src, tgt, factor_map)?;
        if target.numerics() != self.grid.numerics() {
            return Err(DktError::ManifoldMismatch("pullback requires equal numerics".into()));
        }
        let coord_map = coordinate_map(src, tgt, factor_map);
        let chart_map = chart_map(src, tgt, factor_map);
        let mut out = GradedForm::zero(target, self.total_degree);
        for ((u, m), f) in &self.comps {
            let mapped: Vec<usize> = mask_coords(*m).iter().map(|&k| coord_map[k]).collect();
            let sign = permutation_sign(&mapped);
            let new_mask = coords_mask(&mapped);
            let mut fields = Vec::with_capacity(target.n_charts());
            for ct in 0..target.n_charts() {
                let cs = chart_map[ct];
                let tchart = target.chart(ct);
                let schart = self.grid.chart(cs);
                let vals: Vec<C64> = (0..tchart.n_points)
                    .into_par_iter()
                    .map(|i| {
                        let tmi = tchart.multi_index(i);
                        let smi: Vec<usize> = coord_map.iter().map(|&k| tmi[k]).collect();
                        f[cs][schart.flat_index(&smi)] * sign
                    })
                    .collect();
                fields.push(vals);
            }
            out.set_component(*u, new_mask, fields)?;
        }
        Ok(out)
    }

    /// Restriction to the slice `{p} x kept factors`, with the dropped factors at `points`.
    ///
    /// `points` lists one entry per dropped factor in increasing factor order.
    pub fn restrict(&self, keep: &[usize], points: &[SlicePoint]) -> Result<Self> {
        let m = self.manifold();
        let sub = m.sub_product(keep)?;
        let dropped: Vec<usize> = (0..m.n_factors()).filter(|i| !keep.contains(i)).collect();
        if dropped.len() != points.len() {
            return Err(DktError::Invalid("one slice point per dropped factor is required".into()));
        }
        let sub_grid = Grid::new(&sub, self.grid.numerics())?;
        let offsets = m.coordinate_offsets();
        let coord_factor = m.coordinate_factors();
        let kept_coords: Vec<usize> = (0..m.dim()).filter(|&k| keep.contains(&coord_factor[k])).collect();
        let dropped_mask = coords_mask(&(0..m.dim()).filter(|&k| !keep.contains(&coord_factor[k])).collect::<Vec<_>>());
        let spheres = m.sphere_factors();

        // For each dropped coordinate: list of (node, coefficient).
        let mut stencil: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        let mut forced_caps: Vec<(usize, bool)> = Vec::new();
        for (fi, p) in dropped.iter().zip(points) {
            let off = offsets[*fi];
            match (m.factor(*fi), p) {
                (Factor::Circle { .. }, SlicePoint::CircleNode(j)) => stencil.push((off, vec![(*j, 1.0)])),
                (Factor::Sphere2 { .. }, SlicePoint::SphereNode { south, theta, phi }) => {
                    let s = spheres.iter().position(|x| x == fi).expect("sphere");
                    forced_caps.push((s, *south));
                    stencil.push((off, vec![(*theta, 1.0)]));
                    stencil.push((off + 1, vec![(*phi, 1.0)]));
                }
                (Factor::Interval01, SlicePoint::Interval(t)) => {
                    let axis = &self.grid.chart(0).axes[off];
                    let row = axis.interpolation_row(*t)?;
                    stencil.push((off, row.into_iter().enumerate().collect()));
                }
                (f, p) => return Err(DktError::Invalid(format!("slice point {p:?} does not fit factor {f:?}"))),
            }
        }
        let mut out = GradedForm::zero(&sub_grid, self.total_degree);
        let kept_spheres: Vec<usize> = spheres.iter().enumerate().filter(|(_, f)| keep.contains(f)).map(|(s, _)| s).collect();
        for ((u, mk), f) in &self.comps {
            if mk & dropped_mask != 0 {
                continue;
            }
            let new_coords: Vec<usize> =
                mask_coords(*mk).iter().map(|r| kept_coords.iter().position(|b| b == r).expect("kept")).collect();
            let mut fields = Vec::new();
            for cs in 0..sub_grid.n_charts() {
                let mut c = 0usize;
                for (j, &s) in kept_spheres.iter().enumerate() {
                    c |= ((cs >> j) & 1) << s;
                }
                for &(s, south) in &forced_caps {
                    c |= (south as usize) << s;
                }
                let chart = self.grid.chart(c);
                let schart = sub_grid.chart(cs);
                let vals: Vec<C64> = (0..schart.n_points)
                    .map(|i| {
                        let smi = schart.multi_index(i);
                        let mut mi = vec![0usize; m.dim()];
                        for (j, &k) in kept_coords.iter().enumerate() {
                            mi[k] = smi[j];
                        }
                        let mut acc = C64::new(0.0, 0.0);
                        accumulate_stencil(&stencil, 0, &mut mi, 1.0, &mut |mi, w| {
                            acc += f[c][chart.flat_index(mi)] * w;
                        });
                        acc
                    })
                    .collect();
                fields.push(vals);
            }
            out.set_component(*u, coords_mask(&new_coords), fields)?;
        }
        Ok(out)
    }

    /// Applies `u -> 2 pi i u` componentwise.
    pub fn r_u(&self) -> Self {
        let mut out = Self::zero(&self.grid, self.total_degree);
        for ((u, m), f) in &self.comps {
            let c = two_pi_i_pow(u / 2);
            out.comps.insert((*u, *m), f.iter().map(|v| v.iter().map(|x| x * c).collect()).collect());
        }
        out
    }

    /// Largest coefficient modulus over all components, charts and points.
    pub fn max_norm(&self) -> f64 {
        self.comps
            .values()
            .flat_map(|f| f.iter().flat_map(|v| v.iter().map(|x| x.norm())))
            .fold(0.0, f64::max)
    }

    /// Largest imaginary part; forms from trace expansions must be real.
    pub fn max_imag(&self) -> f64 {
        self.comps
            .values()
            .flat_map(|f| f.iter().flat_map(|v| v.iter().map(|x| x.im.abs())))
            .fold(0.0, f64::max)
    }

    /// Asserts the form is real to `1e-9` relative to its size.
    pub fn assert_real(&self) -> Result<()> {
        let im = self.max_imag();
        if im > 1e-9 * (1.0 + self.max_norm()) {
            return Err(DktError::Numerical(format!("form expected to be real has imaginary part {im:e}")));
        }
        Ok(())
    }

    /// Value of a component at a sample point.
    pub fn value(&self, u_degree: i32, mask: Mask, chart: usize, idx: usize) -> C64 {
        self.comps.get(&(u_degree, mask)).map(|f| f[chart][idx]).unwrap_or_default()
    }

    /// Disagreement between the two caps of every sphere on the shared band nodes.
    pub fn chart_overlap_residual(&self) -> f64 {
        let g = &self.grid;
        let q = g.numerics().sphere_theta;
        let polar = g.polar_sphere().to_vec();
        let mut worst: f64 = 0.0;
        for f in self.comps.values() {
            for c in 0..g.n_charts() {
                for (k, s) in polar.iter().enumerate() {
                    let Some(s) = s else { continue };
                    if (c >> s) & 1 == 1 {
                        continue;
                    }
                    let c2 = c | (1 << s);
                    let chart = g.chart(c);
                    let chart2 = g.chart(c2);
                    for i in 0..chart.n_points {
                        let mut mi = chart.multi_index(i);
                        if mi[k] < q {
                            continue;
                        }
                        mi[k] -= q;
                        let j = chart2.flat_index(&mi);
                        worst = worst.max((f[c][i] - f[c2][j]).norm());
                    }
                }
            }
        }
        worst
    }
}

fn accumulate_stencil(
    stencil: &[(usize, Vec<(usize, f64)>)],
    level: usize,
    mi: &mut Vec<usize>,
    w: f64,
    f: &mut dyn FnMut(&[usize], f64),
) {
    if level == stencil.len() {
        f(mi, w);
        return;
    }
    let (k, entries) = &stencil[level];
    for &(node, coef) in entries {
        if coef == 0.0 {
            continue;
        }
        mi[*k] = node;
        accumulate_stencil(stencil, level + 1, mi, w * coef, f);
    }
}

fn fiber_partition(grid: &Grid, c: usize, mi: &[usize], fib: &[usize]) -> f64 {
    let m = grid.manifold();
    let spheres = m.sphere_factors();
    let offsets = m.coordinate_offsets();
    let chart = grid.chart(c);
    let mut w = 1.0;
    for (s, &fi) in spheres.iter().enumerate() {
        if !fib.contains(&fi) {
            continue;
        }
        let theta = chart.axes[offsets[fi]].nodes[mi[offsets[fi]]];
        let n = super::grid::north_weight(theta);
        w *= if (c >> s) & 1 == 1 { 1.0 - n } else { n };
    }
    w
}

/// Samples a chart formula on every chart of a grid.
pub fn sample<F>(grid: &Arc<Grid>, f: &F) -> ChartFields
where
    F: Fn(usize, &[f64]) -> C64 + Sync,
{
    (0..grid.n_charts())
        .map(|c| {
            let chart = grid.chart(c);
            (0..chart.n_points).into_par_iter().map(|i| f(c, &chart.point(i))).collect()
        })
        .collect()
}

fn differentiate(grid: &Grid, c: usize, field: &[C64], k: usize, sign: f64) -> Vec<C64> {
    let chart = grid.chart(c);
    let len = chart.shape[k];
    let stride = chart.strides[k];
    let outer: usize = chart.shape[..k].iter().product();
    let starts: Vec<usize> = (0..outer).flat_map(|o| (0..stride).map(move |i| o * len * stride + i)).collect();
    let axis = chart.axes[k].clone();
    let lines: Vec<Vec<C64>> = starts
        .par_iter()
        .map(|&s| {
            let mut line: Vec<C64> = (0..len).map(|j| field[s + j * stride]).collect();
            axis.op.apply(&mut line);
            line
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); field.len()];
    for (s, line) in starts.iter().zip(lines) {
        for (j, v) in line.into_iter().enumerate() {
            out[s + j * stride] = v * sign;
        }
    }
    out
}

pub(crate) fn check_factor_map(src: &StructuredManifold, tgt: &StructuredManifold, map: &[usize]) -> Result<()> {
    if map.len() != src.n_factors() {
        return Err(DktError::Factors("factor map length differs from source factor count".into()));
    }
    let mut seen = vec![false; tgt.n_factors()];
    for (i, &t) in map.iter().enumerate() {
        if t >= tgt.n_factors() || seen[t] || tgt.factor(t) != src.factor(i) {
            return Err(DktError::Factors(format!("factor {i} of source does not map to a matching target factor")));
        }
        seen[t] = true;
    }
    Ok(())
}

/// Target coordinate of each source coordinate.
pub(crate) fn coordinate_map(src: &StructuredManifold, tgt: &StructuredManifold, map: &[usize]) -> Vec<usize> {
    let so = src.coordinate_offsets();
    let to = tgt.coordinate_offsets();
    let mut out = Vec::new();
    for (i, f) in src.factors().iter().enumerate() {
        for d in 0..f.dim() {
            debug_assert_eq!(out.len(), so[i] + d);
            out.push(to[map[i]] + d);
        }
    }
    out
}

/// Source chart for each target chart.
pub(crate) fn chart_map(src: &StructuredManifold, tgt: &StructuredManifold, map: &[usize]) -> Vec<usize> {
    let ss = src.sphere_factors();
    let ts = tgt.sphere_factors();
    (0..tgt.n_charts())
        .map(|ct| {
            let mut cs = 0;
            for (j, &sf) in ss.iter().enumerate() {
                let tpos = ts.iter().position(|&x| x == map[sf]).expect("sphere maps to sphere");
                cs |= ((ct >> tpos) & 1) << j;
            }
            cs
        })
        .collect()
}
