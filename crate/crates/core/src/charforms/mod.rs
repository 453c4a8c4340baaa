//! Chern-Weil forms and their transgressions.
//!
//! Normalization: `omega(E) = u^{r/2} R_u str exp(-u^-1 F)`, so the `u^{r/2 - k}` coefficient is
//! `(-1/(2 pi i))^k str F^k / k!`. With this sign the degree-one monopole has `int c_1 = +1`.

pub mod automorphism;
pub mod spinc;
pub mod transgression;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

pub use automorphism::UnitaryAutomorphism;
pub use spinc::SpinCStructure;
pub use transgression::{cs_aut, cs_three, cs_two, odd_chern_form};

use crate::bundles::BundleWithConnection;
use crate::graded::form::{mask_degree, merge_sign, ChartFields, Mask};
use crate::graded::{GradedForm, Grid};
use crate::linalg::{c, supertrace, CMat, MatForm};
use crate::{DktError, Result, C64};

/// Scalar form at one point, keyed by coordinate mask.
pub(crate) type PointForm = BTreeMap<Mask, C64>;

fn point_add(a: &mut PointForm, b: &PointForm, s: C64) {
    for (m, v) in b {
        *a.entry(*m).or_default() += v * s;
    }
}

fn point_wedge(a: &PointForm, b: &PointForm, max_degree: usize) -> PointForm {
    let mut out = PointForm::new();
    for (ma, x) in a {
        for (mb, y) in b {
            if ma & mb != 0 || mask_degree(ma | mb) > max_degree {
                continue;
            }
            *out.entry(ma | mb).or_default() += x * y * merge_sign(*ma, *mb);
        }
    }
    out
}

/// `exp(p)` for a form without 0-form part.
fn point_exp(p: &PointForm, max_degree: usize) -> PointForm {
    let mut out = PointForm::new();
    out.insert(0, c(1.0, 0.0));
    let mut term = out.clone();
    for k in 1..=max_degree / 2 {
        term = point_wedge(&term, p, max_degree);
        for v in term.values_mut() {
            *v /= k as f64;
        }
        point_add(&mut out, &term, c(1.0, 0.0));
    }
    out
}

/// Samples a pointwise scalar-form computation into a graded form of total degree 0,
/// placing a `2k`-form at u-degree `-2k`.
pub(crate) fn pointwise_form<F>(grid: &Arc<Grid>, f: F) -> Result<GradedForm>
where
    F: Fn(usize, usize) -> PointForm + Sync,
{
    let per_chart: Vec<Vec<PointForm>> = (0..grid.n_charts())
        .map(|ch| (0..grid.chart(ch).n_points).into_par_iter().map(|i| f(ch, i)).collect())
        .collect();
    let mut masks: Vec<Mask> = per_chart.iter().flatten().flat_map(|p| p.keys().copied()).collect();
    masks.sort_unstable();
    masks.dedup();
    let mut out = GradedForm::zero(grid, 0);
    for m in masks {
        let deg = mask_degree(m) as i32;
        if deg % 2 == 1 {
            return Err(DktError::Numerical("odd form in an even trace expansion".into()));
        }
        let fields: ChartFields = per_chart
            .iter()
            .map(|pts| pts.iter().map(|p| p.get(&m).copied().unwrap_or_default()).collect())
            .collect();
        out.set_component(-deg, m, fields)?;
    }
    Ok(out)
}

fn trace_series(f: &MatForm, plus: usize, dim: usize) -> PointForm {
    let mut out = PointForm::new();
    let mut power = MatForm::scalar_unit(f.rank);
    let mut fact = 1.0;
    for k in 0..=dim / 2 {
        if k > 0 {
            power = power.wedge(f, dim);
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (m, v) in &power.comps {
            *out.entry(*m).or_default() += c(sign / fact, 0.0) * supertrace(v, plus);
        }
    }
    out
}

/// Chern character form of total degree `r`; graded bundles use the supertrace.
pub fn chern_form(b: &BundleWithConnection, r: i32) -> Result<GradedForm> {
    if r % 2 != 0 {
        return Err(DktError::Degree(format!("chern_form needs an even degree, got {r}")));
    }
    let dim = b.manifold().dim();
    let plus = b.plus_rank();
    let raw = pointwise_form(b.grid(), |ch, i| trace_series(b.curvature_at(ch, i), plus, dim))?;
    Ok(raw.r_u().shift_u(r / 2))
}

/// First Chern form `-(2 pi i)^-1 u^-1 tr F`.
pub fn c1_form(b: &BundleWithConnection) -> Result<GradedForm> {
    let plus = b.plus_rank();
    let raw = pointwise_form(b.grid(), |ch, i| {
        let mut p = PointForm::new();
        for (m, v) in &b.curvature_at(ch, i).comps {
            if mask_degree(*m) == 2 {
                p.insert(*m, -supertrace(v, plus));
            }
        }
        p
    })?;
    Ok(raw.r_u())
}

const A_HAT_LOG: [f64; 3] = [-1.0 / 6.0, 1.0 / 180.0, -2.0 / 2835.0];

fn check_orthogonal(f: &MatForm) -> Result<()> {
    for v in f.comps.values() {
        let skew: f64 = (v + v.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let imag: f64 = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if skew > 1e-9 || imag > 1e-9 {
            return Err(DktError::Invalid("A-hat needs real antisymmetric curvature".into()));
        }
    }
    Ok(())
}

/// `R_u sqrt det(x / sinh x)` with `x = u^-1 Omega / 2`, via `exp(1/2 sum_k c_k tr x^{2k})`.
pub fn a_hat_form(tangent: &BundleWithConnection) -> Result<GradedForm> {
    let grid = tangent.grid();
    let dim = tangent.manifold().dim();
    for ch in 0..grid.n_charts() {
        for i in (0..grid.chart(ch).n_points).step_by(7) {
            check_orthogonal(tangent.curvature_at(ch, i))?;
        }
    }
    let raw = pointwise_form(grid, |ch, i| {
        let half = tangent.curvature_at(ch, i).scale(c(0.5, 0.0));
        let sq = half.wedge(&half, dim);
        let mut log = PointForm::new();
        let mut pow = sq.clone();
        for (k, ck) in A_HAT_LOG.iter().enumerate() {
            if 4 * (k + 1) > dim {
                break;
            }
            if k > 0 {
                pow = pow.wedge(&sq, dim);
            }
            for (m, v) in &pow.comps {
                *log.entry(*m).or_default() += c(0.5 * ck, 0.0) * v.trace();
            }
        }
        point_exp(&log, dim)
    })?;
    Ok(raw.r_u())
}

/// `sum_k f^k / k!` for a form of total degree 0 without constant part.
pub fn exp_form(f: &GradedForm) -> Result<GradedForm> {
    let dim = f.manifold().dim();
    let mut out = GradedForm::constant(f.grid(), 0, c(1.0, 0.0));
    let mut term = out.clone();
    for k in 1..=dim / 2 {
        term = term.wedge(f)?.scale_real(1.0 / k as f64);
        out = out.add(&term)?;
    }
    Ok(out)
}

/// `A-hat(W) ^ exp(c_1(L) / 2)`.
pub fn todd_form(tangent: &BundleWithConnection, line: &BundleWithConnection) -> Result<GradedForm> {
    if line.rank() != 1 {
        return Err(DktError::Rank(format!("spin^c line must have rank 1, got {}", line.rank())));
    }
    let half = c1_form(line)?.scale_real(0.5);
    a_hat_form(tangent)?.wedge(&exp_form(&half)?)
}

/// Constant-curvature helper for tests: `Omega = F` as given.
pub fn constant_curvature_bundle(grid: &Arc<Grid>, a: Vec<CMat>, da: MatForm, label: &str) -> Result<BundleWithConnection> {
    use crate::bundles::{LocalConnection, LocalFormula};
    let rank = da.rank;
    let field = LocalFormula {
        base: grid.manifold().clone(),
        rank,
        formula: Arc::new(move |_, _| LocalConnection { a: a.clone(), da: da.clone() }),
        label: label.into(),
    };
    BundleWithConnection::new(Arc::new(field), grid)
}

#[cfg(test)]
mod tests;
