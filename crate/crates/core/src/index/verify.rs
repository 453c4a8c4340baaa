//! Comparison of the analytic and topological indices of a product family.

use super::{analytic_index_product, kunneth_pushforward, todd_pushforward, IndexResult, KunnethClass, ProductFamily};
use super::FiberGeometry;
use crate::bundles::BundleWithConnection;
use crate::diffk::{circle_cycles, DKClassEven, ReferenceCycle};
use crate::graded::{EtaValue, Factor};
use crate::spectral::{eta_class, flat_constituents, is_flat, product_reduced_eta, torus_kernel_dim, SpectralModel};
use crate::{DktError, Result};

/// `(dim ker_+, dim ker_-)` of the fiber Dirac operator twisted by `b`.
///
/// On the round sphere the spin^c Dirac operator is `sqrt 2 (dbar + dbar^*)` on the line of degree
/// `m = deg b` (complex structure) or `m = deg b - 1` (spin structure), so the kernel is
/// `(h^0, h^1) = (max(m + 1, 0), max(-m - 1, 0))`.
pub fn fiber_kernel(b: &BundleWithConnection, fiber: &FiberGeometry) -> Result<(usize, usize)> {
    if b.rank() == 0 {
        return Ok((0, 0));
    }
    if b.is_graded() {
        return Err(DktError::Unsupported("fiber kernels of graded bundles".into()));
    }
    let m = fiber.grid().manifold();
    let flux = |b: &BundleWithConnection| -> Result<i64> {
        let c1 = crate::charforms::c1_form(b)?;
        let all: Vec<usize> = (0..m.n_factors()).collect();
        let v = ReferenceCycle::new(m, &all)?.period(&c1)?.real_coeff(-2);
        if (v - v.round()).abs() > 1e-6 {
            return Err(DktError::Numerical(format!("non-integral fiber flux {v}")));
        }
        Ok(v.round() as i64)
    };
    match m.factors() {
        [Factor::Sphere2 { .. }] => {
            let d = if b.rank() == 1 {
                flux(b)?
            } else if is_flat(b) {
                0
            } else {
                return Err(DktError::Unsupported("curved higher-rank bundles on the sphere".into()));
            };
            let deg = if fiber.complex_spheres() { d } else { d - 1 };
            let per_line = ((deg + 1).max(0) as usize, (-deg - 1).max(0) as usize);
            let copies = if b.rank() == 1 { 1 } else { b.rank() };
            Ok((copies * per_line.0, copies * per_line.1))
        }
        [Factor::Circle { .. }, Factor::Circle { .. }] => {
            if is_flat(b) {
                let mut k = (0, 0);
                for (_, model) in flat_constituents(b, &[0.0, 0.0])? {
                    let (p, q) = torus_kernel_dim(&model)?;
                    k = (k.0 + p, k.1 + q);
                }
                return Ok(k);
            }
            if b.rank() != 1 {
                return Err(DktError::Unsupported("curved higher-rank bundles on the torus".into()));
            }
            let n = flux(b)?;
            if n == 0 {
                return Err(DktError::Unsupported("curved flux-zero line on the torus".into()));
            }
            torus_kernel_dim(&SpectralModel::new(m, &[0.0, 0.0], Some(n))?)
        }
        _ => Err(DktError::Unsupported(format!("fiber kernels on {m:?}"))),
    }
}

/// `eta-bar(Z x B, E)` for a family over a circle whose base classes are flat, by separating
/// variables: `eta-bar = ind(D_Z) eta(D_B) / 2 + ker(D_Z) ker(D_B) / 2` per generator pair,
/// plus `int_{Z x B} Td ^ phi`.
pub fn product_eta(f: &ProductFamily) -> Result<EtaValue> {
    let bm = f.base().manifold();
    if !matches!(bm.factors(), [Factor::Circle { .. }]) {
        return Err(DktError::Unsupported("total-space eta needs a circle base".into()));
    }
    let n = f.fiber().dim();
    let mut total = 0.0;
    for t in f.terms() {
        for a in t.fiber.generators() {
            let kernel = fiber_kernel(&a.bundle, f.fiber())?;
            for b in t.base.generators() {
                if b.bundle.rank() == 0 {
                    continue;
                }
                for (sign, model) in flat_constituents(&b.bundle, &[0.0])? {
                    let e = product_reduced_eta(n, kernel, &model)?;
                    total += (a.coeff * b.coeff) as f64 * sign * e.value;
                }
            }
        }
    }
    let dim = (n + bm.dim()) as i32;
    let key = f.degree() - dim - 1;
    let td = f.todd_total()?;
    for g in f.total_class()?.generators() {
        total += g.coeff as f64 * td.wedge(&g.phi)?.integrate()?.real_coeff(key);
    }
    Ok(EtaValue::new(key / 2, total))
}

#[derive(Clone, Debug)]
pub struct EtaComparison {
    pub base_analytic: EtaValue,
    pub base_topological: Option<EtaValue>,
    pub total: EtaValue,
}

/// Result of [`verify_index_theorem`]; residuals are `None` when not computable.
#[derive(Clone, Debug)]
pub struct IndexReport {
    pub analytic: Option<IndexResult>,
    pub topological: Option<DKClassEven>,
    /// `max |omega(ind^an) - pi_* omega(E)|`.
    pub omega_analytic: Option<f64>,
    /// `max |omega(ind^top) - pi_* omega(E)|`.
    pub omega_topological: Option<f64>,
    /// Distance of the observables of the two indices.
    pub observable: Option<f64>,
    pub rank_difference: Option<i64>,
    /// Largest difference of determinant-line holonomies, in degree 0.
    pub det_holonomy: Option<f64>,
    pub eta: Option<EtaComparison>,
    pub eta_residual: Option<f64>,
    pub max_residual: f64,
    pub notes: Vec<String>,
}

fn det_distance(a: &DKClassEven, b: &DKClassEven) -> Result<f64> {
    let (da, db) = (a.det_line()?, b.det_line()?);
    let mut worst: f64 = 0.0;
    for cyc in circle_cycles(a.manifold()) {
        worst = worst.max((da.holonomy(&cyc)? - db.holonomy(&cyc)?).norm());
    }
    Ok(worst)
}

fn record<T>(notes: &mut Vec<String>, what: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Compares `ind^an` with the Kunneth pushforward (when a decomposition is given) through
/// `omega`, the observables, determinant holonomies and, over a circle, eta invariants.
pub fn verify_index_theorem(f: &ProductFamily, decomposition: Option<&KunnethClass>) -> IndexReport {
    let mut notes = Vec::new();
    let analytic = record(&mut notes, "analytic index", analytic_index_product(f));
    let topological = match decomposition {
        Some(k) => record(&mut notes, "topological index", kunneth_pushforward(k)),
        None => {
            notes.push("no Kunneth decomposition given; topological index skipped".into());
            None
        }
    };
    let pushed = record(&mut notes, "pi_* omega", f.total_class().and_then(|c| todd_pushforward(&c.omega()?, f)));
    let omega_res = |c: &DKClassEven| -> Result<f64> {
        let p = pushed.as_ref().ok_or_else(|| DktError::Numerical("pi_* omega unavailable".into()))?;
        Ok(c.omega()?.sub(p)?.max_norm())
    };
    let omega_analytic = analytic.as_ref().and_then(|a| record(&mut notes, "omega (analytic)", omega_res(&a.class)));
    let omega_topological = topological.as_ref().and_then(|t| record(&mut notes, "omega (topological)", omega_res(t)));
    let mut observable = None;
    let mut rank_difference = None;
    let mut det_holonomy = None;
    if let (Some(a), Some(t)) = (&analytic, &topological) {
        observable = record(
            &mut notes,
            "observables",
            a.class.observable().and_then(|oa| Ok(oa.distance(&t.observable()?))),
        );
        rank_difference = Some(a.class.rank() - t.rank());
        if a.class.degree() == 0 {
            det_holonomy = record(&mut notes, "determinant holonomy", det_distance(&a.class, t));
        }
    }
    let mut eta = None;
    let mut eta_residual = None;
    if let Some(a) = &analytic {
        let bm = f.base().manifold();
        if bm.is_torus() && bm.dim() % 2 == 1 {
            let base_analytic = record(&mut notes, "eta (analytic)", eta_class(&a.class, &[]));
            let base_topological =
                topological.as_ref().and_then(|t| record(&mut notes, "eta (topological)", eta_class(t, &[])));
            let total = record(&mut notes, "eta (total space)", product_eta(f));
            if let (Some(ba), Some(tot)) = (base_analytic, total) {
                let mut r = ba.distance(&tot);
                if let Some(bt) = &base_topological {
                    r = r.max(ba.distance(bt));
                }
                eta_residual = Some(r);
                eta = Some(EtaComparison { base_analytic: ba, base_topological, total: tot });
            }
        }
    }
    let mut max_residual: f64 = 0.0;
    for r in [omega_analytic, omega_topological, observable, det_holonomy, eta_residual].into_iter().flatten() {
        max_residual = max_residual.max(r);
    }
    if let Some(d) = rank_difference {
        max_residual = max_residual.max(d.abs() as f64);
    }
    if analytic.is_none() || (decomposition.is_some() && topological.is_none()) {
        max_residual = f64::INFINITY;
    }
    IndexReport {
        analytic,
        topological,
        omega_analytic,
        omega_topological,
        observable,
        rank_difference,
        det_holonomy,
        eta,
        eta_residual,
        max_residual,
        notes,
    }
}
