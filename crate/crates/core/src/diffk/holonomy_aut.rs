//! Parallel transport around the leading circle as an automorphism of the slice bundle.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bundles::{holonomy, AutField, ConnectionField, HOLONOMY_STEPS};
use crate::graded::{Factor, GradedForm, Grid, StructuredManifold};
use crate::linalg::{c, max_abs, CMat};
use crate::Result;

/// `U(x)` = holonomy of a connection on `S^1 x X` around `S^1 x {x}`, based at `(star, x)`.
///
/// Values at grid nodes are cached with spectral derivatives. Circle coordinates whose
/// seam does not commute with `U` are differentiated by finite differences instead.
pub(crate) struct HolonomyAut {
    base: StructuredManifold,
    field: Arc<dyn ConnectionField>,
    star: f64,
    nodes: HashMap<(usize, Vec<u64>), (CMat, Vec<CMat>)>,
}

const FD_STEP: f64 = 1e-3;

fn key(chart: usize, x: &[f64]) -> (usize, Vec<u64>) {
    (chart, x.iter().map(|v| v.to_bits()).collect())
}

impl HolonomyAut {
    pub(crate) fn new(field: Arc<dyn ConnectionField>, grid: &Arc<Grid>, star: f64) -> Result<Self> {
        let base = grid.manifold().clone();
        let mut out = Self { base, field, star, nodes: HashMap::new() };
        let n = grid.n_coords();
        let r = out.field.rank();
        let values: Vec<Vec<CMat>> = (0..grid.n_charts())
            .map(|ch| {
                let chart = grid.chart(ch);
                (0..chart.n_points).into_par_iter().map(|i| out.raw(ch, &chart.point(i))).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let spectral = out.spectral_coords(grid, &values);
        let mut derivs: Vec<Vec<Vec<CMat>>> =
            values.iter().map(|vs| vs.iter().map(|_| vec![CMat::zeros(r, r); n]).collect()).collect();
        for a in 0..r {
            for b in 0..r {
                let mut f = GradedForm::zero(grid, 0);
                f.set_component(0, 0, values.iter().map(|vs| vs.iter().map(|u| u[(a, b)]).collect()).collect())?;
                let df = f.d();
                for k in (0..n).filter(|&k| spectral[k]) {
                    if let Some(comp) = df.component(0, 1 << k) {
                        for (ch, vals) in comp.iter().enumerate() {
                            for (i, v) in vals.iter().enumerate() {
                                derivs[ch][i][k][(a, b)] = *v;
                            }
                        }
                    }
                }
            }
        }
        for ch in 0..grid.n_charts() {
            let chart = grid.chart(ch);
            let fd: Vec<Vec<(usize, CMat)>> = (0..chart.n_points)
                .into_par_iter()
                .map(|i| {
                    let x = chart.point(i);
                    (0..n).filter(|&k| !spectral[k]).map(|k| Ok((k, out.fd(ch, &x, k)?))).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            for (i, list) in fd.into_iter().enumerate() {
                for (k, m) in list {
                    derivs[ch][i][k] = m;
                }
            }
            for (i, (u, du)) in values[ch].iter().zip(std::mem::take(&mut derivs[ch])).enumerate() {
                out.nodes.insert(key(ch, &chart.point(i)), (u.clone(), du));
            }
        }
        Ok(out)
    }

    fn raw(&self, chart: usize, x: &[f64]) -> Result<CMat> {
        let mut p = Vec::with_capacity(x.len() + 1);
        p.push(self.star);
        p.extend_from_slice(x);
        holonomy(self.field.as_ref(), 0, chart, &p, HOLONOMY_STEPS)
    }

    fn fd(&self, chart: usize, x: &[f64], k: usize) -> Result<CMat> {
        let mut y = x.to_vec();
        let mut at = |dx: f64| {
            y[k] = x[k] + dx;
            self.raw(chart, &y)
        };
        let h = FD_STEP;
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        Ok(((p1 - m1) * c(8.0, 0.0) - (p2 - m2)) * c(1.0 / (12.0 * h), 0.0))
    }

    /// Coordinates along which the sampled `U` is a smooth function on the chart axis.
    fn spectral_coords(&self, grid: &Arc<Grid>, values: &[Vec<CMat>]) -> Vec<bool> {
        let m = &self.base;
        let cf = m.coordinate_factors();
        (0..grid.n_coords())
            .map(|k| {
                if !matches!(m.factor(cf[k]), Factor::Circle { .. }) {
                    return true;
                }
                for (ch, vals) in values.iter().enumerate() {
                    let chart = grid.chart(ch);
                    for (i, u) in vals.iter().enumerate() {
                        if chart.multi_index(i)[k] != 0 {
                            continue;
                        }
                        let mut p = vec![self.star];
                        p.extend(chart.point(i));
                        if let Some(g) = self.field.seam(k + 1, ch, &p) {
                            if max_abs(&(&g * u - u * &g)) > 1e-12 {
                                return false;
                            }
                        }
                    }
                }
                true
            })
            .collect()
    }
}

impl AutField for HolonomyAut {
    fn rank(&self) -> usize {
        self.field.rank()
    }
    fn base(&self) -> &StructuredManifold {
        &self.base
    }
    fn eval(&self, chart: usize, x: &[f64]) -> (CMat, Vec<CMat>) {
        if let Some(v) = self.nodes.get(&key(chart, x)) {
            return v.clone();
        }
        let u = self.value(chart, x);
        let du = (0..x.len()).map(|k| self.fd(chart, x, k).expect("circle coordinate checked")).collect();
        (u, du)
    }
    fn value(&self, chart: usize, x: &[f64]) -> CMat {
        match self.nodes.get(&key(chart, x)) {
            Some(v) => v.0.clone(),
            None => self.raw(chart, x).expect("circle coordinate checked"),
        }
    }
    fn describe(&self) -> String {
        format!("holonomy({})", self.field.describe())
    }
}
