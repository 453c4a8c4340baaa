//! Dirac spectra and reduced eta invariants on flat tori.

mod landau;
mod zeta;

#[cfg(test)]
mod tests;

use std::f64::consts::PI;

pub use landau::{landau_kernel_dim, GAP_RATIO};
pub use zeta::{circle_eta_richardson, circle_eta_zeta, hurwitz_zeta};

use crate::bundles::BundleWithConnection;
use crate::diffk::{DKClassEven, ReferenceCycle};
use crate::graded::{frac, EtaValue, Factor, StructuredManifold};
use crate::linalg::{max_abs, normal_eigenvalues, CMat};
use crate::{DktError, Result};

/// Curvature bound below which a bundle counts as flat.
pub const FLAT_TOL: f64 = 1e-9;

/// A twisted Dirac operator on a flat torus.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    manifold: StructuredManifold,
    /// Total holonomy twist per circle (bundle plus spin offset), in `[0, 1)`.
    twist: Vec<f64>,
    flux: Option<i64>,
}

impl SpectralModel {
    pub fn new(manifold: &StructuredManifold, twist: &[f64], flux: Option<i64>) -> Result<Self> {
        if !manifold.is_torus() || manifold.dim() == 0 {
            return Err(DktError::ManifoldMismatch("spectral models live on tori".into()));
        }
        if twist.len() != manifold.dim() {
            return Err(DktError::Invalid(format!("{} twists on a {}-torus", twist.len(), manifold.dim())));
        }
        if flux.is_some() && manifold.dim() != 2 {
            return Err(DktError::Invalid("flux is only supported on 2-tori".into()));
        }
        Ok(Self { manifold: manifold.clone(), twist: twist.iter().map(|t| frac(*t)).collect(), flux })
    }

    pub fn circle(length: f64, theta: f64) -> Result<Self> {
        Self::new(&StructuredManifold::circle(length), &[theta], None)
    }

    /// Adds spin-structure offsets (each 0 or 1/2) to the twist.
    pub fn with_spin(&self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.twist.len() {
            return Err(DktError::Invalid("one spin offset per circle".into()));
        }
        let twist: Vec<f64> = self.twist.iter().zip(offsets).map(|(t, s)| t + s).collect();
        Self::new(&self.manifold, &twist, self.flux)
    }

    pub fn manifold(&self) -> &StructuredManifold {
        &self.manifold
    }

    pub fn twist(&self) -> &[f64] {
        &self.twist
    }

    pub fn flux(&self) -> Option<i64> {
        self.flux
    }

    fn lengths(&self) -> Vec<f64> {
        circle_lengths(&self.manifold)
    }
}

fn circle_lengths(m: &StructuredManifold) -> Vec<f64> {
    m.factors()
        .iter()
        .filter_map(|f| match f {
            Factor::Circle { length } => Some(*length),
            _ => None,
        })
        .collect()
}

/// Spectrum `(2 pi / L)(n + theta)`, `n` in `Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleSpectrum {
    pub length: f64,
    pub theta: f64,
}

impl CircleSpectrum {
    pub fn eigenvalue(&self, n: i64) -> f64 {
        2.0 * PI / self.length * (n as f64 + self.theta)
    }

    pub fn kernel_dim(&self) -> usize {
        usize::from(self.theta == 0.0)
    }

    /// Whether `lambda -> -lambda` preserves the spectrum.
    pub fn is_symmetric(&self) -> bool {
        self.theta == 0.0 || self.theta == 0.5
    }

    /// The `count` eigenvalues of smallest modulus, ordered by modulus then value.
    pub fn lowest(&self, count: usize) -> Vec<f64> {
        let reach = count as i64 + 1;
        let mut ev: Vec<f64> = (-reach..=reach).map(|n| self.eigenvalue(n)).collect();
        ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        ev.truncate(count);
        ev
    }

    /// `eta(0)`: `1 - 2 theta` off the kernel, 0 when `theta = 0`.
    pub fn eta(&self) -> f64 {
        if self.theta == 0.0 {
            0.0
        } else {
            1.0 - 2.0 * self.theta
        }
    }
}

pub fn circle_spectrum(model: &SpectralModel) -> Result<CircleSpectrum> {
    match model.lengths().as_slice() {
        [length] => Ok(CircleSpectrum { length: *length, theta: model.twist[0] }),
        _ => Err(DktError::ManifoldMismatch("circle_spectrum needs a circle".into())),
    }
}

/// `(dim ker_+, dim ker_-)` of the twisted Dirac operator on a 2-torus.
pub fn torus_kernel_dim(model: &SpectralModel) -> Result<(usize, usize)> {
    if model.manifold.dim() != 2 {
        return Err(DktError::ManifoldMismatch("torus_kernel_dim needs a 2-torus".into()));
    }
    Ok(match model.flux {
        Some(n) if n > 0 => (n as usize, 0),
        Some(n) if n < 0 => (0, n.unsigned_abs() as usize),
        _ if model.twist.iter().all(|t| *t == 0.0) => (1, 1),
        _ => (0, 0),
    })
}

/// Reduced eta of `Z x B` for a product twist, given the kernel of the even fiber `Z` and a
/// circle base: `eta = ind(D_Z) eta(D_B)` and `ker = ker(D_Z) (x) ker(D_B)`.
pub fn product_reduced_eta(fiber_dim: usize, fiber_kernel: (usize, usize), base: &SpectralModel) -> Result<EtaValue> {
    let s = circle_spectrum(base)?;
    let index = fiber_kernel.0 as f64 - fiber_kernel.1 as f64;
    let kernel = (fiber_kernel.0 + fiber_kernel.1) * s.kernel_dim();
    let dim = fiber_dim as i32 + 1;
    Ok(EtaValue::new(-(dim + 1) / 2, (index * s.eta() + kernel as f64) / 2.0))
}

/// `eta-bar = (eta + dim ker) / 2` modulo 1, in `u^{-(dim + 1) / 2}`.
pub fn reduced_eta(model: &SpectralModel) -> Result<EtaValue> {
    match model.manifold.dim() {
        1 => {
            let s = circle_spectrum(model)?;
            Ok(EtaValue::new(-1, (s.eta() + s.kernel_dim() as f64) / 2.0))
        }
        3 => {
            let l = model.lengths();
            let fiber = SpectralModel::new(&StructuredManifold::torus(&l[..2]), &model.twist[..2], None)?;
            let base = SpectralModel::circle(l[2], model.twist[2])?;
            product_reduced_eta(2, torus_kernel_dim(&fiber)?, &base)
        }
        d => Err(DktError::Unsupported(format!("reduced eta on a {d}-torus"))),
    }
}

fn block(m: &CMat, start: usize, len: usize) -> CMat {
    m.view((start, start), (len, len)).into_owned()
}

fn is_diagonal(m: &CMat) -> bool {
    let mut off = m.clone();
    off.fill_diagonal(crate::linalg::c(0.0, 0.0));
    max_abs(&off) < FLAT_TOL
}

fn phase(z: crate::C64) -> f64 {
    frac(z.arg() / (2.0 * PI))
}

/// Twists of the flat lines making up one graded block, read off the basepoint holonomies.
fn block_twists(hols: &[CMat], start: usize, len: usize) -> Result<Vec<Vec<f64>>> {
    if len == 0 {
        return Ok(Vec::new());
    }
    let blocks: Vec<CMat> = hols.iter().map(|h| block(h, start, len)).collect();
    if blocks.len() == 1 {
        return Ok(normal_eigenvalues(&blocks[0]).into_iter().map(|z| vec![phase(z)]).collect());
    }
    if !blocks.iter().all(is_diagonal) {
        return Err(DktError::Unsupported("flat bundle on a torus without diagonal holonomy".into()));
    }
    Ok((0..len).map(|i| blocks.iter().map(|b| phase(b[(i, i)])).collect()).collect())
}

/// Directions carrying curvature somewhere on the grid.
fn curved_masks(b: &BundleWithConnection) -> std::collections::BTreeSet<crate::graded::Mask> {
    let grid = b.grid();
    let mut curved = std::collections::BTreeSet::new();
    for ch in 0..grid.n_charts() {
        for i in 0..grid.chart(ch).n_points {
            for (mask, v) in &b.curvature_at(ch, i).comps {
                if max_abs(v) > FLAT_TOL {
                    curved.insert(*mask);
                }
            }
        }
    }
    curved
}

/// Whether the curvature vanishes on the grid.
pub fn is_flat(b: &BundleWithConnection) -> bool {
    curved_masks(b).is_empty()
}

/// A flat bundle on a torus as signed flat lines `(sign, twist + spin)`.
pub(crate) fn flat_constituents(b: &BundleWithConnection, spin: &[f64]) -> Result<Vec<(f64, SpectralModel)>> {
    let grid = b.grid();
    let m = grid.manifold();
    if !m.is_torus() {
        return Err(DktError::ManifoldMismatch("flat constituents need a torus".into()));
    }
    if !is_flat(b) {
        return Err(DktError::Unsupported(format!("{} is not flat", b.describe())));
    }
    let x0 = grid.chart(0).point(0);
    let hols = (0..m.dim()).map(|k| b.holonomy(k, 0, &x0)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (sign, start, len) in [(1.0, 0, b.plus_rank()), (-1.0, b.plus_rank(), b.minus_rank())] {
        for theta in block_twists(&hols, start, len)? {
            out.push((sign, SpectralModel::new(m, &theta, None)?.with_spin(spin)?));
        }
    }
    Ok(out)
}

/// Signed sum of `eta-bar` over the constituents of a generator bundle.
pub(crate) fn bundle_eta(b: &BundleWithConnection, spin: &[f64]) -> Result<f64> {
    if b.rank() == 0 {
        return Ok(0.0);
    }
    let grid = b.grid();
    let m = grid.manifold();
    let x0 = grid.chart(0).point(0);
    let curved = curved_masks(b);
    if curved.is_empty() {
        let mut total = 0.0;
        for (sign, model) in flat_constituents(b, spin)? {
            total += sign * reduced_eta(&model)?.value;
        }
        return Ok(total);
    }
    // A line with flux on the first two circles of a 3-torus, flat along the third.
    if m.dim() != 3 || b.rank() != 1 || b.is_graded() || curved.iter().any(|mask| *mask != 0b011) {
        return Err(DktError::Unsupported(format!("eta of the non-flat bundle {}", b.describe())));
    }
    let c1 = crate::charforms::c1_form(b)?;
    let flux = ReferenceCycle::new(m, &[0, 1])?.period(&c1)?.real_coeff(-2);
    let n = flux.round();
    if (flux - n).abs() > 1e-6 {
        return Err(DktError::Numerical(format!("non-integral flux {flux}")));
    }
    let chart = grid.chart(0);
    let h0 = b.holonomy(2, 0, &x0)?[(0, 0)];
    for i in (0..chart.n_points).step_by((chart.n_points / 7).max(1)) {
        let h = b.holonomy(2, 0, &chart.point(i))?[(0, 0)];
        if (h - h0).norm() > 1e-7 {
            return Err(DktError::Unsupported("twist along the third circle is not a product".into()));
        }
    }
    let length = circle_lengths(m)[2];
    let fiber = SpectralModel::new(&StructuredManifold::torus(&[1.0, 1.0]), &[0.0, 0.0], Some(n as i64))?;
    let base = SpectralModel::circle(length, phase(h0) + spin[2])?;
    Ok(product_reduced_eta(2, torus_kernel_dim(&fiber)?, &base)?.value)
}

/// `eta-bar(X, x) = sum_i n_i eta-bar(D^{X, E_i}) + int_X phi` modulo 1, placed in
/// `u^{(r - dim X - 1) / 2}`. Empty `spin` means all offsets zero.
pub fn eta_class(x: &DKClassEven, spin: &[f64]) -> Result<EtaValue> {
    let m = x.manifold();
    if !m.is_torus() || m.dim() % 2 == 0 {
        return Err(DktError::ManifoldMismatch("eta_class needs an odd-dimensional torus".into()));
    }
    let zeros = vec![0.0; m.dim()];
    let spin = if spin.is_empty() { &zeros[..] } else { spin };
    if spin.len() != m.dim() || spin.iter().any(|s| *s != 0.0 && *s != 0.5) {
        return Err(DktError::Invalid("spin offsets are 0 or 1/2, one per circle".into()));
    }
    let key = x.degree() - m.dim() as i32 - 1;
    let mut total = 0.0;
    for g in x.generators() {
        let integral = g.phi.integrate()?.real_coeff(key);
        total += g.coeff as f64 * (bundle_eta(&g.bundle, spin)? + integral);
    }
    Ok(EtaValue::new(key / 2, total))
}
