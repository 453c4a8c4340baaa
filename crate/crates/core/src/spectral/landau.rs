//! Numerical kernel count for the flux-`n` Dirac operator on the unit 2-torus.
//!
//! Fourier modes in the second coordinate chain together across the seam, so each of the `|n|`
//! sectors is an operator on the line: `D_+ = d/dy + 2 pi n y`, `D_- = D_+^*`. We truncate the
//! chain to a box with Dirichlet ends and diagonalise `D_+^* D_+` and `D_+ D_+^*` in a sine basis.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{DktError, Result};

/// Smallest ratio between the first nonzero eigenvalue and the largest zero mode.
pub const GAP_RATIO: f64 = 1e3;

/// `int_0^w (z - c)^2 cos(m pi z / w) dz`.
fn moment(m: usize, w: f64, c: f64) -> f64 {
    if m == 0 {
        return w.powi(3) / 3.0 - c * w * w + c * c * w;
    }
    let k = m as f64 * std::f64::consts::PI / w;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let i1 = (sign - 1.0) / (k * k);
    let i2 = 2.0 * w * sign / (k * k);
    i2 - 2.0 * c * i1
}

/// Eigenvalues below the first gap of ratio `GAP_RATIO`, counted among the lowest few.
fn zero_modes(mut ev: Vec<f64>) -> usize {
    ev.sort_by(|a, b| a.total_cmp(b));
    for m in 1..ev.len().min(8) {
        if ev[m] > GAP_RATIO * ev[m - 1].abs().max(1e-300) {
            return m;
        }
    }
    0
}

/// `(dim ker D_+, dim ker D_-)` for flux `n != 0`, with `cutoff` basis functions per sector.
pub fn landau_kernel_dim(n: i64, cutoff: usize) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(DktError::Invalid("the Landau reduction needs nonzero flux".into()));
    }
    if cutoff < 8 {
        return Err(DktError::Invalid(format!("cutoff must be at least 8, got {cutoff}")));
    }
    let half = 4.0 / (n.unsigned_abs() as f64).sqrt();
    let w = 2.0 * half;
    let omega = 2.0 * std::f64::consts::PI * n as f64;
    // s_a(z) = sqrt(2/w) sin(a pi z / w) on z = y + half in [0, w]
    let h = DMatrix::from_fn(cutoff, cutoff, |i, j| {
        let (a, b) = (i + 1, j + 1);
        let y2 = (moment(a.abs_diff(b), w, half) - moment(a + b, w, half)) / w;
        let kin = if a == b { (a as f64 * std::f64::consts::PI / w).powi(2) } else { 0.0 };
        kin + omega * omega * y2
    });
    let shift = DMatrix::<f64>::identity(cutoff, cutoff) * omega;
    let plus = SymmetricEigen::new(&h - &shift).eigenvalues;
    let minus = SymmetricEigen::new(&h + &shift).eigenvalues;
    // The sectors differ by a translation in `y`, so one diagonalisation serves all of them.
    let sectors = n.unsigned_abs() as usize;
    Ok((
        sectors * zero_modes(plus.iter().copied().collect()),
        sectors * zero_modes(minus.iter().copied().collect()),
    ))
}
