//! One-dimensional quadrature and spectral differentiation.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| h * v).collect())
}

/// Barycentric weights for polynomial interpolation through `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let scale = (nodes[n - 1] - nodes[0]).abs().max(1e-300) / 4.0;
    (0..n)
        .map(|j| {
            let mut p = 1.0;
            for k in 0..n {
                if k != j {
                    p *= (nodes[j] - nodes[k]) / scale;
                }
            }
            1.0 / p
        })
        .collect()
}

/// Row vector that interpolates nodal values to the point `x`.
pub fn interpolation_row(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&t| t == x) {
        let mut row = vec![0.0; nodes.len()];
        row[j] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(t, b)| b / (x - t)).collect();
    let s: f64 = terms.iter().sum();
    terms.iter().map(|v| v / s).collect()
}

/// Dense differentiation matrix (row-major) for polynomial interpolation through `nodes`.
pub fn differentiation_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Fixed-shape pairwise summation; the result depends only on the input order.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut s = C64::new(0.0, 0.0);
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
}

/// Differentiation operator along one grid axis.
#[derive(Clone)]
pub enum AxisOperator {
    /// Fourier differentiation on a uniform periodic grid of period `length`.
    Periodic { n: usize, length: f64, forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
    /// Block-diagonal polynomial differentiation, one dense block per panel.
    Panels { q: usize, blocks: Vec<Vec<f64>> },
}

impl std::fmt::Debug for AxisOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxisOperator::Periodic { n, length, .. } => write!(f, "Periodic(n={n}, L={length})"),
            AxisOperator::Panels { q, blocks } => write!(f, "Panels(q={q}, panels={})", blocks.len()),
        }
    }
}

impl AxisOperator {
    pub fn periodic(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        AxisOperator::Periodic {
            n,
            length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn panels(q: usize, panel_nodes: &[Vec<f64>]) -> Self {
        AxisOperator::Panels { q, blocks: panel_nodes.iter().map(|p| differentiation_matrix(p)).collect() }
    }

    /// Differentiates one line of samples in place.
    pub fn apply(&self, line: &mut [C64]) {
        match self {
            AxisOperator::Periodic { n, length, forward, inverse } => {
                let n = *n;
                forward.process(line);
                let base = 2.0 * PI / length;
                for (k, v) in line.iter_mut().enumerate() {
                    let freq = if 2 * k < n {
                        k as f64
                    } else if 2 * k == n {
                        0.0
                    } else {
                        k as f64 - n as f64
                    };
                    *v *= C64::new(0.0, base * freq / n as f64);
                }
                inverse.process(line);
            }
            AxisOperator::Panels { q, blocks } => {
                let q = *q;
                let mut tmp = vec![C64::new(0.0, 0.0); q];
                for (p, block) in blocks.iter().enumerate() {
                    let seg = &mut line[p * q..(p + 1) * q];
                    for i in 0..q {
                        let mut s = C64::new(0.0, 0.0);
                        for j in 0..q {
                            s += seg[j] * block[i * q + j];
                        }
                        tmp[i] = s;
                    }
                    seg.copy_from_slice(&tmp);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        for k in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(t, v)| v * t.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}: {q} vs {exact}");
        }
        let (x, _) = gauss_legendre(64);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn panel_differentiation_is_exact_on_polynomials() {
        let (x, _) = gauss_legendre_on(10, 0.3, 1.7);
        let d = differentiation_matrix(&x);
        for i in 0..10 {
            let s: f64 = (0..10).map(|j| d[i * 10 + j] * x[j].powi(7)).sum();
            assert!((s - 7.0 * x[i].powi(6)).abs() < 1e-9);
        }
        let bary = barycentric_weights(&x);
        let row = interpolation_row(&x, &bary, 0.3);
        let v: f64 = row.iter().zip(&x).map(|(r, t)| r * t.powi(5)).sum();
        assert!((v - 0.3f64.powi(5)).abs() < 1e-12);
    }

    #[test]
    fn fourier_differentiation_of_modes() {
        let n = 256;
        let l = 3.0;
        let op = AxisOperator::periodic(n, l);
        let mut line: Vec<C64> = (0..n).map(|k| C64::new((2.0 * PI * k as f64 / n as f64).sin(), 0.0)).collect();
        op.apply(&mut line);
        for (k, v) in line.iter().enumerate() {
            let x = l * k as f64 / n as f64;
            let exact = (2.0 * PI / l) * (2.0 * PI * x / l).cos();
            assert!((v.re - exact).abs() < 1e-8 && v.im.abs() < 1e-8);
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_for_integers() {
        let v: Vec<C64> = (0..1000).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let s = pairwise_sum(&v);
        assert_eq!(s, C64::new(499500.0, -499500.0));
    }
}
