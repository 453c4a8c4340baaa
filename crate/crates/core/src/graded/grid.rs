//! Tensor-product sample grids, one per chart.

use std::f64::consts::PI;
use std::sync::Arc;

use super::manifold::{Factor, Numerics, StructuredManifold};
use super::quadrature::{barycentric_weights, gauss_legendre_on, interpolation_row, AxisOperator};
use crate::{DktError, Result};

/// Half-width of the band where the two sphere caps overlap.
pub const CAP_BAND: f64 = 0.4;

pub fn band_start() -> f64 {
    PI / 2.0 - CAP_BAND
}

pub fn band_end() -> f64 {
    PI / 2.0 + CAP_BAND
}

/// Partition-of-unity weight of the north cap at polar angle `theta`.
pub fn north_weight(theta: f64) -> f64 {
    let (a, b) = (band_start(), band_end());
    if theta <= a {
        1.0
    } else if theta >= b {
        0.0
    } else {
        0.5 * (1.0 + (PI * (theta - a) / (b - a)).cos())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisKind {
    Periodic,
    Polar,
    Interval,
}

/// Samples along one coordinate of one chart.
#[derive(Debug)]
pub struct Axis {
    pub kind: AxisKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub op: AxisOperator,
    /// Panel nodes for polynomial axes, used for interpolation.
    pub panels: Vec<Vec<f64>>,
}

impl Axis {
    fn periodic(n: usize, length: f64) -> Self {
        Axis {
            kind: AxisKind::Periodic,
            nodes: (0..n).map(|k| length * k as f64 / n as f64).collect(),
            weights: vec![length / n as f64; n],
            op: AxisOperator::periodic(n, length),
            panels: vec![],
        }
    }

    fn panels(kind: AxisKind, q: usize, ranges: &[(f64, f64)]) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panels = Vec::new();
        for &(a, b) in ranges {
            let (x, w) = gauss_legendre_on(q, a, b);
            nodes.extend_from_slice(&x);
            weights.extend_from_slice(&w);
            panels.push(x);
        }
        let op = AxisOperator::panels(q, &panels);
        Axis { kind, nodes, weights, op, panels }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interpolation row for a single-panel axis.
    pub fn interpolation_row(&self, x: f64) -> Result<Vec<f64>> {
        if self.panels.len() != 1 {
            return Err(DktError::Unsupported("interpolation needs a single-panel axis".into()));
        }
        let p = &self.panels[0];
        Ok(interpolation_row(p, &barycentric_weights(p), x))
    }
}

/// Grid of one chart: a tensor product of axes, last coordinate fastest.
#[derive(Debug)]
pub struct ChartGrid {
    pub axes: Vec<Arc<Axis>>,
    pub shape: Vec<usize>,
    pub strides: Vec<usize>,
    pub n_points: usize,
    /// Bit `s` set means sphere factor `s` (in sphere order) uses the south cap.
    pub caps: usize,
}

impl ChartGrid {
    /// Multi-index of a flat point index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            out[k] = idx % self.shape[k];
            idx /= self.shape[k];
        }
        out
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        mi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinates of a flat point index.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mi = self.multi_index(idx);
        mi.iter().enumerate().map(|(k, &i)| self.axes[k].nodes[i]).collect()
    }

    /// Product of axis quadrature weights.
    pub fn weight(&self, idx: usize) -> f64 {
        let mi = self.multi_index(idx);
        mi.iter().enumerate().map(|(k, &i)| self.axes[k].weights[i]).product()
    }
}

/// All chart grids of a manifold at fixed numerics.
#[derive(Debug)]
pub struct Grid {
    manifold: StructuredManifold,
    numerics: Numerics,
    charts: Vec<ChartGrid>,
    /// For each coordinate: the sphere index if it is a polar coordinate.
    polar_sphere: Vec<Option<usize>>,
}

impl Grid {
    pub fn new(manifold: &StructuredManifold, numerics: Numerics) -> Result<Arc<Grid>> {
        numerics.validate()?;
        let spheres = manifold.sphere_factors();
        let mut polar_sphere = Vec::new();
        let mut axes_by_cap: Vec<[Vec<Arc<Axis>>; 2]> = Vec::new();
        let q = numerics.sphere_theta;
        let north = Arc::new(Axis::panels(AxisKind::Polar, q, &[(0.0, band_start()), (band_start(), band_end())]));
        let south = Arc::new(Axis::panels(AxisKind::Polar, q, &[(band_start(), band_end()), (band_end(), PI)]));
        let azimuth = Arc::new(Axis::periodic(numerics.sphere_phi, 2.0 * PI));
        let interval = Arc::new(Axis::panels(AxisKind::Interval, numerics.interval_order, &[(0.0, 1.0)]));
        for (fi, f) in manifold.factors().iter().enumerate() {
            match f {
                Factor::Circle { length } => {
                    let a = Arc::new(Axis::periodic(numerics.circle_points, *length));
                    polar_sphere.push(None);
                    axes_by_cap.push([vec![a.clone()], vec![a]]);
                }
                Factor::Interval01 => {
                    polar_sphere.push(None);
                    axes_by_cap.push([vec![interval.clone()], vec![interval.clone()]]);
                }
                Factor::Sphere2 { .. } => {
                    let s = spheres.iter().position(|&x| x == fi).expect("sphere index");
                    polar_sphere.push(Some(s));
                    polar_sphere.push(None);
                    axes_by_cap.push([vec![north.clone(), azimuth.clone()], vec![south.clone(), azimuth.clone()]]);
                }
            }
        }
        let n_charts = 1usize << spheres.len();
        let mut charts = Vec::with_capacity(n_charts);
        for c in 0..n_charts {
            let mut axes = Vec::new();
            let mut s_count = 0;
            for (fi, f) in manifold.factors().iter().enumerate() {
                let cap = if matches!(f, Factor::Sphere2 { .. }) {
                    let bit = (c >> s_count) & 1;
                    s_count += 1;
                    bit
                } else {
                    0
                };
                axes.extend(axes_by_cap[fi][cap].iter().cloned());
            }
            let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
            let mut strides = vec![1; shape.len()];
            for k in (0..shape.len().saturating_sub(1)).rev() {
                strides[k] = strides[k + 1] * shape[k + 1];
            }
            let n_points = shape.iter().product();
            charts.push(ChartGrid { axes, shape, strides, n_points, caps: c });
        }
        Ok(Arc::new(Grid { manifold: manifold.clone(), numerics, charts, polar_sphere }))
    }

    pub fn manifold(&self) -> &StructuredManifold {
        &self.manifold
    }

    pub fn numerics(&self) -> Numerics {
        self.numerics
    }

    pub fn n_coords(&self) -> usize {
        self.manifold.dim()
    }

    pub fn n_charts(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, c: usize) -> &ChartGrid {
        &self.charts[c]
    }

    pub fn charts(&self) -> &[ChartGrid] {
        &self.charts
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.manifold == other.manifold && self.numerics == other.numerics
    }

    /// Partition-of-unity weight of chart `c` at point `idx`.
    pub fn partition(&self, c: usize, idx: usize) -> f64 {
        if self.manifold.sphere_factors().is_empty() {
            return 1.0;
        }
        let chart = &self.charts[c];
        let p = chart.point(idx);
        let mut w = 1.0;
        for (k, s) in self.polar_sphere.iter().enumerate() {
            if let Some(s) = s {
                let south = (c >> s) & 1 == 1;
                let n = north_weight(p[k]);
                w *= if south { 1.0 - n } else { n };
            }
        }
        w
    }

    /// Sphere index of each polar coordinate.
    pub fn polar_sphere(&self) -> &[Option<usize>] {
        &self.polar_sphere
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_sums_to_one_on_band() {
        for k in 0..=100 {
            let t = band_start() + (band_end() - band_start()) * k as f64 / 100.0;
            let n = north_weight(t);
            assert!((0.0..=1.0).contains(&n));
        }
        assert_eq!(north_weight(0.1), 1.0);
        assert_eq!(north_weight(3.0), 0.0);
    }

    #[test]
    fn band_nodes_coincide_between_caps() {
        let g = Grid::new(&StructuredManifold::sphere(1.0), Numerics::uniform(8, 6, 8)).unwrap();
        let n = &g.chart(0).axes[0].nodes;
        let s = &g.chart(1).axes[0].nodes;
        assert_eq!(&n[6..12], &s[0..6]);
        assert_eq!(g.chart(0).n_points, 12 * 8);
    }
}
