//! Products of circles, round 2-spheres and the unit interval.

use serde::{Deserialize, Serialize};

use crate::{DktError, Result};

/// One factor of a structured manifold.
///
/// Circle coordinates run over `[0, L)`. Sphere coordinates are polar `(theta, phi)`,
/// oriented by `dtheta ^ dphi` (outward normal). The interval coordinate is `t` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Circle { length: f64 },
    Sphere2 { radius: f64 },
    Interval01,
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Circle { .. } | Factor::Interval01 => 1,
            Factor::Sphere2 { .. } => 2,
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, Factor::Interval01)
    }

    pub fn charts(&self) -> usize {
        match self {
            Factor::Sphere2 { .. } => 2,
            _ => 1,
        }
    }
}

/// Ordered product of factors, oriented as the product of factor orientations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredManifold {
    factors: Vec<Factor>,
}

impl StructuredManifold {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            match f {
                Factor::Circle { length } if !(*length > 0.0 && length.is_finite()) => {
                    return Err(DktError::Invalid(format!("circle length must be positive, got {length}")))
                }
                Factor::Sphere2 { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                    return Err(DktError::Invalid(format!("sphere radius must be positive, got {radius}")))
                }
                _ => {}
            }
        }
        if factors.iter().map(|f| f.dim()).sum::<usize>() > 12 {
            return Err(DktError::Invalid("at most 12 coordinates are supported".into()));
        }
        Ok(Self { factors })
    }

    pub fn point() -> Self {
        Self { factors: vec![] }
    }

    pub fn circle(length: f64) -> Self {
        Self::new(vec![Factor::Circle { length }]).expect("valid circle")
    }

    /// Product of circles of the given lengths.
    pub fn torus(lengths: &[f64]) -> Self {
        Self::new(lengths.iter().map(|&length| Factor::Circle { length }).collect()).expect("valid torus")
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(vec![Factor::Sphere2 { radius }]).expect("valid sphere")
    }

    pub fn interval() -> Self {
        Self { factors: vec![Factor::Interval01] }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> Factor {
        self.factors[i]
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    pub fn is_closed(&self) -> bool {
        self.factors.iter().all(|f| f.is_closed())
    }

    pub fn is_torus(&self) -> bool {
        self.factors.iter().all(|f| matches!(f, Factor::Circle { .. }))
    }

    /// `self x other`, factors of `self` first.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        Self::new(f)
    }

    /// Sub-product on the listed factor indices, in increasing order.
    pub fn sub_product(&self, which: &[usize]) -> Result<Self> {
        let mut idx = which.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != which.len() || idx.iter().any(|&i| i >= self.factors.len()) {
            return Err(DktError::Factors(format!("{which:?} is not a set of factor indices of {self:?}")));
        }
        Self::new(idx.iter().map(|&i| self.factors[i]).collect())
    }

    /// First coordinate index of each factor.
    pub fn coordinate_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut acc = 0;
        for f in &self.factors {
            out.push(acc);
            acc += f.dim();
        }
        out
    }

    /// Factor owning each coordinate.
    pub fn coordinate_factors(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            for _ in 0..f.dim() {
                out.push(i);
            }
        }
        out
    }

    /// Indices of sphere factors; chart `c` uses the south cap of sphere `s` iff bit `s` of `c` is set.
    pub fn sphere_factors(&self) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| matches!(self.factors[i], Factor::Sphere2 { .. })).collect()
    }

    pub fn n_charts(&self) -> usize {
        1usize << self.sphere_factors().len()
    }
}

/// Grid sizes and quadrature orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Uniform points per circle factor.
    pub circle_points: usize,
    /// Gauss-Legendre nodes per polar panel; each cap has two panels.
    pub sphere_theta: usize,
    /// Uniform azimuthal points on each sphere cap.
    pub sphere_phi: usize,
    /// Gauss-Legendre nodes on the interval factor.
    pub interval_order: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { circle_points: 128, sphere_theta: 32, sphere_phi: 64, interval_order: 32 }
    }
}

impl Numerics {
    pub fn uniform(circle_points: usize, sphere_theta: usize, sphere_phi: usize) -> Self {
        Self { circle_points, sphere_theta, sphere_phi, interval_order: 32 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (2..=4096).contains(&self.circle_points)
            && (2..=256).contains(&self.sphere_theta)
            && (2..=4096).contains(&self.sphere_phi)
            && (2..=256).contains(&self.interval_order);
        if ok {
            Ok(())
        } else {
            Err(DktError::Invalid(format!("numerics out of range: {self:?}")))
        }
    }
}
