//! Spin^c data on structured manifolds: the tangent bundle with its Levi-Civita
//! connection and the characteristic line.

use std::sync::Arc;

use super::todd_form;
use crate::bundles::BundleWithConnection;
use crate::graded::{Factor, GradedForm, Grid, StructuredManifold};
use crate::Result;

#[derive(Clone, Debug)]
pub struct SpinCStructure {
    pub tangent: BundleWithConnection,
    pub line: BundleWithConnection,
}

impl SpinCStructure {
    /// Product structure: flat circles and intervals, round spheres. Spheres carry the
    /// complex structure (`L = T S^2`, degree 2) when `complex_spheres`, the spin structure
    /// (`L` trivial) otherwise.
    pub fn standard(grid: &Arc<Grid>, complex_spheres: bool) -> Result<Self> {
        let m = grid.manifold();
        let numerics = grid.numerics();
        let mut tangent: Option<BundleWithConnection> = None;
        let mut line = BundleWithConnection::trivial(grid, 1)?;
        for (i, f) in m.factors().iter().enumerate() {
            let fm = StructuredManifold::new(vec![*f])?;
            let fg = Grid::new(&fm, numerics)?;
            let (t, l) = match f {
                Factor::Sphere2 { .. } => {
                    let deg2 = BundleWithConnection::monopole(&fg, 2)?;
                    let l = if complex_spheres { deg2.clone() } else { BundleWithConnection::trivial(&fg, 1)? };
                    (deg2.realified()?, l)
                }
                _ => (BundleWithConnection::trivial(&fg, 1)?, BundleWithConnection::trivial(&fg, 1)?),
            };
            let t = t.pullback(grid, &[i])?;
            let l = l.pullback(grid, &[i])?;
            tangent = Some(match tangent {
                None => t,
                Some(acc) => acc.direct_sum(&t)?,
            });
            line = line.tensor(&l)?;
        }
        let tangent = match tangent {
            Some(t) => t,
            None => BundleWithConnection::trivial(grid, 0)?,
        };
        Ok(Self { tangent, line })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.line.grid()
    }

    pub fn todd(&self) -> Result<GradedForm> {
        todd_form(&self.tangent, &self.line)
    }

    /// `int Td`, the index of the untwisted operator on a closed even-dimensional manifold.
    pub fn todd_genus(&self) -> Result<f64> {
        let dim = self.grid().manifold().dim() as i32;
        let s = self.todd()?.integrate()?;
        Ok(s.real_coeff(-dim))
    }
}
