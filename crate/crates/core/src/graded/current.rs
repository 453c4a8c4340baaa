//! Delta currents supported on sub-products.

use super::form::GradedForm;
use super::manifold::StructuredManifold;
use crate::{DktError, Result};

/// `delta_S ^ alpha` for a sub-product `S` sitting at the basepoint of the complementary factors.
///
/// The transverse delta is written in front, so integrating it over the complementary
/// directions contributes `+1`.
#[derive(Clone, Debug)]
pub struct DeltaCurrent {
    ambient: StructuredManifold,
    support: Vec<usize>,
    smooth: GradedForm,
}

impl DeltaCurrent {
    pub fn new(ambient: StructuredManifold, support: Vec<usize>, smooth: GradedForm) -> Result<Self> {
        let sub = ambient.sub_product(&support)?;
        if &sub != smooth.manifold() {
            return Err(DktError::ManifoldMismatch("smooth part must live on the support".into()));
        }
        let mut support = support;
        support.sort_unstable();
        Ok(Self { ambient, support, smooth })
    }

    pub fn ambient(&self) -> &StructuredManifold {
        &self.ambient
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn smooth_part(&self) -> &GradedForm {
        &self.smooth
    }

    pub fn codim(&self) -> usize {
        self.ambient.dim() - self.smooth.manifold().dim()
    }

    pub fn total_degree(&self) -> i32 {
        self.smooth.total_degree() + self.codim() as i32
    }

    /// Integrates over `fiber_factors` of the ambient manifold.
    pub fn fiber_integrate(&self, fiber_factors: &[usize]) -> Result<GradedForm> {
        let base: Vec<usize> = (0..self.ambient.n_factors()).filter(|i| !fiber_factors.contains(i)).collect();
        if !base.iter().all(|b| self.support.contains(b)) {
            return Err(DktError::Factors("support of the current must contain all base factors".into()));
        }
        // positions in the support of the fiber directions it still carries
        let inner: Vec<usize> = self
            .support
            .iter()
            .enumerate()
            .filter(|(_, f)| fiber_factors.contains(f))
            .map(|(j, _)| j)
            .collect();
        self.smooth.fiber_integrate(&inner)
    }
}

#[cfg(test)]
mod tests {
    use super::super::grid::Grid;
    use super::super::manifold::Numerics;
    use super::*;
    use crate::C64;

    #[test]
    fn current_degree_and_integration() {
        let t3 = StructuredManifold::torus(&[1.0, 1.0, 2.0]);
        let s = t3.sub_product(&[0, 2]).unwrap();
        let g = Grid::new(&s, Numerics::uniform(8, 8, 8)).unwrap();
        let vol = GradedForm::from_fn(&g, 0, 0b11, |_, _| C64::new(1.0, 0.0)).unwrap();
        let cur = DeltaCurrent::new(t3, vec![0, 2], vol).unwrap();
        assert_eq!(cur.total_degree(), 3);
        let pushed = cur.fiber_integrate(&[0, 1]).unwrap();
        assert_eq!(pushed.total_degree(), 1);
        let total = pushed.integrate().unwrap().real_coeff(0);
        assert!((total - 2.0).abs() < 1e-13);
        assert!(cur.fiber_integrate(&[2]).is_err());
    }
}
