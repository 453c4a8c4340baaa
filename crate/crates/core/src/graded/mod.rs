//! Coefficient ring, structured manifolds and graded forms.

pub mod current;
pub mod eta;
pub mod form;
pub mod grid;
pub mod laurent;
pub mod manifold;
pub mod quadrature;

pub use current::DeltaCurrent;
pub use eta::{circle_distance, frac, EtaValue};
pub use form::{GradedForm, Mask, SlicePoint};
pub use grid::Grid;
pub use laurent::LaurentScalar;
pub use manifold::{Factor, Numerics, StructuredManifold};
