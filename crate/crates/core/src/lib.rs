//! Numerical differential K-theory on products of circles, 2-spheres and intervals.
//!
//! The crate is layered bottom-up:
//!
//! * [`graded`]: Laurent coefficients, structured manifolds, sampled graded forms.
//! * [`bundles`]: Hermitian bundles with connections given by chart formulas.
//! * [`charforms`]: Chern, Todd and transgression forms.
//! * [`diffk`]: even and odd differential K-theory classes and their structure maps.
//! * [`spectral`]: Dirac spectra and reduced eta invariants on flat tori.
//! * [`index`]: analytic and Kunneth pushforwards for product families.

pub mod bundles;
pub mod charforms;
pub mod diffk;
pub mod error;
pub mod graded;
pub mod index;
pub mod linalg;
pub mod spectral;

pub use error::{DktError, Result};
pub use num_complex::Complex64 as C64;
