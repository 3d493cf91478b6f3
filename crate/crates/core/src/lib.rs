//! Dimer-model limit shapes: surface tensions, frozen boundaries, height
//! functions, gradient-constrained minimization and an exact Aztec-diamond
//! sampling oracle.
//!
//! The crate is organised around the objects of the continuum theory:
//!
//! * [`geom`] — convex gradient polygons, arcs of the unit circle, harmonic
//!   measure in the disc and finite Blaschke products.
//! * [`tension`] — the lozenge surface tension in closed form and general
//!   polygon surface tensions through their harmonic-coordinate
//!   representation.
//! * [`frozen`] — liquid domains with frozen (arctic) boundary built from a
//!   Blaschke product and a holomorphic factor: the two-variable kernel, the
//!   boundary parametrization, cusps, and the characterization checks.
//! * [`height`] — reconstruction of the limit height function on a liquid
//!   domain via harmonic measures, plus the Aztec-diamond closed forms.
//! * [`variational`] — discrete minimization of the dimer energy over
//!   gradient-constrained fields on polygonal domains with McShane obstacles.
//! * [`aztec`] — exact uniform sampling of Aztec-diamond domino tilings by
//!   domino shuffling, used as an independent verification oracle.
//! * [`acceptance`] — the cross-validation suite wired into `dimers verify`.

pub mod acceptance;
pub mod aztec;
pub mod error;
pub mod frozen;
pub mod geom;
pub mod height;
pub mod io;
pub mod quad;
pub mod tension;
pub mod variational;

pub use error::{Error, Result};
pub use num_complex::Complex64;
