//! Numerical laboratory for Bismut Ricci flat pairs on homogeneous spaces
//! of the form (G x G) / K_diag built from inner symmetric pairs of compact
//! Lie groups.
//!
//! The crate constructs compact matrix Lie algebras, splits them along inner
//! involutions, builds the tangent-space model of the orbit through the base
//! point, and verifies -- against an independent operator-based oracle --
//! that the induced pair of metric and 3-form is Bismut Ricci flat, non-flat,
//! minimal, carries non-parallel torsion, and sits at a fixed point of the
//! generalized Ricci flow.

pub mod error;
pub mod flow;
pub mod lie;
pub mod linalg;
pub mod oracle;
pub mod orbit;
pub mod report;
pub mod symmetric;
pub mod tolerances;

pub use error::{CoreError, Result};
