//! Default tolerances and witness floors for the verification suite.
//!
//! Structural identities that hold by construction (integer structure
//! constants, frozen frames) are checked at 1e-12. Analytic identities that
//! accumulate one layer of solves or orthogonalization get 1e-10. Full
//! curvature sums contract O(m * k) terms and get 1e-9, and cross-route
//! comparisons or assembled identities 1e-8. Witness floors bound
//! quantities that must stay away from zero, not residuals.

/// Jacobi identity residual of a constructed algebra.
pub const JACOBI: f64 = 1e-12;

/// ad-invariance of the Killing form over basis triples.
pub const AD_INVARIANCE: f64 = 1e-10;

/// Metric block identities: Gram of the orthonormal basis, block
/// orthogonality, and the -8B / -2B scale identities.
pub const METRIC_BLOCKS: f64 = 1e-10;

/// Norm of the mean curvature vector.
pub const MEAN_CURVATURE: f64 = 1e-10;

/// Max |Ric| of the induced Bismut connection over basis pairs.
pub const RICCI_MAX: f64 = 1e-9;

/// Entrywise gap between the closed-form curvature and the operator route.
pub const ORACLE_CURVATURE_GAP: f64 = 1e-8;

/// Entrywise gap between the two Ricci routes.
pub const ORACLE_RICCI_GAP: f64 = 1e-8;

/// Exterior-derivative residual of the restricted 3-form.
pub const CLOSEDNESS: f64 = 1e-10;

/// Codifferential of the torsion form (harmonicity).
pub const DELTA_H: f64 = 1e-8;

/// Residual of Ric_Bismut = Ric_g - H^2/4 - (delta H)/2.
pub const RICCI_IDENTITY: f64 = 1e-8;

/// Max norm of the flow right-hand side at the canonical pair.
pub const FLOW_FIXED_POINT: f64 = 1e-8;

/// Curvature bound for the bi-invariant group models.
pub const FLAT_CURVATURE: f64 = 1e-12;

/// The witness curvature value must be at most minus this floor.
pub const NONFLAT_FLOOR: f64 = 1e-6;

/// The cyclic curvature sum on the witness must exceed this floor.
pub const CYCLIC_DEFECT_FLOOR: f64 = 1e-6;

/// Max |covariant derivative of H| must exceed this floor.
pub const TORSION_GRADIENT_FLOOR: f64 = 1e-3;

/// Max |H| entry must exceed this floor.
pub const H_NORM_FLOOR: f64 = 1e-3;

/// Allowed drift after 100 rk4 steps of 1e-3 from the fixed point.
pub const FLOW_DRIFT: f64 = 1e-6;

/// Per-pair runtime budget for the Ricci sweep, in seconds.
pub const PAIR_RUNTIME_BUDGET: f64 = 10.0;
