//! Central tolerance constants.
//!
//! Every threshold used across the crate is defined here with a short note on
//! where it comes from, so that the defaults documented in the CLI and the
//! values used by the test suites have a single source of truth.

/// Determinant renormalization accuracy after every construction/composition.
pub const DET_NORMALIZATION: f64 = 1e-12;

/// Determinant magnitude below which a 2x2 matrix is rejected as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// Band around tr^2 = 4 classified as parabolic, and around the real axis
/// for the elliptic test. Numerical representations sit near, not on, the
/// algebraic loci.
pub const CLASSIFY_BAND: f64 = 1e-10;

/// Matrix distance (up to sign) below which an element counts as the identity.
pub const IDENTITY_MATRIX: f64 = 1e-10;

/// Chordal distance for fixed-point verification after solving the quadratic.
pub const FIXED_POINT_CHECK: f64 = 1e-10;

/// Entrywise commutation tolerance (up to sign) for peripheral generators.
pub const COMMUTATION: f64 = 1e-8;

/// Chordal tolerance for a common fixed point of an Abelian group.
pub const COMMON_FIXED_POINT: f64 = 1e-8;

/// Matrix tolerance (up to sign) for conjugator verification.
pub const CONJUGATOR: f64 = 1e-8;

/// Chordal distance below which sphere points count as coincident; cross
/// ratios of such configurations degenerate to a tag in {0, 1, inf}.
pub const COINCIDENT_VERTEX: f64 = 1e-10;

/// |Im z| below which a modulus is flat (volume 0, flagged).
pub const FLAT_IMAG: f64 = 1e-12;

/// Absolute truncation target for the Lobachevsky series.
pub const LOBACHEVSKY_SERIES: f64 = 1e-15;

/// Shape entries may not come this close to the degenerate set {0, 1}.
pub const SHAPE_DEGENERACY: f64 = 1e-10;

/// Default Newton convergence tolerance on the max row residual.
pub const NEWTON_RESIDUAL: f64 = 1e-12;

/// Newton iteration budget.
pub const NEWTON_MAX_ITER: usize = 100;

/// Step-halving budget inside one damped Newton iteration.
pub const NEWTON_MAX_HALVINGS: usize = 20;

/// Guard radius around {0, 1} (and reciprocal cap) that aborts Newton before
/// shapes degenerate.
pub const DEGENERATION_GUARD: f64 = 1e-6;

/// Max-norm distance under which two shape solutions are the same point.
pub const SOLUTION_DEDUP: f64 = 1e-8;

/// |volume| below which a solution counts as zero-volume in scan advisories.
pub const ZERO_VOLUME: f64 = 1e-9;

/// Edge-row residual gate before developing a shape vector.
pub const DEVELOP_SHAPE_RESIDUAL: f64 = 1e-10;

/// Relator residual gate before straightening a representation.
pub const RELATOR_RESIDUAL: f64 = 1e-8;

/// Agreement required between straightened totals across fixed-point choices.
pub const POLICY_INDEPENDENCE: f64 = 1e-8;

/// Slack on the volume upper bound |total| <= tet_count * v3.
pub const VOLUME_BOUND_SLACK: f64 = 1e-6;

/// Slack when comparing a representation volume against the complete volume.
pub const RIGIDITY_VOLUME: f64 = 1e-6;
