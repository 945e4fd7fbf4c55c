//! Default numerical tolerances, one named constant per contract.
//!
//! Tolerances are listed per invariant rather than as one global epsilon:
//! exact f64 identities sit near 1e-10, while quantities that pass through
//! an SVD or a chain of measurement steps accumulate rounding and get 1e-9
//! or 1e-8.

/// State normalization: |Σ|c|² − 1| must stay below this.
pub const NORM_TOL: f64 = 1e-10;

/// Orthonormality of Schmidt bases (entrywise deviation of B†B from I).
pub const ORTHO_TOL: f64 = 1e-10;

/// Entrywise error allowed when rebuilding amplitudes from a decomposition.
pub const RECONSTRUCT_TOL: f64 = 1e-9;

/// A Schmidt coefficient counts as nonzero when λ_i > RANK_TOL · λ_1.
pub const RANK_TOL: f64 = 1e-12;

/// Coefficients within this absolute gap are merged into one degenerate
/// block during strategy compilation.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Completeness of a single measurement step on its support.
pub const STEP_COMPLETENESS_TOL: f64 = 1e-9;

/// Completeness of a full compiled strategy (sum over all branches).
pub const STRATEGY_COMPLETENESS_TOL: f64 = 1e-8;

/// Success-branch spectra must match the uniform spectrum this closely.
pub const UNIFORM_SPECTRUM_TOL: f64 = 1e-8;

/// Agreement between compiled success probability and the bound table.
pub const OPTIMALITY_TOL: f64 = 1e-8;

/// Branch probabilities below this are reported but not verdict-verified;
/// normalizing a near-null vector is numerically meaningless.
pub const NULL_BRANCH_TOL: f64 = 1e-14;

/// Residual of the measurement-transfer identity (Alice-for-Bob swap).
pub const TRANSFER_RESIDUAL_TOL: f64 = 1e-9;

/// Conservation of Bob's reduced density matrix across Alice's measurement.
pub const CONSERVATION_TOL: f64 = 1e-10;

/// Ties in bound-table minimizer selection.
pub const BOUND_TIE_TOL: f64 = 1e-12;

/// Hermiticity / positive-semidefiniteness slack for density operators.
pub const PSD_TOL: f64 = 1e-10;

/// Run-length total mass and run-merging agreement.
pub const RUN_MASS_TOL: f64 = 1e-9;

/// Spectrum match required between a strategy and the state it executes on.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-8;
