//! Error type shared by every module of the crate.
//!
//! Variants are named after the structural reason a computation cannot
//! proceed (bad partition geometry, threshold violations, infeasible exact
//! constructions, ...) rather than after the call site, so the same variant
//! is reused wherever the same obstruction appears.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or checking a model.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands live in different algebras (block layout or mode differ).
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    /// An operator expected to be a projection fails `p = p* = p²`.
    #[error("not a projection: {0}")]
    NotAProjection(String),

    /// Two projections of a would-be partition fail mutual orthogonality.
    #[error("projections not mutually orthogonal: {0}")]
    NotOrthogonal(String),

    /// The projections of a would-be partition do not sum to the identity.
    #[error("projections do not resolve the identity: {0}")]
    IncompleteResolution(String),

    /// A partition must contain at least one projection.
    #[error("empty partition")]
    EmptyPartition,

    /// The operation requires an equal-trace partition.
    #[error("partition is not equal-trace: {0}")]
    NotEqualTrace(String),

    /// No matrix-unit system compatible with the partition exists over exact
    /// complex-rational scalars (or none was found within the search budget).
    #[error("no exact matrix-unit system: {0}")]
    NotDiagonalisable(String),

    /// The operation requires a single-block (factor) model.
    #[error("single-block model required: {0}")]
    NotAFactor(String),

    /// Two partitions cannot be aligned because their trace multisets differ.
    #[error("trace multisets differ: {0}")]
    TraceMismatch(String),

    /// The support count is too large for the requested generator count.
    #[error("support threshold violated: {0}")]
    ThresholdViolated(String),

    /// A divisibility constraint on partition sizes or ranks fails.
    #[error("divisibility constraint failed: {0}")]
    DivisibilityError(String),

    /// The requested trace arithmetic cannot be realized inside the model.
    #[error("infeasible geometry: {0}")]
    GeometryError(String),

    /// An operator required to be self-adjoint is not.
    #[error("not self-adjoint: {0}")]
    NotSelfAdjoint(String),

    /// The claimed refinement relation between two partitions does not hold.
    #[error("not a refinement: {0}")]
    NotARefinement(String),

    /// Minimization over partitions needs at least one operator.
    #[error("empty generating set")]
    EmptyGeneratingSet,

    /// Block weights must be positive and sum to one.
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// A calculator input is outside its domain of validity.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A trace-scaling parameter must be strictly positive.
    #[error("nonpositive scaling parameter: {0}")]
    NonpositiveT(String),

    /// Tuple shapes or index sets do not match the declared layout.
    #[error("shape error: {0}")]
    ShapeError(String),

    /// The span-closure worklist exceeded its iteration budget.
    #[error("span closure budget exceeded: {0}")]
    ClosureBudget(String),

    /// A string could not be parsed as a rational, scalar or matrix.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal cross-check that should be unconditionally true failed.
    /// Seeing this error means a bug in the crate, not in the input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
