//! A desk-scale laboratory for a partition-counting generator invariant
//! of tracial algebras, in exact rational arithmetic.
//!
//! The ambient objects are finite direct sums of complex matrix algebras
//! carrying a tracial state ([`TracialAlgebra`]), with every entry an
//! exact element of ℚ(i) ([`Scalar`]). For a finite family `X` of
//! operators and a partition `P` of the identity into orthogonal
//! projections, the central quantity is
//!
//! ```text
//! 𝓘(X; P) = Σ { τ(p)·τ(q) : p, q ∈ P, p x q ≠ 0 for some x ∈ X }
//! ```
//!
//! — the trace-weighted count of partition cells that see the family.
//! Minimizing over partitions measures how efficiently `X` generates;
//! everything in this crate either evaluates that count, pushes it down
//! along a constructive route, or converts it into bounds on how many
//! (self-adjoint) generators an algebra needs.
//!
//! # Module map
//!
//! * [`algebra`], [`scalar`], [`partition`] — the ambient arithmetic:
//!   block operators over ℚ(i), traces, projections, partitions, and the
//!   exact/thresholded zero-test [`Mode`].
//! * [`invariant`] — the cell count itself, computed by two independent
//!   routes that must agree, plus support patterns and refinement
//!   comparisons.
//! * [`minimize`] — exhaustive and annealed search over coordinate
//!   groupings for partitions that minimize the invariant.
//! * [`generation`] — the constructive certificate that a family whose
//!   support pattern is small enough embeds into `n + 1` self-adjoint
//!   generators spanning the full algebra.
//! * [`scaling`] — corner compressions and amplifications: moving a
//!   family between an algebra and its corners while tracking the exact
//!   quadratic scaling of the invariant.
//! * [`selfadjoint`] — hermitianization, the triangular/diagonal split
//!   with its exact value identity, eigenspace partitions in the
//!   commutant of a designated element, and generator-count windows.
//! * [`bounds`] — the closed-form calculus: free-entropy values of
//!   hyperfinite algebras, free-product bounds, interpolated free group
//!   factors, and symbolic multiples of the open-parameter α.
//! * [`entropy`] — tuple compression at finite matrix size and the
//!   covering-exponent identities that turn small invariants into
//!   dimension-count evidence.
//! * [`instance`], [`random`] — canonical JSON instance files and
//!   seed-deterministic random instances for property sweeps.
//! * [`linalg`], [`span`], [`units`], [`squares`] — the exact linear
//!   algebra underneath: reduced row echelon over ℚ(i), span closures,
//!   matrix units subordinate to a partition, and rational
//!   sums-of-squares geometry.
//!
//! # Conventions
//!
//! Families are ordered lists and may repeat elements; all indices are
//! 0-based; generated subalgebras are taken non-unital (the algebra
//! generated by a projection is its line, not its unitization). Block
//! trace weights are the traces of the block units, so the identity
//! always has trace 1. Zero tests — and nothing else — are governed by
//! [`Mode`]: [`Mode::Exact`] compares to zero, [`Mode::Float`] discards
//! 2-norms up to a rational tolerance, and all arithmetic stays rational
//! either way.
//!
//! Computations that certify something (generation, compression,
//! amplification, splits) return a plan or certificate object whose
//! `verify` method replays every claimed property as a named check;
//! tampering with a plan flips the corresponding check rather than
//! panicking.

pub mod algebra;
pub mod bounds;
pub mod check;
pub mod entropy;
pub mod error;
pub mod generation;
pub mod instance;
pub mod invariant;
pub mod linalg;
pub mod minimize;
pub mod partition;
pub mod random;
pub mod scalar;
pub mod scaling;
pub mod selfadjoint;
pub mod span;
pub mod squares;
pub mod units;

pub use algebra::{Block, Mode, Operator, TracialAlgebra};
pub use error::{Error, Result};
pub use partition::Partition;
pub use scalar::Scalar;
