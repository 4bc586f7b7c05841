//! Partitions of unity by projections.
//!
//! A *partition* is a finite family of nonzero projections that are pairwise
//! orthogonal and sum to the unit of the algebra. Partitions are the probe
//! objects of the whole crate: every invariant value is computed *against* a
//! partition, and the partition lattice (ordered by refinement) is what the
//! minimization searches walk.

use num_rational::BigRational;
use std::sync::Arc;

use crate::algebra::{ensure_same_algebra, Mode, Operator, TracialAlgebra};
use crate::error::{Error, Result};

/// A finite partition of unity by nonzero orthogonal projections.
#[derive(Clone, Debug)]
pub struct Partition {
    parts: Vec<Operator>,
    traces: Vec<BigRational>,
}

impl Partition {
    /// Validates and builds a partition.
    ///
    /// Checks, under the given mode: every part is a nonzero projection, the
    /// parts are pairwise orthogonal, and they sum to the identity.
    pub fn new(parts: Vec<Operator>, mode: &Mode) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyPartition);
        }
        for pair in parts.windows(2) {
            ensure_same_algebra(&pair[0], &pair[1])?;
        }
        for (i, p) in parts.iter().enumerate() {
            if !p.is_projection(mode) {
                return Err(Error::NotAProjection(format!("part {i} is not a projection")));
            }
            if p.is_zero(mode) {
                return Err(Error::NotAProjection(format!("part {i} is zero")));
            }
        }
        for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                if parts[i].mul(&parts[j]).is_nonzero(mode) {
                    return Err(Error::NotOrthogonal(format!(
                        "parts {i} and {j} are not orthogonal"
                    )));
                }
            }
        }
        let mut sum = Operator::zero(parts[0].algebra());
        for p in &parts {
            sum = sum.add(p);
        }
        if !sum.approx_eq(&Operator::identity(parts[0].algebra()), mode) {
            return Err(Error::IncompleteResolution(
                "parts do not sum to the identity".into(),
            ));
        }
        let traces = parts.iter().map(|p| p.trace_re()).collect();
        Ok(Partition { parts, traces })
    }

    /// The coordinate partition of the factor `M_d` into `k` consecutive
    /// row blocks of equal size (requires `k | d`).
    pub fn equal_coordinate(algebra: &Arc<TracialAlgebra>, k: usize) -> Result<Self> {
        if !algebra.is_factor() {
            return Err(Error::NotAFactor(
                "equal coordinate partitions are built inside a single matrix block".into(),
            ));
        }
        let d = algebra.blocks()[0].dim;
        if k == 0 || d % k != 0 {
            return Err(Error::DivisibilityError(format!(
                "cannot split dimension {d} into {k} equal ranks"
            )));
        }
        let step = d / k;
        let parts = (0..k)
            .map(|g| {
                let rows: Vec<(usize, usize)> =
                    (g * step..(g + 1) * step).map(|i| (0, i)).collect();
                Operator::coordinate_projection(algebra, &rows)
                    .expect("coordinate rows are in range")
            })
            .collect();
        Partition::new(parts, &Mode::Exact)
    }

    /// The finest coordinate partition: one rank-one diagonal projection per
    /// coordinate of every block.
    pub fn finest_coordinate(algebra: &Arc<TracialAlgebra>) -> Self {
        let mut parts = Vec::new();
        for (b, blk) in algebra.blocks().iter().enumerate() {
            for i in 0..blk.dim {
                parts.push(
                    Operator::coordinate_projection(algebra, &[(b, i)])
                        .expect("coordinate rows are in range"),
                );
            }
        }
        Partition::new(parts, &Mode::Exact).expect("coordinate atoms form a partition")
    }

    /// The parts, in their given order.
    pub fn parts(&self) -> &[Operator] {
        &self.parts
    }

    /// Part `i`.
    pub fn part(&self, i: usize) -> &Operator {
        &self.parts[i]
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// True when the partition has no parts (never holds for a validated
    /// partition; present for API completeness).
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The ambient algebra.
    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        self.parts[0].algebra()
    }

    /// Cached traces `τ(p_i)`.
    pub fn traces(&self) -> &[BigRational] {
        &self.traces
    }

    /// True when all parts have the same trace (necessarily `1/k`).
    pub fn is_equal_trace(&self) -> bool {
        self.traces.windows(2).all(|w| w[0] == w[1])
    }

    /// Errors unless the partition has equal traces.
    pub fn ensure_equal_trace(&self) -> Result<()> {
        if self.is_equal_trace() {
            Ok(())
        } else {
            Err(Error::NotEqualTrace(format!(
                "parts have traces {:?}",
                self.traces.iter().map(|t| t.to_string()).collect::<Vec<_>>()
            )))
        }
    }

    /// True when `self` refines `coarser`: every part of `self` sits under
    /// some part of `coarser` (`p q = q`).
    pub fn refines(&self, coarser: &Partition, mode: &Mode) -> Result<bool> {
        ensure_same_algebra(&self.parts[0], &coarser.parts[0])?;
        for q in &self.parts {
            let dominated = coarser
                .parts
                .iter()
                .any(|p| p.mul(q).approx_eq(q, mode));
            if !dominated {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Scalar};

    #[test]
    fn equal_coordinate_partitions_validate() {
        let alg = TracialAlgebra::matrix_factor(6);
        let p = Partition::equal_coordinate(&alg, 3).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.is_equal_trace());
        assert_eq!(p.traces()[0], rat(1, 3));
        assert!(Partition::equal_coordinate(&alg, 4).is_err());
    }

    #[test]
    fn finest_refines_coarser_but_not_conversely() {
        let alg = TracialAlgebra::matrix_factor(6);
        let coarse = Partition::equal_coordinate(&alg, 2).unwrap();
        let fine = Partition::finest_coordinate(&alg);
        assert!(fine.refines(&coarse, &Mode::Exact).unwrap());
        assert!(!coarse.refines(&fine, &Mode::Exact).unwrap());
        // a partition always refines itself
        assert!(coarse.refines(&coarse, &Mode::Exact).unwrap());
    }

    #[test]
    fn misaligned_split_is_not_a_refinement() {
        let alg = TracialAlgebra::matrix_factor(4);
        let halves = Partition::equal_coordinate(&alg, 2).unwrap();
        // {0,1,2} | {3} overlaps both halves with its first part
        let p = Operator::coordinate_projection(&alg, &[(0, 0), (0, 1), (0, 2)]).unwrap();
        let q = Operator::coordinate_projection(&alg, &[(0, 3)]).unwrap();
        let other = Partition::new(vec![p, q], &Mode::Exact).unwrap();
        assert!(!other.refines(&halves, &Mode::Exact).unwrap());
    }

    #[test]
    fn validation_rejects_broken_families() {
        let alg = TracialAlgebra::matrix_factor(2);
        let e00 = Operator::coordinate_projection(&alg, &[(0, 0)]).unwrap();
        let e11 = Operator::coordinate_projection(&alg, &[(0, 1)]).unwrap();
        let id = Operator::identity(&alg);
        // missing mass
        assert!(matches!(
            Partition::new(vec![e00.clone()], &Mode::Exact),
            Err(Error::IncompleteResolution(_))
        ));
        // overlap
        assert!(matches!(
            Partition::new(vec![e00.clone(), id.clone()], &Mode::Exact),
            Err(Error::NotOrthogonal(_)) | Err(Error::IncompleteResolution(_))
        ));
        // non-projection part
        let half = id.scale_rat(&rat(1, 2));
        assert!(matches!(
            Partition::new(vec![half.clone(), half], &Mode::Exact),
            Err(Error::NotAProjection(_))
        ));
        // empty family
        assert!(matches!(Partition::new(vec![], &Mode::Exact), Err(Error::EmptyPartition)));
        // the good case
        assert!(Partition::new(vec![e00, e11], &Mode::Exact).is_ok());
    }

    #[test]
    fn non_coordinate_projections_are_accepted() {
        let alg = TracialAlgebra::matrix_factor(2);
        // p = (1/2)[[1,1],[1,1]] and its complement
        let mut p = Operator::zero(&alg);
        for i in 0..2 {
            for j in 0..2 {
                p.set_entry(0, i, j, Scalar::from_re(rat(1, 2)));
            }
        }
        let q = Operator::identity(&alg).sub(&p);
        let part = Partition::new(vec![p, q], &Mode::Exact).unwrap();
        assert!(part.is_equal_trace());
        assert_eq!(part.traces()[0], rat(1, 2));
    }
}
