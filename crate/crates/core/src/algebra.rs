//! Finite tracial algebras and their elements.
//!
//! The ambient objects are finite direct sums `⊕_b M_{n_b}(ℚ(i))` equipped
//! with a faithful tracial state: block `b` carries a positive rational
//! weight `α_b`, the weights sum to one, and
//!
//! ```text
//! τ(x) = Σ_b (α_b / n_b) · Tr(x_b)
//! ```
//!
//! so the identity has trace one and a rank-`r` projection supported in
//! block `b` has trace `α_b · r / n_b`.
//!
//! All arithmetic on [`Operator`] values is exact. The [`Mode`] only governs
//! *zero tests*: in exact mode an operator is zero iff every entry vanishes;
//! in float mode it is treated as zero iff its tracial 2-norm is at most the
//! tolerance (the norm itself is still computed exactly and compared as a
//! rational, so float mode is deterministic too).

use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How zero tests are interpreted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    /// An operator counts as zero iff all entries are exactly zero.
    Exact,
    /// An operator counts as zero iff `τ(x*x) ≤ eps²`.
    ///
    /// The comparison is still exact rational arithmetic; the tolerance is
    /// the only thing that changes.
    Float {
        /// Zero-test tolerance for the tracial 2-norm.
        eps: BigRational,
    },
}

impl Mode {
    /// Float mode with the given tolerance.
    pub fn float(eps: BigRational) -> Self {
        Mode::Float { eps }
    }
}

/// One matrix block of a tracial algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Matrix size `n_b` of the block `M_{n_b}`.
    pub dim: usize,
    /// Trace weight `α_b` of the block (the trace of its unit).
    pub weight: BigRational,
}

/// A finite direct sum of matrix algebras with a tracial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracialAlgebra {
    blocks: Vec<Block>,
}

impl TracialAlgebra {
    /// Builds an algebra from blocks, validating that every dimension is
    /// positive and that the weights are positive and sum to one.
    pub fn new(blocks: Vec<Block>) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::InvalidWeights("algebra needs at least one block".into()));
        }
        let mut total = BigRational::zero();
        for (b, blk) in blocks.iter().enumerate() {
            if blk.dim == 0 {
                return Err(Error::ShapeError(format!("block {b} has dimension zero")));
            }
            if blk.weight <= BigRational::zero() {
                return Err(Error::InvalidWeights(format!(
                    "block {b} has nonpositive trace weight {}",
                    blk.weight
                )));
            }
            total += &blk.weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidWeights(format!(
                "trace weights sum to {total}, expected 1"
            )));
        }
        Ok(Arc::new(TracialAlgebra { blocks }))
    }

    /// The full matrix algebra `M_n` with its unique tracial state.
    pub fn matrix_factor(n: usize) -> Arc<Self> {
        TracialAlgebra::new(vec![Block { dim: n, weight: BigRational::one() }])
            .expect("matrix factor is always valid")
    }

    /// The block data.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of direct summands.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Linear dimension `Σ_b n_b²` of the algebra as a ℚ(i)-vector space.
    pub fn linear_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// True when the algebra is a single matrix block.
    pub fn is_factor(&self) -> bool {
        self.blocks.len() == 1
    }

    /// The trace weight per matrix entry of block `b`, i.e. `α_b / n_b`.
    pub fn entry_weight(&self, b: usize) -> BigRational {
        &self.blocks[b].weight / BigRational::from_integer(self.blocks[b].dim.into())
    }
}

/// Checks that two operators live over equal algebras.
pub fn ensure_same_algebra(a: &Operator, b: &Operator) -> Result<()> {
    if a.same_algebra(b) {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch(
            "operands live in different tracial algebras".into(),
        ))
    }
}

/// Dense per-block matrix data.
pub type BlockMatrix = Vec<Vec<Scalar>>;

/// An element of a tracial algebra, stored densely block by block.
#[derive(Clone, PartialEq, Eq)]
pub struct Operator {
    algebra: Arc<TracialAlgebra>,
    blocks: Vec<BlockMatrix>,
}

impl Operator {
    /// The zero element.
    pub fn zero(algebra: &Arc<TracialAlgebra>) -> Self {
        let blocks = algebra
            .blocks()
            .iter()
            .map(|b| vec![vec![Scalar::zero(); b.dim]; b.dim])
            .collect();
        Operator { algebra: Arc::clone(algebra), blocks }
    }

    /// The unit of the algebra.
    pub fn identity(algebra: &Arc<TracialAlgebra>) -> Self {
        let mut x = Operator::zero(algebra);
        for (b, blk) in algebra.blocks().iter().enumerate() {
            for i in 0..blk.dim {
                x.blocks[b][i][i] = Scalar::one();
            }
        }
        x
    }

    /// The matrix unit `e_{i,j}` of block `b` (0-based indices).
    pub fn matrix_unit(algebra: &Arc<TracialAlgebra>, b: usize, i: usize, j: usize) -> Self {
        let mut x = Operator::zero(algebra);
        x.blocks[b][i][j] = Scalar::one();
        x
    }

    /// The diagonal projection onto the listed `(block, row)` coordinates.
    pub fn coordinate_projection(
        algebra: &Arc<TracialAlgebra>,
        rows: &[(usize, usize)],
    ) -> Result<Self> {
        let mut x = Operator::zero(algebra);
        for &(b, i) in rows {
            let dim = algebra
                .blocks()
                .get(b)
                .ok_or_else(|| Error::ShapeError(format!("block index {b} out of range")))?
                .dim;
            if i >= dim {
                return Err(Error::ShapeError(format!(
                    "row {i} out of range for block {b} of dimension {dim}"
                )));
            }
            if !x.blocks[b][i][i].is_zero() {
                return Err(Error::ShapeError(format!(
                    "coordinate ({b},{i}) listed twice"
                )));
            }
            x.blocks[b][i][i] = Scalar::one();
        }
        Ok(x)
    }

    /// Builds an operator from raw block data, validating shapes.
    pub fn from_blocks(algebra: &Arc<TracialAlgebra>, blocks: Vec<BlockMatrix>) -> Result<Self> {
        if blocks.len() != algebra.block_count() {
            return Err(Error::ShapeError(format!(
                "expected {} blocks, got {}",
                algebra.block_count(),
                blocks.len()
            )));
        }
        for (b, (data, blk)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if data.len() != blk.dim || data.iter().any(|row| row.len() != blk.dim) {
                return Err(Error::ShapeError(format!(
                    "block {b} is not a {0}×{0} matrix",
                    blk.dim
                )));
            }
        }
        Ok(Operator { algebra: Arc::clone(algebra), blocks })
    }

    /// The ambient algebra.
    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.algebra
    }

    /// Raw block data.
    pub fn blocks_data(&self) -> &[BlockMatrix] {
        &self.blocks
    }

    /// Entry `(i,j)` of block `b`.
    pub fn entry(&self, b: usize, i: usize, j: usize) -> &Scalar {
        &self.blocks[b][i][j]
    }

    /// Overwrites entry `(i,j)` of block `b`.
    pub fn set_entry(&mut self, b: usize, i: usize, j: usize, value: Scalar) {
        self.blocks[b][i][j] = value;
    }

    /// True when both operators share (structurally) the same algebra.
    pub fn same_algebra(&self, other: &Operator) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra
    }

    fn assert_same_algebra(&self, other: &Operator) {
        assert!(
            self.same_algebra(other),
            "operands live in different tracial algebras"
        );
    }

    /// Exact sum.
    pub fn add(&self, other: &Operator) -> Operator {
        self.assert_same_algebra(other);
        let mut out = self.clone();
        for (ob, rb) in out.blocks.iter_mut().zip(&other.blocks) {
            for (orow, rrow) in ob.iter_mut().zip(rb) {
                for (oe, re) in orow.iter_mut().zip(rrow) {
                    *oe += re;
                }
            }
        }
        out
    }

    /// Exact difference.
    pub fn sub(&self, other: &Operator) -> Operator {
        self.assert_same_algebra(other);
        let mut out = self.clone();
        for (ob, rb) in out.blocks.iter_mut().zip(&other.blocks) {
            for (orow, rrow) in ob.iter_mut().zip(rb) {
                for (oe, re) in orow.iter_mut().zip(rrow) {
                    *oe -= re;
                }
            }
        }
        out
    }

    /// Exact blockwise matrix product.
    pub fn mul(&self, other: &Operator) -> Operator {
        self.assert_same_algebra(other);
        let mut out = Operator::zero(&self.algebra);
        for (b, blk) in self.algebra.blocks().iter().enumerate() {
            let n = blk.dim;
            let (a, c) = (&self.blocks[b], &other.blocks[b]);
            let o = &mut out.blocks[b];
            for i in 0..n {
                for k in 0..n {
                    if a[i][k].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        if c[k][j].is_zero() {
                            continue;
                        }
                        let prod = &a[i][k] * &c[k][j];
                        o[i][j] += &prod;
                    }
                }
            }
        }
        out
    }

    /// Adjoint (conjugate transpose in every block).
    pub fn adjoint(&self) -> Operator {
        let mut out = Operator::zero(&self.algebra);
        for (b, blk) in self.algebra.blocks().iter().enumerate() {
            for i in 0..blk.dim {
                for j in 0..blk.dim {
                    out.blocks[b][i][j] = self.blocks[b][j][i].conj();
                }
            }
        }
        out
    }

    /// Additive inverse.
    pub fn neg(&self) -> Operator {
        let mut out = self.clone();
        for blk in &mut out.blocks {
            for row in blk {
                for e in row {
                    *e = -&*e;
                }
            }
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &Scalar) -> Operator {
        let mut out = self.clone();
        for blk in &mut out.blocks {
            for row in blk {
                for e in row {
                    *e *= c;
                }
            }
        }
        out
    }

    /// Rational multiple.
    pub fn scale_rat(&self, c: &BigRational) -> Operator {
        self.scale(&Scalar::from_re(c.clone()))
    }

    /// The tracial state `τ(x)` (complex in general).
    pub fn trace(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for (b, blk) in self.algebra.blocks().iter().enumerate() {
            let w = Scalar::from_re(self.algebra.entry_weight(b));
            for i in 0..blk.dim {
                let term = &self.blocks[b][i][i] * &w;
                acc += &term;
            }
        }
        acc
    }

    /// Real part of the trace (the full trace for self-adjoint elements and
    /// projections).
    pub fn trace_re(&self) -> BigRational {
        self.trace().re
    }

    /// The squared tracial 2-norm `τ(x*x) = Σ_b (α_b/n_b) Σ_{i,j} |x_{ij}|²`.
    pub fn frobenius_sq(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (b, _blk) in self.algebra.blocks().iter().enumerate() {
            let w = self.algebra.entry_weight(b);
            let mut block_sum = BigRational::zero();
            for row in &self.blocks[b] {
                for e in row {
                    if !e.is_zero() {
                        block_sum += e.abs_sq();
                    }
                }
            }
            acc += w * block_sum;
        }
        acc
    }

    /// Mode-aware zero test.
    pub fn is_zero(&self, mode: &Mode) -> bool {
        match mode {
            Mode::Exact => self
                .blocks
                .iter()
                .all(|b| b.iter().all(|row| row.iter().all(Scalar::is_zero))),
            Mode::Float { eps } => self.frobenius_sq() <= eps * eps,
        }
    }

    /// Mode-aware nonzero test.
    pub fn is_nonzero(&self, mode: &Mode) -> bool {
        !self.is_zero(mode)
    }

    /// Mode-aware equality (`x ≈ y` iff `x − y ≈ 0`).
    pub fn approx_eq(&self, other: &Operator, mode: &Mode) -> bool {
        self.sub(other).is_zero(mode)
    }

    /// Mode-aware test for `x = x*`.
    pub fn is_self_adjoint(&self, mode: &Mode) -> bool {
        self.approx_eq(&self.adjoint(), mode)
    }

    /// Mode-aware test for `p = p* = p²`.
    pub fn is_projection(&self, mode: &Mode) -> bool {
        self.is_self_adjoint(mode) && self.mul(self).approx_eq(self, mode)
    }

    /// Flattens the operator into a vector of length
    /// [`TracialAlgebra::linear_dim`], block by block in row-major order.
    pub fn flatten(&self) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(self.algebra.linear_dim());
        for blk in &self.blocks {
            for row in blk {
                out.extend(row.iter().cloned());
            }
        }
        out
    }

    /// Inverse of [`Operator::flatten`].
    pub fn from_flat(algebra: &Arc<TracialAlgebra>, flat: &[Scalar]) -> Result<Self> {
        if flat.len() != algebra.linear_dim() {
            return Err(Error::ShapeError(format!(
                "flat vector has length {}, expected {}",
                flat.len(),
                algebra.linear_dim()
            )));
        }
        let mut x = Operator::zero(algebra);
        let mut pos = 0;
        for (b, blk) in algebra.blocks().iter().enumerate() {
            for i in 0..blk.dim {
                for j in 0..blk.dim {
                    x.blocks[b][i][j] = flat[pos].clone();
                    pos += 1;
                }
            }
        }
        Ok(x)
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator[")?;
        for (b, blk) in self.blocks.iter().enumerate() {
            writeln!(f, "  block {b}:")?;
            for row in blk {
                let cells: Vec<String> = row.iter().map(|e| format!("{e}")).collect();
                writeln!(f, "    [{}]", cells.join(", "))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn m2() -> Arc<TracialAlgebra> {
        TracialAlgebra::matrix_factor(2)
    }

    #[test]
    fn algebra_validation_rejects_bad_weights() {
        assert!(TracialAlgebra::new(vec![]).is_err());
        assert!(TracialAlgebra::new(vec![Block { dim: 2, weight: rat(1, 2) }]).is_err());
        assert!(TracialAlgebra::new(vec![
            Block { dim: 2, weight: rat(3, 2) },
            Block { dim: 1, weight: rat(-1, 2) },
        ])
        .is_err());
        assert!(TracialAlgebra::new(vec![
            Block { dim: 2, weight: rat(1, 2) },
            Block { dim: 3, weight: rat(1, 2) },
        ])
        .is_ok());
    }

    #[test]
    fn traces_weight_blocks_correctly() {
        let alg = TracialAlgebra::new(vec![
            Block { dim: 2, weight: rat(1, 3) },
            Block { dim: 3, weight: rat(2, 3) },
        ])
        .unwrap();
        assert_eq!(Operator::identity(&alg).trace_re(), rat_int(1));
        // rank-1 projection in block 0: trace (1/3)·(1/2)
        let p = Operator::coordinate_projection(&alg, &[(0, 0)]).unwrap();
        assert_eq!(p.trace_re(), rat(1, 6));
        // rank-2 projection in block 1: trace (2/3)·(2/3)
        let q = Operator::coordinate_projection(&alg, &[(1, 0), (1, 2)]).unwrap();
        assert_eq!(q.trace_re(), rat(4, 9));
        assert!(p.is_projection(&Mode::Exact));
        assert!(q.is_projection(&Mode::Exact));
    }

    #[test]
    fn matrix_units_multiply_like_matrix_units() {
        let alg = m2();
        let e01 = Operator::matrix_unit(&alg, 0, 0, 1);
        let e10 = Operator::matrix_unit(&alg, 0, 1, 0);
        let e00 = Operator::matrix_unit(&alg, 0, 0, 0);
        let e11 = Operator::matrix_unit(&alg, 0, 1, 1);
        assert_eq!(e01.mul(&e10), e00);
        assert_eq!(e10.mul(&e01), e11);
        assert!(e01.mul(&e01).is_zero(&Mode::Exact));
        assert_eq!(e01.adjoint(), e10);
        assert_eq!(e00.add(&e11), Operator::identity(&alg));
    }

    #[test]
    fn frobenius_norm_is_tracial() {
        let alg = m2();
        let mut x = Operator::zero(&alg);
        x.set_entry(0, 0, 1, Scalar::from_parts(3, 1, 4, 1)); // 3+4i
        // τ(x*x) = (1/2)·|3+4i|² = 25/2
        assert_eq!(x.frobenius_sq(), rat(25, 2));
        assert_eq!(x.mul(&x.adjoint()).trace_re(), rat(25, 2));
    }

    #[test]
    fn float_mode_thresholds_zero_tests() {
        let alg = m2();
        let mut x = Operator::zero(&alg);
        x.set_entry(0, 0, 0, Scalar::from_parts(1, 100, 0, 1));
        // ‖x‖₂ = (1/100)/√2, below eps = 1/100, above eps = 1/200
        assert!(x.is_nonzero(&Mode::Exact));
        assert!(x.is_zero(&Mode::float(rat(1, 100))));
        assert!(x.is_nonzero(&Mode::float(rat(1, 200))));
    }

    #[test]
    fn flatten_roundtrip() {
        let alg = TracialAlgebra::new(vec![
            Block { dim: 2, weight: rat(1, 2) },
            Block { dim: 1, weight: rat(1, 2) },
        ])
        .unwrap();
        let mut x = Operator::zero(&alg);
        x.set_entry(0, 1, 0, Scalar::i());
        x.set_entry(1, 0, 0, Scalar::from_parts(5, 7, 0, 1));
        let flat = x.flatten();
        assert_eq!(flat.len(), alg.linear_dim());
        assert_eq!(Operator::from_flat(&alg, &flat).unwrap(), x);
    }
}
