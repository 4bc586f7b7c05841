//! Tuple compression and covering exponents: the finite-matrix linear
//! algebra that turns a small invariant value into dimension-count
//! evidence for free-entropy bounds.
//!
//! Given `p` orthogonal equal-trace projections `q_1, …, q_p` in the
//! `k×k` model (with `p | k`) and a support set `T_l` of index pairs per
//! operator, the compression
//!
//! ```text
//! Q(a_1, …, a_n)_l = Σ_{(i,j) ∈ T_l} q_i a_l q_j
//! ```
//!
//! is an idempotent linear map contracting the tuple 2-norm. Its range
//! has real dimension `2·Σ|T_l|·(k/p)²` on full matrix tuples and
//! `Σ|T_l|·(k/p)²` on self-adjoint tuples (for adjoint-symmetric
//! supports). [`TupleCompression::range_dimension`] computes the count
//! both by the closed formula and by row-reducing the image of a
//! spanning set, and insists they agree.
//!
//! The same exponent drives the covering estimates: a microstate space
//! whose elements compress into such a range is covered by at most
//! `(8S/ε)^{c·k²}` unitary orbits of `ε`-balls in the self-adjoint case
//! (`(8S/ε)^{2c·k²}` otherwise), where `c = Σ|T_l|/p²` is exactly the
//! invariant-style density of the supports. [`covering_bound`] reports
//! these estimates in log form to keep them finite at any size.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::algebra::{ensure_same_algebra, Operator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::minimize::grouped_partition;
use crate::partition::Partition;
use crate::scalar::{rat_int, Scalar};

/// A compression `Q(a)_l = Σ_{(i,j)∈T_l} q_i a_l q_j` of matrix tuples,
/// determined by a `p`-part equal-trace partition of the `k×k` model and
/// one support set of index pairs per tuple coordinate.
#[derive(Clone, Debug)]
pub struct TupleCompression {
    projections: Partition,
    supports: Vec<Vec<(usize, usize)>>,
    self_adjoint: bool,
    k: usize,
    p: usize,
}

impl TupleCompression {
    /// Builds the compression over the banded projections of the `k×k`
    /// model: `q_i` sums the diagonal units of rows `[i·k/p, (i+1)·k/p)`.
    pub fn banded(
        k: usize,
        p: usize,
        supports: Vec<Vec<(usize, usize)>>,
        self_adjoint: bool,
    ) -> Result<Self> {
        if p == 0 || k == 0 || k % p != 0 {
            return Err(Error::ShapeError(format!(
                "need a positive partition size dividing the matrix size, got p = {p}, k = {k}"
            )));
        }
        let alg = crate::algebra::TracialAlgebra::matrix_factor(k);
        let atoms = Partition::finest_coordinate(&alg);
        let grouping: Vec<usize> = (0..k).map(|r| r / (k / p)).collect();
        Self::with_projections(grouped_partition(&atoms, &grouping)?, supports, self_adjoint)
    }

    /// Builds the compression over explicitly given projections: an
    /// equal-trace partition of a matrix factor into `p` parts with
    /// `p` dividing the matrix size.
    pub fn with_projections(
        projections: Partition,
        supports: Vec<Vec<(usize, usize)>>,
        self_adjoint: bool,
    ) -> Result<Self> {
        let alg = projections.algebra();
        if !alg.is_factor() {
            return Err(Error::ShapeError(
                "tuple compression lives in a single matrix factor".into(),
            ));
        }
        let k = alg.blocks()[0].dim;
        let p = projections.len();
        if k % p != 0 {
            return Err(Error::ShapeError(format!(
                "partition size {p} does not divide the matrix size {k}"
            )));
        }
        projections.ensure_equal_trace()?;
        for (l, t) in supports.iter().enumerate() {
            for (a, pair) in t.iter().enumerate() {
                if pair.0 >= p || pair.1 >= p {
                    return Err(Error::ShapeError(format!(
                        "support pair {pair:?} of coordinate {l} exceeds the partition size {p}"
                    )));
                }
                if t[..a].contains(pair) {
                    return Err(Error::ShapeError(format!(
                        "support pair {pair:?} of coordinate {l} is listed twice"
                    )));
                }
            }
            if self_adjoint {
                for (i, j) in t {
                    if !t.contains(&(*j, *i)) {
                        return Err(Error::ShapeError(format!(
                            "self-adjoint compression needs adjoint-symmetric supports, \
                             but coordinate {l} contains ({i}, {j}) without ({j}, {i})"
                        )));
                    }
                }
            }
        }
        Ok(TupleCompression { projections, supports, self_adjoint, k, p })
    }

    /// Matrix size of the model.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of projections.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of tuple coordinates.
    pub fn operator_count(&self) -> usize {
        self.supports.len()
    }

    /// The support sets, one list of `(i, j)` pairs per coordinate.
    pub fn supports(&self) -> &[Vec<(usize, usize)>] {
        &self.supports
    }

    /// Whether the compression is read on self-adjoint tuples.
    pub fn self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// The projections the compression cuts along.
    pub fn projections(&self) -> &Partition {
        &self.projections
    }

    /// The density `c = Σ|T_l| / p²` of the supports — the invariant
    /// value a generating family must beat for these supports to arise
    /// from its partition pattern.
    pub fn support_density(&self) -> BigRational {
        let total: usize = self.supports.iter().map(Vec::len).sum();
        rat_int(total as i64) / rat_int((self.p * self.p) as i64)
    }

    /// Applies the compression to a tuple.
    pub fn compress(&self, tuple: &[Operator]) -> Result<Vec<Operator>> {
        if tuple.len() != self.supports.len() {
            return Err(Error::ShapeError(format!(
                "tuple has {} coordinates but the compression expects {}",
                tuple.len(),
                self.supports.len()
            )));
        }
        let alg = self.projections.algebra();
        let mut out = Vec::with_capacity(tuple.len());
        for (a, t) in tuple.iter().zip(&self.supports) {
            ensure_same_algebra(a, self.projections.part(0))?;
            let mut image = Operator::zero(alg);
            for (i, j) in t {
                image = image.add(
                    &self.projections.part(*i).mul(a).mul(self.projections.part(*j)),
                );
            }
            out.push(image);
        }
        Ok(out)
    }

    /// Image of the single-entry tuple carrying `e_{rs}` in coordinate
    /// `l`, assembled entrywise: `(q_i e_{rs} q_j)_{ab} = (q_i)_{ar}·(q_j)_{sb}`.
    /// This is the fast route the rank oracle uses; it agrees with
    /// [`Self::compress`] on unit tuples.
    fn unit_image(&self, l: usize, r: usize, s: usize) -> Operator {
        let alg = self.projections.algebra();
        let mut out = Operator::zero(alg);
        for (i, j) in &self.supports[l] {
            let qi = self.projections.part(*i);
            let qj = self.projections.part(*j);
            for a in 0..self.k {
                let left = qi.entry(0, a, r);
                if left.is_zero() {
                    continue;
                }
                for b in 0..self.k {
                    let right = qj.entry(0, s, b);
                    if right.is_zero() {
                        continue;
                    }
                    let mut cur = out.entry(0, a, b).clone();
                    cur += &(left * right);
                    out.set_entry(0, a, b, cur);
                }
            }
        }
        out
    }

    /// Flattens an image tuple (one nonzero coordinate `l`) into a real
    /// coordinate row of length `2·n·k²`.
    fn real_row(&self, l: usize, image: &Operator) -> Vec<Scalar> {
        let n = self.supports.len();
        let kk = self.k * self.k;
        let mut row = vec![Scalar::zero(); 2 * n * kk];
        let mut idx = 2 * l * kk;
        for r in 0..self.k {
            for c in 0..self.k {
                let e = image.entry(0, r, c);
                row[idx] = Scalar::from_re(e.re.clone());
                row[idx + 1] = Scalar::from_re(e.im.clone());
                idx += 2;
            }
        }
        row
    }

    /// Real dimension of the compression's range, computed both by the
    /// closed formula (`2·Σ|T_l|·(k/p)²`, halved in self-adjoint mode)
    /// and by row-reducing the images of a spanning set of the domain.
    /// The two counts must agree.
    pub fn range_dimension(&self) -> Result<usize> {
        let block = self.k / self.p;
        let total: usize = self.supports.iter().map(Vec::len).sum();
        let formula = if self.self_adjoint {
            total * block * block
        } else {
            2 * total * block * block
        };

        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        let i = Scalar::i();
        for l in 0..self.supports.len() {
            if self.self_adjoint {
                for r in 0..self.k {
                    rows.push(self.real_row(l, &self.unit_image(l, r, r)));
                    for s in (r + 1)..self.k {
                        let up = self.unit_image(l, r, s);
                        let down = self.unit_image(l, s, r);
                        rows.push(self.real_row(l, &up.add(&down)));
                        rows.push(self.real_row(l, &up.sub(&down).scale(&i)));
                    }
                }
            } else {
                for r in 0..self.k {
                    for s in 0..self.k {
                        let image = self.unit_image(l, r, s);
                        rows.push(self.real_row(l, &image));
                        rows.push(self.real_row(l, &image.scale(&i)));
                    }
                }
            }
        }
        rows.retain(|row| row.iter().any(|e| !e.is_zero()));
        let oracle = linalg::rank(rows);
        if oracle != formula {
            return Err(Error::Internal(format!(
                "range dimension mismatch: formula {formula}, row reduction {oracle}"
            )));
        }
        Ok(formula)
    }
}

/// A covering estimate `(argument)^(exponent)` kept in log form:
/// the bound's logarithm is `exponent · log(argument)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogCoveringBound {
    /// The exponent `c·k²` (self-adjoint) or `2c·k²` (general).
    pub exponent: BigRational,
    /// The argument `8S/ε` of the logarithm.
    pub log_argument: BigRational,
}

impl LogCoveringBound {
    /// Numerical value of the bound's natural logarithm.
    pub fn log_value(&self) -> f64 {
        let e = self.exponent.to_f64().unwrap_or(f64::INFINITY);
        let a = self.log_argument.to_f64().unwrap_or(f64::INFINITY);
        if e == 0.0 {
            0.0
        } else {
            e * a.ln()
        }
    }
}

impl std::fmt::Display for LogCoveringBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*log({})", self.exponent, self.log_argument)
    }
}

/// Log-form covering count for microstate spaces: at most
/// `(8S/ε)^(c·k²)` unitary orbits of `ε`-balls suffice for self-adjoint
/// tuples, `(8S/ε)^(2c·k²)` in general, where `S` bounds the tuple
/// 2-norms and `c` is the support density. Requires `S > 0`,
/// `0 < ε < 1`, `c ≥ 0`, and `k ≥ 1`.
pub fn covering_bound(
    s: &BigRational,
    eps: &BigRational,
    c: &BigRational,
    k: usize,
    self_adjoint: bool,
) -> Result<LogCoveringBound> {
    if !s.is_positive() {
        return Err(Error::DomainError(format!("norm bound S = {s} must be positive")));
    }
    if !eps.is_positive() || *eps >= rat_int(1) {
        return Err(Error::DomainError(format!("scale ε = {eps} must lie in (0, 1)")));
    }
    if c.is_negative() {
        return Err(Error::DomainError(format!("density c = {c} must be nonnegative")));
    }
    if k == 0 {
        return Err(Error::DomainError("matrix size k must be positive".into()));
    }
    let doubling = if self_adjoint { 1 } else { 2 };
    let exponent = rat_int(doubling) * c * rat_int((k * k) as i64);
    let log_argument = rat_int(8) * s / eps;
    Ok(LogCoveringBound { exponent, log_argument })
}

/// Exponent of the unitary-group covering estimate: the unitaries of the
/// `k×k` model admit `ε`-nets of cardinality at most `(C/ε)^(k²)` for an
/// absolute constant `C` (left symbolic here). The exponent `k²` is what
/// enters every orbit-covering count.
pub fn unitary_covering_exponent(k: usize) -> usize {
    k * k
}
