//! Self-adjoint bookkeeping for generating families.
//!
//! Counting generators and counting self-adjoint generators are tightly
//! linked, and the links are all constructive at desk scale:
//!
//! * [`hermitianize`] doubles a family `X` into
//!   `Y = {x + i·x*, i(x − i·x*)}`, whose invariant against any partition
//!   is sandwiched as `𝓘(X;P) ≤ 𝓘(Y;P) ≤ 4·𝓘(X;P)`, with each half of
//!   the doubled family individually below `2·𝓘(X;P)`
//!   ([`hermitianization_sandwich`]).
//!
//! * [`split_sa`] cuts a self-adjoint family along a partition into a
//!   strictly-upper-triangular part `Y` and a diagonal part `Z`. Because
//!   the support of a self-adjoint element is symmetric, the three
//!   regions (upper, lower, diagonal) tile its support exactly and
//!
//!   ```text
//!   2·𝓘(Y;Q) + 𝓘(Z;Q) = 𝓘(X;Q)
//!   ```
//!
//!   holds as an identity of rationals, while `x = z + y + y*` rebuilds
//!   every element. The diagonal part commutes with the partition, so
//!   `𝓘(Z;Q) ≤ |X|/k` — refining the partition starves `Z`.
//!
//! * [`masa_shrink`] exploits an element of the family itself: when the
//!   designated (last) element is self-adjoint with rational spectrum,
//!   its eigenspaces are carved into a `k`-part equal-trace partition
//!   lying in its commutant, certifying `𝓘(X;P) ≤ (|X| − 1) + 1/k`.
//!
//! * [`generator_count_bounds`] inverts the relationship: from an
//!   invariant value `g` it reports the window of integers that can be
//!   the minimal number of self-adjoint generators, namely
//!   `n ∈ [⌈2g + 1⌉, ⌊2g + 2⌋]`, together with the self-adjoint-family
//!   invariant `2g`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{ensure_same_algebra, Mode, Operator};
use crate::bounds::ExtRational;
use crate::check::NamedCheck;
use crate::error::{Error, Result};
use crate::invariant::{invariant_family, invariant_single, support_pattern};
use crate::linalg::{express_in_span, gram_schmidt, norm_sq, nullspace, SpanTracker};
use crate::partition::Partition;
use crate::scalar::{rat, rat_int, Scalar};
use crate::squares::factorize;
use crate::units::add_outer;

/// Doubles a family into phase-rotated hermitian pairs: each `x`
/// contributes `x + i·x*` and `i(x − i·x*)`, in that order. The two
/// elements recover `x` linearly, so the doubled family generates the
/// same algebra, and its invariant is controlled by
/// [`hermitianization_sandwich`].
///
/// For self-adjoint `x` both outputs collapse to `(1 + i)·x`.
pub fn hermitianize(xs: &[Operator]) -> Vec<Operator> {
    let i = Scalar::i();
    let mut out = Vec::with_capacity(2 * xs.len());
    for x in xs {
        let xstar = x.adjoint();
        out.push(x.add(&xstar.scale(&i)));
        out.push(x.scale(&i).add(&xstar));
    }
    out
}

/// The four invariant values tied together by the hermitianization
/// sandwich.
#[derive(Clone, Debug)]
pub struct SandwichValues {
    /// `𝓘(X; P)` of the original family.
    pub base: BigRational,
    /// `𝓘(Y; P)` of the doubled family.
    pub doubled: BigRational,
    /// Invariant of the first members `x + i·x*` alone.
    pub first_half: BigRational,
    /// Invariant of the second members `i(x − i·x*)` alone.
    pub second_half: BigRational,
}

/// Computes the invariant of a family and of its hermitianization against
/// one partition and verifies the sandwich
/// `𝓘(X;P) ≤ 𝓘(Y;P) ≤ 4·𝓘(X;P)` together with the halved bounds
/// `𝓘(Y₁;P), 𝓘(Y₂;P) ≤ 2·𝓘(X;P)`. A violation would contradict exact
/// arithmetic and reports as [`Error::Internal`].
pub fn hermitianization_sandwich(
    xs: &[Operator],
    partition: &Partition,
    mode: &Mode,
) -> Result<SandwichValues> {
    let doubled_family = hermitianize(xs);
    let first: Vec<Operator> = doubled_family.iter().step_by(2).cloned().collect();
    let second: Vec<Operator> = doubled_family.iter().skip(1).step_by(2).cloned().collect();
    let base = invariant_family(xs, partition, mode)?.value;
    let doubled = invariant_family(&doubled_family, partition, mode)?.value;
    let first_half = invariant_family(&first, partition, mode)?.value;
    let second_half = invariant_family(&second, partition, mode)?.value;
    let two = rat_int(2);
    let four = rat_int(4);
    if doubled < base
        || doubled > &four * &base
        || first_half > &two * &base
        || second_half > &two * &base
    {
        return Err(Error::Internal(format!(
            "hermitianization sandwich failed: base {base}, doubled {doubled}, \
             halves {first_half} / {second_half}"
        )));
    }
    Ok(SandwichValues { base, doubled, first_half, second_half })
}

/// A self-adjoint family split along a partition into triangular and
/// diagonal parts. Produced by [`split_sa`].
#[derive(Clone, Debug)]
pub struct SplitResult {
    /// The original (self-adjoint) family.
    pub source: Vec<Operator>,
    /// Strictly-upper-triangular parts `y_l = Σ_{i<j} p_i x_l p_j`.
    pub y: Vec<Operator>,
    /// Diagonal parts `z_l = Σ_i p_i x_l p_i`.
    pub z: Vec<Operator>,
    /// The partition the split was taken along.
    pub partition: Partition,
    /// `𝓘(X; Q)`.
    pub x_value: BigRational,
    /// `𝓘(Y; Q)`.
    pub y_value: BigRational,
    /// `𝓘(Z; Q)`.
    pub z_value: BigRational,
}

/// Splits a self-adjoint family along an equal-trace partition into its
/// strictly-upper-triangular and diagonal parts.
///
/// Every element must be self-adjoint ([`Error::NotSelfAdjoint`]) and the
/// partition equal-trace ([`Error::NotEqualTrace`]), so that the diagonal
/// bound `𝓘(Z;Q) ≤ |X|/k` carries its usual meaning. The exact identity
/// `2·𝓘(Y;Q) + 𝓘(Z;Q) = 𝓘(X;Q)` is checked during construction.
pub fn split_sa(xs: &[Operator], partition: &Partition, mode: &Mode) -> Result<SplitResult> {
    partition.ensure_equal_trace()?;
    for (l, x) in xs.iter().enumerate() {
        ensure_same_algebra(x, partition.part(0))?;
        if !x.is_self_adjoint(mode) {
            return Err(Error::NotSelfAdjoint(format!(
                "family element {l} is not self-adjoint"
            )));
        }
    }
    let k = partition.len();
    let algebra = partition.algebra();
    let mut y = Vec::with_capacity(xs.len());
    let mut z = Vec::with_capacity(xs.len());
    for x in xs {
        let rows: Vec<Operator> = partition.parts().iter().map(|p| p.mul(x)).collect();
        let mut yl = Operator::zero(algebra);
        let mut zl = Operator::zero(algebra);
        for (i, row) in rows.iter().enumerate() {
            for (j, q) in partition.parts().iter().enumerate() {
                if i < j {
                    yl = yl.add(&row.mul(q));
                } else if i == j {
                    zl = zl.add(&row.mul(q));
                }
            }
        }
        y.push(yl);
        z.push(zl);
    }
    let x_value = invariant_family(xs, partition, mode)?.value;
    let y_value = invariant_family(&y, partition, mode)?.value;
    let z_value = invariant_family(&z, partition, mode)?.value;
    if rat_int(2) * &y_value + &z_value != x_value {
        return Err(Error::Internal(format!(
            "triangular split identity failed: 2·{y_value} + {z_value} ≠ {x_value}"
        )));
    }
    let diag_cap = rat_int(xs.len() as i64) / rat_int(k as i64);
    if z_value > diag_cap {
        return Err(Error::Internal(format!(
            "diagonal part exceeds the commutant bound: {z_value} > {diag_cap}"
        )));
    }
    Ok(SplitResult {
        source: xs.to_vec(),
        y,
        z,
        partition: partition.clone(),
        x_value,
        y_value,
        z_value,
    })
}

impl SplitResult {
    /// Replays the split and reports one check per claimed property:
    /// self-adjointness of the source, the reassembly `x = z + y + y*`,
    /// the triangular/diagonal support shapes, the exact value identity,
    /// and the diagonal commutant bound.
    pub fn verify(&self, mode: &Mode) -> Vec<NamedCheck> {
        let mut checks = Vec::new();
        let k = self.partition.len();

        let sa = self.source.iter().all(|x| x.is_self_adjoint(mode));
        checks.push(NamedCheck::new(
            "self_adjoint_source",
            sa,
            "every source element is self-adjoint",
        ));

        let shape = self.y.len() == self.source.len() && self.z.len() == self.source.len();
        let reassembled = shape
            && self
                .source
                .iter()
                .zip(self.y.iter().zip(&self.z))
                .all(|(x, (y, z))| z.add(y).add(&y.adjoint()).approx_eq(x, mode));
        checks.push(NamedCheck::new(
            "reassembly",
            reassembled,
            "x = z + y + y* for every element",
        ));

        let mut triangular = true;
        for (y, z) in self.y.iter().zip(&self.z) {
            let py = support_pattern(y, &self.partition, mode).unwrap_or_default();
            let pz = support_pattern(z, &self.partition, mode).unwrap_or_default();
            if py.len() != k || pz.len() != k {
                triangular = false;
                break;
            }
            for i in 0..k {
                for j in 0..k {
                    if (py[i][j] && i >= j) || (pz[i][j] && i != j) {
                        triangular = false;
                    }
                }
            }
        }
        checks.push(NamedCheck::new(
            "triangular_supports",
            triangular,
            "y is supported strictly above the diagonal and z on it",
        ));

        let recomputed = invariant_family(&self.source, &self.partition, mode)
            .and_then(|x| {
                let y = invariant_family(&self.y, &self.partition, mode)?;
                let z = invariant_family(&self.z, &self.partition, mode)?;
                Ok((x.value, y.value, z.value))
            })
            .ok()
            .filter(|(x, y, z)| {
                *x == self.x_value && *y == self.y_value && *z == self.z_value
            })
            .is_some();
        let identity = rat_int(2) * &self.y_value + &self.z_value == self.x_value;
        checks.push(NamedCheck::new(
            "split_identity",
            recomputed && identity,
            format!(
                "2·{} + {} = {}",
                self.y_value, self.z_value, self.x_value
            ),
        ));

        let commuting = self.z.iter().all(|z| {
            self.partition
                .parts()
                .iter()
                .all(|p| p.mul(z).approx_eq(&z.mul(p), mode))
        });
        let cap = rat_int(self.source.len() as i64) / rat_int(k as i64);
        checks.push(NamedCheck::new(
            "diagonal_commutant",
            commuting && self.z_value <= cap,
            format!("diagonal invariant {} within |X|/k = {}", self.z_value, cap),
        ));

        checks
    }
}

/// All divisors of a nonzero integer's absolute value.
fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let mut out = vec![BigInt::one()];
    for (p, e) in factorize(&n.abs())? {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            let mut pe = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pe);
                pe *= &p;
            }
        }
        out = next;
    }
    Ok(out)
}

/// Minimal polynomial of an operator as monic rational coefficients
/// `[c_0, …, c_{m−1}, 1]` with `c_0 + c_1·x + … + x^m = 0`.
fn minimal_polynomial(x: &Operator) -> Result<Vec<BigRational>> {
    let dim = x.algebra().linear_dim();
    let mut tracker = SpanTracker::new(dim);
    let mut powers: Vec<Vec<Scalar>> = Vec::new();
    let mut p = Operator::identity(x.algebra());
    loop {
        let flat = p.flatten();
        if !tracker.insert(flat.clone()) {
            let coeffs = express_in_span(&powers, &flat).ok_or_else(|| {
                Error::Internal("dependent power has no span expression".into())
            })?;
            let mut poly = Vec::with_capacity(coeffs.len() + 1);
            for c in coeffs {
                if !c.im.is_zero() {
                    return Err(Error::Internal(
                        "minimal polynomial of a self-adjoint element is not real".into(),
                    ));
                }
                poly.push(-c.re);
            }
            poly.push(BigRational::one());
            return Ok(poly);
        }
        powers.push(flat);
        if powers.len() > dim + 1 {
            return Err(Error::Internal("power iteration failed to close".into()));
        }
        p = p.mul(x);
    }
}

/// The distinct rational roots of a monic rational polynomial, or
/// [`Error::NotDiagonalisable`] when it does not split over the
/// rationals. Assumes all roots are simple (true for minimal polynomials
/// of self-adjoint operators).
fn rational_roots(poly: &[BigRational]) -> Result<Vec<BigRational>> {
    let degree = poly.len() - 1;
    let eval = |t: &BigRational| {
        let mut acc = BigRational::zero();
        for c in poly.iter().rev() {
            acc = acc * t + c;
        }
        acc
    };
    let mut roots = Vec::new();
    // clear denominators to apply the rational root test
    let mut lcm = BigInt::one();
    for c in poly {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<BigInt> = poly.iter().map(|c| (c * &lcm).to_integer()).collect();
    let lead = ints.last().expect("monic polynomial is nonempty").clone();
    let lowest = ints.iter().find(|c| !c.is_zero()).expect("nonzero polynomial");
    if ints[0].is_zero() {
        roots.push(BigRational::zero());
    }
    for p in divisors(lowest)? {
        for q in divisors(&lead)? {
            for sign in [1i64, -1] {
                let cand = BigRational::new(&p * BigInt::from(sign), q.clone());
                if eval(&cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    if roots.len() != degree {
        return Err(Error::NotDiagonalisable(format!(
            "minimal polynomial of degree {degree} has only {} rational roots",
            roots.len()
        )));
    }
    roots.sort();
    Ok(roots)
}

/// One eigenline of the designated element: a block index, an
/// unnormalized vector with its squared norm, and the (rank-one) trace.
struct EigenLine {
    block: usize,
    vector: Vec<Scalar>,
    nrm: BigRational,
    weight: BigRational,
}

/// Backtracking exact packing of weighted lines into `k` bins of equal
/// load `1/k`; returns the bin index per line.
fn pack_lines(weights: &[BigRational], k: usize) -> Option<Vec<usize>> {
    let target = rat(1, k as i64);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|a, b| weights[*b].cmp(&weights[*a]));
    let mut loads = vec![BigRational::zero(); k];
    let mut assign = vec![usize::MAX; weights.len()];

    fn rec(
        pos: usize,
        order: &[usize],
        weights: &[BigRational],
        target: &BigRational,
        loads: &mut [BigRational],
        assign: &mut [usize],
    ) -> bool {
        if pos == order.len() {
            return loads.iter().all(|l| l == target);
        }
        let line = order[pos];
        let mut tried: Vec<BigRational> = Vec::new();
        for bin in 0..loads.len() {
            if tried.contains(&loads[bin]) {
                continue; // bins with equal load are interchangeable
            }
            tried.push(loads[bin].clone());
            let next = &loads[bin] + &weights[line];
            if next <= *target {
                loads[bin] = next;
                assign[line] = bin;
                if rec(pos + 1, order, weights, target, loads, assign) {
                    return true;
                }
                loads[bin] = &loads[bin] - &weights[line];
                assign[line] = usize::MAX;
            }
        }
        false
    }

    if rec(0, &order, weights, &target, &mut loads, &mut assign) {
        Some(assign)
    } else {
        None
    }
}

/// Outcome of shrinking a family's invariant through the commutant of its
/// designated element. Produced by [`masa_shrink`].
#[derive(Clone, Debug)]
pub struct ShrinkOutcome {
    /// The constructed equal-trace partition, lying in the commutant of
    /// the designated element.
    pub partition: Partition,
    /// Distinct rational eigenvalues of the designated element.
    pub eigenvalues: Vec<BigRational>,
    /// `𝓘(X; P)` for the whole family.
    pub value: BigRational,
    /// `𝓘(x_n; P)` of the designated element alone (at most `1/k`).
    pub designated_value: BigRational,
    /// The certified ceiling `(|X| − 1) + 1/k`.
    pub bound: BigRational,
}

/// Builds a `k`-part equal-trace partition inside the commutant of the
/// family's last element and evaluates the family's invariant against it,
/// certifying `𝓘(X;P) ≤ (|X| − 1) + 1/k`.
///
/// The last element must be self-adjoint with fully rational spectrum
/// ([`Error::NotSelfAdjoint`], [`Error::NotDiagonalisable`]); its
/// eigenspaces are split into orthogonal rational lines, and the lines
/// are packed exactly into `k` groups of trace `1/k`
/// ([`Error::GeometryError`] when no exact packing exists, e.g. when `k`
/// does not divide the dimension of a factor).
pub fn masa_shrink(xs: &[Operator], k: usize, mode: &Mode) -> Result<ShrinkOutcome> {
    let Some(designated) = xs.last() else {
        return Err(Error::EmptyGeneratingSet);
    };
    if k == 0 {
        return Err(Error::DomainError("partition size must be positive".into()));
    }
    for x in xs {
        ensure_same_algebra(x, designated)?;
    }
    if !designated.is_self_adjoint(mode) {
        return Err(Error::NotSelfAdjoint(
            "the designated (last) element is not self-adjoint".into(),
        ));
    }
    let algebra = designated.algebra();
    let eigenvalues = rational_roots(&minimal_polynomial(designated)?)?;

    let mut lines: Vec<EigenLine> = Vec::new();
    for (b, blk) in algebra.blocks().iter().enumerate() {
        let a = &designated.blocks_data()[b];
        let weight = algebra.entry_weight(b);
        for lambda in &eigenvalues {
            let shift = Scalar::from_re(lambda.clone());
            let rows: Vec<Vec<Scalar>> = (0..blk.dim)
                .map(|r| {
                    (0..blk.dim)
                        .map(|c| {
                            if r == c {
                                &a[r][c] - &shift
                            } else {
                                a[r][c].clone()
                            }
                        })
                        .collect()
                })
                .collect();
            for v in gram_schmidt(&nullspace(&rows)) {
                let nrm = norm_sq(&v);
                lines.push(EigenLine { block: b, vector: v, nrm, weight: weight.clone() });
            }
        }
        let found: usize = lines.iter().filter(|l| l.block == b).count();
        if found != blk.dim {
            return Err(Error::Internal(format!(
                "eigenlines span {found} of {} dimensions in block {b}",
                blk.dim
            )));
        }
    }

    let weights: Vec<BigRational> = lines.iter().map(|l| l.weight.clone()).collect();
    let assign = pack_lines(&weights, k).ok_or_else(|| {
        Error::GeometryError(format!(
            "the eigenspaces admit no {k}-part equal-trace grouping"
        ))
    })?;
    let mut parts = vec![Operator::zero(algebra); k];
    for (line, bin) in lines.iter().zip(&assign) {
        add_outer(&mut parts[*bin], line.block, &line.vector, &line.vector, &line.nrm);
    }
    let partition = Partition::new(parts, mode)?;

    for (i, p) in partition.parts().iter().enumerate() {
        if !p.mul(designated).approx_eq(&designated.mul(p), mode) {
            return Err(Error::Internal(format!(
                "part {i} does not commute with the designated element"
            )));
        }
    }

    let value = invariant_family(xs, &partition, mode)?.value;
    let designated_value = invariant_single(designated, &partition, mode)?;
    let bound = rat_int(xs.len() as i64 - 1) + rat(1, k as i64);
    if value > bound || designated_value > rat(1, k as i64) {
        return Err(Error::Internal(format!(
            "commutant shrink bound failed: {value} vs {bound}"
        )));
    }
    Ok(ShrinkOutcome { partition, eigenvalues, value, designated_value, bound })
}

/// The window of possible minimal self-adjoint generator counts for an
/// algebra whose invariant is `g`, together with the doubled value `2g`
/// taken by the invariant over self-adjoint families.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorWindow {
    /// Least integer `n` with `n − 1 ≤ 2g + 1 ≤ n` solvable: `⌈2g + 1⌉`.
    pub low: ExtRational,
    /// Greatest such integer: `⌊2g + 2⌋`.
    pub high: ExtRational,
    /// The self-adjoint-family invariant `2g`.
    pub sa_invariant: ExtRational,
}

/// From an invariant value `g ≥ 0`, the integer window
/// `[⌈2g + 1⌉, ⌊2g + 2⌋]` for the minimal number of self-adjoint
/// generators: any count `n` must satisfy `n − 1 ≤ 2g + 1 ≤ n`. An
/// infinite `g` yields an infinite window (not finitely generated).
pub fn generator_count_bounds(g: &ExtRational) -> Result<GeneratorWindow> {
    if !g.is_nonnegative() {
        return Err(Error::DomainError(format!("invariant {g} is negative")));
    }
    let sa_invariant = g.scale(&rat_int(2));
    match g {
        ExtRational::Infinite => Ok(GeneratorWindow {
            low: ExtRational::Infinite,
            high: ExtRational::Infinite,
            sa_invariant,
        }),
        ExtRational::Finite(g) => {
            let two_g = rat_int(2) * g;
            let low = (&two_g + rat_int(1)).ceil();
            let high = (&two_g + rat_int(2)).floor();
            Ok(GeneratorWindow {
                low: ExtRational::finite(low),
                high: ExtRational::finite(high),
                sa_invariant,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracialAlgebra;
    use crate::check::all_passed;
    use crate::scalar::rat_int;
    use std::sync::Arc;

    fn m(n: usize) -> Arc<TracialAlgebra> {
        TracialAlgebra::matrix_factor(n)
    }

    fn unit(alg: &Arc<TracialAlgebra>, r: usize, c: usize) -> Operator {
        Operator::matrix_unit(alg, 0, r, c)
    }

    #[test]
    fn hermitianization_of_one_matrix_unit_hits_the_sandwich_boundary() {
        let alg = m(2);
        let p = Partition::finest_coordinate(&alg);
        let x = unit(&alg, 0, 1);
        let vals = hermitianization_sandwich(&[x], &p, &Mode::Exact).unwrap();
        assert_eq!(vals.base, rat(1, 4));
        assert_eq!(vals.doubled, rat(1, 1));
        assert_eq!(vals.first_half, rat(1, 2));
        assert_eq!(vals.second_half, rat(1, 2));
    }

    #[test]
    fn hermitianization_collapses_for_self_adjoint_input() {
        let alg = m(3);
        let x = unit(&alg, 0, 1).add(&unit(&alg, 1, 0));
        let pair = hermitianize(&[x.clone()]);
        let expected = x.scale(&Scalar::new(rat_int(1), rat_int(1)));
        assert!(pair[0].approx_eq(&expected, &Mode::Exact));
        assert!(pair[1].approx_eq(&expected, &Mode::Exact));
    }

    #[test]
    fn hermitianization_of_zero_is_zero() {
        let alg = m(2);
        let p = Partition::finest_coordinate(&alg);
        let vals =
            hermitianization_sandwich(&[Operator::zero(&alg)], &p, &Mode::Exact).unwrap();
        assert_eq!(vals.base, rat(0, 1));
        assert_eq!(vals.doubled, rat(0, 1));
    }

    #[test]
    fn split_of_a_symmetric_matrix_unit_pair() {
        let alg = m(2);
        let q = Partition::finest_coordinate(&alg);
        let x = unit(&alg, 0, 1).add(&unit(&alg, 1, 0));
        let split = split_sa(&[x], &q, &Mode::Exact).unwrap();
        assert!(split.y[0].approx_eq(&unit(&alg, 0, 1), &Mode::Exact));
        assert!(split.z[0].is_zero(&Mode::Exact));
        assert_eq!(split.x_value, rat(1, 2));
        assert_eq!(split.y_value, rat(1, 4));
        assert_eq!(split.z_value, rat(0, 1));
        assert!(all_passed(&split.verify(&Mode::Exact)));
    }

    #[test]
    fn split_of_a_diagonal_element_is_purely_diagonal() {
        let alg = m(3);
        let q = Partition::finest_coordinate(&alg);
        let mut x = Operator::zero(&alg);
        for (i, v) in [(0usize, 1i64), (1, 5), (2, -2)] {
            x.set_entry(0, i, i, Scalar::from_re(rat_int(v)));
        }
        let split = split_sa(&[x], &q, &Mode::Exact).unwrap();
        assert!(split.y[0].is_zero(&Mode::Exact));
        assert_eq!(split.z_value, split.x_value);
        assert!(all_passed(&split.verify(&Mode::Exact)));
    }

    #[test]
    fn split_of_the_full_flip_in_m4() {
        let alg = m(4);
        let q = Partition::finest_coordinate(&alg);
        let mut x = Operator::zero(&alg);
        for i in 0..4 {
            x.set_entry(0, i, 3 - i, Scalar::from_re(rat_int(1)));
        }
        let split = split_sa(&[x], &q, &Mode::Exact).unwrap();
        assert_eq!(rat_int(2) * &split.y_value + &split.z_value, split.x_value);
        assert_eq!(split.x_value, rat(4, 16));
        assert!(all_passed(&split.verify(&Mode::Exact)));
    }

    #[test]
    fn split_rejects_non_self_adjoint_elements() {
        let alg = m(2);
        let q = Partition::finest_coordinate(&alg);
        assert!(matches!(
            split_sa(&[unit(&alg, 0, 1)], &q, &Mode::Exact),
            Err(Error::NotSelfAdjoint(_))
        ));
    }

    #[test]
    fn shrink_through_a_distinct_diagonal_element() {
        let alg = m(4);
        let mut x2 = Operator::zero(&alg);
        for (i, v) in [(0usize, 1i64), (1, 2), (2, 3), (3, 4)] {
            x2.set_entry(0, i, i, Scalar::from_re(rat_int(v)));
        }
        let x1 = unit(&alg, 0, 1).add(&unit(&alg, 1, 0));
        let out = masa_shrink(&[x1, x2], 4, &Mode::Exact).unwrap();
        assert_eq!(out.designated_value, rat(1, 4));
        assert_eq!(out.bound, rat(5, 4));
        assert!(out.value <= out.bound);
        assert_eq!(out.eigenvalues, vec![rat_int(1), rat_int(2), rat_int(3), rat_int(4)]);
    }

    #[test]
    fn shrink_of_a_single_element_gives_one_over_k() {
        let alg = m(4);
        let mut x = Operator::zero(&alg);
        for (i, v) in [(0usize, 2i64), (1, 3), (2, 5), (3, 7)] {
            x.set_entry(0, i, i, Scalar::from_re(rat_int(v)));
        }
        let out = masa_shrink(&[x], 4, &Mode::Exact).unwrap();
        assert_eq!(out.value, rat(1, 4));
    }

    #[test]
    fn shrink_groups_across_eigenspaces_when_needed() {
        let alg = m(4);
        // eigenvalues 1 (twice), 2, 3: a 2-part grouping must mix lines
        // from different eigenspaces
        let mut x = Operator::zero(&alg);
        for (i, v) in [(0usize, 1i64), (1, 1), (2, 2), (3, 3)] {
            x.set_entry(0, i, i, Scalar::from_re(rat_int(v)));
        }
        let out = masa_shrink(&[x], 2, &Mode::Exact).unwrap();
        assert_eq!(out.eigenvalues.len(), 3);
        assert_eq!(out.partition.len(), 2);
        for p in out.partition.parts() {
            assert_eq!(p.trace_re(), rat(1, 2));
        }
    }

    #[test]
    fn shrink_rotated_designated_element() {
        let alg = m(2);
        // eigenvalues 0 and 25 with eigenvectors along the (3,4) line
        let mut x = Operator::zero(&alg);
        x.set_entry(0, 0, 0, Scalar::from_re(rat_int(9)));
        x.set_entry(0, 0, 1, Scalar::from_re(rat_int(12)));
        x.set_entry(0, 1, 0, Scalar::from_re(rat_int(12)));
        x.set_entry(0, 1, 1, Scalar::from_re(rat_int(16)));
        let out = masa_shrink(&[x.clone()], 2, &Mode::Exact).unwrap();
        assert_eq!(out.eigenvalues, vec![rat_int(0), rat_int(25)]);
        // the zero eigenvalue kills one diagonal cell
        assert_eq!(out.designated_value, rat(1, 4));
        for p in out.partition.parts() {
            assert!(p.mul(&x).approx_eq(&x.mul(p), &Mode::Exact));
        }
    }

    #[test]
    fn shrink_detects_irrational_spectra_and_bad_packings() {
        let alg = m(2);
        let mut golden = Operator::zero(&alg);
        golden.set_entry(0, 0, 1, Scalar::from_re(rat_int(1)));
        golden.set_entry(0, 1, 0, Scalar::from_re(rat_int(1)));
        golden.set_entry(0, 1, 1, Scalar::from_re(rat_int(1)));
        assert!(matches!(
            masa_shrink(&[golden], 2, &Mode::Exact),
            Err(Error::NotDiagonalisable(_))
        ));

        let alg3 = m(3);
        let mut x = Operator::zero(&alg3);
        for (i, v) in [(0usize, 1i64), (1, 2), (2, 2)] {
            x.set_entry(0, i, i, Scalar::from_re(rat_int(v)));
        }
        assert!(matches!(
            masa_shrink(&[x], 2, &Mode::Exact),
            Err(Error::GeometryError(_))
        ));
    }

    #[test]
    fn generator_windows_match_the_sandwich() {
        let w = generator_count_bounds(&ExtRational::from_int(0)).unwrap();
        assert_eq!(w.low, ExtRational::from_int(1));
        assert_eq!(w.high, ExtRational::from_int(2));
        assert_eq!(w.sa_invariant, ExtRational::from_int(0));

        let w = generator_count_bounds(&ExtRational::finite(rat(1, 2))).unwrap();
        assert_eq!(w.low, ExtRational::from_int(2));
        assert_eq!(w.high, ExtRational::from_int(3));
        assert_eq!(w.sa_invariant, ExtRational::from_int(1));

        let w = generator_count_bounds(&ExtRational::finite(rat(1, 3))).unwrap();
        assert_eq!(w.low, ExtRational::from_int(2));
        assert_eq!(w.high, ExtRational::from_int(2));

        let w = generator_count_bounds(&ExtRational::Infinite).unwrap();
        assert_eq!(w.low, ExtRational::Infinite);
        assert_eq!(w.high, ExtRational::Infinite);

        assert!(generator_count_bounds(&ExtRational::finite(rat(-1, 2))).is_err());
    }
}
