//! Exact matrix units and partial isometries between projections.
//!
//! Given projections `p_0, …, p_{k−1}` that are pairwise unitarily
//! equivalent *over ℚ(i)*, this module constructs operators `e_{ij}` with
//!
//! ```text
//! e_{ij} e_{lm} = δ_{jl} e_{im},   e_{ij}* = e_{ji},   e_{ii} = p_i,
//! ```
//!
//! entirely in exact arithmetic. The construction picks, inside the range of
//! every projection and block by block, orthogonal bases whose squared norms
//! agree *slot for slot* across the projections; then
//! `e_{ij} = Σ_a w_i^a (w_j^a)* / ‖w^a‖²`.
//!
//! Exact equivalence is genuinely obstructed sometimes: the reachable norms
//! inside a one-dimensional subspace differ from a target by a sum of two
//! rational squares, so the Gram-determinant class of each range modulo
//! sums of two squares (see [`crate::squares`]) must match across the
//! projections, block by block. When it does not, the construction reports
//! [`Error::GeometryError`] instead of inventing approximate isometries.

use num_rational::BigRational;
use num_traits::One;
use std::sync::Arc;

use crate::algebra::{ensure_same_algebra, Mode, Operator, TracialAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, inner, norm_sq};
use crate::partition::Partition;
use crate::scalar::Scalar;
use crate::squares::{scalar_pair_with_abs_sq, scalar_with_abs_sq, two_square_class};

/// Search radius for the mixed-class norm-matching fallback. Slot targets in
/// practice are reached through the closed-form routes; this only bounds the
/// rare two-vector search with distinct square classes.
const SEARCH_LIMIT: i64 = 32;

/// One matched basis vector: a block index, the vector inside that block,
/// and its squared norm (equal across all projections for a given slot).
#[derive(Clone, Debug)]
struct Slot {
    block: usize,
    vector: Vec<Scalar>,
    norm: BigRational,
}

/// Finds coefficients `c` against an orthogonal basis with squared norms
/// `norms` such that `Σ |c_a|² · norms[a] = target`.
fn coefficients_with_norm(norms: &[BigRational], target: &BigRational) -> Result<Vec<Scalar>> {
    // one-vector route: target/n_a is a sum of two squares
    for (a, n) in norms.iter().enumerate() {
        if let Some(c) = scalar_with_abs_sq(&(target / n))? {
            let mut out = vec![Scalar::zero(); norms.len()];
            out[a] = c;
            return Ok(out);
        }
    }
    // two-vector route, equal classes: n_a(σ₁ + σ₂) with σ's four-square data
    for a in 0..norms.len() {
        for b in (a + 1)..norms.len() {
            if two_square_class(&norms[a])? != two_square_class(&norms[b])? {
                continue;
            }
            let (c1, c2) = scalar_pair_with_abs_sq(&(target / &norms[a]))?;
            let transfer = scalar_with_abs_sq(&(&norms[a] / &norms[b]))?
                .expect("equal classes make the ratio a sum of two squares");
            let mut out = vec![Scalar::zero(); norms.len()];
            out[a] = c1;
            out[b] = &c2 * &transfer;
            return Ok(out);
        }
    }
    // two-vector route, mixed classes: bounded search over one coefficient
    for a in 0..norms.len() {
        for b in 0..norms.len() {
            if a == b {
                continue;
            }
            for den in 1..=SEARCH_LIMIT {
                for re in 0..=SEARCH_LIMIT {
                    for im in 0..=SEARCH_LIMIT {
                        if re == 0 && im == 0 {
                            continue;
                        }
                        let cb = Scalar::from_parts(re, den, im, den);
                        let used = cb.abs_sq() * &norms[b];
                        if &used >= target {
                            continue;
                        }
                        let rest = (target - used) / &norms[a];
                        if let Some(ca) = scalar_with_abs_sq(&rest)? {
                            let mut out = vec![Scalar::zero(); norms.len()];
                            out[a] = ca;
                            out[b] = cb;
                            return Ok(out);
                        }
                    }
                }
            }
        }
    }
    Err(Error::GeometryError(format!(
        "no exact vector of squared norm {target} found in a subspace with norms {:?}",
        norms.iter().map(|n| n.to_string()).collect::<Vec<_>>()
    )))
}

/// Orthogonal basis (with norms) of the range of `p` inside block `b`.
pub(crate) fn range_basis(p: &Operator, b: usize) -> Vec<(Vec<Scalar>, BigRational)> {
    let dim = p.algebra().blocks()[b].dim;
    let mut cols: Vec<Vec<Scalar>> = Vec::new();
    for j in 0..dim {
        let col: Vec<Scalar> = (0..dim).map(|i| p.entry(b, i, j).clone()).collect();
        if col.iter().any(|e| !e.is_zero()) {
            cols.push(col);
        }
    }
    gram_schmidt(&cols)
        .into_iter()
        .map(|v| {
            let n = norm_sq(&v);
            (v, n)
        })
        .collect()
}

/// Rewrites an orthogonal basis so that one prescribed-norm vector comes
/// first; returns that vector and an orthogonal basis of its complement.
fn split_off_slot(
    basis: &[(Vec<Scalar>, BigRational)],
    target: &BigRational,
) -> Result<(Vec<Scalar>, Vec<(Vec<Scalar>, BigRational)>)> {
    let norms: Vec<BigRational> = basis.iter().map(|(_, n)| n.clone()).collect();
    let coeffs = coefficients_with_norm(&norms, target)?;
    let dim = basis[0].0.len();
    let mut w = vec![Scalar::zero(); dim];
    for (c, (v, _)) in coeffs.iter().zip(basis) {
        if c.is_zero() {
            continue;
        }
        for (we, ve) in w.iter_mut().zip(v) {
            let t = c * ve;
            *we += &t;
        }
    }
    debug_assert_eq!(norm_sq(&w), *target);
    // project the old basis off w and re-orthogonalize the remainder
    let inv_t = Scalar::from_re(BigRational::one() / target);
    let mut residuals = Vec::new();
    for (v, _) in basis {
        let mut r = v.clone();
        let c = &inner(&w, v) * &inv_t;
        for (re, we) in r.iter_mut().zip(&w) {
            let t = &c * we;
            *re -= &t;
        }
        if r.iter().any(|e| !e.is_zero()) {
            residuals.push(r);
        }
    }
    let rest = gram_schmidt(&residuals)
        .into_iter()
        .map(|v| {
            let n = norm_sq(&v);
            (v, n)
        })
        .collect();
    Ok((w, rest))
}

/// Builds, for every projection, a basis of its range whose slot norms agree
/// across the projections (block by block). Errors when the ranges are not
/// exactly equivalent over ℚ(i).
fn matched_bases(parts: &[Operator]) -> Result<Vec<Vec<Slot>>> {
    let algebra = parts[0].algebra();
    let block_count = algebra.block_count();
    // per part, per block: orthogonal range basis with norms
    let raw: Vec<Vec<Vec<(Vec<Scalar>, BigRational)>>> = parts
        .iter()
        .map(|p| (0..block_count).map(|b| range_basis(p, b)).collect())
        .collect();
    // blockwise rank and Gram-class compatibility
    for b in 0..block_count {
        let rank0 = raw[0][b].len();
        for (i, r) in raw.iter().enumerate() {
            if r[b].len() != rank0 {
                return Err(Error::GeometryError(format!(
                    "projections 0 and {i} have ranks {rank0} and {} in block {b}",
                    r[b].len()
                )));
            }
        }
        if rank0 == 0 {
            continue;
        }
        let class0 = {
            let det: BigRational = raw[0][b].iter().map(|(_, n)| n.clone()).product();
            two_square_class(&det)?
        };
        for (i, r) in raw.iter().enumerate().skip(1) {
            let det: BigRational = r[b].iter().map(|(_, n)| n.clone()).product();
            if two_square_class(&det)? != class0 {
                return Err(Error::GeometryError(format!(
                    "ranges of projections 0 and {i} in block {b} are not equivalent \
                     over the Gaussian rationals (square-class obstruction)"
                )));
            }
        }
    }
    // slot filling: norm 1 everywhere except the final slot of each block,
    // whose shared target is whatever projection 0 is left with
    let mut out: Vec<Vec<Slot>> = vec![Vec::new(); parts.len()];
    for b in 0..block_count {
        let rank = raw[0][b].len();
        if rank == 0 {
            continue;
        }
        let mut last_target: Option<BigRational> = None;
        for (i, slots) in out.iter_mut().enumerate() {
            let mut basis = raw[i][b].clone();
            for slot in 0..rank {
                let target = if slot + 1 < rank {
                    BigRational::one()
                } else if let Some(t) = &last_target {
                    t.clone()
                } else {
                    // projection 0 keeps its residual norm as the shared target
                    let t = basis[0].1.clone();
                    last_target = Some(t.clone());
                    t
                };
                let (w, rest) = split_off_slot(&basis, &target)?;
                slots.push(Slot { block: b, vector: w, norm: target });
                basis = rest;
            }
        }
    }
    Ok(out)
}

/// Accumulates `u v* / n` (an outer product within one block) onto `acc`.
pub(crate) fn add_outer(
    acc: &mut Operator,
    block: usize,
    u: &[Scalar],
    v: &[Scalar],
    n: &BigRational,
) {
    let inv = Scalar::from_re(BigRational::one() / n);
    for (r, ue) in u.iter().enumerate() {
        if ue.is_zero() {
            continue;
        }
        let left = ue * &inv;
        for (c, ve) in v.iter().enumerate() {
            if ve.is_zero() {
                continue;
            }
            let term = &left * &ve.conj();
            let cur = acc.entry(block, r, c).clone();
            acc.set_entry(block, r, c, &cur + &term);
        }
    }
}

fn unit_from_bases(
    algebra: &Arc<TracialAlgebra>,
    wi: &[Slot],
    wj: &[Slot],
) -> Operator {
    let mut e = Operator::zero(algebra);
    for (si, sj) in wi.iter().zip(wj) {
        debug_assert_eq!(si.block, sj.block);
        debug_assert_eq!(si.norm, sj.norm);
        add_outer(&mut e, si.block, &si.vector, &sj.vector, &si.norm);
    }
    e
}

/// A full system of exact matrix units subordinate to a partition:
/// `units[i][j] = e_{ij}` with `e_{ii} = p_i`.
///
/// Requires all parts to have exactly equivalent ranges (equal blockwise
/// ranks and matching square classes); in particular the partition must have
/// equal traces.
pub fn matrix_units(partition: &Partition) -> Result<Vec<Vec<Operator>>> {
    partition.ensure_equal_trace()?;
    let algebra = partition.algebra();
    let bases = matched_bases(partition.parts())?;
    let k = partition.len();
    let mut units = Vec::with_capacity(k);
    for wi in bases.iter() {
        let mut row = Vec::with_capacity(k);
        for wj in bases.iter() {
            row.push(unit_from_bases(algebra, wi, wj));
        }
        units.push(row);
    }
    // the diagonal must reproduce the parts themselves
    for (i, row) in units.iter().enumerate() {
        if !row[i].approx_eq(partition.part(i), &Mode::Exact) {
            return Err(Error::Internal(format!(
                "diagonal unit {i} does not reproduce its projection"
            )));
        }
    }
    Ok(units)
}

/// A partial isometry `v` with `v v* = target` and `v* v = source`.
///
/// Exists (exactly) iff the two projections have equal blockwise ranks and
/// matching square classes; otherwise a [`Error::GeometryError`] explains
/// the obstruction.
pub fn partial_isometry(target: &Operator, source: &Operator) -> Result<Operator> {
    ensure_same_algebra(target, source)?;
    let mode = Mode::Exact;
    for (name, p) in [("target", target), ("source", source)] {
        if !p.is_projection(&mode) {
            return Err(Error::NotAProjection(format!("{name} is not a projection")));
        }
    }
    let bases = matched_bases(&[target.clone(), source.clone()])?;
    Ok(unit_from_bases(target.algebra(), &bases[0], &bases[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Block;
    use crate::scalar::{rat, rat_int};

    fn check_unit_relations(units: &[Vec<Operator>], parts: &[Operator]) {
        let k = parts.len();
        let mode = Mode::Exact;
        for i in 0..k {
            assert!(units[i][i].approx_eq(&parts[i], &mode));
            for j in 0..k {
                assert!(units[i][j].adjoint().approx_eq(&units[j][i], &mode));
                for l in 0..k {
                    for m in 0..k {
                        let prod = units[i][j].mul(&units[l][m]);
                        if j == l {
                            assert!(prod.approx_eq(&units[i][m], &mode));
                        } else {
                            assert!(prod.is_zero(&mode));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coordinate_partition_yields_standard_units() {
        let alg = TracialAlgebra::matrix_factor(4);
        let p = Partition::equal_coordinate(&alg, 2).unwrap();
        let units = matrix_units(&p).unwrap();
        check_unit_relations(&units, p.parts());
    }

    #[test]
    fn rotated_partition_yields_exact_units() {
        // conjugate the 2-part coordinate partition of M₂ by a rational
        // rotation built from the 3-4-5 triangle
        let alg = TracialAlgebra::matrix_factor(2);
        let c = Scalar::from_re(rat(3, 5));
        let s = Scalar::from_re(rat(4, 5));
        let mut u = Operator::zero(&alg);
        u.set_entry(0, 0, 0, c.clone());
        u.set_entry(0, 0, 1, -&s);
        u.set_entry(0, 1, 0, s);
        u.set_entry(0, 1, 1, c);
        let base = Partition::equal_coordinate(&alg, 2).unwrap();
        let parts: Vec<Operator> = base
            .parts()
            .iter()
            .map(|p| u.mul(p).mul(&u.adjoint()))
            .collect();
        let rotated = Partition::new(parts, &Mode::Exact).unwrap();
        let units = matrix_units(&rotated).unwrap();
        check_unit_relations(&units, rotated.parts());
    }

    #[test]
    fn mismatched_norm_ranges_still_admit_units_when_classes_agree() {
        // ranges spanned by (1,1,0,0)/(0,0,1,0): norms 2 and 1, both class 1
        let alg = TracialAlgebra::matrix_factor(4);
        let mut p = Operator::zero(&alg);
        for i in 0..2 {
            for j in 0..2 {
                p.set_entry(0, i, j, Scalar::from_re(rat(1, 2)));
            }
        }
        let q = Operator::coordinate_projection(&alg, &[(0, 2)]).unwrap();
        assert!(p.is_projection(&Mode::Exact));
        let v = partial_isometry(&p, &q).unwrap();
        assert!(v.mul(&v.adjoint()).approx_eq(&p, &Mode::Exact));
        assert!(v.adjoint().mul(&v).approx_eq(&q, &Mode::Exact));
    }

    #[test]
    fn square_class_obstruction_is_reported() {
        // range spanned by (1,1,1): Gram class 3; coordinate line: class 1.
        // No exact partial isometry exists over ℚ(i).
        let alg = TracialAlgebra::matrix_factor(3);
        let third = Scalar::from_re(rat(1, 3));
        let mut p = Operator::zero(&alg);
        for i in 0..3 {
            for j in 0..3 {
                p.set_entry(0, i, j, third.clone());
            }
        }
        assert!(p.is_projection(&Mode::Exact));
        let q = Operator::coordinate_projection(&alg, &[(0, 0)]).unwrap();
        match partial_isometry(&p, &q) {
            Err(Error::GeometryError(_)) => {}
            other => panic!("expected a geometry obstruction, got {other:?}"),
        }
    }

    #[test]
    fn units_work_across_direct_sums() {
        let alg = TracialAlgebra::new(vec![
            Block { dim: 2, weight: rat(1, 2) },
            Block { dim: 2, weight: rat(1, 2) },
        ])
        .unwrap();
        let p = Operator::coordinate_projection(&alg, &[(0, 0), (1, 0)]).unwrap();
        let q = Operator::coordinate_projection(&alg, &[(0, 1), (1, 1)]).unwrap();
        let parts = Partition::new(vec![p, q], &Mode::Exact).unwrap();
        let units = matrix_units(&parts).unwrap();
        check_unit_relations(&units, parts.parts());
    }

    #[test]
    fn unequal_blockwise_ranks_are_rejected() {
        let alg = TracialAlgebra::new(vec![
            Block { dim: 2, weight: rat(1, 2) },
            Block { dim: 2, weight: rat(1, 2) },
        ])
        .unwrap();
        // equal traces but ranks (2,0) vs (0,2): no *-algebra isometry
        let p = Operator::coordinate_projection(&alg, &[(0, 0), (0, 1)]).unwrap();
        let q = Operator::coordinate_projection(&alg, &[(1, 0), (1, 1)]).unwrap();
        assert_eq!(p.trace_re(), rat(1, 2));
        assert_eq!(p.trace_re(), q.trace_re());
        assert!(matches!(partial_isometry(&p, &q), Err(Error::GeometryError(_))));
    }

    #[test]
    fn norm_coefficient_search_handles_mixed_classes() {
        // norms 3 and 3/2 (classes 3 and 6), target 1: needs both vectors
        let norms = vec![rat(3, 1), rat(3, 2)];
        let c = coefficients_with_norm(&norms, &rat_int(1)).unwrap();
        let total: BigRational = c
            .iter()
            .zip(&norms)
            .map(|(ci, ni)| ci.abs_sq() * ni)
            .sum();
        assert_eq!(total, rat_int(1));
    }
}
