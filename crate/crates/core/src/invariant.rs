//! The partition-counting invariant.
//!
//! For a finite family `X = (x_1, …, x_n)` in a tracial algebra and a
//! partition of unity `P = {p_1, …, p_k}`, the invariant is
//!
//! ```text
//! 𝓘(x; P) = Σ_{p, q ∈ P, p x q ≠ 0} τ(p) · τ(q),
//! 𝓘(X; P) = Σ_l 𝓘(x_l; P).
//! ```
//!
//! Families are ordered lists: repeated elements contribute repeatedly. When
//! all parts have equal trace `1/k`, the value collapses to `|T| / k²` with
//! `T = {(i, j, l) : p_i x_l p_j ≠ 0}`; both routes are computed and
//! compared whenever possible.
//!
//! The workhorse is [`PartitionGeometry::cell_norms`], which returns the
//! exact squared tracial 2-norms `‖p_i x p_j‖₂²` of all compressions at
//! once. Two routes exist:
//!
//! * **coordinate route** — when every part is a 0/1 diagonal projection,
//!   one scan over the entries of `x` suffices;
//! * **factored route** — in general, each part contributes an orthogonal
//!   basis `B_i` of its range, and `‖p_i x p_j‖²` is assembled from the
//!   inner products `⟨b_a, x b_c⟩`, never forming `p_i x p_j` itself.
//!
//! Zero tests on the cells then answer every support question in either
//! evaluation mode, because `‖y‖₂ = 0 ⟺ y = 0` and cell norms add across
//! orthogonal compressions.

use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::{ensure_same_algebra, Mode, Operator};
use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::partition::Partition;
use crate::scalar::Scalar;
use crate::units::range_basis;

/// Boolean support pattern of one element against a partition: entry
/// `(i, j)` is true iff `p_i x p_j` is nonzero (mode-aware).
pub type Pattern = Vec<Vec<bool>>;

enum Route {
    /// Every part is a 0/1 diagonal projection; `owner[b][r]` is the part
    /// owning coordinate `(b, r)`, if any (partial families may leave
    /// coordinates unowned).
    Coordinate { owner: Vec<Vec<Option<usize>>> },
    /// Per part, per block: orthogonal range basis with squared norms.
    Factored { bases: Vec<Vec<Vec<(Vec<Scalar>, BigRational)>>> },
}

/// Partition data preprocessed for repeated cell-norm computations.
pub struct PartitionGeometry {
    k: usize,
    route: Route,
}

/// Detects whether every listed projection is 0/1 diagonal and computes the
/// coordinate-to-projection ownership map; coordinates covered by none stay
/// unowned (partial families leave gaps, full partitions cover everything).
fn coordinate_owners(parts: &[Operator]) -> Option<Vec<Vec<Option<usize>>>> {
    let algebra = parts[0].algebra();
    let mut owner: Vec<Vec<Option<usize>>> = algebra
        .blocks()
        .iter()
        .map(|blk| vec![None; blk.dim])
        .collect();
    for (idx, p) in parts.iter().enumerate() {
        for (b, blk) in p.blocks_data().iter().enumerate() {
            for (r, row) in blk.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    if r != c || *e != Scalar::one() {
                        return None;
                    }
                    owner[b][r] = Some(idx);
                }
            }
        }
    }
    Some(owner)
}

impl PartitionGeometry {
    /// Preprocesses a partition (coordinate detection, else range bases).
    pub fn new(partition: &Partition) -> PartitionGeometry {
        Self::from_parts(partition.parts())
    }

    /// Same preprocessing for a raw family of orthogonal projections that
    /// need not resolve the identity (e.g. the parts of a corner).
    pub fn from_parts(parts: &[Operator]) -> PartitionGeometry {
        let k = parts.len();
        if let Some(owner) = coordinate_owners(parts) {
            return PartitionGeometry { k, route: Route::Coordinate { owner } };
        }
        let block_count = parts[0].algebra().block_count();
        let bases = parts
            .iter()
            .map(|p| (0..block_count).map(|b| range_basis(p, b)).collect())
            .collect();
        PartitionGeometry { k, route: Route::Factored { bases } }
    }

    /// Number of parts.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Exact squared tracial 2-norms `‖p_i x p_j‖₂²` for all cells `(i, j)`.
    pub fn cell_norms(&self, x: &Operator) -> Vec<Vec<BigRational>> {
        let algebra = x.algebra();
        let mut cells = vec![vec![BigRational::zero(); self.k]; self.k];
        match &self.route {
            Route::Coordinate { owner } => {
                for (b, blk) in x.blocks_data().iter().enumerate() {
                    let w = algebra.entry_weight(b);
                    for (r, row) in blk.iter().enumerate() {
                        for (c, e) in row.iter().enumerate() {
                            if e.is_zero() {
                                continue;
                            }
                            // entries outside the family's coordinates do not
                            // land in any cell
                            let (Some(oi), Some(oj)) = (owner[b][r], owner[b][c]) else {
                                continue;
                            };
                            cells[oi][oj] += &w * e.abs_sq();
                        }
                    }
                }
            }
            Route::Factored { bases } => {
                for b in 0..algebra.block_count() {
                    let w = algebra.entry_weight(b);
                    let dim = algebra.blocks()[b].dim;
                    let xb = &x.blocks_data()[b];
                    // images x · b_c for every basis vector of every part
                    let images: Vec<Vec<(Vec<Scalar>, &BigRational)>> = bases
                        .iter()
                        .map(|part| {
                            part[b]
                                .iter()
                                .map(|(v, n)| {
                                    let mut img = vec![Scalar::zero(); dim];
                                    for (r, row) in xb.iter().enumerate() {
                                        let mut acc = Scalar::zero();
                                        for (c, e) in row.iter().enumerate() {
                                            if e.is_zero() || v[c].is_zero() {
                                                continue;
                                            }
                                            let t = e * &v[c];
                                            acc += &t;
                                        }
                                        img[r] = acc;
                                    }
                                    (img, n)
                                })
                                .collect()
                        })
                        .collect();
                    for (i, part_i) in bases.iter().enumerate() {
                        for (a, (va, na)) in part_i[b].iter().enumerate() {
                            let _ = a;
                            for (j, imgs_j) in images.iter().enumerate() {
                                for (img, nc) in imgs_j {
                                    let v = inner(va, img);
                                    if v.is_zero() {
                                        continue;
                                    }
                                    cells[i][j] += &w * v.abs_sq() / (na * *nc);
                                }
                            }
                        }
                    }
                }
            }
        }
        cells
    }

    /// Mode-aware support pattern from exact cell norms.
    pub fn pattern(&self, x: &Operator, mode: &Mode) -> Pattern {
        let norms = self.cell_norms(x);
        let thresh = match mode {
            Mode::Exact => BigRational::zero(),
            Mode::Float { eps } => eps * eps,
        };
        norms
            .into_iter()
            .map(|row| row.into_iter().map(|n| n > thresh).collect())
            .collect()
    }
}

/// The invariant of a family against a partition, with its support data.
#[derive(Clone, Debug)]
pub struct FamilyInvariant {
    /// `𝓘(X; P)` as an exact rational.
    pub value: BigRational,
    /// `𝓘(x_l; P)` per element, in family order.
    pub per_element: Vec<BigRational>,
    /// Support pattern per element.
    pub patterns: Vec<Pattern>,
    /// `|T|`: total number of supported cells over all elements.
    pub triple_count: usize,
}

fn checked_assemble(
    patterns: Vec<Pattern>,
    partition: &Partition,
) -> Result<FamilyInvariant> {
    let traces = partition.traces();
    let mut per_element = Vec::with_capacity(patterns.len());
    let mut triple_count = 0usize;
    let mut value = BigRational::zero();
    for pat in &patterns {
        let mut v = BigRational::zero();
        for (i, row) in pat.iter().enumerate() {
            for (j, &hit) in row.iter().enumerate() {
                if hit {
                    v += &traces[i] * &traces[j];
                    triple_count += 1;
                }
            }
        }
        value += &v;
        per_element.push(v);
    }
    if partition.is_equal_trace() {
        // cross-check the definitional sum against the counting formula
        let k = BigRational::from_integer(partition.len().into());
        let counted = BigRational::from_integer(triple_count.into()) / (&k * &k);
        if counted != value {
            return Err(Error::Internal(format!(
                "counting formula {counted} disagrees with definitional sum {value}"
            )));
        }
    }
    Ok(FamilyInvariant { value, per_element, patterns, triple_count })
}

/// `𝓘(X; P)` for an ordered family, with per-element breakdown and support
/// patterns. Verifies the equal-trace counting formula when it applies.
pub fn invariant_family(
    xs: &[Operator],
    partition: &Partition,
    mode: &Mode,
) -> Result<FamilyInvariant> {
    for x in xs {
        ensure_same_algebra(x, partition.part(0))?;
    }
    let geom = PartitionGeometry::new(partition);
    let patterns: Vec<Pattern> = xs.iter().map(|x| geom.pattern(x, mode)).collect();
    checked_assemble(patterns, partition)
}

/// `𝓘(x; P)` for a single element.
pub fn invariant_single(x: &Operator, partition: &Partition, mode: &Mode) -> Result<BigRational> {
    Ok(invariant_family(std::slice::from_ref(x), partition, mode)?.value)
}

/// Mode-aware support pattern of one element.
pub fn support_pattern(x: &Operator, partition: &Partition, mode: &Mode) -> Result<Pattern> {
    ensure_same_algebra(x, partition.part(0))?;
    Ok(PartitionGeometry::new(partition).pattern(x, mode))
}

/// True when `x` commutes with every part of the partition.
pub fn commutes_with_partition(x: &Operator, partition: &Partition, mode: &Mode) -> bool {
    partition
        .parts()
        .iter()
        .all(|p| x.mul(p).approx_eq(&p.mul(x), mode))
}

/// Verifies that `fine` refines `coarse` and returns the two invariant
/// values `(𝓘(X; coarse), 𝓘(X; fine))`; refining can only shrink the value.
pub fn refinement_values(
    xs: &[Operator],
    coarse: &Partition,
    fine: &Partition,
    mode: &Mode,
) -> Result<(BigRational, BigRational)> {
    if !fine.refines(coarse, mode)? {
        return Err(Error::NotARefinement(
            "second partition does not refine the first".into(),
        ));
    }
    let vc = invariant_family(xs, coarse, mode)?.value;
    let vf = invariant_family(xs, fine, mode)?.value;
    Ok((vc, vf))
}

/// Invariant of a family against a raw family of pairwise-orthogonal
/// projections that need not resolve the identity (the parts of a corner,
/// say). Each part's trace is multiplied by `trace_scale` before the trace
/// products are summed, so a corner can be measured in its own normalized
/// trace. Returns the value together with the supported-cell count.
pub fn invariant_against_parts(
    xs: &[Operator],
    parts: &[Operator],
    trace_scale: &BigRational,
    mode: &Mode,
) -> Result<(BigRational, usize)> {
    if parts.is_empty() {
        return Err(Error::EmptyPartition);
    }
    for p in parts {
        ensure_same_algebra(p, &parts[0])?;
        if !p.is_projection(mode) {
            return Err(Error::NotAProjection(
                "family member is not a projection".into(),
            ));
        }
    }
    for (i, p) in parts.iter().enumerate() {
        for q in parts.iter().skip(i + 1) {
            if p.mul(q).is_nonzero(mode) {
                return Err(Error::NotOrthogonal(
                    "projections in the family are not pairwise orthogonal".into(),
                ));
            }
        }
    }
    for x in xs {
        ensure_same_algebra(x, &parts[0])?;
    }
    let traces: Vec<BigRational> = parts.iter().map(|p| trace_scale * p.trace_re()).collect();
    let geom = PartitionGeometry::from_parts(parts);
    let mut value = BigRational::zero();
    let mut count = 0usize;
    for x in xs {
        for (i, row) in geom.pattern(x, mode).iter().enumerate() {
            for (j, &hit) in row.iter().enumerate() {
                if hit {
                    value += &traces[i] * &traces[j];
                    count += 1;
                }
            }
        }
    }
    Ok((value, count))
}
