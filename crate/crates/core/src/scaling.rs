//! Moving a family between an algebra and its corners.
//!
//! Two constructions live here, inverse in spirit:
//!
//! * **Compression** ([`compress`]): given a family `X` and an equal-trace
//!   partition with `n·k` parts, cut the algebra down to the corner carried
//!   by the first `k` parts. The corner inherits a trace (renormalized by
//!   `n`), the family is replaced by all compressions
//!   `f_{0a} · x_l · f_{b0}` through a system of shift units between the `n`
//!   congruent bands of the partition, and the invariant measured inside
//!   the corner equals exactly `n²` times the ambient invariant. Both sides
//!   of that identity are computed from scratch so the plan can be checked.
//!
//! * **Amplification** ([`amplify`]): given a family `X` supported in a
//!   corner `p M p` of a matrix factor together with a resolution `E` of
//!   `p`, rebuild the whole factor from the corner. The complement of `p`
//!   is tiled by `m − 1` congruent copies of `p` plus a low-rank remainder,
//!   partial isometries transport the corner onto the tiles, and a
//!   refinement `F` of `E` into atoms of small trace is transported along
//!   to yield a partition `G` of the identity. The enlarged family (the
//!   original elements plus the transport isometries) then satisfies the
//!   exact budget
//!
//!   ```text
//!   𝓘(Y; G) ≤ 𝓘(X; E) + m · maxAtomTrace,
//!   ```
//!
//!   because each transport isometry meets exactly one cell per atom and
//!   contributes `Σ_f τ(f)² ≤ maxAtomTrace · τ(p)`.
//!
//! The closing helper [`scaling_calculator`] rescales a generator count by
//! `t⁻²` — the bookkeeping rate at which compressions by a projection of
//! trace `t` trade corner size against generator budget.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::algebra::{ensure_same_algebra, Mode, Operator};
use crate::check::NamedCheck;
use crate::error::{Error, Result};
use crate::invariant::{invariant_against_parts, invariant_family, invariant_single};
use crate::partition::Partition;
use crate::scalar::{rat_int, Scalar};
use crate::units::{add_outer, matrix_units, partial_isometry, range_basis};

/// A verified record of one compression of a family into a corner.
///
/// Produced by [`compress`]; every derived object is kept so that
/// [`CompressionPlan::verify`] can replay the construction independently.
#[derive(Clone, Debug)]
pub struct CompressionPlan {
    /// Compression ratio: the ambient partition has `n·k` parts.
    pub n: usize,
    /// Number of parts of the corner resolution.
    pub k: usize,
    /// The corner projection `f = f_{00}`, of trace `1/n`.
    pub corner: Operator,
    /// Band-shift units `f_{ab}` (`n × n`); `f_{ab}` moves band `b` onto
    /// band `a`, and `f_{aa}` is the projection onto band `a`.
    pub corner_units: Vec<Vec<Operator>>,
    /// The original family.
    pub source: Vec<Operator>,
    /// The ambient partition (ordered into `n` bands of `k` parts).
    pub partition: Partition,
    /// The compressed family `f_{0a} · x_l · f_{b0}`, ordered by
    /// `(l, a, b)` lexicographically; repeated values are kept.
    pub family: Vec<Operator>,
    /// The corner resolution: the first `k` parts of the partition.
    pub corner_parts: Vec<Operator>,
    /// Invariant of the compressed family inside the corner, measured with
    /// the corner-normalized trace `n·τ`.
    pub corner_value: BigRational,
    /// Number of supported corner cells.
    pub corner_cells: usize,
    /// Invariant of the original family in the ambient algebra.
    pub ambient_value: BigRational,
    /// Number of supported ambient cells.
    pub ambient_cells: usize,
}

/// Compresses a family through an equal-trace partition with `n·k` parts
/// onto the corner of its first `k` parts.
///
/// The parts are read as `n` bands of `k` consecutive parts; part `a·k + i`
/// is the `i`-th part of band `a`. Matrix units subordinate to the
/// partition provide the band shifts `f_{ab} = Σ_i e_{ak+i, bk+i}`; the
/// compressed family consists of all `f_{0a} · x_l · f_{b0}` (an ordered
/// list over `(l, a, b)`), and its invariant against the `k` corner parts —
/// measured in the corner trace `n·τ` — is computed alongside the ambient
/// invariant of `X`. The two values always satisfy
/// `corner = n² · ambient`, which [`CompressionPlan::verify`] checks.
///
/// Fails with [`Error::DivisibilityError`] when the part count is not a
/// multiple of `n`, and propagates the equal-trace and unit-construction
/// requirements of the partition machinery.
pub fn compress(
    xs: &[Operator],
    partition: &Partition,
    n: usize,
    mode: &Mode,
) -> Result<CompressionPlan> {
    if n == 0 {
        return Err(Error::DomainError("compression ratio must be at least 1".into()));
    }
    if partition.len() % n != 0 {
        return Err(Error::DivisibilityError(format!(
            "a {}-part partition does not split into {} congruent bands",
            partition.len(),
            n
        )));
    }
    let k = partition.len() / n;
    for x in xs {
        ensure_same_algebra(x, partition.part(0))?;
    }
    let units = matrix_units(partition)?;
    let algebra = partition.algebra();

    let mut corner_units = Vec::with_capacity(n);
    for a in 0..n {
        let mut row = Vec::with_capacity(n);
        for b in 0..n {
            let mut f = Operator::zero(algebra);
            for i in 0..k {
                f = f.add(&units[a * k + i][b * k + i]);
            }
            row.push(f);
        }
        corner_units.push(row);
    }

    let mut family = Vec::with_capacity(xs.len() * n * n);
    for x in xs {
        for a in 0..n {
            for b in 0..n {
                family.push(corner_units[0][a].mul(x).mul(&corner_units[b][0]));
            }
        }
    }

    let corner_parts: Vec<Operator> = partition.parts()[..k].to_vec();
    let scale = rat_int(n as i64);
    let (corner_value, corner_cells) =
        invariant_against_parts(&family, &corner_parts, &scale, mode)?;
    let ambient = invariant_family(xs, partition, mode)?;

    Ok(CompressionPlan {
        n,
        k,
        corner: corner_units[0][0].clone(),
        corner_units,
        source: xs.to_vec(),
        partition: partition.clone(),
        family,
        corner_parts,
        corner_value,
        corner_cells,
        ambient_value: ambient.value,
        ambient_cells: ambient.triple_count,
    })
}

impl CompressionPlan {
    /// Replays the compression and reports one check per claimed property:
    /// the corner trace, the band-shift relations, the shape and assembly
    /// of the compressed family, the recomputed invariant on both sides,
    /// and the exact `n²` scaling identity between them.
    pub fn verify(&self, mode: &Mode) -> Vec<NamedCheck> {
        let mut checks = Vec::new();
        let n = self.n;
        let algebra = self.partition.algebra();

        let want = BigRational::one() / rat_int(n as i64);
        let got = self.corner.trace_re();
        checks.push(NamedCheck::new(
            "corner_trace",
            got == want && self.corner.is_projection(mode),
            format!("corner projection has trace {got}, expected {want}"),
        ));

        let mut relations = true;
        for a in 0..n {
            for b in 0..n {
                if !self.corner_units[a][b].adjoint().approx_eq(&self.corner_units[b][a], mode) {
                    relations = false;
                }
                let prod = self.corner_units[0][a].mul(&self.corner_units[b][0]);
                let expect = if a == b {
                    self.corner_units[0][0].clone()
                } else {
                    Operator::zero(algebra)
                };
                if !prod.approx_eq(&expect, mode) {
                    relations = false;
                }
            }
        }
        let mut diag = Operator::zero(algebra);
        for a in 0..n {
            diag = diag.add(&self.corner_units[a][a]);
        }
        if !diag.approx_eq(&Operator::identity(algebra), mode) {
            relations = false;
        }
        checks.push(NamedCheck::new(
            "band_shift_relations",
            relations,
            "f_ab* = f_ba, f_0a f_b0 = δ_ab f_00, Σ_a f_aa = 1",
        ));

        let shape = self.family.len() == self.source.len() * n * n;
        checks.push(NamedCheck::new(
            "family_shape",
            shape,
            format!(
                "{} compressed elements from {} originals and ratio {}",
                self.family.len(),
                self.source.len(),
                n
            ),
        ));

        let mut assembled = shape;
        if shape {
            let mut idx = 0;
            'outer: for x in &self.source {
                for a in 0..n {
                    for b in 0..n {
                        let y = self.corner_units[0][a].mul(x).mul(&self.corner_units[b][0]);
                        if !y.approx_eq(&self.family[idx], mode) {
                            assembled = false;
                            break 'outer;
                        }
                        idx += 1;
                    }
                }
            }
        }
        checks.push(NamedCheck::new(
            "family_assembly",
            assembled,
            "stored family matches f_0a x f_b0 in (l, a, b) order",
        ));

        let scale = rat_int(n as i64);
        let recomputed = invariant_against_parts(&self.family, &self.corner_parts, &scale, mode)
            .ok()
            .filter(|(v, c)| *v == self.corner_value && *c == self.corner_cells)
            .is_some();
        let ambient_ok = invariant_family(&self.source, &self.partition, mode)
            .ok()
            .filter(|inv| {
                inv.value == self.ambient_value && inv.triple_count == self.ambient_cells
            })
            .is_some();
        checks.push(NamedCheck::new(
            "values_recomputed",
            recomputed && ambient_ok,
            "stored corner and ambient invariants match recomputation",
        ));

        let factor = rat_int((n * n) as i64);
        let identity = self.corner_value == &factor * &self.ambient_value;
        checks.push(NamedCheck::new(
            "scaling_identity",
            identity,
            format!(
                "corner invariant {} vs n² × ambient invariant {}",
                self.corner_value,
                &factor * &self.ambient_value
            ),
        ));

        checks
    }
}

/// A verified record of one amplification of a corner family to the whole
/// factor. Produced by [`amplify`].
#[derive(Clone, Debug)]
pub struct AmplificationPlan {
    /// Number of congruent copies of the corner (`m = ⌊1/t⌋`).
    pub copy_count: usize,
    /// The corner projection `p` (sum of the given corner parts).
    pub corner: Operator,
    /// Pairwise orthogonal copies of the corner; `copies[0] = p`.
    pub copies: Vec<Operator>,
    /// The leftover projection when the copies do not exhaust the
    /// identity; its rank is `d − m·rank(p) < rank(p)`.
    pub remainder: Option<Operator>,
    /// Transport isometries `v_i` with `v_i v_i* = copies[i]`,
    /// `v_i* v_i = p`, for `i = 1..m`.
    pub isometries: Vec<Operator>,
    /// Transport of a prefix of the atoms onto the remainder.
    pub tail_isometry: Option<Operator>,
    /// The enlarged family: the original elements followed by the
    /// isometries and the tail isometry.
    pub family: Vec<Operator>,
    /// Number of original elements at the front of `family`.
    pub source_len: usize,
    /// The given resolution of the corner.
    pub corner_parts: Vec<Operator>,
    /// Refinement of the corner resolution into atoms of trace at most
    /// `max_atom_trace`, in corner order.
    pub atoms: Vec<Operator>,
    /// Index of the corner part that contains each atom.
    pub atom_part: Vec<usize>,
    /// How many leading atoms are transported onto the remainder.
    pub prefix_len: usize,
    /// The assembled partition of the identity: the atoms, their images
    /// under each transport isometry, then the prefix images on the
    /// remainder.
    pub partition: Partition,
    /// Invariant `𝓘(X; E)` of the original family against the corner
    /// resolution (ambient trace).
    pub corner_value: BigRational,
    /// Invariant `𝓘(Y; G)` of the enlarged family against the assembled
    /// partition.
    pub value: BigRational,
    /// The guaranteed budget: `𝓘(X; E) + m · max_atom_trace`, with an extra
    /// factor 4 on the slack term for hermitian plans.
    pub slack_bound: BigRational,
    /// The atom-trace ceiling used to build the refinement.
    pub max_atom_trace: BigRational,
    /// True when the transports enter the family as self-adjoint pairs
    /// `(v + v*, i(v − v*))` instead of raw isometries.
    pub hermitian: bool,
}

/// Builds a projection onto the span of a set of orthogonal (unnormalized)
/// vectors with known squared norms, inside block 0 of a factor.
fn projection_from_vectors(
    algebra: &std::sync::Arc<crate::algebra::TracialAlgebra>,
    vectors: &[(Vec<crate::scalar::Scalar>, BigRational)],
) -> Operator {
    let mut p = Operator::zero(algebra);
    for (v, n) in vectors {
        add_outer(&mut p, 0, v, v, n);
    }
    p
}

/// Amplifies a family supported in the corner `p M p` of a matrix factor
/// to a family for the whole factor, with a certified invariant budget.
///
/// `corner_parts` is a resolution `E` of the corner projection `p` (its
/// pairwise orthogonal projection summands); every element of `xs` must
/// satisfy `p x p = x`. With `t = τ(p)` and `m = ⌊1/t⌋`, the complement of
/// `p` is tiled by `m − 1` congruent copies of `p` plus a remainder of
/// rank `d − m·rank(p)`. Each corner part is refined into atoms of trace
/// at most `max_atom_trace` (with one forced cut so that a prefix of the
/// atoms matches the remainder rank exactly), and the atoms are
/// transported onto every tile. The enlarged family is `X` together with
/// the transport isometries; its invariant against the assembled partition
/// never exceeds `𝓘(X; E) + m·max_atom_trace`.
///
/// Fails with [`Error::NotAFactor`] off a single matrix block, with
/// [`Error::DomainError`] when an element leaves the corner or the atom
/// ceiling is below one coordinate, and with [`Error::GeometryError`] when
/// the mode leaves a corner of non-integral rank.
pub fn amplify(
    xs: &[Operator],
    corner_parts: &[Operator],
    max_atom_trace: &BigRational,
    mode: &Mode,
) -> Result<AmplificationPlan> {
    amplify_impl(xs, corner_parts, max_atom_trace, mode, false)
}

/// Hermitian variant of [`amplify`]: the family must be self-adjoint, each
/// transport `v` enters the enlarged family as the self-adjoint pair
/// `(v + v*, i(v − v*))`, and the invariant budget carries the factor-4
/// slack `𝓘(X; E) + 4m · max_atom_trace` (each pair costs at most four
/// times the isometry it replaces).
pub fn amplify_self_adjoint(
    xs: &[Operator],
    corner_parts: &[Operator],
    max_atom_trace: &BigRational,
    mode: &Mode,
) -> Result<AmplificationPlan> {
    amplify_impl(xs, corner_parts, max_atom_trace, mode, true)
}

fn amplify_impl(
    xs: &[Operator],
    corner_parts: &[Operator],
    max_atom_trace: &BigRational,
    mode: &Mode,
    hermitian: bool,
) -> Result<AmplificationPlan> {
    if corner_parts.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let algebra = corner_parts[0].algebra().clone();
    if !algebra.is_factor() {
        return Err(Error::NotAFactor(
            "amplification is defined over a single matrix factor".into(),
        ));
    }
    let d = algebra.blocks()[0].dim;
    let mut corner = Operator::zero(&algebra);
    for (i, q) in corner_parts.iter().enumerate() {
        ensure_same_algebra(q, &corner_parts[0])?;
        if !q.is_projection(mode) || q.is_zero(mode) {
            return Err(Error::NotAProjection(format!(
                "corner part {i} is not a nonzero projection"
            )));
        }
        for r in corner_parts.iter().skip(i + 1) {
            if q.mul(r).is_nonzero(mode) {
                return Err(Error::NotOrthogonal(
                    "corner parts are not pairwise orthogonal".into(),
                ));
            }
        }
        corner = corner.add(q);
    }
    let t = corner.trace_re();
    if !t.is_positive() {
        return Err(Error::NonpositiveT(format!("corner trace {t} is not positive")));
    }
    for (l, x) in xs.iter().enumerate() {
        ensure_same_algebra(x, &corner_parts[0])?;
        if !corner.mul(x).mul(&corner).approx_eq(x, mode) {
            return Err(Error::DomainError(format!(
                "family element {l} is not supported in the corner"
            )));
        }
        if hermitian && !x.is_self_adjoint(mode) {
            return Err(Error::NotSelfAdjoint(format!(
                "hermitian amplification requires a self-adjoint family; \
                 element {l} is not"
            )));
        }
    }
    if !max_atom_trace.is_positive() {
        return Err(Error::DomainError("atom trace ceiling must be positive".into()));
    }

    let rank_rat = &t * rat_int(d as i64);
    if !rank_rat.is_integer() {
        return Err(Error::GeometryError(format!(
            "corner rank {rank_rat} is not an integer in this mode"
        )));
    }
    let rank_p = rank_rat.to_integer().to_usize().ok_or_else(|| {
        Error::Internal("corner rank does not fit a machine word".into())
    })?;
    let max_rank = (max_atom_trace * rat_int(d as i64))
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0);
    if max_rank == 0 {
        return Err(Error::DomainError(format!(
            "atom trace ceiling {max_atom_trace} is below one coordinate of 1/{d}"
        )));
    }
    let m = d / rank_p;
    let rho = d - m * rank_p;

    // Refine the corner resolution into atoms of rank at most `max_rank`,
    // never letting an atom straddle the cumulative-rank mark `rho`.
    let mut atoms = Vec::new();
    let mut atom_part = Vec::new();
    let mut cum = 0usize;
    for (e_idx, part) in corner_parts.iter().enumerate() {
        let basis = range_basis(part, 0);
        let mut used = 0usize;
        while used < basis.len() {
            let mut allowed = max_rank.min(basis.len() - used);
            if cum < rho {
                allowed = allowed.min(rho - cum);
            }
            atoms.push(projection_from_vectors(&algebra, &basis[used..used + allowed]));
            atom_part.push(e_idx);
            used += allowed;
            cum += allowed;
        }
    }
    let mut prefix_len = 0usize;
    let mut prefix_rank = 0usize;
    while prefix_rank < rho {
        let r = (atoms[prefix_len].trace_re() * rat_int(d as i64)).to_integer();
        prefix_rank += r.to_usize().ok_or_else(|| {
            Error::Internal("atom rank does not fit a machine word".into())
        })?;
        prefix_len += 1;
    }
    debug_assert_eq!(prefix_rank, rho);

    // Tile the complement: m − 1 congruent copies of the corner, then the
    // remainder.
    let complement = Operator::identity(&algebra).sub(&corner);
    let cbasis = range_basis(&complement, 0);
    let mut copies = vec![corner.clone()];
    let mut isometries = Vec::new();
    for i in 1..m {
        let pi = projection_from_vectors(&algebra, &cbasis[(i - 1) * rank_p..i * rank_p]);
        isometries.push(partial_isometry(&pi, &corner)?);
        copies.push(pi);
    }
    let (remainder, tail_isometry) = if rho > 0 {
        let r = projection_from_vectors(&algebra, &cbasis[(m - 1) * rank_p..]);
        let mut prefix_sum = Operator::zero(&algebra);
        for f in &atoms[..prefix_len] {
            prefix_sum = prefix_sum.add(f);
        }
        let w = partial_isometry(&r, &prefix_sum)?;
        (Some(r), Some(w))
    } else {
        (None, None)
    };

    // Assemble the partition: the atoms, their transports, the remainder
    // images of the prefix.
    let mut parts = atoms.clone();
    for v in &isometries {
        let vstar = v.adjoint();
        for f in &atoms {
            parts.push(v.mul(f).mul(&vstar));
        }
    }
    if let Some(w) = &tail_isometry {
        let wstar = w.adjoint();
        for f in &atoms[..prefix_len] {
            parts.push(w.mul(f).mul(&wstar));
        }
    }
    let partition = Partition::new(parts, mode)?;

    let mut transports = isometries.clone();
    if let Some(w) = &tail_isometry {
        transports.push(w.clone());
    }
    let mut family = xs.to_vec();
    if hermitian {
        for v in &transports {
            let vstar = v.adjoint();
            family.push(v.add(&vstar));
            family.push(v.sub(&vstar).scale(&Scalar::i()));
        }
    } else {
        family.extend(transports);
    }

    let (corner_value, _) =
        invariant_against_parts(xs, corner_parts, &BigRational::one(), mode)?;
    let value = invariant_family(&family, &partition, mode)?.value;
    let lift_factor = if hermitian { rat_int(4) } else { BigRational::one() };
    let slack_bound = &corner_value + lift_factor * rat_int(m as i64) * max_atom_trace;

    Ok(AmplificationPlan {
        copy_count: m,
        corner,
        copies,
        remainder,
        isometries,
        tail_isometry,
        family,
        source_len: xs.len(),
        corner_parts: corner_parts.to_vec(),
        atoms,
        atom_part,
        prefix_len,
        partition,
        corner_value,
        value,
        slack_bound,
        max_atom_trace: max_atom_trace.clone(),
        hermitian,
    })
}

impl AmplificationPlan {
    /// Replays the amplification and reports one check per claimed
    /// property: corner support of the original elements, the isometry
    /// relations of every transport, the refinement structure and trace
    /// ceiling of the atoms, the assembly of the final partition, the
    /// recomputed invariants, and the slack budget.
    pub fn verify(&self, mode: &Mode) -> Vec<NamedCheck> {
        let mut checks = Vec::new();

        let sources = &self.family[..self.source_len.min(self.family.len())];
        let support = self.source_len <= self.family.len()
            && sources
                .iter()
                .all(|x| self.corner.mul(x).mul(&self.corner).approx_eq(x, mode));
        checks.push(NamedCheck::new(
            "corner_support",
            support,
            "every original element satisfies p x p = x",
        ));

        let mut corner_sum = Operator::zero(self.corner.algebra());
        for q in &self.corner_parts {
            corner_sum = corner_sum.add(q);
        }
        checks.push(NamedCheck::new(
            "corner_resolution",
            corner_sum.approx_eq(&self.corner, mode),
            "corner parts sum to the corner projection",
        ));

        let mut iso_ok = self.copies.len() == self.isometries.len() + 1
            && self.copies.first().is_some_and(|c| c.approx_eq(&self.corner, mode));
        for (v, pi) in self.isometries.iter().zip(self.copies.iter().skip(1)) {
            let vstar = v.adjoint();
            if !v.mul(&vstar).approx_eq(pi, mode) || !vstar.mul(v).approx_eq(&self.corner, mode)
            {
                iso_ok = false;
            }
        }
        checks.push(NamedCheck::new(
            "copy_isometries",
            iso_ok,
            "v v* is the copy and v* v is the corner, for every transport",
        ));

        let tail_ok = match (&self.tail_isometry, &self.remainder) {
            (None, None) => true,
            (Some(w), Some(r)) => {
                let wstar = w.adjoint();
                let mut prefix_sum = Operator::zero(self.corner.algebra());
                for f in self.atoms.iter().take(self.prefix_len) {
                    prefix_sum = prefix_sum.add(f);
                }
                w.mul(&wstar).approx_eq(r, mode) && wstar.mul(w).approx_eq(&prefix_sum, mode)
            }
            _ => false,
        };
        checks.push(NamedCheck::new(
            "tail_isometry",
            tail_ok,
            "w w* is the remainder and w* w is the atom prefix (or both absent)",
        ));

        let mut refine_ok = self.atoms.len() == self.atom_part.len();
        let mut atom_sum = Operator::zero(self.corner.algebra());
        for (f, &e_idx) in self.atoms.iter().zip(&self.atom_part) {
            if !f.is_projection(mode)
                || e_idx >= self.corner_parts.len()
                || !self.corner_parts[e_idx].mul(f).approx_eq(f, mode)
            {
                refine_ok = false;
            }
            atom_sum = atom_sum.add(f);
        }
        if !atom_sum.approx_eq(&self.corner, mode) {
            refine_ok = false;
        }
        checks.push(NamedCheck::new(
            "atoms_refine_corner",
            refine_ok,
            "atoms are projections under their parts and sum to the corner",
        ));

        let traces_ok = self.atoms.iter().all(|f| f.trace_re() <= self.max_atom_trace);
        checks.push(NamedCheck::new(
            "atom_traces",
            traces_ok,
            format!("every atom trace is at most {}", self.max_atom_trace),
        ));

        let mut expected = self.atoms.clone();
        for v in &self.isometries {
            let vstar = v.adjoint();
            for f in &self.atoms {
                expected.push(v.mul(f).mul(&vstar));
            }
        }
        if let Some(w) = &self.tail_isometry {
            let wstar = w.adjoint();
            for f in self.atoms.iter().take(self.prefix_len) {
                expected.push(w.mul(f).mul(&wstar));
            }
        }
        let assembly = expected.len() == self.partition.len()
            && expected
                .iter()
                .zip(self.partition.parts())
                .all(|(a, b)| a.approx_eq(b, mode));
        checks.push(NamedCheck::new(
            "partition_assembly",
            assembly,
            "partition parts are exactly the transported atoms",
        ));

        let corner_ok = invariant_against_parts(
            sources,
            &self.corner_parts,
            &BigRational::one(),
            mode,
        )
        .is_ok_and(|(v, _)| v == self.corner_value);
        let value_ok = invariant_family(&self.family, &self.partition, mode)
            .is_ok_and(|inv| inv.value == self.value);
        checks.push(NamedCheck::new(
            "values_recomputed",
            corner_ok && value_ok,
            "stored corner and amplified invariants match recomputation",
        ));

        let lift_factor = if self.hermitian { rat_int(4) } else { BigRational::one() };
        let budget = &self.corner_value
            + lift_factor * rat_int(self.copy_count as i64) * &self.max_atom_trace;
        let slack = self.slack_bound == budget && self.value <= self.slack_bound;
        checks.push(NamedCheck::new(
            "slack_budget",
            slack,
            format!(
                "amplified invariant {} within budget {}",
                self.value, self.slack_bound
            ),
        ));

        if self.hermitian {
            let mut transports = self.isometries.clone();
            if let Some(w) = &self.tail_isometry {
                transports.push(w.clone());
            }
            let len_ok = self.family.len() == self.source_len + 2 * transports.len();
            let mut lift_ok =
                len_ok && self.family.iter().all(|y| y.is_self_adjoint(mode));
            if len_ok {
                for (idx, v) in transports.iter().enumerate() {
                    let h = &self.family[self.source_len + 2 * idx..][..2];
                    let vstar = v.adjoint();
                    if !h[0].approx_eq(&v.add(&vstar), mode)
                        || !h[1].approx_eq(&v.sub(&vstar).scale(&Scalar::i()), mode)
                    {
                        lift_ok = false;
                        break;
                    }
                    let bound = invariant_single(v, &self.partition, mode)
                        .map(|iv| rat_int(4) * iv);
                    let cost = invariant_single(&h[0], &self.partition, mode).and_then(
                        |a| Ok(a + invariant_single(&h[1], &self.partition, mode)?),
                    );
                    match (cost, bound) {
                        (Ok(c), Ok(b)) if c <= b => {}
                        _ => {
                            lift_ok = false;
                            break;
                        }
                    }
                }
            }
            checks.push(NamedCheck::new(
                "hermitian_lift",
                lift_ok,
                "transports enter as self-adjoint pairs within the \
                 factor-4 estimate",
            ));
        }

        checks
    }

    /// Dimension of the subalgebra generated by the enlarged family and
    /// the identity. Equals the full dimension `d²` whenever the original
    /// family generates the corner as an algebra with unit `p`.
    pub fn span_dimension(&self, budget: Option<usize>) -> Result<usize> {
        let mut seed = self.family.clone();
        seed.push(Operator::identity(self.corner.algebra()));
        crate::span::span_dimension(&seed, budget)
    }
}

/// Rescales a generator count through a compression by a projection of
/// trace `t`: a count of `g` in the corner corresponds to `t⁻² · g` in the
/// ambient algebra. Fails with [`Error::NonpositiveT`] unless `t > 0`.
pub fn scaling_calculator(g: &BigRational, t: &BigRational) -> Result<BigRational> {
    if !t.is_positive() {
        return Err(Error::NonpositiveT(format!(
            "compression trace {t} is not positive"
        )));
    }
    Ok(g / (t * t))
}
