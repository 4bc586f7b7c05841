//! Deterministic pseudo-random instances for property sweeps.
//!
//! Everything here is driven by a [`ChaCha8Rng`] seeded from a single
//! 64-bit integer, so a fixed seed reproduces the same operators,
//! partitions, and instance files byte for byte. Entries are small
//! rationals; partitions come in three flavors — coordinate groupings,
//! equal-trace groupings (in factors of divisible size), and either of
//! those conjugated by a rational unitary to exercise the dense
//! arithmetic paths.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Mode, Operator, TracialAlgebra};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::minimize::grouped_partition;
use crate::partition::Partition;
use crate::scalar::{rat, rat_int, Scalar};
use std::sync::Arc;

/// The seeded generator all randomized helpers run on.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a generated instance: the algebra's block dimensions, how
/// many operators to draw, how dense they are, and whether to symmetrize
/// them and to conjugate the instance by a rational unitary.
#[derive(Clone, Debug)]
pub struct InstanceShape {
    /// Matrix sizes of the direct summands (equal trace weights).
    pub block_dims: Vec<usize>,
    /// Number of operators to draw.
    pub operator_count: usize,
    /// Probability in `[0, 1]` that an entry (an upper-triangular entry
    /// when symmetrizing) is filled.
    pub sparsity: BigRational,
    /// Symmetrize every operator to `x = x*`.
    pub self_adjoint: bool,
    /// Requested part count for the named partition `P` (clamped to the
    /// number of coordinates).
    pub partition_parts: usize,
    /// Conjugate operators and `P` by a random rational unitary.
    pub rotate: bool,
}

/// Bernoulli draw with an exact rational probability.
fn bern(rng: &mut ChaCha8Rng, p: &BigRational) -> Result<bool> {
    if p.is_negative() || *p > rat_int(1) {
        return Err(Error::DomainError(format!("probability {p} is outside [0, 1]")));
    }
    let den = p.denom().to_u64().ok_or_else(|| {
        Error::DomainError(format!("probability {p} needs a denominator that fits in 64 bits"))
    })?;
    let num = p.numer().to_u64().expect("numerator of a probability in [0, 1] fits");
    if den == 1 {
        return Ok(num == 1);
    }
    Ok(rng.random_range(0..den) < num)
}

/// A small random scalar: numerator in `[-3, 3]`, denominator in
/// `[1, 3]`, for both components.
fn small_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let component = |rng: &mut ChaCha8Rng| {
        rat(rng.random_range(-3i64..=3), rng.random_range(1i64..=3))
    };
    Scalar::new(component(rng), component(rng))
}

/// Draws one operator with entrywise sparsity; with `self_adjoint`, fills
/// the upper triangle and mirrors it.
pub fn random_operator(
    rng: &mut ChaCha8Rng,
    algebra: &Arc<TracialAlgebra>,
    sparsity: &BigRational,
    self_adjoint: bool,
) -> Result<Operator> {
    let mut x = Operator::zero(algebra);
    for (b, blk) in algebra.blocks().iter().enumerate() {
        for i in 0..blk.dim {
            let start = if self_adjoint { i } else { 0 };
            for j in start..blk.dim {
                if !bern(rng, sparsity)? {
                    continue;
                }
                let mut s = small_scalar(rng);
                if self_adjoint && i == j {
                    s = Scalar::from_re(s.re);
                }
                x.set_entry(b, i, j, s.clone());
                if self_adjoint && i != j {
                    x.set_entry(b, j, i, s.conj());
                }
            }
        }
    }
    Ok(x)
}

/// Draws a family of operators.
pub fn random_family(
    rng: &mut ChaCha8Rng,
    algebra: &Arc<TracialAlgebra>,
    count: usize,
    sparsity: &BigRational,
    self_adjoint: bool,
) -> Result<Vec<Operator>> {
    (0..count)
        .map(|_| random_operator(rng, algebra, sparsity, self_adjoint))
        .collect()
}

/// Random surjective grouping of `atoms` coordinates into `k` labels.
fn random_surjection(rng: &mut ChaCha8Rng, atoms: usize, k: usize) -> Vec<usize> {
    let mut grouping: Vec<usize> = (0..atoms)
        .map(|a| if a < k { a } else { rng.random_range(0..k) })
        .collect();
    grouping.shuffle(rng);
    grouping
}

/// A random coordinate partition with (up to) `k` parts: each diagonal
/// coordinate is assigned a group, every group nonempty.
pub fn random_coordinate_partition(
    rng: &mut ChaCha8Rng,
    algebra: &Arc<TracialAlgebra>,
    k: usize,
) -> Result<Partition> {
    let atoms = Partition::finest_coordinate(algebra);
    let k = k.clamp(1, atoms.len());
    let grouping = random_surjection(rng, atoms.len(), k);
    grouped_partition(&atoms, &grouping)
}

/// A random equal-trace coordinate partition of a matrix factor whose
/// size `k` divides: coordinates are shuffled and dealt into `k` groups
/// of equal cardinality.
pub fn random_equal_trace_partition(
    rng: &mut ChaCha8Rng,
    algebra: &Arc<TracialAlgebra>,
    k: usize,
) -> Result<Partition> {
    if !algebra.is_factor() {
        return Err(Error::NotAFactor(
            "equal-trace coordinate groupings are drawn in matrix factors".into(),
        ));
    }
    let d = algebra.blocks()[0].dim;
    if k == 0 || d % k != 0 {
        return Err(Error::DivisibilityError(format!(
            "cannot deal {d} coordinates into {k} equal groups"
        )));
    }
    let mut coords: Vec<usize> = (0..d).collect();
    coords.shuffle(rng);
    let mut grouping = vec![0usize; d];
    for (pos, coord) in coords.into_iter().enumerate() {
        grouping[coord] = pos / (d / k);
    }
    grouped_partition(&Partition::finest_coordinate(algebra), &grouping)
}

/// Hypotenuse triples backing exact rational rotations.
const TRIPLES: [(i64, i64, i64); 4] = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (20, 21, 29)];

/// A random rational unitary: a product of `steps` plane rotations with
/// Pythagorean cosines, interleaved with `i`-phases on single
/// coordinates.
pub fn random_rational_unitary(
    rng: &mut ChaCha8Rng,
    algebra: &Arc<TracialAlgebra>,
    steps: usize,
) -> Operator {
    let mut u = Operator::identity(algebra);
    let blocks: Vec<usize> = algebra.blocks().iter().map(|b| b.dim).collect();
    for _ in 0..steps {
        let b = rng.random_range(0..blocks.len());
        let dim = blocks[b];
        let mut g = Operator::identity(algebra);
        if dim >= 2 && rng.random_range(0..4) < 3 {
            let i = rng.random_range(0..dim);
            let mut j = rng.random_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let (a, o, h) = TRIPLES[rng.random_range(0..TRIPLES.len())];
            let (c, s) = (rat(a, h), rat(o, h));
            g.set_entry(b, i, i, Scalar::from_re(c.clone()));
            g.set_entry(b, j, j, Scalar::from_re(c));
            g.set_entry(b, i, j, Scalar::from_re(s.clone()));
            g.set_entry(b, j, i, Scalar::from_re(-s));
        } else {
            let i = rng.random_range(0..dim);
            g.set_entry(b, i, i, Scalar::i());
        }
        u = u.mul(&g);
    }
    u
}

/// Conjugation `u x u*`.
pub fn conjugate(u: &Operator, x: &Operator) -> Operator {
    u.mul(x).mul(&u.adjoint())
}

/// Conjugates every part of a partition by one unitary.
pub fn conjugate_partition(u: &Operator, partition: &Partition, mode: &Mode) -> Result<Partition> {
    Partition::new(
        partition.parts().iter().map(|p| conjugate(u, p)).collect(),
        mode,
    )
}

/// A chain of partitions ordered from finest to coarsest: each entry
/// refines every later one, so family invariants are nondecreasing along
/// the returned order. `counts` gives the part counts and must be
/// strictly decreasing and bounded by the coordinate count.
pub fn coarsening_chain(
    rng: &mut ChaCha8Rng,
    algebra: &Arc<TracialAlgebra>,
    counts: &[usize],
) -> Result<Vec<Partition>> {
    let atoms = Partition::finest_coordinate(algebra);
    if counts.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::DomainError(format!(
            "part counts {counts:?} must strictly decrease toward the coarse end"
        )));
    }
    if counts.is_empty() || counts[0] > atoms.len() || *counts.last().unwrap() == 0 {
        return Err(Error::DomainError(format!(
            "part counts {counts:?} must fit within {} coordinates",
            atoms.len()
        )));
    }
    let mut grouping = random_surjection(rng, atoms.len(), counts[0]);
    let mut chain = vec![grouped_partition(&atoms, &grouping)?];
    for &next in &counts[1..] {
        let merge = random_surjection(rng, counts_of(&grouping), next);
        for g in grouping.iter_mut() {
            *g = merge[*g];
        }
        chain.push(grouped_partition(&atoms, &grouping)?);
    }
    Ok(chain)
}

/// Number of distinct labels in a surjective grouping.
fn counts_of(grouping: &[usize]) -> usize {
    grouping.iter().max().map_or(0, |m| m + 1)
}

/// Builds a full instance file from a seed and a shape: operators
/// `x0, x1, …`, the coordinate atom frame `atoms`, a random partition
/// `P`, and — in factors of divisible size — an equal-trace partition
/// `Peq`. With `rotate`, the operators and both named partitions (not
/// the atom frame) are conjugated by one random rational unitary.
pub fn random_instance(seed: u64, shape: &InstanceShape) -> Result<Instance> {
    let mut rng = rng_from_seed(seed);
    if shape.block_dims.is_empty() {
        return Err(Error::DomainError("an instance needs at least one block".into()));
    }
    let weight = rat(1, shape.block_dims.len() as i64);
    let blocks = shape
        .block_dims
        .iter()
        .map(|&dim| crate::algebra::Block { dim, weight: weight.clone() })
        .collect();
    let algebra = TracialAlgebra::new(blocks)?;
    let mut instance = Instance::new(algebra.clone(), Mode::Exact);

    let mut family = random_family(
        &mut rng,
        &algebra,
        shape.operator_count,
        &shape.sparsity,
        shape.self_adjoint,
    )?;
    let mut p = random_coordinate_partition(&mut rng, &algebra, shape.partition_parts)?;
    let mut peq = if algebra.is_factor() {
        let d = algebra.blocks()[0].dim;
        let k = shape.partition_parts.clamp(1, d);
        let k = (1..=k).rev().find(|k| d % k == 0).expect("1 divides d");
        Some(random_equal_trace_partition(&mut rng, &algebra, k)?)
    } else {
        None
    };

    if shape.rotate {
        let u = random_rational_unitary(&mut rng, &algebra, 2 * algebra.linear_dim().min(24));
        for x in family.iter_mut() {
            *x = conjugate(&u, x);
        }
        p = conjugate_partition(&u, &p, &Mode::Exact)?;
        peq = match peq {
            Some(q) => Some(conjugate_partition(&u, &q, &Mode::Exact)?),
            None => None,
        };
    }

    for (l, x) in family.into_iter().enumerate() {
        instance.insert_operator(&format!("x{l}"), x)?;
    }
    instance.insert_partition("atoms", Partition::finest_coordinate(&algebra))?;
    instance.insert_partition("P", p)?;
    if let Some(q) = peq {
        instance.insert_partition("Peq", q)?;
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::invariant_family;
    use num_traits::Zero;

    fn shape() -> InstanceShape {
        InstanceShape {
            block_dims: vec![3, 2],
            operator_count: 2,
            sparsity: rat(1, 2),
            self_adjoint: false,
            partition_parts: 3,
            rotate: false,
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_file_byte_for_byte() {
        let a = random_instance(7, &shape()).unwrap().to_json();
        let b = random_instance(7, &shape()).unwrap().to_json();
        let c = random_instance(8, &shape()).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_sparsity_gives_zero_operators() {
        let mut s = shape();
        s.sparsity = rat_int(0);
        let instance = random_instance(3, &s).unwrap();
        for (_, x) in instance.operators() {
            assert!(x.is_zero(&Mode::Exact));
        }
        let value = invariant_family(
            &instance.family("x0,x1").unwrap(),
            instance.partition("P").unwrap(),
            &Mode::Exact,
        )
        .unwrap()
        .value;
        assert!(value.is_zero());
    }

    #[test]
    fn self_adjoint_flag_symmetrizes_every_operator() {
        let mut s = shape();
        s.self_adjoint = true;
        s.sparsity = rat(9, 10);
        let instance = random_instance(11, &s).unwrap();
        for (_, x) in instance.operators() {
            assert!(x.is_self_adjoint(&Mode::Exact));
        }
    }

    #[test]
    fn random_unitaries_are_unitary_and_rotation_preserves_structure() {
        let algebra = TracialAlgebra::matrix_factor(4);
        let mut rng = rng_from_seed(5);
        let u = random_rational_unitary(&mut rng, &algebra, 12);
        let id = Operator::identity(&algebra);
        assert!(u.mul(&u.adjoint()).approx_eq(&id, &Mode::Exact));
        assert!(u.adjoint().mul(&u).approx_eq(&id, &Mode::Exact));

        let mut s = InstanceShape {
            block_dims: vec![4],
            operator_count: 1,
            sparsity: rat(1, 2),
            self_adjoint: true,
            partition_parts: 2,
            rotate: true,
        };
        let instance = random_instance(9, &s).unwrap();
        assert!(instance.operators()["x0"].is_self_adjoint(&Mode::Exact));
        let peq = instance.partition("Peq").unwrap();
        for part in peq.parts() {
            assert_eq!(part.trace_re(), rat(1, 2));
        }
        s.rotate = false;
        assert!(random_instance(9, &s).is_ok());
    }

    #[test]
    fn equal_trace_partitions_deal_coordinates_evenly() {
        let algebra = TracialAlgebra::matrix_factor(6);
        let mut rng = rng_from_seed(2);
        let q = random_equal_trace_partition(&mut rng, &algebra, 3).unwrap();
        assert_eq!(q.len(), 3);
        for part in q.parts() {
            assert_eq!(part.trace_re(), rat(1, 3));
        }
        assert!(random_equal_trace_partition(&mut rng, &algebra, 4).is_err());
    }

    #[test]
    fn coarsening_chains_are_nested_and_monotone() {
        let algebra = TracialAlgebra::matrix_factor(8);
        let mut rng = rng_from_seed(13);
        let chain = coarsening_chain(&mut rng, &algebra, &[6, 3, 1]).unwrap();
        assert_eq!(chain.len(), 3);
        let family = random_family(&mut rng, &algebra, 2, &rat(1, 3), false).unwrap();
        let values: Vec<BigRational> = chain
            .iter()
            .map(|p| invariant_family(&family, p, &Mode::Exact).unwrap().value)
            .collect();
        assert!(values[0] <= values[1] && values[1] <= values[2]);
        assert!(coarsening_chain(&mut rng, &algebra, &[3, 3]).is_err());
        assert!(coarsening_chain(&mut rng, &algebra, &[9, 2]).is_err());
    }
}
