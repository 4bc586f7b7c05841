//! Searching the partition lattice for small invariant values.
//!
//! The search space is the set of *groupings* of a fixed atom partition
//! `A = {q_1, …, q_m}`: every candidate partition has parts that are sums of
//! atoms. Two regimes exist:
//!
//! * unrestricted groupings — since refining can only shrink the value, the
//!   atom partition itself is the lattice minimum; the search machinery still
//!   walks the whole lattice honestly and is mainly a consistency exercise;
//! * groupings into a *prescribed number of equal-trace parts* — the regime
//!   the generation threshold cares about. Distinct equal-trace groupings do
//!   not refine one another, so this search is genuinely combinatorial.
//!
//! Small atom counts are enumerated exhaustively as restricted growth
//! strings; larger ones fall back to seeded simulated annealing with
//! relocate/swap/merge/split moves (swap-only when the equal-trace
//! constraint must be preserved). Annealing scores with `f64`, but every
//! *reported* value is re-evaluated in exact arithmetic on the winning
//! grouping, so the outcome is always a true value of a real partition.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ensure_same_algebra, Mode, Operator};
use crate::error::{Error, Result};
use crate::invariant::PartitionGeometry;
use crate::partition::Partition;

/// Resource limits for [`minimize`].
#[derive(Clone, Debug)]
pub struct SearchBudget {
    /// Exhaustive enumeration is used when the atom count is at most this.
    pub exhaustive_cap: usize,
    /// Number of annealing steps otherwise.
    pub anneal_steps: u64,
    /// Seed for the annealing walk (the exhaustive path ignores it).
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { exhaustive_cap: 11, anneal_steps: 20_000, seed: 0 }
    }
}

/// Result of a partition search.
#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    /// Exact invariant value of the best grouping found.
    pub value: BigRational,
    /// Best grouping as a restricted growth string over the atoms.
    pub grouping: Vec<usize>,
    /// The witness partition assembled from that grouping.
    pub partition: Partition,
    /// True when every admissible grouping was scored.
    pub exhaustive: bool,
    /// Number of groupings scored.
    pub evaluations: u64,
}

/// Relabels a grouping into restricted-growth form (groups numbered by
/// first appearance).
fn canonical_rgs(assign: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; assign.len() + 1];
    let mut next = 0;
    assign
        .iter()
        .map(|&g| {
            *map[g].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Sums the atoms of each group into a partition.
pub fn grouped_partition(atoms: &Partition, grouping: &[usize]) -> Result<Partition> {
    if grouping.len() != atoms.len() {
        return Err(Error::ShapeError(format!(
            "grouping has {} entries for {} atoms",
            grouping.len(),
            atoms.len()
        )));
    }
    let rgs = canonical_rgs(grouping);
    let k = rgs.iter().max().map_or(0, |m| m + 1);
    let mut parts: Vec<Option<Operator>> = vec![None; k];
    for (a, &g) in rgs.iter().enumerate() {
        let atom = atoms.part(a);
        parts[g] = Some(match parts[g].take() {
            None => atom.clone(),
            Some(acc) => acc.add(atom),
        });
    }
    let parts: Vec<Operator> = parts.into_iter().map(|p| p.expect("group is nonempty")).collect();
    Partition::new(parts, &Mode::Exact)
}

/// Per-element support data at atom resolution, plus trace bookkeeping.
struct Scorer {
    /// Exact-mode bitmask rows: `masks[l][a]` has bit `b` set iff the atom
    /// cell `(a, b)` of element `l` is (exactly) nonzero.
    masks: Vec<Vec<u128>>,
    /// Float-mode exact atom cell norms (`None` in exact mode).
    norms: Option<Vec<Vec<Vec<BigRational>>>>,
    norms_f64: Option<Vec<Vec<Vec<f64>>>>,
    eps_sq: Option<BigRational>,
    eps_sq_f64: f64,
    /// Atom trace numerators over the common denominator.
    trace_num: Vec<u64>,
    denom_sq: BigRational,
    trace_f64: Vec<f64>,
}

fn to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(if r.is_negative() { f64::MIN } else { f64::MAX })
        / r.denom().to_f64().unwrap_or(f64::MAX)
}

impl Scorer {
    fn new(xs: &[Operator], atoms: &Partition, mode: &Mode) -> Result<Scorer> {
        let m = atoms.len();
        if m > 128 {
            return Err(Error::ShapeError(
                "partition searches support at most 128 atoms".into(),
            ));
        }
        let geom = PartitionGeometry::new(atoms);
        let all_norms: Vec<Vec<Vec<BigRational>>> =
            xs.iter().map(|x| geom.cell_norms(x)).collect();
        let masks = all_norms
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|row| {
                        row.iter().enumerate().fold(0u128, |acc, (b, n)| {
                            if n.is_zero() {
                                acc
                            } else {
                                acc | (1u128 << b)
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        let mut denom = BigInt::one();
        for t in atoms.traces() {
            denom = denom.lcm(t.denom());
        }
        let trace_num: Option<Vec<u64>> = atoms
            .traces()
            .iter()
            .map(|t| ((t * BigRational::from_integer(denom.clone())).numer()).to_u64())
            .collect();
        let trace_num = trace_num.ok_or_else(|| {
            Error::ShapeError("atom traces are too large for the search scorer".into())
        })?;
        let denom_rat = BigRational::from_integer(denom);
        let trace_f64 = atoms.traces().iter().map(to_f64).collect();
        let (norms, norms_f64, eps_sq, eps_sq_f64) = match mode {
            Mode::Exact => (None, None, None, 0.0),
            Mode::Float { eps } => {
                let nf = all_norms
                    .iter()
                    .map(|cells| {
                        cells.iter().map(|row| row.iter().map(to_f64).collect()).collect()
                    })
                    .collect();
                let e2 = eps * eps;
                let e2f = to_f64(&e2);
                (Some(all_norms), Some(nf), Some(e2), e2f)
            }
        };
        Ok(Scorer {
            masks,
            norms,
            norms_f64,
            eps_sq,
            eps_sq_f64,
            trace_num,
            denom_sq: &denom_rat * &denom_rat,
            trace_f64,
        })
    }

    fn group_count(assign: &[usize]) -> usize {
        assign.iter().max().map_or(0, |g| g + 1)
    }

    /// Exact invariant value of a grouping.
    fn score_exact(&self, assign: &[usize]) -> BigRational {
        let k = Self::group_count(assign);
        let mut group_mask = vec![0u128; k];
        let mut group_trace = vec![0u64; k];
        for (a, &g) in assign.iter().enumerate() {
            group_mask[g] |= 1u128 << a;
            group_trace[g] += self.trace_num[a];
        }
        let mut total: u128 = 0;
        match &self.norms {
            None => {
                for masks in &self.masks {
                    for gi in 0..k {
                        // union of mask rows over the atoms of group gi
                        let mut row = 0u128;
                        for (a, &g) in assign.iter().enumerate() {
                            if g == gi {
                                row |= masks[a];
                            }
                        }
                        for gj in 0..k {
                            if row & group_mask[gj] != 0 {
                                total += group_trace[gi] as u128 * group_trace[gj] as u128;
                            }
                        }
                    }
                }
            }
            Some(norms) => {
                let eps_sq = self.eps_sq.as_ref().expect("float mode has a tolerance");
                for cells in norms {
                    let mut sums =
                        vec![vec![BigRational::zero(); k]; k];
                    for (a, &ga) in assign.iter().enumerate() {
                        for (b, &gb) in assign.iter().enumerate() {
                            if !cells[a][b].is_zero() {
                                sums[ga][gb] += &cells[a][b];
                            }
                        }
                    }
                    for gi in 0..k {
                        for gj in 0..k {
                            if &sums[gi][gj] > eps_sq {
                                total += group_trace[gi] as u128 * group_trace[gj] as u128;
                            }
                        }
                    }
                }
            }
        }
        BigRational::from_integer(total.into()) / &self.denom_sq
    }

    /// Fast approximate score used to drive annealing.
    fn score_f64(&self, assign: &[usize]) -> f64 {
        let k = Self::group_count(assign);
        let mut group_mask = vec![0u128; k];
        let mut group_trace = vec![0f64; k];
        for (a, &g) in assign.iter().enumerate() {
            group_mask[g] |= 1u128 << a;
            group_trace[g] += self.trace_f64[a];
        }
        let mut total = 0f64;
        match &self.norms_f64 {
            None => {
                for masks in &self.masks {
                    for gi in 0..k {
                        let mut row = 0u128;
                        for (a, &g) in assign.iter().enumerate() {
                            if g == gi {
                                row |= masks[a];
                            }
                        }
                        for gj in 0..k {
                            if row & group_mask[gj] != 0 {
                                total += group_trace[gi] * group_trace[gj];
                            }
                        }
                    }
                }
            }
            Some(norms) => {
                for cells in norms {
                    let mut sums = vec![vec![0f64; k]; k];
                    for (a, &ga) in assign.iter().enumerate() {
                        for (b, &gb) in assign.iter().enumerate() {
                            sums[ga][gb] += cells[a][b];
                        }
                    }
                    for gi in 0..k {
                        for gj in 0..k {
                            if sums[gi][gj] > self.eps_sq_f64 {
                                total += group_trace[gi] * group_trace[gj];
                            }
                        }
                    }
                }
            }
        }
        total
    }

    /// Equal-trace admissibility of a grouping.
    fn is_equal_trace(&self, assign: &[usize]) -> bool {
        let k = Self::group_count(assign);
        let mut group_trace = vec![0u64; k];
        for (a, &g) in assign.iter().enumerate() {
            group_trace[g] += self.trace_num[a];
        }
        group_trace.windows(2).all(|w| w[0] == w[1])
    }
}

/// Exact invariant value of one explicit grouping of the atoms.
pub fn grouping_value(
    xs: &[Operator],
    atoms: &Partition,
    grouping: &[usize],
    mode: &Mode,
) -> Result<BigRational> {
    for x in xs {
        ensure_same_algebra(x, atoms.part(0))?;
    }
    if grouping.len() != atoms.len() {
        return Err(Error::ShapeError(format!(
            "grouping has {} entries for {} atoms",
            grouping.len(),
            atoms.len()
        )));
    }
    let scorer = Scorer::new(xs, atoms, mode)?;
    Ok(scorer.score_exact(&canonical_rgs(grouping)))
}

/// Advances a restricted growth string; false when exhausted.
fn next_rgs(a: &mut [usize]) -> bool {
    let m = a.len();
    for i in (1..m).rev() {
        let cap = a[..i].iter().max().copied().unwrap_or(0) + 1;
        if a[i] < cap {
            a[i] += 1;
            for e in a[i + 1..].iter_mut() {
                *e = 0;
            }
            return true;
        }
    }
    false
}

/// Searches groupings of `atoms` for the smallest invariant value of `xs`.
///
/// With `part_count = Some(k)` only groupings into exactly `k` equal-trace
/// parts are admissible (the regime relevant to generation thresholds);
/// annealing under that constraint additionally requires the atoms
/// themselves to have equal traces. Returns [`Error::DomainError`] when no
/// admissible grouping exists.
pub fn minimize(
    xs: &[Operator],
    atoms: &Partition,
    mode: &Mode,
    part_count: Option<usize>,
    budget: &SearchBudget,
) -> Result<MinimizeOutcome> {
    if xs.is_empty() {
        return Err(Error::EmptyGeneratingSet);
    }
    for x in xs {
        ensure_same_algebra(x, atoms.part(0))?;
    }
    let m = atoms.len();
    if let Some(k) = part_count {
        if k == 0 || k > m {
            return Err(Error::DomainError(format!(
                "cannot group {m} atoms into {k} parts"
            )));
        }
    }
    let scorer = Scorer::new(xs, atoms, mode)?;
    let admissible = |assign: &[usize]| -> bool {
        match part_count {
            None => true,
            Some(k) => Scorer::group_count(assign) == k && scorer.is_equal_trace(assign),
        }
    };

    if m <= budget.exhaustive_cap {
        let mut assign = vec![0usize; m];
        let mut best: Option<(BigRational, Vec<usize>)> = None;
        let mut evaluations = 0u64;
        loop {
            if admissible(&assign) {
                evaluations += 1;
                let v = scorer.score_exact(&assign);
                // strict improvement keeps the lexicographically first witness
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, assign.clone()));
                }
            }
            if !next_rgs(&mut assign) {
                break;
            }
        }
        let (value, grouping) = best.ok_or_else(|| {
            Error::DomainError("no grouping satisfies the part-count constraint".into())
        })?;
        let partition = grouped_partition(atoms, &grouping)?;
        return Ok(MinimizeOutcome { value, grouping, partition, exhaustive: true, evaluations });
    }

    // annealing
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut assign: Vec<usize> = match part_count {
        None => (0..m).collect(), // the atom partition itself
        Some(k) => {
            let equal_atoms =
                scorer.trace_num.windows(2).all(|w| w[0] == w[1]);
            if !equal_atoms || m % k != 0 {
                return Err(Error::NotEqualTrace(
                    "annealing with a fixed part count needs equal-trace atoms \
                     in groups of equal size"
                        .into(),
                ));
            }
            (0..m).map(|a| a / (m / k)).collect() // contiguous equal chunks
        }
    };
    let mut current = scorer.score_f64(&assign);
    let mut best_assign = assign.clone();
    let mut best_score = current;
    let t0 = (current.abs() * 0.3).max(1e-3);
    let t_end = t0 * 1e-6;
    let alpha = (t_end / t0).powf(1.0 / budget.anneal_steps.max(1) as f64);
    let mut temp = t0;
    for _ in 0..budget.anneal_steps {
        let mut cand = assign.clone();
        match part_count {
            Some(_) => {
                // swap two atoms in different groups
                let a = rng.random_range(0..m);
                let b = rng.random_range(0..m);
                cand.swap(a, b);
            }
            None => {
                let k = Scorer::group_count(&cand);
                match rng.random_range(0..4u8) {
                    0 => {
                        // relocate one atom (possibly to a fresh group)
                        let a = rng.random_range(0..m);
                        cand[a] = rng.random_range(0..=k);
                    }
                    1 => {
                        let a = rng.random_range(0..m);
                        let b = rng.random_range(0..m);
                        cand.swap(a, b);
                    }
                    2 => {
                        // merge two groups
                        if k >= 2 {
                            let from = rng.random_range(0..k);
                            let to = rng.random_range(0..k);
                            for e in cand.iter_mut() {
                                if *e == from {
                                    *e = to;
                                }
                            }
                        }
                    }
                    _ => {
                        // split: move a random subset of one group out
                        let g = rng.random_range(0..k);
                        for e in cand.iter_mut() {
                            if *e == g && rng.random_bool(0.5) {
                                *e = k;
                            }
                        }
                    }
                }
            }
        }
        let cand = canonical_rgs(&cand);
        if !admissible(&cand) {
            temp *= alpha;
            continue;
        }
        let score = scorer.score_f64(&cand);
        let delta = score - current;
        if delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp() {
            assign = cand;
            current = score;
            if current < best_score {
                best_score = current;
                best_assign = assign.clone();
            }
        }
        temp *= alpha;
    }

    // exact re-evaluation of the candidates actually worth reporting
    let mut candidates: Vec<Vec<usize>> = vec![canonical_rgs(&best_assign)];
    match part_count {
        None => {
            candidates.push((0..m).collect()); // atoms
            candidates.push(vec![0; m]); // single part
        }
        Some(k) => candidates.push((0..m).map(|a| a / (m / k)).collect()),
    }
    let mut best: Option<(BigRational, Vec<usize>)> = None;
    let mut evaluations = budget.anneal_steps;
    for c in candidates {
        if !admissible(&c) {
            continue;
        }
        evaluations += 1;
        let v = scorer.score_exact(&c);
        let better = match &best {
            None => true,
            Some((bv, bg)) => v < *bv || (v == *bv && c < *bg),
        };
        if better {
            best = Some((v, c));
        }
    }
    let (value, grouping) = best.expect("at least one candidate is admissible");
    let partition = grouped_partition(atoms, &grouping)?;
    Ok(MinimizeOutcome { value, grouping, partition, exhaustive: false, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracialAlgebra;
    use crate::scalar::{rat, Scalar};

    #[test]
    fn two_by_two_exhaustive_prefers_the_finest_partition() {
        let alg = TracialAlgebra::matrix_factor(2);
        let atoms = Partition::finest_coordinate(&alg);
        let x = Operator::coordinate_projection(&alg, &[(0, 0)]).unwrap();
        let out = minimize(&[x], &atoms, &Mode::Exact, None, &SearchBudget::default()).unwrap();
        assert!(out.exhaustive);
        assert_eq!(out.evaluations, 2); // the two groupings of two atoms
        assert_eq!(out.value, rat(1, 4));
        assert_eq!(out.grouping, vec![0, 1]);
        assert_eq!(out.partition.len(), 2);
    }

    #[test]
    fn fixed_part_count_searches_equal_trace_groupings() {
        // x = e₀₂ + e₁₃: both entries land in the single cell (A, B) under
        // the grouping {01|23}, but in two distinct cells under {02|13}
        let alg = TracialAlgebra::matrix_factor(4);
        let atoms = Partition::finest_coordinate(&alg);
        let mut x = Operator::zero(&alg);
        x.set_entry(0, 0, 2, Scalar::one());
        x.set_entry(0, 1, 3, Scalar::one());
        let out =
            minimize(&[x.clone()], &atoms, &Mode::Exact, Some(2), &SearchBudget::default())
                .unwrap();
        assert!(out.exhaustive);
        assert_eq!(out.value, rat(1, 4));
        assert_eq!(out.grouping, vec![0, 0, 1, 1]);
        // sanity: the interleaved grouping is strictly worse
        let worse = grouping_value(&[x], &atoms, &[0, 1, 0, 1], &Mode::Exact).unwrap();
        assert_eq!(worse, rat(2, 4));
    }

    #[test]
    fn annealing_matches_exhaustive_on_a_planted_block_instance() {
        // plant a permutation-hidden 2-block structure on 6 atoms
        let alg = TracialAlgebra::matrix_factor(6);
        let atoms = Partition::finest_coordinate(&alg);
        let groups = [0usize, 1, 0, 1, 0, 1];
        let mut x = Operator::zero(&alg);
        for i in 0..6 {
            for j in 0..6 {
                if groups[i] == groups[j] && i != j {
                    x.set_entry(0, i, j, Scalar::one());
                }
            }
        }
        let exhaustive = minimize(
            &[x.clone()],
            &atoms,
            &Mode::Exact,
            Some(2),
            &SearchBudget::default(),
        )
        .unwrap();
        assert!(exhaustive.exhaustive);
        assert_eq!(exhaustive.value, rat(2, 4));
        let annealed = minimize(
            &[x],
            &atoms,
            &Mode::Exact,
            Some(2),
            &SearchBudget { exhaustive_cap: 0, anneal_steps: 4000, seed: 7 },
        )
        .unwrap();
        assert!(!annealed.exhaustive);
        assert_eq!(annealed.value, exhaustive.value);
    }

    #[test]
    fn float_mode_grouping_can_light_up_cells() {
        // four tiny entries, each below eps, in one off-diagonal 2×2 cell:
        // atoms see nothing, the 2-part grouping sees one cell
        let alg = TracialAlgebra::matrix_factor(4);
        let atoms = Partition::finest_coordinate(&alg);
        let mut x = Operator::zero(&alg);
        for i in 0..2 {
            for j in 2..4 {
                x.set_entry(0, i, j, Scalar::from_re(rat(1, 100)));
            }
        }
        let mode = Mode::float(rat(1, 120));
        let fine = grouping_value(&[x.clone()], &atoms, &[0, 1, 2, 3], &mode).unwrap();
        assert_eq!(fine, rat(0, 1));
        let coarse = grouping_value(&[x], &atoms, &[0, 0, 1, 1], &mode).unwrap();
        assert_eq!(coarse, rat(1, 4));
    }

    #[test]
    fn impossible_constraints_are_domain_errors() {
        let alg = TracialAlgebra::matrix_factor(3);
        let atoms = Partition::finest_coordinate(&alg);
        let x = Operator::identity(&alg);
        assert!(matches!(
            minimize(&[x.clone()], &atoms, &Mode::Exact, Some(5), &SearchBudget::default()),
            Err(Error::DomainError(_))
        ));
        // 3 equal atoms cannot form 2 equal-trace groups
        assert!(matches!(
            minimize(&[x], &atoms, &Mode::Exact, Some(2), &SearchBudget::default()),
            Err(Error::DomainError(_))
        ));
    }
}
