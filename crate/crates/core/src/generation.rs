//! Collapsing a family to few self-adjoint generators.
//!
//! Given a family `X = (x_1, …, x_n)` and an equal-trace partition `P` with
//! `k` parts, a small invariant value means the support triples
//! `T = {(i, j, l) : p_i x_l p_j ≠ 0}` are few. When
//!
//! ```text
//! 𝓘(X; P)  <  n/2 − (n+2)/(2k) + 1/k²      (⟺ |T| < slot capacity)
//! ```
//!
//! every triple can be stowed in its own off-diagonal *slot*: the slot pool
//! offers all pairs `(s, t)`, `s < t ≤ k−1`, for each of the first `n−1`
//! carriers and the pairs with `t ≤ k−2` for the last one (0-based; the last
//! carrier must avoid the final partition index). The carrier elements
//!
//! ```text
//! y_r = Σ_{φ(i,j,l) = (r,(s,t))} e_{s,i} x_l e_{j,t} + e_{t,j} x_l* e_{i,s}
//! ```
//!
//! are self-adjoint, store `p_i x_l p_j` retrievably (`p_i x_l p_j =
//! e_{i,s} y_r e_{t,j}`), and the last one is annihilated by the corner
//! projection `e_{k−1,k−1}`. The final generating set
//!
//! ```text
//! { y_1, …, y_{n−1},  y_n + λ·e_{k−1,k−1},  Σ_i (e_{i,i+1} + e_{i+1,i}) }
//! ```
//!
//! (with rational `λ` exceeding the norm of `y_n`, so the corner projection
//! is a spectral projection of the perturbed carrier) generates the same
//! von Neumann algebra as `X` together with the matrix units of `P`. Instead
//! of trusting the spectral argument, [`verify_certificate`] certifies the
//! containments *exactly* by closing linear spans on both sides.

use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::{Mode, Operator};
use crate::error::{Error, Result};
use crate::invariant::invariant_family;
use crate::partition::Partition;
use crate::scalar::rat;
use crate::span::span_closure;
use crate::units::matrix_units;

pub use crate::check::NamedCheck;

/// The invariant threshold below which the slot construction exists:
/// `n/2 − (n+2)/(2k) + 1/k²`.
pub fn generation_threshold(n: usize, k: usize) -> BigRational {
    let (n, k) = (n as i64, k as i64);
    rat(n, 2) - rat(n + 2, 2 * k) + rat(1, k * k)
}

/// Number of available slots: all `s < t ≤ k−1` for the first `n−1`
/// carriers plus `s < t ≤ k−2` for the last (0-based indices).
pub fn slot_capacity(n: usize, k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    let pairs = k * (k - 1) / 2;
    let short = (k - 1) * (k - 2) / 2;
    (n - 1) * pairs + short
}

/// The slot pool of carrier `r` (0-based, `r < n`), in lexicographic order.
fn slots_for(r: usize, n: usize, k: usize) -> Vec<(usize, usize)> {
    let t_max = if r + 1 == n { k.saturating_sub(1) } else { k };
    let mut out = Vec::new();
    for s in 0..t_max {
        for t in (s + 1)..t_max {
            out.push((s, t));
        }
    }
    out
}

/// Everything needed to audit one run of the construction.
#[derive(Clone, Debug)]
pub struct GenerationCertificate {
    /// Family size `n`.
    pub n: usize,
    /// Partition size `k`.
    pub k: usize,
    /// Matrix units `e_{ij}` subordinate to the partition.
    pub units: Vec<Vec<Operator>>,
    /// Support triples `(i, j, l)`, sorted by `(l, i, j)`.
    pub triples: Vec<(usize, usize, usize)>,
    /// Slot assignment per triple: `(r, (s, t))`, same order as `triples`.
    pub assignment: Vec<(usize, (usize, usize))>,
    /// The carriers `y_1, …, y_n` (index `r` ↦ `y_{r+1}`).
    pub carriers: Vec<Operator>,
    /// The spectral offset, `1` plus the squared entrywise norm of the last
    /// carrier.
    pub lambda: BigRational,
    /// The final generating set (`n+1` self-adjoint elements).
    pub final_generators: Vec<Operator>,
}

/// Squared entrywise (unnormalized Frobenius) norm; dominates the squared
/// operator norm.
fn entrywise_norm_sq(x: &Operator) -> BigRational {
    let mut acc = BigRational::zero();
    for blk in x.blocks_data() {
        for row in blk {
            for e in row {
                if !e.is_zero() {
                    acc += e.abs_sq();
                }
            }
        }
    }
    acc
}

/// Sorted support triples of a family (mode-aware).
fn support_triples(
    xs: &[Operator],
    partition: &Partition,
    mode: &Mode,
) -> Result<Vec<(usize, usize, usize)>> {
    let inv = invariant_family(xs, partition, mode)?;
    let mut triples = Vec::with_capacity(inv.triple_count);
    for (l, pat) in inv.patterns.iter().enumerate() {
        for (i, row) in pat.iter().enumerate() {
            for (j, &hit) in row.iter().enumerate() {
                if hit {
                    triples.push((i, j, l));
                }
            }
        }
    }
    triples.sort_by_key(|&(i, j, l)| (l, i, j));
    Ok(triples)
}

/// Runs the slot construction, or reports [`Error::ThresholdViolated`] when
/// the support does not fit.
pub fn run_generation(
    xs: &[Operator],
    partition: &Partition,
    mode: &Mode,
) -> Result<GenerationCertificate> {
    if xs.is_empty() {
        return Err(Error::EmptyGeneratingSet);
    }
    partition.ensure_equal_trace()?;
    let n = xs.len();
    let k = partition.len();
    let triples = support_triples(xs, partition, mode)?;
    let capacity = slot_capacity(n, k);
    if triples.len() >= capacity {
        return Err(Error::ThresholdViolated(format!(
            "support has {} triples but only {capacity} slots exist \
             (invariant {} vs threshold {})",
            triples.len(),
            invariant_family(xs, partition, mode)?.value,
            generation_threshold(n, k)
        )));
    }
    let units = matrix_units(partition)?;

    // greedy assignment: carriers in order, slots in lexicographic order
    let mut slot_stream: Vec<(usize, (usize, usize))> = Vec::with_capacity(capacity);
    for r in 0..n {
        for st in slots_for(r, n, k) {
            slot_stream.push((r, st));
        }
    }
    let assignment: Vec<(usize, (usize, usize))> =
        slot_stream.into_iter().take(triples.len()).collect();

    let algebra = partition.algebra();
    let mut carriers = vec![Operator::zero(algebra); n];
    for (&(i, j, l), &(r, (s, t))) in triples.iter().zip(&assignment) {
        let fwd = units[s][i].mul(&xs[l]).mul(&units[j][t]);
        let bwd = fwd.adjoint(); // = e_{t,j} x_l* e_{i,s}
        carriers[r] = carriers[r].add(&fwd).add(&bwd);
    }

    let lambda = BigRational::from_integer(1.into()) + entrywise_norm_sq(&carriers[n - 1]);
    let corner = &units[k - 1][k - 1];
    let mut final_generators: Vec<Operator> = carriers[..n - 1].to_vec();
    final_generators.push(carriers[n - 1].add(&corner.scale_rat(&lambda)));
    let mut ladder = Operator::zero(algebra);
    for i in 0..k - 1 {
        ladder = ladder.add(&units[i][i + 1]).add(&units[i + 1][i]);
    }
    final_generators.push(ladder);

    Ok(GenerationCertificate {
        n,
        k,
        units,
        triples,
        assignment,
        carriers,
        lambda,
        final_generators,
    })
}

/// Audits a certificate against the instance it claims to describe.
///
/// Every check is exact arithmetic; the list always contains all checks (a
/// failing early check does not stop later ones unless data is missing).
pub fn verify_certificate(
    cert: &GenerationCertificate,
    xs: &[Operator],
    partition: &Partition,
    mode: &Mode,
) -> Result<Vec<NamedCheck>> {
    let mut checks = Vec::new();
    let exact = Mode::Exact;
    let n = cert.n;
    let k = cert.k;
    let shape_ok = n == xs.len()
        && k == partition.len()
        && cert.units.len() == k
        && cert.units.iter().all(|row| row.len() == k)
        && cert.carriers.len() == n
        && cert.final_generators.len() == n + 1
        && cert.assignment.len() == cert.triples.len();
    checks.push(NamedCheck::new(
        "shape",
        shape_ok,
        format!("n={n}, k={k}, |T|={}", cert.triples.len()),
    ));
    if !shape_ok {
        return Ok(checks);
    }

    // threshold
    let inv = invariant_family(xs, partition, mode)?;
    let threshold = generation_threshold(n, k);
    let capacity = slot_capacity(n, k);
    checks.push(NamedCheck::new(
        "threshold",
        inv.value < threshold && cert.triples.len() < capacity,
        format!(
            "invariant {} vs threshold {threshold}; {} of {capacity} slots used",
            inv.value,
            cert.triples.len()
        ),
    ));

    // matrix unit relations (a generating set of them)
    let mut units_ok = true;
    for i in 0..k {
        units_ok &= cert.units[i][i].approx_eq(partition.part(i), &exact);
        units_ok &= cert.units[0][i].mul(&cert.units[i][0]).approx_eq(&cert.units[0][0], &exact);
        for j in 0..k {
            units_ok &= cert.units[i][j].adjoint().approx_eq(&cert.units[j][i], &exact);
            units_ok &= cert.units[i][0]
                .mul(&cert.units[0][j])
                .approx_eq(&cert.units[i][j], &exact);
            if i != j {
                units_ok &= cert.units[0][i].mul(&cert.units[j][0]).is_zero(&exact);
            }
        }
    }
    checks.push(NamedCheck::new(
        "matrix_unit_relations",
        units_ok,
        "e_ii = p_i, e_ij* = e_ji, e_i0·e_0j = e_ij, e_0i·e_j0 = δ_ij·e_00",
    ));

    // support triples match the instance
    let recomputed = support_triples(xs, partition, mode)?;
    checks.push(NamedCheck::new(
        "support_triples",
        recomputed == cert.triples,
        format!("{} triples recomputed", recomputed.len()),
    ));

    // slot assignment: in range, injective, greedy order not required
    let mut slots_ok = cert.assignment.len() < capacity + 1;
    let mut seen = std::collections::BTreeSet::new();
    for &(r, (s, t)) in &cert.assignment {
        let pool = slots_for(r, n, k);
        slots_ok &= r < n && pool.contains(&(s, t)) && seen.insert((r, s, t));
    }
    checks.push(NamedCheck::new(
        "slot_assignment",
        slots_ok,
        "slots are valid for their carriers and pairwise distinct",
    ));

    // carriers are self-adjoint
    let sa = cert.carriers.iter().all(|y| y.is_self_adjoint(&exact));
    checks.push(NamedCheck::new("carriers_self_adjoint", sa, "y_r = y_r*"));

    // reconstruction: x_l = Σ e_{i,s} y_r e_{t,j} over the triples of l
    let algebra = partition.algebra();
    let mut recon_ok = true;
    let mut rebuilt = vec![Operator::zero(algebra); n];
    for (&(i, j, l), &(r, (s, t))) in cert.triples.iter().zip(&cert.assignment) {
        let piece = cert.units[i][s].mul(&cert.carriers[r]).mul(&cert.units[t][j]);
        rebuilt[l] = rebuilt[l].add(&piece);
    }
    for (x, re) in xs.iter().zip(&rebuilt) {
        recon_ok &= x.approx_eq(re, mode);
    }
    checks.push(NamedCheck::new(
        "reconstruction",
        recon_ok,
        "x_l = Σ e_{i,s} y_r e_{t,j} over its triples",
    ));

    // λ strictly dominates the entrywise norm of the last carrier (which
    // dominates its operator norm)
    let fro = entrywise_norm_sq(&cert.carriers[n - 1]);
    let lambda_ok = cert.lambda.clone() * cert.lambda.clone() > fro
        && cert.lambda > BigRational::zero();
    checks.push(NamedCheck::new(
        "lambda_dominates",
        lambda_ok,
        format!("λ = {} vs squared entrywise norm {fro}", cert.lambda),
    ));

    // the last carrier is annihilated by the corner projection
    let corner = &cert.units[k - 1][k - 1];
    let ann = corner.mul(&cert.carriers[n - 1]).is_zero(&exact)
        && cert.carriers[n - 1].mul(corner).is_zero(&exact);
    checks.push(NamedCheck::new(
        "corner_annihilation",
        ann,
        "e_{k-1,k-1} · y_n = y_n · e_{k-1,k-1} = 0",
    ));

    let final_sa = cert.final_generators.iter().all(|g| g.is_self_adjoint(&exact));
    checks.push(NamedCheck::new(
        "final_generators_self_adjoint",
        final_sa,
        "all final generators are self-adjoint",
    ));

    // the final generators are assembled from the carriers as promised
    let mut ladder = Operator::zero(algebra);
    for i in 0..k - 1 {
        ladder = ladder.add(&cert.units[i][i + 1]).add(&cert.units[i + 1][i]);
    }
    let mut assembled = cert.carriers[..n - 1].to_vec();
    assembled.push(cert.carriers[n - 1].add(&corner.scale_rat(&cert.lambda)));
    assembled.push(ladder);
    let assembly_ok = assembled
        .iter()
        .zip(&cert.final_generators)
        .all(|(a, b)| a.approx_eq(b, &exact));
    checks.push(NamedCheck::new(
        "assembly",
        assembly_ok,
        "final generators are the carriers, the λ-shifted last carrier, and the ladder",
    ));

    // generation: the final generators span (with the unit) everything the
    // family and the matrix units span, and vice versa
    let id = Operator::identity(algebra);
    let mut few = cert.final_generators.clone();
    few.push(id.clone());
    let few_span = span_closure(&few, None)?;
    let mut full = xs.to_vec();
    for row in &cert.units {
        full.extend(row.iter().cloned());
    }
    full.push(id);
    let full_span = span_closure(&full, None)?;
    let contains_all = xs.iter().all(|x| few_span.contains(x))
        && cert.units.iter().all(|row| row.iter().all(|e| few_span.contains(e)));
    let gen_ok = contains_all && few_span.dim() == full_span.dim();
    checks.push(NamedCheck::new(
        "generation",
        gen_ok,
        format!(
            "span dim {} from {} final generators vs {} from the family and units",
            few_span.dim(),
            cert.final_generators.len(),
            full_span.dim()
        ),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracialAlgebra;
    use crate::scalar::{rat, Scalar};

    fn assert_all_pass(checks: &[NamedCheck]) {
        for c in checks {
            assert!(c.passed, "check {} failed: {}", c.name, c.detail);
        }
    }

    #[test]
    fn threshold_matches_slot_capacity() {
        for n in 1..6usize {
            for k in 2..9usize {
                let thr = generation_threshold(n, k);
                let cap = slot_capacity(n, k);
                // |T| < k²·threshold ⟺ |T| < capacity, via k²·thr = cap
                let k2 = rat((k * k) as i64, 1);
                assert_eq!(thr * k2, rat(cap as i64, 1), "n={n} k={k}");
                // and the explicit pair count agrees
                assert_eq!(
                    cap,
                    (n - 1) * k * (k - 1) / 2 + (k - 1) * (k - 2) / 2
                );
            }
        }
        assert_eq!(generation_threshold(1, 3), rat(1, 9));
    }

    #[test]
    fn single_sparse_element_in_m4_generates() {
        let alg = TracialAlgebra::matrix_factor(4);
        let p = Partition::finest_coordinate(&alg);
        let x = Operator::matrix_unit(&alg, 0, 0, 1);
        let cert = run_generation(&[x.clone()], &p, &Mode::Exact).unwrap();
        assert_eq!(cert.triples, vec![(0, 1, 0)]);
        assert_eq!(cert.assignment, vec![(0, (0, 1))]);
        assert_eq!(cert.final_generators.len(), 2);
        let checks = verify_certificate(&cert, &[x], &p, &Mode::Exact).unwrap();
        assert_all_pass(&checks);
    }

    #[test]
    fn two_element_family_in_m5_generates() {
        let alg = TracialAlgebra::matrix_factor(5);
        let p = Partition::finest_coordinate(&alg);
        let xs = vec![
            Operator::matrix_unit(&alg, 0, 0, 1),
            Operator::matrix_unit(&alg, 0, 2, 3),
        ];
        let cert = run_generation(&xs, &p, &Mode::Exact).unwrap();
        assert_eq!(cert.final_generators.len(), 3);
        let checks = verify_certificate(&cert, &xs, &p, &Mode::Exact).unwrap();
        assert_all_pass(&checks);
    }

    #[test]
    fn saturated_support_is_rejected() {
        // n=1, k=3: capacity is 1, and a single matrix unit already has one
        // triple, so the strict inequality fails
        let alg = TracialAlgebra::matrix_factor(3);
        let p = Partition::finest_coordinate(&alg);
        let x = Operator::matrix_unit(&alg, 0, 0, 1);
        assert!(matches!(
            run_generation(&[x], &p, &Mode::Exact),
            Err(Error::ThresholdViolated(_))
        ));
        // dense elements exceed any slot pool
        let alg = TracialAlgebra::matrix_factor(4);
        let p = Partition::finest_coordinate(&alg);
        let mut dense = Operator::zero(&alg);
        for i in 0..4 {
            for j in 0..4 {
                dense.set_entry(0, i, j, Scalar::one());
            }
        }
        assert!(matches!(
            run_generation(&[dense], &p, &Mode::Exact),
            Err(Error::ThresholdViolated(_))
        ));
    }

    #[test]
    fn rotated_partitions_work_through_exact_units() {
        // conjugate everything in M₄ by a rational rotation and rerun
        let alg = TracialAlgebra::matrix_factor(4);
        let mut u = Operator::identity(&alg);
        u.set_entry(0, 1, 1, Scalar::from_re(rat(3, 5)));
        u.set_entry(0, 1, 2, Scalar::from_re(rat(-4, 5)));
        u.set_entry(0, 2, 1, Scalar::from_re(rat(4, 5)));
        u.set_entry(0, 2, 2, Scalar::from_re(rat(3, 5)));
        let base = Partition::finest_coordinate(&alg);
        let parts: Vec<Operator> =
            base.parts().iter().map(|p| u.mul(p).mul(&u.adjoint())).collect();
        let p = Partition::new(parts, &Mode::Exact).unwrap();
        let x = u.mul(&Operator::matrix_unit(&alg, 0, 0, 1)).mul(&u.adjoint());
        let cert = run_generation(&[x.clone()], &p, &Mode::Exact).unwrap();
        let checks = verify_certificate(&cert, &[x], &p, &Mode::Exact).unwrap();
        assert_all_pass(&checks);
    }

    #[test]
    fn tampered_certificates_fail_their_checks() {
        let alg = TracialAlgebra::matrix_factor(4);
        let p = Partition::finest_coordinate(&alg);
        let x = Operator::matrix_unit(&alg, 0, 0, 1);
        let mut cert = run_generation(&[x.clone()], &p, &Mode::Exact).unwrap();
        // a slot-cell corruption breaks reconstruction
        let mut tampered = cert.clone();
        tampered.carriers[0] =
            cert.carriers[0].add(&Operator::matrix_unit(&alg, 0, 0, 1));
        let checks = verify_certificate(&tampered, &[x.clone()], &p, &Mode::Exact).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
        let recon = checks.iter().find(|c| c.name == "reconstruction").unwrap();
        assert!(!recon.passed);
        // an off-slot corruption is still caught, by the assembly check
        cert.carriers[0] = cert.carriers[0].add(&Operator::matrix_unit(&alg, 0, 2, 2));
        let checks = verify_certificate(&cert, &[x], &p, &Mode::Exact).unwrap();
        let assembly = checks.iter().find(|c| c.name == "assembly").unwrap();
        assert!(!assembly.passed);
    }
}
