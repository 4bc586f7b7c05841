//! Acceptance suite: eleven end-to-end checks, one test (and one
//! pass/fail line) each. Every assertion is exact rational arithmetic;
//! the two timed suites also enforce their wall-clock budgets.

use std::time::{Duration, Instant};

use num_traits::Zero;

use geninv_core::algebra::{Block, Mode, Operator, TracialAlgebra};
use geninv_core::bounds::{delta0_hyperfinite, HyperfiniteSpec};
use geninv_core::check::NamedCheck;
use geninv_core::error::Error;
use geninv_core::generation::{run_generation, slot_capacity, verify_certificate};
use geninv_core::invariant::{
    commutes_with_partition, invariant_family, invariant_single, refinement_values,
};
use geninv_core::minimize::{minimize, SearchBudget};
use geninv_core::partition::Partition;
use geninv_core::random::{
    coarsening_chain, conjugate, conjugate_partition, random_equal_trace_partition,
    random_family, random_operator, random_rational_unitary, rng_from_seed,
};
use geninv_core::scalar::{rat, rat_int, Scalar};
use geninv_core::scaling::{amplify, compress};
use geninv_core::selfadjoint::{hermitianization_sandwich, split_sa};
use geninv_core::span::span_dimension;
use rand::Rng;

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn assert_all(checks: &[NamedCheck], context: &str) {
    for c in checks {
        assert!(c.passed, "{context}: check {} failed: {}", c.name, c.detail);
    }
}

/// Criterion 1 — on ≥1000 random instances over equal-trace partitions,
/// the trace-product summation equals the cell count divided by k²;
/// exact, under 10 seconds.
#[test]
fn c01_definition_matches_cell_count_on_equal_trace_partitions() {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xC01);
    for trial in 0..1000 {
        let rotate = trial % 7 == 0;
        let d = if rotate { rng.random_range(2..=6) } else { rng.random_range(2..=12) };
        let alg = TracialAlgebra::matrix_factor(d);
        let ks = divisors(d);
        let k = ks[rng.random_range(0..ks.len())];
        let mut partition = random_equal_trace_partition(&mut rng, &alg, k).unwrap();
        let ops = rng.random_range(1..=4);
        let mut family = random_family(&mut rng, &alg, ops, &rat(1, 3), false).unwrap();
        if rotate {
            let u = random_rational_unitary(&mut rng, &alg, 8);
            family = family.iter().map(|x| conjugate(&u, x)).collect();
            partition = conjugate_partition(&u, &partition, &Mode::Exact).unwrap();
        }
        let inv = invariant_family(&family, &partition, &Mode::Exact).unwrap();
        let expected = rat_int(inv.triple_count as i64) / rat_int((k * k) as i64);
        assert_eq!(inv.value, expected, "trial {trial}: value differs from |T|/k²");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "suite took {elapsed:?}");
    println!("PASS c01: 1000 instances, trace summation = |T|/k² exactly ({elapsed:?})");
}

/// Criterion 2 — value bounds, star invariance, commutant bound,
/// subadditivity, and the hermitianization sandwich, ≥1000 instances
/// each, exact.
#[test]
fn c02_remark_suite_holds_on_random_instances() {
    let mut rng = rng_from_seed(0xC02);
    for trial in 0..1000u64 {
        let alg = if trial % 9 == 0 {
            TracialAlgebra::new(vec![
                Block { dim: rng.random_range(1..=3), weight: rat(1, 2) },
                Block { dim: rng.random_range(2..=4), weight: rat(1, 2) },
            ])
            .unwrap()
        } else {
            TracialAlgebra::matrix_factor(rng.random_range(2..=8))
        };
        let atom_count: usize = alg.blocks().iter().map(|b| b.dim).sum();
        let k = rng.random_range(1..=atom_count);
        let partition =
            geninv_core::random::random_coordinate_partition(&mut rng, &alg, k).unwrap();
        let n = rng.random_range(1..=3);
        let family = random_family(&mut rng, &alg, n, &rat(1, 3), false).unwrap();
        let inv = invariant_family(&family, &partition, &Mode::Exact).unwrap();

        // 0 ≤ 𝓘(X;P) ≤ |X|
        assert!(inv.value >= rat_int(0) && inv.value <= rat_int(n as i64), "trial {trial}");

        // 𝓘(X*;P) = 𝓘(X;P)
        let adjoints: Vec<Operator> = family.iter().map(Operator::adjoint).collect();
        let star = invariant_family(&adjoints, &partition, &Mode::Exact).unwrap().value;
        assert_eq!(star, inv.value, "trial {trial}: star invariance");

        // 𝓘(z₁+z₂;P) ≤ 𝓘(z₁;P) + 𝓘(z₂;P)
        let z1 = &family[0];
        let z2 = family.last().unwrap();
        let sum = invariant_single(&z1.add(z2), &partition, &Mode::Exact).unwrap();
        let parts = invariant_single(z1, &partition, &Mode::Exact).unwrap()
            + invariant_single(z2, &partition, &Mode::Exact).unwrap();
        assert!(sum <= parts, "trial {trial}: subadditivity");

        // commutant bound, general form: 𝓘(z;P) ≤ k·max τ(p)²
        let y = random_operator(&mut rng, &alg, &rat(1, 2), false).unwrap();
        let mut z = Operator::zero(&alg);
        for p in partition.parts() {
            z = z.add(&p.mul(&y).mul(p));
        }
        assert!(commutes_with_partition(&z, &partition, &Mode::Exact));
        let zi = invariant_single(&z, &partition, &Mode::Exact).unwrap();
        let cap = partition
            .parts()
            .iter()
            .map(|p| {
                let t = p.trace_re();
                &t * &t
            })
            .max()
            .unwrap();
        assert!(zi <= rat_int(partition.len() as i64) * cap, "trial {trial}: commutant");

        // 𝓘(X;P) ≤ 𝓘(Y;P) ≤ 4𝓘(X;P) with both halves ≤ 2𝓘(X;P)
        // (violations surface as errors)
        hermitianization_sandwich(&family, &partition, &Mode::Exact).unwrap();
    }

    // the sharpened commutant bound 1/k needs equal traces
    let mut rng = rng_from_seed(0x2C02);
    for trial in 0..1000 {
        let d = [4usize, 6, 8, 9, 10, 12][trial % 6];
        let alg = TracialAlgebra::matrix_factor(d);
        let ks = divisors(d);
        let k = ks[rng.random_range(0..ks.len())];
        let partition = random_equal_trace_partition(&mut rng, &alg, k).unwrap();
        let y = random_operator(&mut rng, &alg, &rat(1, 2), false).unwrap();
        let mut z = Operator::zero(&alg);
        for p in partition.parts() {
            z = z.add(&p.mul(&y).mul(p));
        }
        let zi = invariant_single(&z, &partition, &Mode::Exact).unwrap();
        assert!(zi <= rat(1, k as i64), "trial {trial}: equal-trace commutant");
    }
    println!("PASS c02: bounds, star, commutant, subadditivity, sandwich on 1000 instances each");
}

/// Criterion 3 — the invariant is monotone along ≥500 random refinement
/// chains of length ≥ 3.
#[test]
fn c03_refinement_chains_are_monotone() {
    let mut rng = rng_from_seed(0xC03);
    for trial in 0..500usize {
        let d = rng.random_range(4..=12);
        let alg = TracialAlgebra::matrix_factor(d);
        let len = 3 + trial % 2;
        let mut counts: Vec<usize> = Vec::new();
        while counts.len() < len {
            let c = rng.random_range(1..=d);
            if !counts.contains(&c) {
                counts.push(c);
            }
        }
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let chain = coarsening_chain(&mut rng, &alg, &counts).unwrap();
        let n = rng.random_range(1..=3);
        let family = random_family(&mut rng, &alg, n, &rat(1, 3), false).unwrap();
        for w in chain.windows(2) {
            // w[0] refines w[1]; refining can only shrink the value
            let (coarse, fine) =
                refinement_values(&family, &w[1], &w[0], &Mode::Exact).unwrap();
            assert!(fine <= coarse, "trial {trial}: chain not monotone");
        }
    }
    println!("PASS c03: 500 refinement chains of length ≥ 3, all monotone");
}

/// Draws `count` distinct support triples `(i, j, l)` and the family they
/// describe: `x_l` carries a small multiple of `e_{ij}` per triple.
fn planted_family(
    rng: &mut rand_chacha::ChaCha8Rng,
    alg: &std::sync::Arc<TracialAlgebra>,
    n: usize,
    k: usize,
    count: usize,
) -> Vec<Operator> {
    let mut triples: Vec<(usize, usize, usize)> = Vec::with_capacity(count);
    // every element gets at least one cell
    for l in 0..n.min(count) {
        triples.push((rng.random_range(0..k), rng.random_range(0..k), l));
    }
    while triples.len() < count {
        let t = (rng.random_range(0..k), rng.random_range(0..k), rng.random_range(0..n));
        if !triples.contains(&t) {
            triples.push(t);
        }
    }
    let mut family = vec![Operator::zero(alg); n];
    for &(i, j, l) in &triples {
        let c = Scalar::new(rat(rng.random_range(1..=3), 1), rat(rng.random_range(0..=2), 1));
        let mut unit = Operator::matrix_unit(alg, 0, i, j);
        unit = unit.scale(&c);
        family[l] = family[l].add(&unit);
    }
    family
}

/// Criterion 4 — ≥100 random below-threshold instances run the slot
/// construction end to end; every certificate verifies and the final
/// generators span the full k² dimensions; under 60 seconds.
#[test]
fn c04_generation_certificates_verify_end_to_end() {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xC04);
    for trial in 0..100usize {
        let k = rng.random_range(5..=9);
        let n = 1 + trial % 2;
        let alg = TracialAlgebra::matrix_factor(k);
        let partition = Partition::finest_coordinate(&alg);
        let cap = slot_capacity(n, k);
        let count = rng.random_range(1..cap);
        let family = planted_family(&mut rng, &alg, n, k, count);
        let cert = run_generation(&family, &partition, &Mode::Exact).unwrap();
        let checks = verify_certificate(&cert, &family, &partition, &Mode::Exact).unwrap();
        assert_all(&checks, &format!("trial {trial} (k={k}, n={n}, |T|={count})"));
        let mut seed = cert.final_generators.clone();
        seed.push(Operator::identity(&alg));
        assert_eq!(
            span_dimension(&seed, None).unwrap(),
            alg.linear_dim(),
            "trial {trial}: final generators do not span"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "suite took {elapsed:?}");
    println!("PASS c04: 100 generation runs, certificates verify, spans full ({elapsed:?})");
}

/// Criterion 5 — a support pattern exactly filling the slot pool is
/// rejected with the threshold error, never a malformed certificate.
#[test]
fn c05_saturated_supports_violate_the_threshold() {
    let mut rng = rng_from_seed(0xC05);
    for k in 5..=9usize {
        for n in 1..=2usize {
            let alg = TracialAlgebra::matrix_factor(k);
            let partition = Partition::finest_coordinate(&alg);
            let family = planted_family(&mut rng, &alg, n, k, slot_capacity(n, k));
            match run_generation(&family, &partition, &Mode::Exact) {
                Err(Error::ThresholdViolated(_)) => {}
                other => panic!("k={k}, n={n}: expected a threshold error, got {other:?}"),
            }
        }
    }
    println!("PASS c05: saturated slot pools raise the threshold error for k∈[5,9], n∈[1,2]");
}

/// Criterion 6 — ≥50 compressions with ratios n ∈ {2,3} and corner sizes
/// k ∈ {2,3}: the corner and ambient values satisfy the exact n² ratio.
#[test]
fn c06_compression_satisfies_the_quadratic_ratio() {
    let mut rng = rng_from_seed(0xC06);
    let mut done = 0usize;
    while done < 52 {
        let n = 2 + done % 2;
        let k = 2 + (done / 2) % 2;
        let m = if done % 5 == 0 && n * k <= 6 { 2 } else { 1 };
        let d = n * k * m;
        let alg = TracialAlgebra::matrix_factor(d);
        let partition = random_equal_trace_partition(&mut rng, &alg, n * k).unwrap();
        let ops = rng.random_range(1..=2);
        let family = random_family(&mut rng, &alg, ops, &rat(1, 3), false).unwrap();
        let plan = compress(&family, &partition, n, &Mode::Exact).unwrap();
        assert_eq!(
            plan.corner_value,
            rat_int((n * n) as i64) * &plan.ambient_value,
            "compression {done}: ratio is not n²"
        );
        assert_eq!(plan.corner_cells, plan.ambient_cells, "quintuple counts differ");
        assert_all(&plan.verify(&Mode::Exact), &format!("compression {done}"));
        done += 1;
    }
    println!("PASS c06: 52 compressions, corner value = n² · ambient value exactly");
}

/// Criterion 7 — ≥50 amplifications of generating corner families: the
/// lifted set spans the full ambient dimension every time and the
/// reported value obeys the slack budget exactly.
#[test]
fn c07_amplification_spans_and_respects_slack() {
    let mut rng = rng_from_seed(0xC07);
    let shapes = [(4usize, 2usize), (5, 2), (6, 2), (6, 3), (7, 3), (5, 3)];
    let mut done = 0usize;
    while done < 54 {
        let (d, r) = shapes[done % shapes.len()];
        let alg = TracialAlgebra::matrix_factor(d);
        // corner: the first r coordinates, split into singletons
        let corner_parts: Vec<Operator> =
            (0..r).map(|i| Operator::matrix_unit(&alg, 0, i, i)).collect();
        // a generating pair for the corner: a cycle and a corner unit
        let mut cycle = Operator::matrix_unit(&alg, 0, r - 1, 0);
        for i in 0..r - 1 {
            cycle = cycle.add(&Operator::matrix_unit(&alg, 0, i, i + 1));
        }
        let mut family = vec![cycle, Operator::matrix_unit(&alg, 0, 0, 0)];
        if done % 3 == 0 {
            // a random extra element supported in the corner
            let y = random_operator(&mut rng, &alg, &rat(1, 2), false).unwrap();
            let p = corner_parts.iter().fold(Operator::zero(&alg), |a, q| a.add(q));
            family.push(p.mul(&y).mul(&p));
        }
        let t = rat(rng.random_range(1..=2), d as i64);
        let plan = amplify(&family, &corner_parts, &t, &Mode::Exact).unwrap();
        assert_all(&plan.verify(&Mode::Exact), &format!("amplification {done}"));
        assert_eq!(
            plan.span_dimension(None).unwrap(),
            alg.linear_dim(),
            "amplification {done}: lifted set does not span"
        );
        let budget =
            &plan.corner_value + rat_int(plan.copy_count as i64) * &plan.max_atom_trace;
        assert!(plan.value <= budget, "amplification {done}: slack exceeded");
        assert_eq!(plan.slack_bound, budget, "amplification {done}: slack bookkeeping");
        done += 1;
    }
    println!("PASS c07: 54 amplifications, full span and exact slack budget");
}

/// Criterion 8 — the exact split identity 2𝓘(Y;Q) + 𝓘(Z;Q) = 𝓘(X;Q) and
/// the reassembly x = z + y + y* on ≥1000 random self-adjoint instances.
#[test]
fn c08_self_adjoint_split_identity_holds() {
    let mut rng = rng_from_seed(0xC08);
    for trial in 0..1000usize {
        let d = [2usize, 4, 6, 8, 9, 10][trial % 6];
        let alg = TracialAlgebra::matrix_factor(d);
        let ks = divisors(d);
        let k = ks[rng.random_range(0..ks.len())];
        let partition = random_equal_trace_partition(&mut rng, &alg, k).unwrap();
        let n = rng.random_range(1..=3);
        let family = random_family(&mut rng, &alg, n, &rat(1, 2), true).unwrap();
        let split = split_sa(&family, &partition, &Mode::Exact).unwrap();
        assert_eq!(
            rat_int(2) * &split.y_value + &split.z_value,
            split.x_value,
            "trial {trial}: split identity"
        );
        for (x, (y, z)) in family.iter().zip(split.y.iter().zip(&split.z)) {
            let back = z.add(y).add(&y.adjoint());
            assert!(back.approx_eq(x, &Mode::Exact), "trial {trial}: reassembly");
        }
        assert_all(&split.verify(&Mode::Exact), &format!("trial {trial}"));
    }
    println!("PASS c08: 1000 self-adjoint splits, identity and reassembly exact");
}

/// Criterion 9 — the free-entropy calculator reproduces the matrix and
/// cyclic-group family values for n ∈ {2,…,10}.
#[test]
fn c09_free_entropy_families_match_closed_forms() {
    for n in 2..=10usize {
        let matrix = delta0_hyperfinite(&HyperfiniteSpec::matrix_block(n).unwrap());
        assert_eq!(matrix, rat_int(1) - rat(1, (n * n) as i64), "matrix family at {n}");
        let cyclic = delta0_hyperfinite(&HyperfiniteSpec::cyclic_group(n).unwrap());
        assert_eq!(cyclic, rat_int(1) - rat(1, n as i64), "cyclic family at {n}");
    }
    println!("PASS c09: free-entropy values 1 − 1/n² and 1 − 1/n for n ∈ [2,10]");
}

/// Criterion 10 — the closed dimension formula agrees with an
/// independent rank computation on ≥200 random compressions (k ≤ 12,
/// p | k), exact integer agreement.
#[test]
fn c10_range_dimension_formula_matches_rank_oracle() {
    let mut rng = rng_from_seed(0xC10);
    for trial in 0..200usize {
        let rotate = trial % 11 == 0;
        let k = if rotate { rng.random_range(2..=6) } else { rng.random_range(2..=12) };
        let ps = divisors(k);
        let p = ps[rng.random_range(0..ps.len())];
        let n = if k >= 9 { 1 } else { rng.random_range(1..=3) };
        let self_adjoint = trial % 3 == 0;
        let mut supports: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut t: Vec<(usize, usize)> = Vec::new();
            for i in 0..p {
                for j in 0..p {
                    if rng.random_range(0..3) == 0 {
                        if !t.contains(&(i, j)) {
                            t.push((i, j));
                        }
                        if self_adjoint && !t.contains(&(j, i)) {
                            t.push((j, i));
                        }
                    }
                }
            }
            supports.push(t);
        }
        let tc = if rotate {
            let alg = TracialAlgebra::matrix_factor(k);
            let u = random_rational_unitary(&mut rng, &alg, 6);
            let banded = geninv_core::entropy::TupleCompression::banded(
                k,
                p,
                supports.clone(),
                self_adjoint,
            )
            .unwrap();
            let parts = conjugate_partition(&u, banded.projections(), &Mode::Exact).unwrap();
            geninv_core::entropy::TupleCompression::with_projections(
                parts,
                supports,
                self_adjoint,
            )
            .unwrap()
        } else {
            geninv_core::entropy::TupleCompression::banded(k, p, supports, self_adjoint)
                .unwrap()
        };
        // the formula/rank comparison runs inside; disagreement errors out
        let dim = tc.range_dimension().unwrap();
        let per_cell = (k / p) * (k / p);
        let cells: usize = tc.supports().iter().map(Vec::len).sum();
        let expect = if self_adjoint { cells * per_cell } else { 2 * cells * per_cell };
        assert_eq!(dim, expect, "trial {trial}");
    }
    println!("PASS c10: 200 range dimensions, closed formula = rank oracle");
}

/// Criterion 11 — the exhaustive two-atom search on the single
/// off-diagonal matrix unit returns 1/4 with the coordinate witness.
#[test]
fn c11_known_value_matrix_unit_minimum() {
    let alg = TracialAlgebra::matrix_factor(2);
    let x = Operator::matrix_unit(&alg, 0, 0, 1);
    let atoms = Partition::finest_coordinate(&alg);
    let outcome =
        minimize(&[x], &atoms, &Mode::Exact, None, &SearchBudget::default()).unwrap();
    assert!(outcome.exhaustive, "two atoms must be searched exhaustively");
    assert_eq!(outcome.value, rat(1, 4));
    let witness = outcome.partition;
    assert_eq!(witness.len(), 2);
    for (i, part) in witness.parts().iter().enumerate() {
        assert!(
            part.approx_eq(&Operator::matrix_unit(&alg, 0, i, i), &Mode::Exact),
            "witness part {i} is not the coordinate projection"
        );
    }
    assert!(!outcome.value.is_zero());
    println!("PASS c11: exhaustive minimum 1/4 with the coordinate witness");
}
