//! Linear spans of generated *-subalgebras.
//!
//! Everything is finite dimensional, so "the von Neumann algebra generated
//! by a family" is simply the linear span of all words in the family and its
//! adjoints (plus the unit, when the caller seeds it). The closure is
//! computed by a worklist: keep an incremental row-echelon basis of the span;
//! whenever a product enlarges it, queue that product for further
//! multiplication by the (adjoint-closed) seed set. Each queued element is
//! multiplied by seeds only — never by the whole basis — which keeps the
//! number of exact matrix products at `O(|seeds| · dim)`.
//!
//! Exact rational elimination on long generator words is the one place where
//! coefficient growth hurts, so the closure runs in two tiers. A first pass
//! works over the field ℤ_p[i] for the Mersenne prime p = 2⁶¹ − 1 (p ≡ 3
//! mod 4, so i² = −1 stays irreducible): vectors independent modulo p are
//! independent over ℚ(i), hence a modular closure that reaches the full
//! ambient dimension *proves* the exact span is full, with machine-word
//! arithmetic throughout. Only when the modular pass stops short of full (or
//! a denominator happens to vanish mod p) does the exact rational closure
//! run, so reported dimensions below full are always exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::algebra::{ensure_same_algebra, Operator};
use crate::error::{Error, Result};
use crate::linalg::SpanTracker;

/// Basis data for the *-algebra span generated by a seed family.
#[derive(Debug)]
pub struct SubalgebraBasis {
    ambient: usize,
    /// `None` when the modular tier certified the span to be everything.
    tracker: Option<SpanTracker>,
    products_used: usize,
}

impl SubalgebraBasis {
    /// Linear dimension of the generated span.
    pub fn dim(&self) -> usize {
        self.tracker.as_ref().map_or(self.ambient, SpanTracker::rank)
    }

    /// Linear dimension of the ambient algebra.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// True when the span is the whole ambient algebra.
    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Membership test for the span.
    pub fn contains(&self, x: &Operator) -> bool {
        match &self.tracker {
            None => x.flatten().len() == self.ambient,
            Some(t) => t.contains(&x.flatten()),
        }
    }

    /// Number of matrix products the closure consumed.
    pub fn products_used(&self) -> usize {
        self.products_used
    }
}

/// The Mersenne prime 2⁶¹ − 1; ≡ 3 mod 4, so ℤ_p[i] is a field.
const MOD_P: u64 = (1 << 61) - 1;

fn mod_add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MOD_P {
        s - MOD_P
    } else {
        s
    }
}

fn mod_sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MOD_P - b
    }
}

fn mod_mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn mod_pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base);
        }
        base = mod_mul(base, base);
        exp >>= 1;
    }
    acc
}

fn mod_inv(a: u64) -> u64 {
    mod_pow(a, MOD_P - 2)
}

/// An element of ℤ_p[i]: real and imaginary residues.
type CMod = (u64, u64);

fn cmod_is_zero(x: &CMod) -> bool {
    x.0 == 0 && x.1 == 0
}

fn cmod_mul(x: &CMod, y: &CMod) -> CMod {
    (
        mod_sub(mod_mul(x.0, y.0), mod_mul(x.1, y.1)),
        mod_add(mod_mul(x.0, y.1), mod_mul(x.1, y.0)),
    )
}

fn cmod_sub(x: &CMod, y: &CMod) -> CMod {
    (mod_sub(x.0, y.0), mod_sub(x.1, y.1))
}

fn cmod_add(x: &CMod, y: &CMod) -> CMod {
    (mod_add(x.0, y.0), mod_add(x.1, y.1))
}

/// Inverse in ℤ_p[i] via the norm a² + b² (nonzero for nonzero inputs
/// because −1 is not a square mod p).
fn cmod_inv(x: &CMod) -> CMod {
    let nsq = mod_add(mod_mul(x.0, x.0), mod_mul(x.1, x.1));
    let inv = mod_inv(nsq);
    (mod_mul(x.0, inv), mod_mul(mod_sub(0, x.1), inv))
}

fn bigint_mod(n: &BigInt) -> u64 {
    n.mod_floor(&BigInt::from(MOD_P)).to_u64().expect("residue fits in u64")
}

/// Residue of a rational, or `None` when the denominator vanishes mod p.
fn rational_mod(r: &num_rational::BigRational) -> Option<u64> {
    let den = bigint_mod(r.denom());
    if den == 0 {
        return None;
    }
    Some(mod_mul(bigint_mod(r.numer()), mod_inv(den)))
}

fn scalar_mod(s: &crate::scalar::Scalar) -> Option<CMod> {
    Some((rational_mod(&s.re)?, rational_mod(&s.im)?))
}

/// A block-diagonal matrix over ℤ_p[i], mirroring an [`Operator`]'s shape.
#[derive(Clone)]
struct ModOp(Vec<Vec<Vec<CMod>>>);

fn op_to_mod(x: &Operator) -> Option<ModOp> {
    let mut blocks = Vec::new();
    for blk in x.blocks_data() {
        let mut rows = Vec::with_capacity(blk.len());
        for row in blk {
            let mut out = Vec::with_capacity(row.len());
            for e in row {
                out.push(scalar_mod(e)?);
            }
            rows.push(out);
        }
        blocks.push(rows);
    }
    Some(ModOp(blocks))
}

fn modop_mul(a: &ModOp, b: &ModOp) -> ModOp {
    let mut blocks = Vec::with_capacity(a.0.len());
    for (ab, bb) in a.0.iter().zip(&b.0) {
        let n = ab.len();
        let mut out = vec![vec![(0u64, 0u64); n]; n];
        for i in 0..n {
            for (l, al) in ab[i].iter().enumerate() {
                if cmod_is_zero(al) {
                    continue;
                }
                for j in 0..n {
                    let t = cmod_mul(al, &bb[l][j]);
                    out[i][j] = cmod_add(&out[i][j], &t);
                }
            }
        }
        blocks.push(out);
    }
    ModOp(blocks)
}

fn modop_flatten(a: &ModOp) -> Vec<CMod> {
    let mut v = Vec::new();
    for blk in &a.0 {
        for row in blk {
            v.extend(row.iter().copied());
        }
    }
    v
}

/// Row-echelon rank tracker over ℤ_p[i] with machine-word arithmetic.
struct ModTracker {
    dim: usize,
    rows: Vec<(usize, Vec<CMod>)>,
}

impl ModTracker {
    fn new(dim: usize) -> Self {
        ModTracker { dim, rows: Vec::new() }
    }

    fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn insert(&mut self, mut v: Vec<CMod>) -> bool {
        for (pivot, row) in &self.rows {
            if !cmod_is_zero(&v[*pivot]) {
                let c = v[*pivot];
                for (ve, re) in v.iter_mut().zip(row) {
                    if !cmod_is_zero(re) {
                        let t = cmod_mul(&c, re);
                        *ve = cmod_sub(ve, &t);
                    }
                }
            }
        }
        let Some(pivot) = v.iter().position(|e| !cmod_is_zero(e)) else {
            return false;
        };
        let inv = cmod_inv(&v[pivot]);
        for e in v.iter_mut() {
            if !cmod_is_zero(e) {
                *e = cmod_mul(e, &inv);
            }
        }
        let at = self.rows.partition_point(|(p, _)| *p < pivot);
        self.rows.insert(at, (pivot, v));
        true
    }
}

/// Runs the closure over ℤ_p[i]. `Ok(Some(products))` certifies that the
/// exact span is the full ambient algebra; `Ok(None)` means the modular span
/// stopped short (or a denominator vanished mod p) and the exact tier must
/// decide.
fn modular_full_certificate(
    multipliers: &[Operator],
    ambient: usize,
    budget: Option<usize>,
) -> Result<Option<usize>> {
    let mut mods = Vec::with_capacity(multipliers.len());
    for m in multipliers {
        match op_to_mod(m) {
            Some(mm) => mods.push(mm),
            None => return Ok(None),
        }
    }
    let mut tracker = ModTracker::new(ambient);
    let mut queue: Vec<ModOp> = Vec::new();
    for m in &mods {
        if tracker.insert(modop_flatten(m)) {
            queue.push(m.clone());
        }
    }
    let mut products_used = 0usize;
    let mut head = 0;
    'outer: while head < queue.len() {
        if tracker.is_full() {
            break;
        }
        let u = queue[head].clone();
        head += 1;
        for g in &mods {
            for prod in [modop_mul(&u, g), modop_mul(g, &u)] {
                products_used += 2;
                if let Some(cap) = budget {
                    if products_used > cap {
                        return Err(Error::ClosureBudget(format!(
                            "span closure exceeded the product budget of {cap}"
                        )));
                    }
                }
                if tracker.insert(modop_flatten(&prod)) {
                    queue.push(prod);
                    if tracker.is_full() {
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(if tracker.is_full() { Some(products_used) } else { None })
}

/// Computes the span of all words (of length ≥ 1) in `seed ∪ seed*`.
///
/// To generate a *unital* algebra, include the identity (or the relevant
/// corner unit) in `seed`. `budget`, when given, caps the number of exact
/// matrix products; exceeding it reports [`Error::ClosureBudget`].
pub fn span_closure(seed: &[Operator], budget: Option<usize>) -> Result<SubalgebraBasis> {
    if seed.is_empty() {
        return Err(Error::EmptyGeneratingSet);
    }
    for pair in seed.windows(2) {
        ensure_same_algebra(&pair[0], &pair[1])?;
    }
    let ambient = seed[0].algebra().linear_dim();

    // adjoint-closed multiplier set
    let mut multipliers: Vec<Operator> = Vec::with_capacity(2 * seed.len());
    for s in seed {
        multipliers.push(s.clone());
        let adj = s.adjoint();
        if adj != *s {
            multipliers.push(adj);
        }
    }

    // fast tier: a modular closure reaching full dimension is exact proof
    if let Some(products_used) = modular_full_certificate(&multipliers, ambient, budget)? {
        return Ok(SubalgebraBasis { ambient, tracker: None, products_used });
    }

    let mut tracker = SpanTracker::new(ambient);
    let mut queue: Vec<Operator> = Vec::new();
    for m in &multipliers {
        if tracker.insert(m.flatten()) {
            queue.push(m.clone());
        }
    }

    let mut products_used = 0usize;
    let mut head = 0;
    'outer: while head < queue.len() {
        if tracker.is_full() {
            break;
        }
        let u = queue[head].clone();
        head += 1;
        for g in &multipliers {
            for prod in [u.mul(g), g.mul(&u)] {
                products_used += 2; // two products formed per iteration pair
                if let Some(cap) = budget {
                    if products_used > cap {
                        return Err(Error::ClosureBudget(format!(
                            "span closure exceeded the product budget of {cap}"
                        )));
                    }
                }
                if tracker.insert(prod.flatten()) {
                    queue.push(prod);
                    if tracker.is_full() {
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(SubalgebraBasis { ambient, tracker: Some(tracker), products_used })
}

/// Dimension of the span of all words in `seed ∪ seed*`.
pub fn span_dimension(seed: &[Operator], budget: Option<usize>) -> Result<usize> {
    Ok(span_closure(seed, budget)?.dim())
}
