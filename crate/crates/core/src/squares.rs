//! Sums of squares over ℚ, used to match vector norms exactly.
//!
//! Building exact matrix units between the ranges of two projections
//! requires vectors of a *prescribed* squared norm inside a given subspace.
//! Over ℚ(i) the reachable norms from a single vector `b` are
//! `‖b‖² · (x² + y²)`, so everything reduces to classical square-sum
//! arithmetic:
//!
//! * a positive rational is a sum of two rational squares iff every prime
//!   `≡ 3 (mod 4)` occurs to an even power in `numerator · denominator`;
//!   the product of the offending primes is a complete invariant here,
//!   computed by [`two_square_class`];
//! * every positive rational is a sum of four rational squares.
//!
//! Constructions are fully explicit: two-square decompositions come from
//! Gaussian-integer gcds, four-square decompositions from a short descent
//! over one extracted square.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest trial divisor used when factoring. Values in this crate come from
/// norms of small rational matrices, so this is generous; anything beyond it
/// is reported as a [`Error::GeometryError`] rather than silently guessed.
const TRIAL_LIMIT: u64 = 1 << 20;

/// Factors a positive integer by trial division.
pub(crate) fn factorize(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    let mut n = n.clone();
    assert!(n.is_positive(), "factorize expects a positive integer");
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    let mut push = |p: BigInt, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    let two = BigInt::from(2);
    let mut e = 0;
    while n.is_even() {
        n /= &two;
        e += 1;
    }
    push(two, e);
    let mut d = BigInt::from(3);
    let limit = BigInt::from(TRIAL_LIMIT);
    while &d * &d <= n && d <= limit {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        push(d.clone(), e);
        d += 2;
    }
    if n > BigInt::one() {
        if &n / &limit > limit {
            return Err(Error::GeometryError(format!(
                "cannot certify primality of cofactor {n} while matching norms"
            )));
        }
        // no divisor ≤ TRIAL_LIMIT and n ≤ TRIAL_LIMIT², so n is prime
        push(n, 1);
    }
    Ok(out)
}

/// The obstruction class of a positive rational in ℚ₊ modulo sums of two
/// squares: the (squarefree) product of the primes `≡ 3 (mod 4)` appearing
/// to an odd power in `numerator · denominator`.
///
/// `q` is a sum of two rational squares iff the class is `1`, and
/// `q/r` is a sum of two squares iff `q` and `r` have equal classes.
pub fn two_square_class(q: &BigRational) -> Result<BigInt> {
    assert!(q.is_positive(), "two_square_class expects a positive rational");
    let n = q.numer() * q.denom();
    let mut class = BigInt::one();
    for (p, e) in factorize(&n)? {
        if e % 2 == 1 && (&p % BigInt::from(4)) == BigInt::from(3) {
            class *= p;
        }
    }
    Ok(class)
}

// ---- Gaussian integer helpers (pairs (re, im) of BigInt) ----

type Gauss = (BigInt, BigInt);

fn g_mul(a: &Gauss, b: &Gauss) -> Gauss {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn g_norm(a: &Gauss) -> BigInt {
    &a.0 * &a.0 + &a.1 * &a.1
}

/// Nearest-integer division in ℤ[i]; the remainder has norm < norm(b).
fn g_div_round(a: &Gauss, b: &Gauss) -> Gauss {
    let n = g_norm(b);
    let conj = (b.0.clone(), -b.1.clone());
    let num = g_mul(a, &conj);
    let round = |x: BigInt| -> BigInt {
        // round(x / n) with ties toward +∞; any nearest integer works
        let twice = BigInt::from(2) * x + &n;
        twice.div_floor(&(BigInt::from(2) * &n))
    };
    (round(num.0), round(num.1))
}

fn g_gcd(a: &Gauss, b: &Gauss) -> Gauss {
    let mut a = a.clone();
    let mut b = b.clone();
    while !g_norm(&b).is_zero() {
        let q = g_div_round(&a, &b);
        let r = (&a.0 - (&q.0 * &b.0 - &q.1 * &b.1), &a.1 - (&q.0 * &b.1 + &q.1 * &b.0));
        a = b;
        b = r;
    }
    a
}

/// A square root of −1 modulo a prime `p ≡ 1 (mod 4)`.
fn sqrt_minus_one(p: &BigInt) -> Result<BigInt> {
    let exp = (p - BigInt::one()) / BigInt::from(4);
    let pm1 = p - BigInt::one();
    for a in 2u64..200 {
        let x = BigInt::from(a).modpow(&exp, p);
        if (&x * &x) % p == pm1 {
            return Ok(x);
        }
    }
    Err(Error::Internal(format!("no square root of -1 found modulo {p}")))
}

/// Writes `n ≥ 0` as `a² + b²` over ℤ, or `None` when impossible.
pub fn two_squares(n: &BigInt) -> Result<Option<(BigInt, BigInt)>> {
    if n.is_zero() {
        return Ok(Some((BigInt::zero(), BigInt::zero())));
    }
    let mut acc: Gauss = (BigInt::one(), BigInt::zero());
    let mut real = BigInt::one();
    for (p, e) in factorize(n)? {
        if p == BigInt::from(2) {
            let root = (BigInt::one(), BigInt::one()); // 2 = 1² + 1²
            for _ in 0..e {
                acc = g_mul(&acc, &root);
            }
        } else if (&p % BigInt::from(4)) == BigInt::one() {
            let x = sqrt_minus_one(&p)?;
            let g = g_gcd(&(p.clone(), BigInt::zero()), &(x, BigInt::one()));
            debug_assert_eq!(g_norm(&g), p);
            for _ in 0..e {
                acc = g_mul(&acc, &g);
            }
        } else {
            if e % 2 == 1 {
                return Ok(None);
            }
            real *= p.pow(e / 2);
        }
    }
    Ok(Some(((&acc.0 * &real).abs(), (&acc.1 * &real).abs())))
}

/// Writes `n ≥ 0` as `a² + b² + c²` when possible.
fn three_squares(n: &BigInt) -> Result<Option<(BigInt, BigInt, BigInt)>> {
    let mut a = n.sqrt();
    loop {
        if let Some((b, c)) = two_squares(&(n - &a * &a))? {
            return Ok(Some((a, b, c)));
        }
        if a.is_zero() {
            return Ok(None);
        }
        a -= 1;
    }
}

/// Writes `n ≥ 0` as a sum of four integer squares.
pub fn four_squares(n: &BigInt) -> Result<(BigInt, BigInt, BigInt, BigInt)> {
    let mut a = n.sqrt();
    loop {
        if let Some((b, c, d)) = three_squares(&(n - &a * &a))? {
            return Ok((a, b, c, d));
        }
        if a.is_zero() {
            return Err(Error::Internal(format!(
                "four-square descent failed for {n}"
            )));
        }
        a -= 1;
    }
}

/// A scalar `c ∈ ℚ(i)` with `|c|² = q`, or `None` when the two-square class
/// of `q` is nontrivial.
pub fn scalar_with_abs_sq(q: &BigRational) -> Result<Option<Scalar>> {
    if q.is_zero() {
        return Ok(Some(Scalar::zero()));
    }
    assert!(q.is_positive(), "squared modulus must be nonnegative");
    // q = α/β ⇒ |c|² = αβ / β², so decompose αβ over ℤ
    let (alpha, beta) = (q.numer().clone(), q.denom().clone());
    match two_squares(&(&alpha * &beta))? {
        None => Ok(None),
        Some((a, b)) => Ok(Some(Scalar::new(
            BigRational::new(a, beta.clone()),
            BigRational::new(b, beta),
        ))),
    }
}

/// Two scalars with `|c₁|² + |c₂|² = q` (always possible for `q ≥ 0`).
pub fn scalar_pair_with_abs_sq(q: &BigRational) -> Result<(Scalar, Scalar)> {
    if q.is_zero() {
        return Ok((Scalar::zero(), Scalar::zero()));
    }
    assert!(q.is_positive(), "squared modulus must be nonnegative");
    let (alpha, beta) = (q.numer().clone(), q.denom().clone());
    let (a, b, c, d) = four_squares(&(&alpha * &beta))?;
    Ok((
        Scalar::new(BigRational::new(a, beta.clone()), BigRational::new(b, beta.clone())),
        Scalar::new(BigRational::new(c, beta.clone()), BigRational::new(d, beta)),
    ))
}
