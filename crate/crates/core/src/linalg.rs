//! Exact linear algebra over ℚ(i).
//!
//! Everything here is plain Gaussian elimination, kept exact by working with
//! [`Scalar`] entries. Vectors are `Vec<Scalar>`; the hermitian inner product
//! conjugates the *first* argument. The [`SpanTracker`] is an incremental
//! row-echelon form used by the span-closure and rank computations: inserting
//! a vector either grows the tracked subspace by one dimension or reports the
//! vector as dependent.

use num_rational::BigRational;
use num_traits::Zero;

use crate::scalar::Scalar;

/// Hermitian inner product `⟨u, v⟩ = Σ conj(u_i)·v_i`.
pub fn inner(u: &[Scalar], v: &[Scalar]) -> Scalar {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = Scalar::zero();
    for (a, b) in u.iter().zip(v) {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let term = &a.conj() * b;
        acc += &term;
    }
    acc
}

/// Squared norm `⟨v, v⟩` (a nonnegative rational).
pub fn norm_sq(v: &[Scalar]) -> BigRational {
    v.iter()
        .filter(|e| !e.is_zero())
        .map(Scalar::abs_sq)
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `v ← v − c·w`.
fn sub_scaled(v: &mut [Scalar], c: &Scalar, w: &[Scalar]) {
    for (ve, we) in v.iter_mut().zip(w) {
        if we.is_zero() {
            continue;
        }
        let t = c * we;
        *ve -= &t;
    }
}

/// Incrementally maintained reduced row-echelon basis of a subspace of
/// ℚ(i)^dim.
///
/// Rows keep a leading one at their pivot column, are ordered by pivot, and
/// every pivot column is zero in all other rows. The back-elimination on
/// insert is what keeps stored rows (and hence all later reductions) small:
/// once the subspace is the full space the basis is literally the identity.
#[derive(Clone, Debug)]
pub struct SpanTracker {
    dim: usize,
    rows: Vec<(usize, Vec<Scalar>)>,
}

impl SpanTracker {
    /// An empty subspace of ℚ(i)^dim.
    pub fn new(dim: usize) -> Self {
        SpanTracker { dim, rows: Vec::new() }
    }

    /// Current rank of the tracked subspace.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True once the tracked subspace is all of ℚ(i)^dim.
    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    /// Forward-reduces `v` against the stored rows.
    fn reduce(&self, mut v: Vec<Scalar>) -> Vec<Scalar> {
        debug_assert_eq!(v.len(), self.dim);
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let c = v[*pivot].clone();
                sub_scaled(&mut v, &c, row);
            }
        }
        v
    }

    /// True when `v` already lies in the tracked subspace.
    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v.to_vec()).iter().all(Scalar::is_zero)
    }

    /// Inserts `v`; returns `true` iff it enlarged the subspace.
    pub fn insert(&mut self, v: Vec<Scalar>) -> bool {
        let mut r = self.reduce(v);
        let Some(pivot) = r.iter().position(|e| !e.is_zero()) else {
            return false;
        };
        let inv = r[pivot].inv().expect("pivot is nonzero");
        for e in r.iter_mut() {
            if !e.is_zero() {
                *e *= &inv;
            }
        }
        // keep the form reduced: clear the new pivot column in older rows
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let c = row[pivot].clone();
                sub_scaled(row, &c, &r);
            }
        }
        let at = self.rows.partition_point(|(p, _)| *p < pivot);
        self.rows.insert(at, (pivot, r));
        true
    }
}

/// In-place reduced row-echelon form. Returns the pivot columns in order.
pub fn rref(mat: &mut [Vec<Scalar>]) -> Vec<usize> {
    let rows = mat.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = mat[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(src) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, src);
        let inv = mat[r][c].inv().expect("pivot is nonzero");
        for e in mat[r].iter_mut() {
            if !e.is_zero() {
                *e *= &inv;
            }
        }
        for i in 0..rows {
            if i != r && !mat[i][c].is_zero() {
                let coeff = mat[i][c].clone();
                let (head, tail) = mat.split_at_mut(r.max(i));
                let (row_i, row_r) = if i < r {
                    (&mut head[i], &tail[0])
                } else {
                    (&mut tail[0], &head[r])
                };
                sub_scaled(row_i, &coeff, row_r);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a matrix given by rows.
pub fn rank(mut mat: Vec<Vec<Scalar>>) -> usize {
    rref(&mut mat).len()
}

/// Basis of `{v : M v = 0}` where the rows of `mat` are the equations.
pub fn nullspace(mat: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    if mat.is_empty() {
        return Vec::new();
    }
    let cols = mat[0].len();
    let mut work: Vec<Vec<Scalar>> = mat.to_vec();
    let pivots = rref(&mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Scalar::zero(); cols];
        v[f] = Scalar::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -&work[r][f];
        }
        basis.push(v);
    }
    basis
}

/// Solves `Σ c_i · basis_i = v`; `None` when `v` is outside the span.
pub fn express_in_span(basis: &[Vec<Scalar>], v: &[Scalar]) -> Option<Vec<Scalar>> {
    let n = v.len();
    let m = basis.len();
    // augmented system: rows are coordinates, columns are basis vectors | v
    let mut aug: Vec<Vec<Scalar>> = (0..n)
        .map(|row| {
            let mut r: Vec<Scalar> = basis.iter().map(|b| b[row].clone()).collect();
            r.push(v[row].clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&m) {
        return None; // pivot in the augmented column: inconsistent
    }
    let mut coeffs = vec![Scalar::zero(); m];
    for (r, &p) in pivots.iter().enumerate() {
        coeffs[p] = aug[r][m].clone();
    }
    Some(coeffs)
}

/// Gram–Schmidt without normalization: an orthogonal basis of the span,
/// dependent inputs dropped.
pub fn gram_schmidt(vs: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let mut basis: Vec<(Vec<Scalar>, BigRational)> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for (b, nsq) in &basis {
            let coeff = inner(b, &w);
            if coeff.is_zero() {
                continue;
            }
            let c = &coeff * &Scalar::from_re(BigRational::from_integer(1.into()) / nsq);
            sub_scaled(&mut w, &c, b);
        }
        let nsq = norm_sq(&w);
        if !nsq.is_zero() {
            basis.push((w, nsq));
        }
    }
    basis.into_iter().map(|(b, _)| b).collect()
}
