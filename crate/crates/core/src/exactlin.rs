//! Exact integer and rational linear algebra.
//!
//! Everything here works on arbitrary-precision integers ([`BigInt`]) and
//! reduced fractions ([`BigRational`]). Normal forms follow fixed
//! conventions so that repeated runs produce bit-identical output:
//!
//! * row-style Hermite normal form, positive pivots, entries above a pivot
//!   reduced into `[0, pivot)`, zero rows last;
//! * Smith normal form with nonnegative invariant factors `d_1 | d_2 | ...`;
//! * pivots are always the first usable entry in column order.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty matrix")]
    Empty,
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntegerMatrix = Matrix<BigInt>;
pub type RationalMatrix = Matrix<Rational>;

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }
}

impl<T: Clone> Matrix<T> {
    /// Builds a matrix from rows. `cols` is needed to describe `0 x cols`
    /// shapes; all rows must have exactly `cols` entries.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Result<Self, LinAlgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinAlgError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.data[i * self.cols + j].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.data[i * self.cols + j].clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps the first `n` columns.
    pub fn take_cols(&self, n: usize) -> Self {
        let mut data = Vec::with_capacity(self.rows * n);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[..n]);
        }
        Matrix {
            rows: self.rows,
            cols: n,
            data,
        }
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
{
    pub fn mul(&self, rhs: &Matrix<T>) -> Result<Matrix<T>, LinAlgError> {
        if self.cols != rhs.rows {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let p = a * &rhs[(k, j)];
                    let slot = &mut out[(i, j)];
                    *slot = std::mem::replace(slot, T::zero()) + p;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, LinAlgError> {
        if self.cols != v.len() {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a * b))
            .collect())
    }
}

impl IntegerMatrix {
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let v = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Matrix::from_rows(v, cols).expect("ragged rows")
    }

    pub fn to_rational(&self) -> RationalMatrix {
        self.map(|x| Rational::from_integer(x.clone()))
    }

    pub fn rank(&self) -> usize {
        self.to_rational().rank()
    }

    /// Determinant of a square matrix by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        Ok(sign * &m[(n - 1, n - 1)])
    }

    /// Returns true when the matrix is square with determinant ±1.
    pub fn is_unimodular(&self) -> bool {
        self.det().map(|d| d.abs().is_one()).unwrap_or(false)
    }

    fn row_combine(&mut self, target: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self[(src, j)] * factor;
            self[(target, j)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(i, j)]);
            self[(i, j)] = v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -std::mem::take(&mut self[(i, j)]);
            self[(i, j)] = v;
        }
    }

    /// Replaces rows `(a, b)` by `(x·a + y·b, u·a + v·b)`.
    fn row_mix(&mut self, a: usize, b: usize, [x, y, u, v]: [&BigInt; 4]) {
        for j in 0..self.cols {
            let ra = &self[(a, j)];
            let rb = &self[(b, j)];
            let na = x * ra + y * rb;
            let nb = u * ra + v * rb;
            self[(a, j)] = na;
            self[(b, j)] = nb;
        }
    }

    fn col_mix(&mut self, a: usize, b: usize, [x, y, u, v]: [&BigInt; 4]) {
        for i in 0..self.rows {
            let ca = &self[(i, a)];
            let cb = &self[(i, b)];
            let na = x * ca + y * cb;
            let nb = u * ca + v * cb;
            self[(i, a)] = na;
            self[(i, b)] = nb;
        }
    }
}

/// Bezout data for a pair `(a, b)` with `a != 0`: returns `(g, x, y)` with
/// `g = x·a + y·b > 0`, preferring the trivial combination when `a | b`.
fn bezout(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_multiple_of(a) {
        let s = if a.is_negative() { -BigInt::one() } else { BigInt::one() };
        return (a.abs(), s, BigInt::zero());
    }
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Row-style Hermite normal form: returns `(H, T)` with `H = T·A` and `T`
/// unimodular.
pub fn hnf(a: &IntegerMatrix) -> Result<(IntegerMatrix, IntegerMatrix), LinAlgError> {
    if a.is_empty() {
        return Err(LinAlgError::Empty);
    }
    Ok(hnf_unchecked(a))
}

pub(crate) fn hnf_unchecked(a: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix) {
    let mut h = a.clone();
    let mut t = IntegerMatrix::identity(a.rows);
    let mut r = 0;
    for c in 0..h.cols {
        if r == h.rows {
            break;
        }
        let Some(first) = (r..h.rows).find(|&i| !h[(i, c)].is_zero()) else {
            continue;
        };
        h.swap_rows(r, first);
        t.swap_rows(r, first);
        for i in r + 1..h.rows {
            if h[(i, c)].is_zero() {
                continue;
            }
            let a0 = h[(r, c)].clone();
            let b0 = h[(i, c)].clone();
            let (g, x, y) = bezout(&a0, &b0);
            let u = -(&b0 / &g);
            let v = &a0 / &g;
            h.row_mix(r, i, [&x, &y, &u, &v]);
            t.row_mix(r, i, [&x, &y, &u, &v]);
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            t.negate_row(r);
        }
        let p = h[(r, c)].clone();
        for k in 0..r {
            let q = h[(k, c)].div_floor(&p);
            if !q.is_zero() {
                let nq = -q;
                h.row_combine(k, r, &nq);
                t.row_combine(k, r, &nq);
            }
        }
        r += 1;
    }
    (h, t)
}

/// Smith normal form: returns `(S, L, R)` with `S = L·A·R`, `L` and `R`
/// unimodular, `S` diagonal with nonnegative `d_1 | d_2 | ...`.
pub fn snf(a: &IntegerMatrix) -> Result<(IntegerMatrix, IntegerMatrix, IntegerMatrix), LinAlgError> {
    if a.is_empty() {
        return Err(LinAlgError::Empty);
    }
    Ok(snf_unchecked(a))
}

pub(crate) fn snf_unchecked(a: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix, IntegerMatrix) {
    let mut s = a.clone();
    let mut l = IntegerMatrix::identity(a.rows);
    let mut r = IntegerMatrix::identity(a.cols);
    let n = a.rows.min(a.cols);
    for k in 0..n {
        // first nonzero entry of the trailing block, in column order
        let pos = (k..s.cols)
            .flat_map(|j| (k..s.rows).map(move |i| (i, j)))
            .find(|&(i, j)| !s[(i, j)].is_zero());
        let Some((pi, pj)) = pos else { break };
        s.swap_rows(k, pi);
        l.swap_rows(k, pi);
        s.swap_cols(k, pj);
        r.swap_cols(k, pj);
        loop {
            // clear column k below the pivot
            for i in k + 1..s.rows {
                if s[(i, k)].is_zero() {
                    continue;
                }
                let a0 = s[(k, k)].clone();
                let b0 = s[(i, k)].clone();
                let (g, x, y) = bezout(&a0, &b0);
                let u = -(&b0 / &g);
                let v = &a0 / &g;
                s.row_mix(k, i, [&x, &y, &u, &v]);
                l.row_mix(k, i, [&x, &y, &u, &v]);
            }
            // clear row k right of the pivot
            for j in k + 1..s.cols {
                if s[(k, j)].is_zero() {
                    continue;
                }
                let a0 = s[(k, k)].clone();
                let b0 = s[(k, j)].clone();
                let (g, x, y) = bezout(&a0, &b0);
                let u = -(&b0 / &g);
                let v = &a0 / &g;
                s.col_mix(k, j, [&x, &y, &u, &v]);
                r.col_mix(k, j, [&x, &y, &u, &v]);
            }
            if (k + 1..s.rows).any(|i| !s[(i, k)].is_zero()) {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let p = s[(k, k)].clone();
            let offender = (k + 1..s.rows).find(|&i| (k + 1..s.cols).any(|j| !s[(i, j)].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    s.row_combine(k, i, &one);
                    l.row_combine(k, i, &one);
                }
                None => break,
            }
        }
        if s[(k, k)].is_negative() {
            s.negate_col(k);
            r.negate_col(k);
        }
    }
    (s, l, r)
}

/// Invariant factors read off an SNF diagonal (nonzero entries only).
pub fn invariant_factors(a: &IntegerMatrix) -> Vec<BigInt> {
    if a.is_empty() {
        return Vec::new();
    }
    let (s, _, _) = snf_unchecked(a);
    (0..s.rows.min(s.cols))
        .map(|i| s[(i, i)].clone())
        .take_while(|d| !d.is_zero())
        .collect()
}

impl RationalMatrix {
    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RationalMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let v = &m[(r, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solves `self · x = b` over ℚ. Returns the particular solution with
    /// all free variables set to zero, or `None` if inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Result<Option<Vec<Rational>>, LinAlgError> {
        if b.len() != self.rows {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let mut aug = RationalMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (m, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = m[(i, self.cols)].clone();
        }
        Ok(Some(x))
    }

    /// Scales every row by the lcm of its denominators, returning the
    /// integer matrix and the per-row scale.
    pub fn clear_row_denominators(&self) -> (IntegerMatrix, Vec<BigInt>) {
        let mut out = IntegerMatrix::zeros(self.rows, self.cols);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let d = self.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            for j in 0..self.cols {
                out[(i, j)] = (&self[(i, j)] * Rational::from_integer(d.clone())).to_integer();
            }
            scales.push(d);
        }
        (out, scales)
    }

    /// lcm of all denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

/// Basis of the saturated integer left-kernel lattice
/// `{c ∈ ℤ^N : cᵀ·R = 0}` of an `N x k` rational matrix.
///
/// Rows are returned in Hermite normal form; the result has zero rows when
/// the kernel is trivial. The transform rows of an HNF of the
/// denominator-cleared matrix that map to zero rows span the kernel and are
/// saturated because the transform is unimodular. Saturation is re-checked
/// by SNF in debug builds.
pub fn kernel_lattice(r: &RationalMatrix) -> IntegerMatrix {
    let n = r.rows();
    if n == 0 {
        return IntegerMatrix::zeros(0, 0);
    }
    if r.cols() == 0 {
        return IntegerMatrix::identity(n);
    }
    let d = r.common_denominator();
    let dq = Rational::from_integer(d);
    let m = r.map(|x| (x * &dq).to_integer());
    let (h, t) = hnf_unchecked(&m);
    let zero_rows: Vec<usize> = (0..n).filter(|&i| h.row(i).iter().all(Zero::is_zero)).collect();
    if zero_rows.is_empty() {
        return IntegerMatrix::zeros(0, n);
    }
    let raw = t.select_rows(&zero_rows);
    let (u, _) = hnf_unchecked(&raw);
    debug_assert!(invariant_factors(&u).iter().all(One::is_one));
    u
}

/// True when the rows of `u` span a saturated lattice (all invariant
/// factors equal to one). An empty basis is trivially saturated.
pub fn is_saturated(u: &IntegerMatrix) -> bool {
    u.rows() == 0 || invariant_factors(u).iter().all(One::is_one)
}

/// Solves `U·z = v` over ℤ via the Smith normal form.
pub fn solve_integer(u: &IntegerMatrix, v: &[BigInt]) -> Result<Option<Vec<BigInt>>, LinAlgError> {
    if u.rows() != v.len() {
        return Err(LinAlgError::DimensionMismatch {
            expected: u.rows(),
            found: v.len(),
        });
    }
    if u.rows() == 0 {
        return Ok(Some(vec![BigInt::zero(); u.cols()]));
    }
    if u.cols() == 0 {
        return Ok(v.iter().all(Zero::is_zero).then(Vec::new));
    }
    let (s, l, r) = snf_unchecked(u);
    let lv = l.mul_vec(v)?;
    let mut w = vec![BigInt::zero(); u.cols()];
    for (i, x) in lv.iter().enumerate() {
        let d = if i < s.cols() { &s[(i, i)] } else { &BigInt::zero() };
        if d.is_zero() {
            if !x.is_zero() {
                return Ok(None);
            }
        } else {
            let (q, rem) = x.div_rem(d);
            if !rem.is_zero() {
                return Ok(None);
            }
            w[i] = q;
        }
    }
    Ok(Some(r.mul_vec(&w)?))
}

/// Fractional part `x − ⌊x⌋`, in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

#[derive(Debug, Clone)]
struct LatticeRow {
    v: Vec<BigInt>,
    pivot: usize,
    /// Tag in ℚ/ℤ, kept in `[0, 1)`.
    tag: Rational,
    /// Combination of the inserted generators, when tracked.
    comb: Vec<BigInt>,
}

impl LatticeRow {
    fn mix(a: &LatticeRow, b: &LatticeRow, x: &BigInt, y: &BigInt) -> LatticeRow {
        let lin = |p: &[BigInt], q: &[BigInt]| p.iter().zip(q).map(|(s, t)| x * s + y * t).collect();
        LatticeRow {
            v: lin(&a.v, &b.v),
            pivot: a.pivot,
            tag: frac(&(&a.tag * Rational::from_integer(x.clone()) + &b.tag * Rational::from_integer(y.clone()))),
            comb: lin(&a.comb, &b.comb),
        }
    }

    fn negate(&mut self) {
        for x in self.v.iter_mut().chain(self.comb.iter_mut()) {
            *x = -std::mem::take(x);
        }
        self.tag = frac(&-std::mem::take(&mut self.tag));
    }
}

/// A generator that reduced to zero against the current basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// The tag it carried after reduction, in `[0, 1)`.
    pub tag: Rational,
    /// Integer relation among the generators inserted so far, when tracked.
    pub relation: Option<Vec<BigInt>>,
}

/// Hermite basis of the lattice spanned by integer generators inserted one
/// at a time. Each generator carries a tag in ℚ/ℤ that follows every row
/// operation, so the tags define a homomorphism on the lattice exactly
/// when every zero residual has tag 0.
///
/// Only the current basis (at most `cols` rows) is ever transformed, which
/// keeps entry sizes bounded by the basis itself.
#[derive(Debug, Clone)]
pub struct GeneratedLattice {
    cols: usize,
    rows: Vec<LatticeRow>,
    track: bool,
    inserted: usize,
}

impl GeneratedLattice {
    pub fn new(cols: usize, track_relations: bool) -> Self {
        GeneratedLattice {
            cols,
            rows: Vec::new(),
            track: track_relations,
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Basis rows in Hermite form.
    pub fn basis(&self) -> Vec<Vec<BigInt>> {
        self.rows.iter().map(|r| r.v.clone()).collect()
    }

    /// Tags of the basis rows.
    pub fn tags(&self) -> Vec<Rational> {
        self.rows.iter().map(|r| r.tag.clone()).collect()
    }

    /// Adds a generator; returns its residual if it reduced to zero.
    pub fn insert(&mut self, v: Vec<BigInt>, tag: &Rational) -> Result<Option<Residual>, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut comb = Vec::new();
        if self.track {
            for r in &mut self.rows {
                r.comb.push(BigInt::zero());
            }
            comb = vec![BigInt::zero(); self.inserted + 1];
            comb[self.inserted] = BigInt::one();
        }
        self.inserted += 1;
        let mut cur = LatticeRow {
            v,
            pivot: 0,
            tag: frac(tag),
            comb,
        };
        let mut i = 0;
        loop {
            let Some(lc) = cur.v.iter().position(|x| !x.is_zero()) else {
                self.reduce();
                return Ok(Some(Residual {
                    tag: cur.tag,
                    relation: self.track.then_some(cur.comb),
                }));
            };
            while i < self.rows.len() && self.rows[i].pivot < lc {
                i += 1;
            }
            if i == self.rows.len() || self.rows[i].pivot > lc {
                cur.pivot = lc;
                if cur.v[lc].is_negative() {
                    cur.negate();
                }
                self.rows.insert(i, cur);
                break;
            }
            let a0 = self.rows[i].v[lc].clone();
            let b0 = cur.v[lc].clone();
            let (g, x, y) = bezout(&a0, &b0);
            let u = -(&b0 / &g);
            let w = &a0 / &g;
            let row = LatticeRow::mix(&self.rows[i], &cur, &x, &y);
            cur = LatticeRow::mix(&self.rows[i], &cur, &u, &w);
            self.rows[i] = row;
            i += 1;
        }
        self.reduce();
        Ok(None)
    }

    /// Reduces entries above each pivot into `[0, pivot)`.
    fn reduce(&mut self) {
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                let p = self.rows[j].pivot;
                let q = self.rows[i].v[p].div_floor(&self.rows[j].v[p]);
                if !q.is_zero() {
                    let (one, nq) = (BigInt::one(), -q);
                    self.rows[i] = LatticeRow::mix(&self.rows[i], &self.rows[j], &one, &nq);
                }
            }
        }
    }

    /// Integer coordinates of `v` over the basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut rest = v.to_vec();
        let mut out = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let (c, rem) = rest[r.pivot].div_rem(&r.v[r.pivot]);
            if !rem.is_zero() {
                return None;
            }
            for (x, b) in rest.iter_mut().zip(&r.v) {
                *x -= &c * b;
            }
            out.push(c);
        }
        rest.iter().all(Zero::is_zero).then_some(out)
    }
}
