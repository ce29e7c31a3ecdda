//! Dense linear algebra and iterative-solver primitives.
//!
//! Matrices are row-major `f64`. Every reduction runs in a fixed order, so
//! results are bitwise reproducible across runs.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use rand::Rng;

use crate::seeding::rng_from_seed;

/// Relative pivot threshold for LU: pivots below `PIVOT_TOL * ‖A‖∞` are
/// treated as zero.
pub const PIVOT_TOL: f64 = 1e-14;

/// Relative tolerance used by [`cholesky_solve`] to accept a matrix as
/// symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum NumericsError {
    /// Operand sizes disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// Data length does not equal `rows * cols`.
    InvalidData { expected: usize, found: usize },
    /// A NaN or infinity was supplied.
    NonFinite,
    /// The matrix handed to Cholesky is not symmetric.
    NotSymmetric,
    /// Cholesky met a pivot `≤ 0` at the given row.
    NotPositiveDefinite { row: usize },
    /// LU met a pivot below the singularity threshold at the given column.
    SingularMatrix { column: usize },
    /// Conjugate gradient exhausted its iteration budget.
    NotConverged { iterations: usize, residual: f64 },
    /// Jacobi preconditioning was requested for an operator without a
    /// known diagonal.
    PreconditionerUnavailable,
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::NotSquare { rows, cols } => write!(f, "matrix must be square, got {rows}x{cols}"),
            Self::InvalidData { expected, found } => {
                write!(f, "data length mismatch: expected {expected}, found {found}")
            }
            Self::NonFinite => write!(f, "non-finite matrix entry"),
            Self::NotSymmetric => write!(f, "matrix is not symmetric"),
            Self::NotPositiveDefinite { row } => {
                write!(f, "matrix is not positive definite (pivot {row})")
            }
            Self::SingularMatrix { column } => write!(f, "matrix is singular (column {column})"),
            Self::NotConverged { iterations, residual } => write!(
                f,
                "conjugate gradient did not converge after {iterations} iterations \
                 (relative residual {residual:.3e})"
            ),
            Self::PreconditionerUnavailable => {
                write!(f, "operator has no diagonal for Jacobi preconditioning")
            }
        }
    }
}

impl core::error::Error for NumericsError {}

// ── vector helpers ──────────────────────────────────────────────────

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

// ── DenseMatrix ─────────────────────────────────────────────────────

/// Row-major dense matrix: `data[i * cols + j] = A[i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Wraps row-major data, rejecting bad lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::InvalidData {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NumericsError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if x.len() != self.cols {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without dimension checks beyond debug assertions.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// `y += A x`
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += dot(self.row(i), x);
        }
    }

    /// `y += Aᵀ x`
    pub fn matvec_transpose_add(&self, x: &[f64], y: &mut [f64]) {
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, self.row(i), y);
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        }
        Ok(out)
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// True when `|a_ij - a_ji| ≤ rel_tol * max(1, max|a|)` for all pairs.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = norm_inf(&self.data).max(1.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// ── LowRankFactor ───────────────────────────────────────────────────

/// `left (n×k) · right (k×m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    left: DenseMatrix,
    right: DenseMatrix,
}

impl LowRankFactor {
    pub fn new(left: DenseMatrix, right: DenseMatrix) -> Result<Self, NumericsError> {
        if left.cols() != right.rows() {
            return Err(NumericsError::DimensionMismatch {
                expected: left.cols(),
                found: right.rows(),
            });
        }
        Ok(Self { left, right })
    }

    /// Rank-0 factor of the given shape.
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            left: DenseMatrix::zeros(rows, 0),
            right: DenseMatrix::zeros(0, cols),
        }
    }

    /// Assembles a factor from column vectors `u_k` (length `rows`) and row
    /// vectors `v_k` (length `cols`).
    pub fn from_crosses(rows: usize, cols: usize, us: &[Vec<f64>], vs: &[Vec<f64>]) -> Self {
        let k = us.len();
        let left = DenseMatrix::from_fn(rows, k, |i, l| us[l][i]);
        let right = DenseMatrix::from_fn(k, cols, |l, j| vs[l][j]);
        Self { left, right }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.left.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.right.cols()
    }

    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }

    /// Number of stored reals.
    pub fn storage(&self) -> usize {
        self.rank() * (self.rows() + self.cols())
    }

    /// `y += (L R) x`
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        if self.rank() == 0 {
            return;
        }
        let mut tmp = vec![0.0; self.rank()];
        self.right.matvec_into(x, &mut tmp);
        self.left.matvec_add(&tmp, y);
    }

    /// `y += (L R)ᵀ x`
    pub fn matvec_transpose_add(&self, x: &[f64], y: &mut [f64]) {
        if self.rank() == 0 {
            return;
        }
        let mut tmp = vec![0.0; self.rank()];
        self.left.matvec_transpose_add(x, &mut tmp);
        self.right.matvec_transpose_add(&tmp, y);
    }

    pub fn transpose(&self) -> Self {
        Self {
            left: self.right.transpose(),
            right: self.left.transpose(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        if self.rank() == 0 {
            return DenseMatrix::zeros(self.rows(), self.cols());
        }
        self.left
            .matmul(&self.right)
            .expect("inner dimensions checked at construction")
    }
}

// ── LinearOperator ──────────────────────────────────────────────────

/// Square matrix-vector product contract shared by dense, factored and
/// hierarchical operands.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// `y = Aᵀ x`. Defaults to `apply_into`, i.e. a symmetric operator.
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y);
    }

    /// Main diagonal, when cheaply available.
    fn diagonal(&self) -> Option<Vec<f64>> {
        None
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        assert!(self.is_square(), "operator view requires a square matrix");
        self.rows
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        self.matvec_transpose_add(x, y);
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some(DenseMatrix::diagonal(self))
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_transpose_into(x, y)
    }
    fn diagonal(&self) -> Option<Vec<f64>> {
        (**self).diagonal()
    }
}

/// `A − B` for two operators of equal dimension.
pub struct Difference<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: LinearOperator, B: LinearOperator> LinearOperator for Difference<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.a.apply_into(x, y);
        let t = self.b.apply(x);
        axpy(-1.0, &t, y);
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.a.apply_transpose_into(x, y);
        let mut t = vec![0.0; self.dim()];
        self.b.apply_transpose_into(x, &mut t);
        axpy(-1.0, &t, y);
    }
}

/// Wraps a closure `(x, y) ↦ y = A x` as a symmetric operator.
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

// ── direct solvers ──────────────────────────────────────────────────

/// Lower Cholesky factor `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn new(a: &DenseMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if !a.is_symmetric(SYMMETRY_TOL) {
            return Err(NumericsError::NotSymmetric);
        }
        let n = a.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let prefix = &l.data[j * n..j * n + j];
            let d = a[(j, j)] - dot(prefix, prefix);
            if d <= 0.0 || !d.is_finite() {
                return Err(NumericsError::NotPositiveDefinite { row: j });
            }
            let pivot = libm::sqrt(d);
            l.data[j * n + j] = pivot;
            for i in (j + 1)..n {
                let s = {
                    let ri = &l.data[i * n..i * n + j];
                    let rj = &l.data[j * n..j * n + j];
                    dot(ri, rj)
                };
                l.data[i * n + j] = (a[(i, j)] - s) / pivot;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.l.rows();
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        // L z = b
        let mut z = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l.row(i)[..i], &z[..i]);
            z[i] = (z[i] - s) / self.l[(i, i)];
        }
        // Lᵀ x = z
        for i in (0..n).rev() {
            z[i] /= self.l[(i, i)];
            let zi = z[i];
            for (zk, lik) in z[..i].iter_mut().zip(&self.l.row(i)[..i]) {
                *zk -= lik * zi;
            }
        }
        Ok(z)
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn cholesky_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    Cholesky::new(a)?.solve(b)
}

/// LU factorization with partial pivoting, `P A = L U` packed in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &DenseMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let threshold = PIVOT_TOL * a.norm_inf();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax < threshold || pmax == 0.0 {
                return Err(NumericsError::SingularMatrix { column: k });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        lu.data[i * n + j] -= factor * lu.data[k * n + j];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Solves a general square system `A x = b` with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    Lu::new(a)?.solve(b)
}

// ── iterative methods ───────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Preconditioner {
    #[default]
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Stop once `‖A x − b‖₂ ≤ tol · ‖b‖₂`.
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            preconditioner: Preconditioner::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖r‖₂ / ‖b‖₂` of the recursively updated residual.
    pub relative_residual: f64,
}

/// Conjugate gradient for symmetric positive-definite operators, starting
/// from `x = 0`.
pub fn conjugate_gradient<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    opts: &CgOptions,
) -> Result<CgSolution, NumericsError> {
    let n = a.dim();
    if b.len() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let inv_diag = match opts.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => {
            let d = a.diagonal().ok_or(NumericsError::PreconditionerUnavailable)?;
            Some(
                d.into_iter()
                    .map(|v| if v != 0.0 { 1.0 / v } else { 1.0 })
                    .collect::<Vec<_>>(),
            )
        }
    };
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(m) => {
            for ((zi, ri), mi) in z.iter_mut().zip(r).zip(m) {
                *zi = ri * mi;
            }
        }
        None => z.copy_from_slice(r),
    };

    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = opts.tol * b_norm;
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut r_norm = b_norm;

    for it in 1..=opts.max_iter {
        a.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { row: it - 1 });
        }
        let step = rz / pap;
        axpy(step, &p, &mut x);
        axpy(-step, &ap, &mut r);
        r_norm = norm2(&r);
        if r_norm <= target {
            return Ok(CgSolution {
                x,
                iterations: it,
                relative_residual: r_norm / b_norm,
            });
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(NumericsError::NotConverged {
        iterations: opts.max_iter,
        residual: r_norm / b_norm,
    })
}

/// Lower estimate of the spectral norm `‖A‖₂` by power iteration on `AᵀA`
/// from a seeded random start vector.
///
/// Each step costs one `A` and one `Aᵀ` product. The returned value is the
/// running maximum of `‖A x_k‖` over unit iterates, so it never decreases
/// with more iterations.
pub fn power_iteration_norm<A: LinearOperator + ?Sized>(a: &A, iters: usize, seed: u64) -> f64 {
    let n = a.dim();
    if n == 0 {
        return 0.0;
    }
    let mut rng = rng_from_seed(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nx = norm2(&x);
    if nx == 0.0 {
        x[0] = 1.0;
    } else {
        x.iter_mut().for_each(|v| *v /= nx);
    }
    let mut y = vec![0.0; n];
    let mut best = 0.0f64;
    for _ in 0..iters.max(1) {
        a.apply_into(&x, &mut y);
        let est = norm2(&y);
        best = best.max(est);
        if est == 0.0 {
            break;
        }
        a.apply_transpose_into(&y, &mut x);
        let nx = norm2(&x);
        if nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = rng_from_seed(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let m = random_matrix(n, n, seed);
        let mut a = m.transpose().matmul(&m).unwrap();
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        a
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn residual_inf(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x).unwrap();
        ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        let err = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(err, NumericsError::DimensionMismatch { expected: 2, found: 1 });
        assert_eq!(
            DenseMatrix::from_vec(1, 1, vec![f64::NAN]).unwrap_err(),
            NumericsError::NonFinite
        );
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let x = cholesky_solve(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        let x = cholesky_solve(&DenseMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        // 2 / √2 / √2 is one ulp below 1.
        assert!(x.iter().all(|v| (v - 1.0).abs() <= f64::EPSILON));
    }

    #[test]
    fn cholesky_random_spd_matches_gauss_elimination() {
        let a = random_spd(20, 11);
        let b = random_vec(20, 12);
        let x = cholesky_solve(&a, &b).unwrap();
        let x_ref = oracles::gauss_solve(&a, &b);
        let b_inf = norm_inf(&b);
        assert!(residual_inf(&a, &x, &b) <= 1e-8 * (1.0 + b_inf));
        for (p, q) in x.iter().zip(&x_ref) {
            assert!((p - q).abs() <= 1e-9 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_and_asymmetric() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky_solve(&a, &[1.0, 1.0]),
            Err(NumericsError::NotPositiveDefinite { row: 1 })
        ));
        let a = DenseMatrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        assert_eq!(cholesky_solve(&a, &[1.0, 1.0]), Err(NumericsError::NotSymmetric));
        let a = DenseMatrix::identity(2);
        assert!(matches!(
            cholesky_solve(&a, &[1.0]),
            Err(NumericsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lu_permutation_and_identity() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[3.0, 5.0]).unwrap(), vec![5.0, 3.0]);
        let b = [0.5, -2.0, 7.25];
        assert_eq!(lu_solve(&DenseMatrix::identity(3), &b).unwrap(), b.to_vec());
    }

    #[test]
    fn lu_random_residual() {
        let a = random_matrix(15, 15, 5);
        let b = random_vec(15, 6);
        let x = lu_solve(&a, &b).unwrap();
        assert!(residual_inf(&a, &x, &b) <= 1e-9);
    }

    #[test]
    fn lu_detects_singularity() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(
            lu_solve(&a, &[1.0, 1.0]),
            Err(NumericsError::SingularMatrix { column: 1 })
        ));
        assert!(matches!(
            lu_solve(&DenseMatrix::zeros(2, 2), &[1.0, 1.0]),
            Err(NumericsError::SingularMatrix { column: 0 })
        ));
    }

    #[test]
    fn cholesky_and_lu_agree_on_spd() {
        for seed in 0..10 {
            let a = random_spd(12, 100 + seed);
            let b = random_vec(12, 200 + seed);
            let x1 = cholesky_solve(&a, &b).unwrap();
            let x2 = lu_solve(&a, &b).unwrap();
            let scale = norm_inf(&x1).max(1.0);
            for (p, q) in x1.iter().zip(&x2) {
                assert!((p - q).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn cg_identity_converges_in_one_step() {
        let a = DenseMatrix::identity(4);
        let b = [1.0, 0.0, 0.0, 0.0];
        let sol = conjugate_gradient(
            &a,
            &b,
            &CgOptions {
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.x, b.to_vec());
    }

    #[test]
    fn cg_diagonal_inverse() {
        let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let a = DenseMatrix::from_diagonal(&d);
        let opts = CgOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let sol = conjugate_gradient(&a, &[1.0; 10], &opts).unwrap();
        for (i, x) in sol.x.iter().enumerate() {
            assert!((x - 1.0 / (i + 1) as f64).abs() <= 1e-11);
        }
        let jac = CgOptions {
            preconditioner: Preconditioner::Jacobi,
            ..opts
        };
        let sol = conjugate_gradient(&a, &[1.0; 10], &jac).unwrap();
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn cg_matches_cholesky_within_ten_tol() {
        let a = random_spd(40, 3);
        let b = random_vec(40, 4);
        let tol = 1e-10;
        let x = cholesky_solve(&a, &b).unwrap();
        let sol = conjugate_gradient(
            &a,
            &b,
            &CgOptions {
                tol,
                ..Default::default()
            },
        )
        .unwrap();
        let err: f64 = sol.x.iter().zip(&x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        // ‖x − x*‖ ≤ ‖A⁻¹‖ ‖r‖ and λ_min(A) ≥ 1 here.
        assert!(err <= 10.0 * tol * norm2(&b));
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = random_spd(30, 8);
        let b = random_vec(30, 9);
        let err = conjugate_gradient(
            &a,
            &b,
            &CgOptions {
                tol: 1e-14,
                max_iter: 2,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, NumericsError::NotConverged { iterations: 2, .. }));
        let op = FnOperator {
            dim: 3,
            f: |x: &[f64], y: &mut [f64]| y.copy_from_slice(x),
        };
        let jac = CgOptions {
            preconditioner: Preconditioner::Jacobi,
            ..Default::default()
        };
        assert_eq!(
            conjugate_gradient(&op, &[1.0; 3], &jac),
            Err(NumericsError::PreconditionerUnavailable)
        );
    }

    #[test]
    fn power_iteration_simple_cases() {
        let est = power_iteration_norm(&DenseMatrix::identity(5), 1, 7);
        assert!((est - 1.0).abs() <= 2.0 * f64::EPSILON);
        let d = DenseMatrix::from_diagonal(&[3.0, 1.0, 0.5]);
        assert!((power_iteration_norm(&d, 50, 7) - 3.0).abs() <= 1e-6);
        assert_eq!(power_iteration_norm(&DenseMatrix::zeros(4, 4), 10, 1), 0.0);
    }

    #[test]
    fn power_iteration_matches_jacobi_eigenvalues() {
        for seed in 0..5 {
            let m = random_matrix(30, 30, 40 + seed);
            let a = DenseMatrix::from_fn(30, 30, |i, j| m[(i, j)] + m[(j, i)]);
            let eig = oracles::jacobi_eigenvalues(&a);
            let truth = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let est = power_iteration_norm(&a, 2000, seed);
            assert!(est <= truth * (1.0 + 1e-12), "estimate {est} exceeds {truth}");
            assert!((est - truth).abs() <= 1e-4 * truth, "estimate {est} vs {truth}");
        }
    }

    #[test]
    fn power_iteration_is_monotone_in_iterations() {
        let m = random_matrix(25, 25, 77);
        let mut last = 0.0;
        for iters in 1..30 {
            let est = power_iteration_norm(&m, iters, 3);
            assert!(est >= last);
            last = est;
        }
        let sv = oracles::jacobi_eigenvalues(&m.transpose().matmul(&m).unwrap());
        let truth = sv.iter().fold(0.0f64, |a, v| a.max(*v)).sqrt();
        assert!(last <= truth * (1.0 + 1e-12));
    }

    #[test]
    fn low_rank_factor_products() {
        let u = random_matrix(6, 2, 1);
        let v = random_matrix(2, 4, 2);
        let f = LowRankFactor::new(u.clone(), v.clone()).unwrap();
        let dense = u.matmul(&v).unwrap();
        let x = random_vec(4, 3);
        let mut y = vec![0.0; 6];
        f.matvec_add(&x, &mut y);
        let y_ref = dense.matvec(&x).unwrap();
        for (p, q) in y.iter().zip(&y_ref) {
            assert!((p - q).abs() < 1e-14);
        }
        let xt = random_vec(6, 4);
        let mut yt = vec![0.0; 4];
        f.matvec_transpose_add(&xt, &mut yt);
        let yt_ref = dense.transpose().matvec(&xt).unwrap();
        for (p, q) in yt.iter().zip(&yt_ref) {
            assert!((p - q).abs() < 1e-14);
        }
        assert_eq!(f.storage(), 2 * 10);
        assert!(LowRankFactor::new(u, random_matrix(3, 4, 9)).is_err());
    }
}
