//! Small dense complex matrices.
//!
//! Every operator in the model is a block of dimension `2^m` with small `m`,
//! so a row-major `Vec` and a cyclic Jacobi eigensolver are all that is
//! needed. Keeping this in-crate lets the whole numerical core stay generic
//! over the scalar type.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{cis, Real};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex<T>]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_residual(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// Largest entrywise modulus of `self† self - I`.
    pub fn unitarity_residual(&self) -> T {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.cols))
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (self.rows, self.cols);
        let (r, s) = (other.rows, other.cols);
        Self::from_fn(p * r, q * s, |i, j| self[(i / r, j / s)] * other[(i % r, j % s)])
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations.
    ///
    /// Returns eigenvalues in ascending order and the unitary whose columns
    /// are the matching eigenvectors. Only the Hermitian part of `self` is
    /// used.
    pub fn eigh(&self) -> (Vec<T>, CMatrix<T>) {
        assert!(self.is_square(), "eigh needs a square matrix");
        let n = self.rows;
        let half = T::lit(0.5);
        let mut a = Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(half));
        let mut v = Self::identity(n);
        let scale = a.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
        let threshold = T::epsilon() * T::lit(0.25) * scale;

        for _sweep in 0..64 {
            let off = off_diagonal_norm(&a);
            if off <= threshold || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r == T::zero() {
                        continue;
                    }
                    let phase = cis(-apq.arg());
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = (aqq - app) / (r + r);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    // G acts on columns p, q: [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
                    let g_pp = Complex::new(c, T::zero());
                    let g_pq = Complex::new(s, T::zero());
                    let g_qp = phase.scale(-s);
                    let g_qq = phase.scale(c);
                    rotate_columns(&mut a, p, q, g_pp, g_pq, g_qp, g_qq);
                    rotate_rows_adjoint(&mut a, p, q, g_pp, g_pq, g_qp, g_qq);
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    a[(p, p)].im = T::zero();
                    a[(q, q)].im = T::zero();
                    rotate_columns(&mut v, p, q, g_pp, g_pq, g_qp, g_qq);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = Self::from_fn(n, n, |i, j| v[(i, order[j])]);
        (values, vectors)
    }

    /// `exp(-i·s·H)` for Hermitian `H = self`, as `Σ_k e^{-iλ_k s} v_k v_k† / |v_k|²`.
    ///
    /// Dividing by the computed `|v_k|²` removes the column-norm rounding of
    /// the eigenvectors, which would otherwise bias every product of many
    /// short steps in the same direction.
    pub fn unitary_exp(&self, s: T) -> Self {
        let (values, vectors) = self.eigh();
        let n = self.rows;
        let weights: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let norm_sq = (0..n).fold(T::zero(), |acc, i| acc + vectors[(i, k)].norm_sqr());
                cis(-values[k] * s).unscale(norm_sq)
            })
            .collect();
        Self::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| {
                acc + vectors[(i, k)] * weights[k] * vectors[(j, k)].conj()
            })
        })
    }
}

fn off_diagonal_norm<T: Real>(a: &CMatrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

// m ← m·G on columns p, q.
fn rotate_columns<T: Real>(
    m: &mut CMatrix<T>,
    p: usize,
    q: usize,
    g_pp: Complex<T>,
    g_pq: Complex<T>,
    g_qp: Complex<T>,
    g_qq: Complex<T>,
) {
    for k in 0..m.rows {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * g_pp + mq * g_qp;
        m[(k, q)] = mp * g_pq + mq * g_qq;
    }
}

// m ← G†·m on rows p, q.
fn rotate_rows_adjoint<T: Real>(
    m: &mut CMatrix<T>,
    p: usize,
    q: usize,
    g_pp: Complex<T>,
    g_pq: Complex<T>,
    g_qp: Complex<T>,
    g_qq: Complex<T>,
) {
    for k in 0..m.cols {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mp + g_qp.conj() * mq;
        m[(q, k)] = g_pq.conj() * mp + g_qq.conj() * mq;
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product of two matrices.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kron(b)
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}
