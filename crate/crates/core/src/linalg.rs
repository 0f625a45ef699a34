//! Small dense matrices over a [`Real`] scalar.
//!
//! Sizes here are tiny (n <= 8 for points, a few dozen for differentials), so
//! the routines favour accuracy over blocking: cyclic Jacobi for symmetric
//! eigenproblems (high relative accuracy on graded positive-definite input),
//! twice-iterated modified Gram-Schmidt for QR (preserves column prefixes,
//! which is exactly what flags need), and partial-pivoting LU.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::real::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds from a row-major slice of doubles.
    pub fn from_row_slice(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols, "row-major data has the wrong length");
        Mat { rows, cols, data: values.iter().map(|&v| T::from_f64(v)).collect() }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
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

    pub fn to_f64(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(Real::to_f64).collect() }
    }

    pub fn lift<U: Real>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }

    /// Row-major values as doubles.
    pub fn to_row_major_f64(&self) -> Vec<f64> {
        self.data.iter().map(Real::to_f64).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self[(r, k)].clone() * &other[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }

    /// `selfᵀ · other` without materialising the transpose.
    pub fn tr_matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.rows, other.rows, "tr_matmul dimension mismatch");
        let mut out = Mat::zeros(self.cols, other.cols);
        for r in 0..self.cols {
            for c in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.rows {
                    acc = acc + self[(k, r)].clone() * &other[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }

    /// `A · S · Aᵀ`, symmetrised.
    pub fn congruence(&self, s: &Mat<T>) -> Mat<T> {
        self.matmul(s).matmul(&self.transpose()).symmetrized()
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.clone() * s).collect() }
    }

    pub fn neg(&self) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a.clone()).collect() }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + &self[(i, i)])
    }

    /// `tr(A·B)` for square matrices of equal size.
    pub fn trace_product(&self, other: &Mat<T>) -> T {
        assert_eq!((self.cols, self.rows), (other.rows, other.cols));
        let mut acc = T::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * &other[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.clone() * v).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn symmetrized(&self) -> Mat<T> {
        let half = T::from_f64(0.5);
        Mat::from_fn(self.rows, self.cols, |r, c| (self[(r, c)].clone() + &self[(c, r)]) * &half)
    }

    /// Largest entry of `|A - Aᵀ|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                worst = worst.max((self[(r, c)].clone() - &self[(c, r)]).abs());
            }
        }
        worst
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Mat<T> {
        Mat::from_fn(self.rows, end - start, |r, c| self[(r, start + c)].clone())
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat<T> {
        Mat::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    /// Horizontal concatenation.
    pub fn hcat(parts: &[Mat<T>]) -> Mat<T> {
        let rows = parts.first().map_or(0, |p| p.rows);
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut offset = 0;
        for p in parts {
            assert_eq!(p.rows, rows, "hcat row mismatch");
            for r in 0..rows {
                for c in 0..p.cols {
                    out[(r, offset + c)] = p[(r, c)].clone();
                }
            }
            offset += p.cols;
        }
        out
    }

    /// Reverses the column order.
    pub fn reverse_columns(&self) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |r, c| self[(r, self.cols - 1 - c)].clone())
    }

    /// `‖Aᵀ A − I‖_max`, the orthonormality defect of the columns.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.tr_matmul(self);
        let mut worst = T::zero();
        for r in 0..g.rows {
            for c in 0..g.cols {
                let target = if r == c { T::one() } else { T::zero() };
                worst = worst.max((g[(r, c)].clone() - target).abs());
            }
        }
        worst
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: Mat<T>,
}

impl<T: Real> SymEigen<T> {
    /// Reassembles `V f(Λ) Vᵀ`.
    pub fn map(&self, mut f: impl FnMut(&T) -> T) -> Mat<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(&mut f).collect();
        let mut out = Mat::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + self.vectors[(r, k)].clone() * &fv[k] * &self.vectors[(c, k)];
                }
                out[(c, r)] = acc.clone();
                out[(r, c)] = acc;
            }
        }
        out
    }
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// A rotation is skipped when `|a_pq| <= eps * sqrt(|a_pp a_qq|)`, the
/// relative criterion that keeps small eigenvalues of graded positive-definite
/// matrices accurate to working precision. Ties in the descending sort keep
/// their original order.
pub fn sym_eigen<T: Real>(a: &Mat<T>) -> SymEigen<T> {
    assert!(a.is_square(), "eigendecomposition needs a square matrix");
    let n = a.rows;
    let mut m = a.symmetrized();
    let mut v = Mat::<T>::identity(n);
    let eps = T::epsilon();
    let one = T::one();
    let half = T::from_f64(0.5);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)].clone();
                if apq == T::zero() {
                    continue;
                }
                let scale = (m[(p, p)].clone() * &m[(q, q)]).abs().sqrt();
                if apq.abs() <= eps.clone() * &scale {
                    m[(p, q)] = T::zero();
                    m[(q, p)] = T::zero();
                    continue;
                }
                rotated = true;
                let app = m[(p, p)].clone();
                let aqq = m[(q, q)].clone();
                let theta = (aqq.clone() - &app) * &half / &apq;
                let root = (theta.clone() * &theta + &one).sqrt();
                let t = if theta.abs().to_f64() > 1e150 {
                    one.clone() / (theta.clone() + &theta)
                } else if theta.is_negative() {
                    -(one.clone() / (root - &theta))
                } else {
                    one.clone() / (theta.clone() + &root)
                };
                let c = one.clone() / (t.clone() * &t + &one).sqrt();
                let s = t.clone() * &c;
                let tau = s.clone() / (one.clone() + &c);
                m[(p, p)] = app - t.clone() * &apq;
                m[(q, q)] = aqq + t.clone() * &apq;
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for r in 0..n {
                    if r != p && r != q {
                        let arp = m[(r, p)].clone();
                        let arq = m[(r, q)].clone();
                        let new_rp = arp.clone() - s.clone() * (arq.clone() + tau.clone() * &arp);
                        let new_rq = arq.clone() + s.clone() * (arp - tau.clone() * &arq);
                        m[(r, p)] = new_rp.clone();
                        m[(p, r)] = new_rp;
                        m[(r, q)] = new_rq.clone();
                        m[(q, r)] = new_rq;
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)].clone();
                    let vrq = v[(r, q)].clone();
                    v[(r, p)] = vrp.clone() - s.clone() * (vrq.clone() + tau.clone() * &vrp);
                    v[(r, q)] = vrq.clone() + s.clone() * (vrp - tau.clone() * &vrq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their Jacobi order
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)].clone()).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])].clone());
    SymEigen { values, vectors }
}

/// Thin QR by twice-iterated modified Gram-Schmidt: `A = Q R`, `Q` with
/// orthonormal columns spanning the same column prefixes as `A`, `R` upper
/// triangular with nonnegative diagonal. Returns `None` when a column is
/// numerically dependent on its predecessors.
pub fn qr<T: Real>(a: &Mat<T>) -> Option<(Mat<T>, Mat<T>)> {
    let (rows, cols) = (a.rows, a.cols);
    let mut q = a.clone();
    let mut r = Mat::<T>::zeros(cols, cols);
    let eps = T::epsilon();
    for j in 0..cols {
        let original = column_norm(&q, j);
        for _pass in 0..2 {
            for i in 0..j {
                let mut dot = T::zero();
                for k in 0..rows {
                    dot = dot + q[(k, i)].clone() * &q[(k, j)];
                }
                for k in 0..rows {
                    let v = q[(k, j)].clone() - dot.clone() * &q[(k, i)];
                    q[(k, j)] = v;
                }
                r[(i, j)] = r[(i, j)].clone() + dot;
            }
        }
        let norm = column_norm(&q, j);
        if norm == T::zero() || norm <= original * &eps {
            return None;
        }
        for k in 0..rows {
            let v = q[(k, j)].clone() / &norm;
            q[(k, j)] = v;
        }
        r[(j, j)] = norm;
    }
    Some((q, r))
}

fn column_norm<T: Real>(m: &Mat<T>, j: usize) -> T {
    (0..m.rows).fold(T::zero(), |acc, k| acc + m[(k, j)].clone() * &m[(k, j)]).sqrt()
}

/// LU factorisation with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    sign: i32,
    singular: bool,
}

pub fn lu<T: Real>(a: &Mat<T>) -> Lu<T> {
    assert!(a.is_square(), "LU needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1;
    let mut singular = false;
    for k in 0..n {
        let mut piv = k;
        let mut best = m[(k, k)].abs();
        for r in (k + 1)..n {
            let cand = m[(r, k)].abs();
            if cand > best {
                best = cand;
                piv = r;
            }
        }
        if best == T::zero() {
            singular = true;
            continue;
        }
        if piv != k {
            for c in 0..n {
                let tmp = m[(k, c)].clone();
                m[(k, c)] = m[(piv, c)].clone();
                m[(piv, c)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        for r in (k + 1)..n {
            let f = m[(r, k)].clone() / &m[(k, k)];
            for c in (k + 1)..n {
                let v = m[(r, c)].clone() - f.clone() * &m[(k, c)];
                m[(r, c)] = v;
            }
            m[(r, k)] = f;
        }
    }
    Lu { lu: m, perm, sign, singular }
}

impl<T: Real> Lu<T> {
    pub fn determinant(&self) -> T {
        if self.singular {
            return T::zero();
        }
        let n = self.lu.rows;
        let mut det = if self.sign > 0 { T::one() } else { -T::one() };
        for i in 0..n {
            det = det * &self.lu[(i, i)];
        }
        det
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &Mat<T>) -> Option<Mat<T>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut x = Mat::from_fn(n, b.cols, |r, c| b[(self.perm[r], c)].clone());
        for c in 0..b.cols {
            for r in 0..n {
                let mut acc = x[(r, c)].clone();
                for k in 0..r {
                    acc = acc - self.lu[(r, k)].clone() * &x[(k, c)];
                }
                x[(r, c)] = acc;
            }
            for r in (0..n).rev() {
                let mut acc = x[(r, c)].clone();
                for k in (r + 1)..n {
                    acc = acc - self.lu[(r, k)].clone() * &x[(k, c)];
                }
                x[(r, c)] = acc / &self.lu[(r, r)];
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        self.solve(&Mat::identity(self.lu.rows))
    }
}

pub fn determinant<T: Real>(a: &Mat<T>) -> T {
    lu(a).determinant()
}

pub fn inverse<T: Real>(a: &Mat<T>) -> Option<Mat<T>> {
    lu(a).inverse()
}

/// Inverse of an upper-triangular matrix by back substitution.
pub fn upper_triangular_inverse<T: Real>(r: &Mat<T>) -> Mat<T> {
    let n = r.rows;
    let mut inv = Mat::<T>::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = T::one() / &r[(j, j)];
        for i in (0..j).rev() {
            let mut acc = T::zero();
            for k in (i + 1)..=j {
                acc = acc + r[(i, k)].clone() * &inv[(k, j)];
            }
            inv[(i, j)] = -acc / &r[(i, i)];
        }
    }
    inv
}

/// Singular values of a matrix (descending), from the eigenvalues of `AᵀA`.
pub fn singular_values<T: Real>(a: &Mat<T>) -> Vec<T> {
    let gram = if a.rows >= a.cols { a.tr_matmul(a) } else { a.matmul(&a.transpose()) };
    sym_eigen(&gram).values.into_iter().map(|v| v.max(T::zero()).sqrt()).collect()
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &Mat<T>) -> T {
    singular_values(a).into_iter().next().unwrap_or_else(T::zero)
}
