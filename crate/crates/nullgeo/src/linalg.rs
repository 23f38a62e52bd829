//! Small dense matrix kernels used for metric components, screen-space
//! Weingarten maps and Jacobi matrices.  Sizes here are tiny (at most the
//! spacetime dimension), so simple Gauss-Jordan and cyclic Jacobi sweeps
//! are entirely adequate.

use crate::error::{Error, Result};
use crate::real::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<F> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<F>,
}

impl<F: Real> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[F]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn matvec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: F) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn trace(&self) -> F {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> F {
        self.data.iter().map(|&x| x * x).sum::<F>().sqrt()
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |a, &x| a.max(x.abs()))
    }

    /// Max-norm of the antisymmetric part; zero for a symmetric matrix.
    pub fn asymmetry(&self) -> F {
        debug_assert!(self.is_square());
        let mut worst = F::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]).half())
    }

    /// Gauss-Jordan inverse with partial pivoting.  Also returns a cheap
    /// condition estimate max|A| * max|A^-1| * n.
    pub fn inverse(&self) -> Result<(Self, F)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if a[(piv, col)] == F::zero() {
                return Err(Error::IllConditioned { cond: f64::INFINITY });
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] / d;
                inv[(col, j)] = inv[(col, j)] / d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == F::zero() {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] = a[(r, j)] - f * a[(col, j)];
                    inv[(r, j)] = inv[(r, j)] - f * inv[(col, j)];
                }
            }
        }
        let cond = self.max_abs() * inv.max_abs() * F::from_usize(n).unwrap();
        Ok((inv, cond))
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> F {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = F::one();
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if a[(piv, col)] == F::zero() {
                return F::zero();
            }
            if piv != col {
                a.swap_rows(piv, col);
                det = -det;
            }
            det = det * a[(col, col)];
            for r in (col + 1)..n {
                let f = a[(r, col)] / a[(col, col)];
                for j in col..n {
                    a[(r, j)] = a[(r, j)] - f * a[(col, j)];
                }
            }
        }
        det
    }

    /// Adjugate (transposed cofactor matrix) by determinants of minors;
    /// satisfies A adj(A) = det(A) I even when A is singular.  Intended
    /// for the tiny screen-space matrices only.
    pub fn adjugate(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return Self::identity(1);
        }
        let minor_det = |r: usize, c: usize| -> F {
            let m = Self::from_fn(n - 1, n - 1, |i, j| {
                let ii = if i < r { i } else { i + 1 };
                let jj = if j < c { j } else { j + 1 };
                self[(ii, jj)]
            });
            m.det()
        };
        Self::from_fn(n, n, |i, j| {
            let sign = if (i + j) % 2 == 0 { F::one() } else { -F::one() };
            sign * minor_det(j, i)
        })
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
    /// returned in ascending order.
    pub fn sym_eigenvalues(&self) -> Vec<F> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.symmetrize();
        let tol = F::of(1e-14) * a.max_abs().max(F::one());
        for _sweep in 0..64 {
            let mut off = F::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a[(i, j)].abs());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[(p, q)].abs() <= tol * F::of(1e-2) {
                        continue;
                    }
                    let apq = a[(p, q)];
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    let tau = (aqq - app) / (F::of(2.0) * apq);
                    let t = if tau >= F::zero() {
                        F::one() / (tau + (F::one() + tau * tau).sqrt())
                    } else {
                        -F::one() / (-tau + (F::one() + tau * tau).sqrt())
                    };
                    let c = F::one() / (F::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<F> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }

    /// Orthonormal eigenvectors (columns) and eigenvalues of a symmetric
    /// matrix, eigenvalues ascending.
    pub fn sym_eigen(&self) -> (Vec<F>, Mat<F>) {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.symmetrize();
        let mut v = Mat::identity(n);
        let tol = F::of(1e-14) * a.max_abs().max(F::one());
        for _sweep in 0..64 {
            let mut off = F::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a[(i, j)].abs());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[(p, q)].abs() <= tol * F::of(1e-2) {
                        continue;
                    }
                    let apq = a[(p, q)];
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    let tau = (aqq - app) / (F::of(2.0) * apq);
                    let t = if tau >= F::zero() {
                        F::one() / (tau + (F::one() + tau * tau).sqrt())
                    } else {
                        -F::one() / (-tau + (F::one() + tau * tau).sqrt())
                    };
                    let c = F::one() / (F::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
        let eig: Vec<F> = idx.iter().map(|&i| a[(i, i)]).collect();
        let vecs = Mat::from_fn(n, n, |r, c| v[(r, idx[c])]);
        (eig, vecs)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<F: Real> std::ops::Index<(usize, usize)> for Mat<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Real> std::ops::IndexMut<(usize, usize)> for Mat<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// g_{mu nu} X^mu Y^nu for a symmetric component matrix.
pub fn bilinear<F: Real>(g: &Mat<F>, x: &[F], y: &[F]) -> F {
    let mut acc = F::zero();
    for i in 0..g.rows {
        for j in 0..g.cols {
            acc = acc + g[(i, j)] * x[i] * y[j];
        }
    }
    acc
}

pub fn dot<F: Real>(x: &[F], y: &[F]) -> F {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

pub fn euclidean_norm_sq<F: Real>(x: &[F]) -> F {
    dot(x, x)
}

pub fn axpy<F: Real>(y: &mut [F], a: F, x: &[F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}
