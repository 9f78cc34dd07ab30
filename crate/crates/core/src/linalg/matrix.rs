use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::scalar::{cr, Real, C};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from real entries given row by row.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return invalid("ragged rows");
        }
        Ok(Self::from_fn(r, c, |i, j| cr(rows[i][j])))
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = cr(x);
        }
        m
    }

    /// `rows x cols` matrix with `d` on the main diagonal.
    pub fn rect_diag(rows: usize, cols: usize, d: &[T]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &x) in d.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = cr(x);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch {:?} x {:?}", self.shape(), rhs.shape());
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self^H * rhs` without forming the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul shape mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self * self^H`.
    pub fn gram_outer(&self) -> Self {
        let mut g = self.matmul(&self.adjoint());
        g.hermitianize();
        g
    }

    /// `self^H * self`.
    pub fn gram_inner(&self) -> Self {
        let mut g = self.adjoint_mul(self);
        g.hermitianize();
        g
    }

    /// `self^H * m * self`, symmetrized.
    pub fn congruence(&self, m: &Self) -> Self {
        let mut g = self.adjoint_mul(&m.matmul(self));
        g.hermitianize();
        g
    }

    /// Replaces the matrix by `(A + A^H) / 2`.
    pub fn hermitianize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        let half = T::lit(0.5);
        for i in 0..n {
            let d = self[(i, i)].re;
            self[(i, i)] = cr(d);
            for j in i + 1..n {
                let v = (self[(i, j)] + self[(j, i)].conj()) * half;
                self[(i, j)] = v;
                self[(j, i)] = v.conj();
            }
        }
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn trace_re(&self) -> T {
        self.trace().re
    }

    /// `Re Tr(self * rhs)` without forming the product.
    pub fn trace_product_re(&self, rhs: &Self) -> T {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = T::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + (self[(i, k)] * rhs[(k, i)]).re;
            }
        }
        acc
    }

    pub fn diag_re(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].re).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermitian_defect() <= tol * T::one().max(self.max_abs())
    }

    /// Largest entry of `|A^H A - I|`.
    pub fn unitarity_defect(&self) -> T {
        let g = self.adjoint_mul(self);
        g.max_abs_diff(&Self::identity(self.cols))
    }

    pub fn col(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C<T>]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> Self {
        assert!(k <= self.cols);
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// Pads with zero columns (or truncates) to `k` columns.
    pub fn with_cols(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |i, j| if j < self.cols { self[(i, j)] } else { C::zero() })
    }

    /// Multiplies column `j` by `d[j]`.
    pub fn scale_cols(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (r2, c2) = rhs.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| self[(i / r2, j / c2)] * rhs[(i % r2, j % c2)])
    }

    pub fn to_f64(&self) -> CMatrix<f64> {
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let z = self[(i, j)];
            C::new(z.re.as_f64(), z.im.as_f64())
        })
    }

    pub fn from_f64(m: &CMatrix<f64>) -> Self {
        Self::from_fn(m.rows, m.cols, |i, j| {
            let z = m[(i, j)];
            C::new(T::lit(z.re), T::lit(z.im))
        })
    }

    /// LU with partial pivoting; returns the factors packed plus the permutation sign.
    fn lu(&self) -> Result<(Self, Vec<usize>, T)> {
        if !self.is_square() {
            return invalid("LU of a non-square matrix");
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = self.max_abs();
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, T::neg_infinity()), |b, x| if x.1 > b.1 { x } else { b });
            if !(pv > T::epsilon() * T::lit(16.0) * scale) || scale == T::zero() {
                return Err(Error::SingularMatrix("zero pivot in LU".into()));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let v = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * v;
                }
            }
        }
        Ok((a, perm, sign))
    }

    pub fn determinant(&self) -> Result<C<T>> {
        match self.lu() {
            Ok((a, _, sign)) => Ok((0..self.rows).fold(cr(sign), |acc, i| acc * a[(i, i)])),
            Err(Error::SingularMatrix(_)) => Ok(C::zero()),
            Err(e) => Err(e),
        }
    }

    /// Solves `self * X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let (a, perm, _) = self.lu()?;
        let n = self.rows;
        if rhs.rows != n {
            return invalid("solve shape mismatch");
        }
        let mut x = Self::from_fn(n, rhs.cols, |i, j| rhs[(perm[i], j)]);
        for j in 0..rhs.cols {
            for i in 0..n {
                let mut s = x[(i, j)];
                for k in 0..i {
                    s = s - a[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s = s - a[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn sample() -> CMatrix<f64> {
        CMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 + 1.0, (i as f64) - (j as f64) * 0.5))
            .map(|z| if z.re == 9.0 { z + C::new(3.0, 0.0) } else { z })
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = sample();
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn determinant_of_triangular() {
        let a = CMatrix::<f64>::from_real_rows(&[vec![2.0, 5.0], vec![0.0, 3.0]]).unwrap();
        assert!((a.determinant().unwrap().re - 6.0).abs() < 1e-14);
        let s = CMatrix::<f64>::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(s.determinant().unwrap(), C::new(0.0, 0.0));
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = CMatrix::<f64>::from_diag(&[1.0, 2.0]);
        let b = CMatrix::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(2, 3)], C::new(2.0, 0.0));
        assert_eq!(k[(0, 3)], C::new(0.0, 0.0));
    }

    #[test]
    fn adjoint_mul_matches_explicit() {
        let a = sample();
        assert!(a.adjoint_mul(&a).max_abs_diff(&a.adjoint().matmul(&a)) < 1e-12);
        assert!(a.trace_product_re(&a.adjoint()) - a.frobenius_norm().powi(2) < 1e-10);
    }
}
