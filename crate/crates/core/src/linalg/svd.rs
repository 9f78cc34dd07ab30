use std::cmp::Ordering;

use num_traits::Zero;

use super::eigen::{jacobi_rotation, normalize_phase};
use super::matrix::CMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::{Real, C};

/// `m = left * diag(singular) * right^H`, singular values descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd<T: Real> {
    pub left: CMatrix<T>,
    pub singular: Vec<T>,
    pub right: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let s = CMatrix::rect_diag(self.left.cols(), self.right.cols(), &self.singular);
        self.left.matmul(&s).matmul(&self.right.adjoint())
    }
}

const MAX_SWEEPS: usize = 100;

/// Completes the given orthonormal columns to an `n x n` unitary using the
/// standard basis in order.
fn complete_basis<T: Real>(cols: Vec<Vec<C<T>>>, n: usize) -> CMatrix<T> {
    let mut basis = cols;
    let mut k = 0;
    while basis.len() < n && k < n {
        let mut v = vec![C::zero(); n];
        v[k] = C::new(T::one(), T::zero());
        for _ in 0..2 {
            for b in &basis {
                let proj = b.iter().zip(&v).fold(C::zero(), |acc, (x, y)| acc + x.conj() * *y);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = *vi - *bi * proj;
                }
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if nrm > T::lit(1e-6) {
            basis.push(v.into_iter().map(|z| z / nrm).collect());
        }
        k += 1;
    }
    let mut u = CMatrix::zeros(n, n);
    for (j, col) in basis.iter().enumerate() {
        u.set_col(j, col);
    }
    u
}

/// One-sided Jacobi SVD for `rows >= cols`.
fn svd_tall<T: Real>(m: &CMatrix<T>) -> Result<Svd<T>> {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = CMatrix::identity(n);
    let eps = T::epsilon();
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = C::zero();
                for i in 0..rows {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    alpha = alpha + x.norm_sqr();
                    beta = beta + y.norm_sqr();
                    gamma = gamma + x.conj() * y;
                }
                if gamma.norm() <= eps * (alpha * beta).sqrt() || gamma.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let [g00, g01, g10, g11] = jacobi_rotation(alpha, beta, gamma);
                for i in 0..rows {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * g00 + y * g10;
                    a[(i, q)] = x * g01 + y * g11;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * g00 + y * g10;
                    v[(i, q)] = x * g01 + y * g11;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NotConverged("one-sided Jacobi SVD exceeded sweep limit".into()));
    }
    let norms: Vec<T> = (0..n).map(|j| (0..rows).map(|i| a[(i, j)].norm_sqr()).sum::<T>().sqrt()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(Ordering::Equal));
    let smax = norms.iter().fold(T::zero(), |x, &y| x.max(y));
    let thr = smax * eps * T::from_usize(rows.max(n)).unwrap();
    let mut singular = Vec::with_capacity(n);
    let mut right = CMatrix::zeros(n, n);
    let mut left_cols = Vec::new();
    for (k, &j) in idx.iter().enumerate() {
        let mut vc = v.col(j);
        let ph = normalize_phase(&mut vc);
        right.set_col(k, &vc);
        let s = norms[j];
        singular.push(s);
        if s > thr && left_cols.len() == k {
            let u: Vec<C<T>> = (0..rows).map(|i| a[(i, j)] * ph / s).collect();
            left_cols.push(u);
        }
    }
    // re-orthonormalize the computed left vectors (tiny drift only)
    for k in 0..left_cols.len() {
        for l in 0..k {
            let proj = left_cols[l].iter().zip(&left_cols[k]).fold(C::zero(), |acc, (x, y)| acc + x.conj() * *y);
            let prev = left_cols[l].clone();
            for (x, y) in left_cols[k].iter_mut().zip(&prev) {
                *x = *x - *y * proj;
            }
        }
        let nrm = left_cols[k].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for x in left_cols[k].iter_mut() {
            *x = *x / nrm;
        }
    }
    let left = complete_basis(left_cols, rows);
    Ok(Svd { left, singular, right })
}

/// Thin-free SVD: `left` is `rows x rows`, `right` is `cols x cols`, and
/// `singular` has `min(rows, cols)` entries in descending order.
pub fn svd<T: Real>(m: &CMatrix<T>) -> Result<Svd<T>> {
    if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return invalid("non-finite entry");
    }
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return invalid("empty matrix");
    }
    if rows >= cols {
        return svd_tall(m);
    }
    // m^H = U S V^H  =>  m = V S U^H
    let t = svd_tall(&m.adjoint())?;
    let k = rows;
    let mut right = t.left;
    let mut left = t.right;
    // phase convention lives on `right`; move phases onto `left`
    for j in 0..cols {
        let mut col = right.col(j);
        let ph = normalize_phase(&mut col);
        right.set_col(j, &col);
        if j < k {
            let lc: Vec<C<T>> = left.col(j).into_iter().map(|z| z * ph).collect();
            left.set_col(j, &lc);
        }
    }
    Ok(Svd { left, singular: t.singular, right })
}

pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> Result<T> {
    Ok(svd(m)?.singular.first().copied().unwrap_or(T::zero()))
}
