use super::matrix::CMatrix;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Geometric mean decomposition `diag(s) = q * r * p^H` where `r` is upper
/// triangular with every diagonal entry equal to the geometric mean of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmd<T: Real> {
    pub q: CMatrix<T>,
    pub r: CMatrix<T>,
    pub p: CMatrix<T>,
}

fn swap_index<T: Real>(r: &mut [Vec<T>], q: &mut [Vec<T>], p: &mut [Vec<T>], a: usize, b: usize) {
    if a == b {
        return;
    }
    r.swap(a, b);
    for row in r.iter_mut() {
        row.swap(a, b);
    }
    for row in q.iter_mut() {
        row.swap(a, b);
    }
    for row in p.iter_mut() {
        row.swap(a, b);
    }
}

/// Equalizes the diagonal by Givens rotations on adjacent index pairs.
pub fn gmd<T: Real>(singulars: &[T]) -> Result<Gmd<T>> {
    let n = singulars.len();
    if n == 0 {
        return invalid("empty singular-value vector");
    }
    if singulars.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
        return invalid("singular values must be positive and finite");
    }
    let nf = T::from_usize(n).unwrap();
    let gm = (singulars.iter().map(|s| s.ln()).sum::<T>() / nf).exp();
    let mut r: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| if i == j { singulars[i] } else { T::zero() }).collect()).collect();
    let eye = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
    let mut q: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| eye(i, j)).collect()).collect();
    let mut p = q.clone();
    for k in 0..n.saturating_sub(1) {
        let dk = r[k][k];
        // partner on the other side of the mean
        let partner = if dk >= gm {
            (k + 1..n).find(|&j| r[j][j] <= gm)
        } else {
            (k + 1..n).find(|&j| r[j][j] >= gm)
        };
        let Some(j) = partner else { continue };
        swap_index(&mut r, &mut q, &mut p, k + 1, j);
        let d1 = r[k][k];
        let d2 = r[k + 1][k + 1];
        let (cs, sn) = if (d1 - d2).abs() <= T::epsilon() * d1.max(d2) {
            (T::one(), T::zero())
        } else {
            let c2 = ((gm * gm - d2 * d2) / (d1 * d1 - d2 * d2)).max(T::zero()).min(T::one());
            (c2.sqrt(), (T::one() - c2).sqrt())
        };
        // right rotation G2 = [[c, -s], [s, c]] on columns k, k+1
        for row in r.iter_mut().chain(p.iter_mut()) {
            let a = row[k];
            let b = row[k + 1];
            row[k] = cs * a + sn * b;
            row[k + 1] = -sn * a + cs * b;
        }
        // left rotation G1 = [[c d1, -s d2], [s d2, c d1]] / gm; R <- G1^T R, Q <- Q G1
        let g00 = cs * d1 / gm;
        let g01 = -sn * d2 / gm;
        let g10 = sn * d2 / gm;
        let g11 = cs * d1 / gm;
        for col in 0..n {
            let a = r[k][col];
            let b = r[k + 1][col];
            r[k][col] = g00 * a + g10 * b;
            r[k + 1][col] = g01 * a + g11 * b;
        }
        r[k + 1][k] = T::zero();
        r[k][k] = gm;
        for row in q.iter_mut() {
            let a = row[k];
            let b = row[k + 1];
            row[k] = a * g00 + b * g10;
            row[k + 1] = a * g01 + b * g11;
        }
    }
    let to_c = |m: &Vec<Vec<T>>| CMatrix::from_real_rows(m).expect("square");
    Ok(Gmd { q: to_c(&q), r: to_c(&r), p: to_c(&p) })
}
