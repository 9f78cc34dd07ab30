use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::matrix::CMatrix;
use super::{HermitianPsd, Tolerances};
use crate::error::{invalid, Error, Result};
use crate::scalar::{c, cr, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenOrder {
    Descending,
    Ascending,
}

/// Eigendecomposition `m = unitary * diag(eigenvalues) * unitary^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedEigen<T: Real> {
    pub unitary: CMatrix<T>,
    pub eigenvalues: Vec<T>,
    pub order: EigenOrder,
}

impl<T: Real> SortedEigen<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let mut m = self.unitary.scale_cols(&self.eigenvalues).matmul(&self.unitary.adjoint());
        m.hermitianize();
        m
    }

    /// Rebuilds with each eigenvalue replaced by `f(eigenvalue)`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let d: Vec<T> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut m = self.unitary.scale_cols(&d).matmul(&self.unitary.adjoint());
        m.hermitianize();
        m
    }
}

const MAX_SWEEPS: usize = 100;

/// Unitary 2x2 rotation `G` (acting on indices p, q) that zeroes the (p, q)
/// entry of `G^H B G` for the Hermitian block `[[app, apq], [conj(apq), aqq]]`.
pub(crate) fn jacobi_rotation<T: Real>(app: T, aqq: T, apq: C<T>) -> [C<T>; 4] {
    let r = apq.norm();
    if r == T::zero() {
        return [C::one(), C::zero(), C::zero(), C::one()];
    }
    let ph = apq / r;
    let tau = (aqq - app) / (r + r);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let cs = T::one() / (T::one() + t * t).sqrt();
    let sn = t * cs;
    let e = ph.conj();
    // G = diag(1, e) * [[c, s], [-s, c]]
    [cr(cs), cr(sn), e * (-sn), e * cs]
}

/// Cyclic Jacobi on a Hermitian matrix; returns (eigenvalues, eigenvectors) unsorted.
pub(crate) fn jacobi_hermitian<T: Real>(m: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let n = m.rows();
    let mut a = m.clone();
    a.hermitianize();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == T::zero() || n < 2 {
        return Ok((a.diag_re(), v));
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale * T::lit(0.25) {
            return Ok((a.diag_re(), v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if apq.norm() <= eps * T::lit(0.01) * (app.abs() + aqq.abs()).max(scale * eps) {
                    a[(p, q)] = C::zero();
                    a[(q, p)] = C::zero();
                    continue;
                }
                let [g00, g01, g10, g11] = jacobi_rotation(app, aqq, apq);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g00 + akq * g10;
                    a[(k, q)] = akp * g01 + akq * g11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                    a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g00 + vkq * g10;
                    v[(k, q)] = vkp * g01 + vkq * g11;
                }
            }
        }
    }
    Err(Error::NotConverged("Jacobi eigensolver exceeded sweep limit".into()))
}

/// Rotates a vector so that its first entry of modulus above `1e-12` is real
/// and non-negative.
pub fn normalize_phase<T: Real>(v: &mut [C<T>]) -> C<T> {
    let thr = T::lit(1e-12);
    match v.iter().find(|z| z.norm() > thr) {
        Some(&z) => {
            let ph = z.conj() / z.norm();
            let mut fixed = false;
            for x in v.iter_mut() {
                *x = *x * ph;
                if !fixed && x.norm() > thr {
                    *x = cr(x.norm());
                    fixed = true;
                }
            }
            ph
        }
        None => C::one(),
    }
}

fn lex_cmp<T: Real>(a: &[C<T>], b: &[C<T>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal);
        if o != Ordering::Equal {
            return o;
        }
        let o = x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal);
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Sorts eigenpairs, applies the phase convention and breaks ties
/// (eigenvalues equal within `tie_tol * max|λ|`) by descending lexicographic
/// order of the normalized eigenvectors.
pub(crate) fn sort_pairs<T: Real>(
    vals: Vec<T>,
    vecs: &CMatrix<T>,
    order: EigenOrder,
    tie_tol: T,
) -> (Vec<T>, CMatrix<T>) {
    let n = vals.len();
    let mut cols: Vec<Vec<C<T>>> = (0..n)
        .map(|j| {
            let mut col = vecs.col(j);
            normalize_phase(&mut col);
            col
        })
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        let o = vals[j].partial_cmp(&vals[i]).unwrap_or(Ordering::Equal);
        match order {
            EigenOrder::Descending => o,
            EigenOrder::Ascending => o.reverse(),
        }
    });
    // values stay in strict order; ties only permute the vectors
    let sorted_vals: Vec<T> = idx.iter().map(|&i| vals[i]).collect();
    let scale = vals.iter().fold(T::zero(), |m, x| m.max(x.abs())).max(T::min_positive_value());
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[idx[end]] - vals[idx[end - 1]]).abs() <= tie_tol * scale {
            end += 1;
        }
        idx[start..end].sort_by(|&i, &j| lex_cmp(&cols[j], &cols[i]));
        start = end;
    }
    let mut u = CMatrix::zeros(vecs.rows(), n);
    for (k, &i) in idx.iter().enumerate() {
        u.set_col(k, &std::mem::take(&mut cols[i]));
    }
    (sorted_vals, u)
}

/// Sorted eigendecomposition of a Hermitian (not necessarily PSD) matrix.
pub fn evd_hermitian<T: Real>(m: &CMatrix<T>, order: EigenOrder) -> Result<SortedEigen<T>> {
    let tol = Tolerances::for_scalar::<T>();
    if !m.is_square() {
        return invalid(format!("eigendecomposition of non-square {:?} matrix", m.shape()));
    }
    if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return invalid("non-finite entry");
    }
    if !m.is_hermitian(T::lit(tol.herm)) {
        return invalid("matrix is not Hermitian");
    }
    let (vals, vecs) = jacobi_hermitian(m)?;
    let (eigenvalues, unitary) = sort_pairs(vals, &vecs, order, T::lit(tol.tie));
    Ok(SortedEigen { unitary, eigenvalues, order })
}

/// Sorted eigendecomposition of a Hermitian PSD matrix.
pub fn evd_sorted<T: Real>(m: &HermitianPsd<T>, order: EigenOrder) -> Result<SortedEigen<T>> {
    evd_hermitian(m.as_matrix(), order)
}

pub fn eigenvalues_desc<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    Ok(evd_hermitian(m, EigenOrder::Descending)?.eigenvalues)
}

/// Hermitian square root of a PSD matrix.
pub fn herm_sqrt<T: Real>(m: &HermitianPsd<T>) -> Result<CMatrix<T>> {
    let e = evd_sorted(m, EigenOrder::Descending)?;
    Ok(e.apply(|x| x.max(T::zero()).sqrt()))
}

/// Pseudo-inverse square root: eigenvalues at or below `rank_tol * λmax` map to 0.
pub fn pinv_sqrt<T: Real>(m: &HermitianPsd<T>, rank_tol: T) -> Result<CMatrix<T>> {
    let e = evd_sorted(m, EigenOrder::Descending)?;
    let lmax = e.eigenvalues.first().copied().unwrap_or(T::zero());
    Ok(e.apply(|x| if x > rank_tol * lmax && x > T::zero() { T::one() / x.sqrt() } else { T::zero() }))
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt<T: Real>(m: &HermitianPsd<T>) -> Result<CMatrix<T>> {
    let e = evd_sorted(m, EigenOrder::Descending)?;
    let lmax = e.eigenvalues.first().copied().unwrap_or(T::zero());
    let lmin = e.eigenvalues.last().copied().unwrap_or(T::zero());
    let tol = T::lit(Tolerances::for_scalar::<T>().rank);
    if !(lmin > tol * lmax) || lmax <= T::zero() {
        return Err(Error::SingularMatrix("matrix is not positive definite".into()));
    }
    Ok(e.apply(|x| T::one() / x.sqrt()))
}

/// Inverse of a positive definite Hermitian matrix via its eigendecomposition.
pub fn herm_inverse<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let e = evd_hermitian(m, EigenOrder::Descending)?;
    let lmax = e.eigenvalues.first().map_or(T::zero(), |x| x.abs());
    let tol = T::lit(Tolerances::for_scalar::<T>().rank);
    if e.eigenvalues.iter().any(|&x| x.abs() <= tol * lmax) || lmax == T::zero() {
        return Err(Error::SingularMatrix("Hermitian matrix is singular".into()));
    }
    Ok(e.apply(|x| T::one() / x))
}

/// `log det` of a positive definite Hermitian matrix.
pub fn herm_logdet<T: Real>(m: &CMatrix<T>) -> Result<T> {
    let vals = eigenvalues_desc(m)?;
    if vals.iter().any(|&x| x <= T::zero()) {
        return Err(Error::SingularMatrix("log-determinant of a non-PD matrix".into()));
    }
    Ok(vals.iter().map(|x| x.ln()).sum())
}

/// Unitary whose columns are `e^{-2πi jk/n}/√n`.
pub fn dft_matrix<T: Real>(n: usize) -> CMatrix<T> {
    let nf = T::from_usize(n).unwrap();
    let s = T::one() / nf.sqrt();
    CMatrix::from_fn(n, n, |j, k| {
        let jk = ((j * k) % n.max(1)) as f64;
        let ang = -T::TAU() * T::lit(jk) / nf;
        c(ang.cos() * s, ang.sin() * s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{complex_gaussian, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diag_example_descending() {
        let m = CMatrix::<f64>::from_diag(&[1.0, 3.0, 2.0]);
        let e = evd_hermitian(&m, EigenOrder::Descending).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        let p = CMatrix::from_real_rows(&[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(e.unitary, p);
    }

    #[test]
    fn identity_keeps_standard_basis() {
        let e = evd_hermitian(&CMatrix::<f64>::identity(2), EigenOrder::Descending).unwrap();
        assert_eq!(e.unitary, CMatrix::identity(2));
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn zero_matrix_ascending() {
        let e = evd_hermitian(&CMatrix::<f64>::zeros(2, 2), EigenOrder::Ascending).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0, 0.0]);
        assert_eq!(e.unitary, CMatrix::identity(2));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::<f64>::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(evd_hermitian(&m, EigenOrder::Descending), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn random_reconstruction_and_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            let m: CMatrix<f64> = random_hermitian(n, &mut rng);
            let e = evd_hermitian(&m, EigenOrder::Descending).unwrap();
            let scale = m.max_abs().max(1.0);
            assert!(e.reconstruct().max_abs_diff(&m) < 1e-12 * scale * n as f64);
            assert!(e.unitary.unitarity_defect() < 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            for j in 0..n {
                let col = e.unitary.col(j);
                let first = col.iter().find(|z| z.norm() > 1e-12).unwrap();
                assert!(first.im == 0.0 && first.re > 0.0);
            }
        }
    }

    #[test]
    fn f32_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m: CMatrix<f32> = random_hermitian(5, &mut rng);
        let e = evd_hermitian(&m, EigenOrder::Ascending).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-4);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn deterministic_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g: CMatrix<f64> = complex_gaussian(4, 4, &mut rng);
        let m = g.gram_outer();
        let a = evd_hermitian(&m, EigenOrder::Descending).unwrap();
        let b = evd_hermitian(&m, EigenOrder::Descending).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sqrt_and_pinv_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g: CMatrix<f64> = complex_gaussian(4, 2, &mut rng);
        let m = HermitianPsd::from_gram(&g);
        let s = herm_sqrt(&m).unwrap();
        assert!(s.matmul(&s).max_abs_diff(m.as_matrix()) < 1e-12);
        let p = pinv_sqrt(&m, 1e-10).unwrap();
        let proj = p.matmul(m.as_matrix()).matmul(&p);
        // projector onto the range: idempotent with trace equal to the rank
        assert!(proj.matmul(&proj).max_abs_diff(&proj) < 1e-10);
        assert!((proj.trace_re() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn dft_is_unitary() {
        let w = dft_matrix::<f64>(5);
        assert!(w.unitarity_defect() < 1e-14);
        assert!((w[(0, 0)].re - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }
}
