//! Seeded random matrices for tests, oracles and simulations.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::CMatrix;
use crate::scalar::{c, Real, C};

/// Entries i.i.d. CN(0, 1).
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let h = T::FRAC_1_SQRT_2();
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: T = StandardNormal.sample(rng);
        let im: T = StandardNormal.sample(rng);
        c(re * h, im * h)
    })
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let g: CMatrix<T> = complex_gaussian(n, n, rng);
    let mut m = &g + &g.adjoint();
    m.hermitianize();
    m
}

/// Random PSD matrix `G G^H` with `G` of size `n x rank`.
pub fn random_psd<T: Real, R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    complex_gaussian::<T, R>(n, rank, rng).gram_outer()
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// diagonal of R made real positive.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let g: CMatrix<T> = complex_gaussian(n, n, rng);
    let mut q = CMatrix::zeros(n, n);
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.col(j);
        for _ in 0..2 {
            for b in &cols {
                let proj = b.iter().zip(&v).fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = *vi - *bi * proj;
                }
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for x in v.iter_mut() {
            *x = *x / nrm;
        }
        cols.push(v);
    }
    for (j, col) in cols.iter().enumerate() {
        q.set_col(j, col);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_and_seeded() {
        let q1: CMatrix<f64> = random_unitary(6, &mut ChaCha8Rng::seed_from_u64(1));
        let q2: CMatrix<f64> = random_unitary(6, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(q1, q2);
        assert!(q1.unitarity_defect() < 1e-13);
    }

    #[test]
    fn gaussian_variance_is_one() {
        let g: CMatrix<f64> = complex_gaussian(100, 100, &mut ChaCha8Rng::seed_from_u64(9));
        let m = g.frobenius_norm().powi(2) / 1e4;
        assert!((m - 1.0).abs() < 0.05);
    }
}
