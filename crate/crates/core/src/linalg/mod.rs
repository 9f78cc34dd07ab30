//! Dense complex linear algebra at desk scale.

mod eigen;
mod gmd;
mod matrix;
pub mod random;
mod svd;

pub use eigen::{
    dft_matrix, eigenvalues_desc, evd_hermitian, evd_sorted, herm_inverse, herm_logdet, herm_sqrt, inv_sqrt,
    normalize_phase, pinv_sqrt, EigenOrder, SortedEigen,
};
pub use gmd::{gmd, Gmd};
pub use matrix::CMatrix;
pub use svd::{spectral_norm, svd, Svd};


use crate::error::{invalid, Error, Result};
use crate::scalar::{cr, Real};

/// Numerical tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Self-adjointness, relative to the largest entry.
    pub herm: f64,
    /// Smallest admissible eigenvalue of a PSD input, relative to the largest.
    pub psd: f64,
    /// Eigenvalues at or below this fraction of the largest count as zero.
    pub rank: f64,
    /// Relative gap under which eigenvalues are treated as tied.
    pub tie: f64,
    pub unitary: f64,
    /// Constraint slack admitted as satisfied, relative to `max(1, threshold)`.
    pub feasibility: f64,
    pub gmd: f64,
    /// Bisection stops once the bracket is below this fraction of its scale.
    pub bisection: f64,
    /// Streams with gain below this fraction of the largest get no power.
    pub gain_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-10,
            rank: 1e-10,
            tie: 1e-12,
            unitary: 1e-9,
            feasibility: 1e-8,
            gmd: 1e-10,
            bisection: 1e-12,
            gain_floor: 1e-12,
        }
    }
}

impl Tolerances {
    /// Defaults loosened to the precision of `T` where needed.
    pub fn for_scalar<T: Real>() -> Self {
        let eps = T::epsilon().as_f64();
        let d = Self::default();
        if eps <= f64::EPSILON {
            return d;
        }
        let k = eps / f64::EPSILON;
        Self {
            herm: d.herm * k,
            psd: d.psd * k,
            rank: d.rank * k,
            tie: d.tie * k,
            unitary: d.unitary * k,
            feasibility: d.feasibility * k,
            gmd: d.gmd * k,
            bisection: (d.bisection * k).min(1e-6),
            gain_floor: d.gain_floor * k,
        }
    }
}

/// Hermitian positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPsd<T: Real>(CMatrix<T>);

impl<T: Real> HermitianPsd<T> {
    /// Validates self-adjointness and the eigenvalue floor, then symmetrizes.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let tol = Tolerances::for_scalar::<T>();
        if !m.is_square() {
            return invalid(format!("PSD matrix must be square, got {:?}", m.shape()));
        }
        if !m.is_hermitian(T::lit(tol.herm)) {
            return invalid("matrix is not Hermitian");
        }
        let vals = eigenvalues_desc(&m)?;
        let lmax = vals.first().copied().unwrap_or(T::zero()).max(T::zero());
        if let Some(&lmin) = vals.last() {
            if lmin < -T::lit(tol.psd) * lmax.max(T::min_positive_value()) {
                return invalid(format!("matrix has negative eigenvalue {lmin}"));
            }
        }
        Ok(Self::new_unchecked(m))
    }

    /// Wraps a matrix known to be PSD up to rounding.
    pub fn new_unchecked(mut m: CMatrix<T>) -> Self {
        m.hermitianize();
        Self(m)
    }

    /// `g * g^H`.
    pub fn from_gram(g: &CMatrix<T>) -> Self {
        Self(g.gram_outer())
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n))
    }

    pub fn from_diag(d: &[T]) -> Result<Self> {
        if d.iter().any(|&x| x < T::zero()) {
            return invalid("negative diagonal entry");
        }
        Ok(Self(CMatrix::from_diag(d)))
    }

    pub fn as_matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

impl<T: Real> AsRef<CMatrix<T>> for HermitianPsd<T> {
    fn as_ref(&self) -> &CMatrix<T> {
        &self.0
    }
}

/// Lower Cholesky factor with positive real diagonal.
pub fn cholesky_lower<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let tol = Tolerances::for_scalar::<T>();
    if !m.is_hermitian(T::lit(tol.herm)) {
        return invalid("Cholesky input is not Hermitian");
    }
    let n = m.rows();
    let dmax = m.diag_re().into_iter().fold(T::zero(), T::max);
    let floor = T::lit(1e-12) * dmax;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if !(d > floor) || dmax <= T::zero() {
            return Err(Error::SingularMatrix("matrix is not positive definite".into()));
        }
        let djj = d.sqrt();
        l[(j, j)] = cr(djj);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Projection of a Hermitian matrix onto the PSD cone.
pub fn psd_part<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let e = evd_hermitian(m, EigenOrder::Descending)?;
    Ok(e.apply(|x| x.max(T::zero())))
}

#[cfg(test)]
mod tests {
    use super::random::complex_gaussian;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g: CMatrix<f64> = complex_gaussian(4, 4, &mut rng);
        let m = &g.gram_outer() + &CMatrix::identity(4);
        let l = cholesky_lower(&m).unwrap();
        assert!(l.matmul(&l.adjoint()).max_abs_diff(&m) < 1e-12);
        for i in 0..4 {
            assert!(l[(i, i)].im == 0.0 && l[(i, i)].re > 0.0);
            for j in i + 1..4 {
                assert_eq!(l[(i, j)], crate::scalar::C::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let m = CMatrix::<f64>::from_diag(&[1.0, 0.0]);
        assert!(matches!(cholesky_lower(&m), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn psd_validation() {
        assert!(HermitianPsd::new(CMatrix::<f64>::from_diag(&[1.0, -0.5])).is_err());
        assert!(HermitianPsd::new(CMatrix::<f64>::from_diag(&[1.0, 0.0])).is_ok());
        assert!(HermitianPsd::new(CMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn f32_tolerances_are_looser() {
        let t = Tolerances::for_scalar::<f32>();
        assert!(t.herm > Tolerances::default().herm);
        assert_eq!(Tolerances::for_scalar::<f64>(), Tolerances::default());
    }
}
