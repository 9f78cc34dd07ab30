use crate::error::{invalid, Error, Result};
use crate::linalg::{herm_inverse, CMatrix, HermitianPsd};
use crate::model::{ConstraintSet, Objective, PrecoderSolution};
use crate::scalar::Real;
use crate::structure::{solve_constraints, Design};

/// Row correlation `Σ` (`N_r x N_r`), column correlation `Ψ` (`N_t x N_t`)
/// and noise covariance `R_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticContext<T: Real> {
    pub h_hat: CMatrix<T>,
    pub sigma_row: HermitianPsd<T>,
    pub psi_col: HermitianPsd<T>,
    pub rn: HermitianPsd<T>,
}

impl<T: Real> StochasticContext<T> {
    pub fn new(h_hat: CMatrix<T>, sigma_row: HermitianPsd<T>, psi_col: HermitianPsd<T>, rn: HermitianPsd<T>) -> Result<Self> {
        let (nr, nt) = h_hat.shape();
        if sigma_row.dim() != nr || rn.dim() != nr || psi_col.dim() != nt {
            return invalid("Σ and R_n must be N_r x N_r, Ψ must be N_t x N_t");
        }
        Ok(Self { h_hat, sigma_row, psi_col, rn })
    }
}

/// `Ĥ^H R_n^{-1} Ĥ + Tr(Σ R_n^{-1}) Ψ`, the mean of `H^H R_n^{-1} H`.
pub fn stochastic_pi<T: Real>(
    h_hat: &CMatrix<T>,
    sigma_row: &HermitianPsd<T>,
    psi_col: &HermitianPsd<T>,
    rn: &HermitianPsd<T>,
) -> Result<HermitianPsd<T>> {
    let (nr, nt) = h_hat.shape();
    if sigma_row.dim() != nr || rn.dim() != nr || psi_col.dim() != nt {
        return invalid("Σ and R_n must be N_r x N_r, Ψ must be N_t x N_t");
    }
    let rn_inv = herm_inverse(rn.as_matrix())?;
    let t = sigma_row.as_matrix().trace_product_re(&rn_inv);
    let m = &h_hat.adjoint().matmul(&rn_inv).matmul(h_hat) + &psi_col.as_matrix().scale(t);
    Ok(HermitianPsd::new_unchecked(m))
}

/// Designs against the mean `Π`; shaping, joint, sum-power and weighted
/// families (per-antenna and cognitive included).
pub fn solve_stochastic<T: Real>(
    ctx: &StochasticContext<T>,
    constraints: &ConstraintSet<T>,
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    if let ConstraintSet::EigenCaps { .. } = constraints {
        return Err(Error::Unsupported("eigenvalue caps without a sum budget".into()));
    }
    let pi = stochastic_pi(&ctx.h_hat, &ctx.sigma_row, &ctx.psi_col, &ctx.rn)?;
    solve_constraints(&pi, constraints, obj, design)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{complex_gaussian, random_psd};
    use crate::linalg::{evd_sorted, herm_sqrt, EigenOrder};
    use crate::robust::perfect_pi;
    use crate::scalar::KahanSum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero(n: usize) -> HermitianPsd<f64> {
        HermitianPsd::new_unchecked(CMatrix::zeros(n, n))
    }

    fn scaled_eye(n: usize, s: f64) -> HermitianPsd<f64> {
        HermitianPsd::new_unchecked(CMatrix::identity(n).scale(s))
    }

    #[test]
    fn closed_form_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = complex_gaussian::<f64, _>(3, 4, &mut rng);
        let rn = scaled_eye(3, 0.5);
        let p = stochastic_pi(&h, &zero(3), &HermitianPsd::identity(4), &rn).unwrap();
        assert!(p.as_matrix().max_abs_diff(&h.gram_inner().scale(2.0)) < 1e-12);
        let p = stochastic_pi(&CMatrix::zeros(4, 4), &HermitianPsd::identity(4), &HermitianPsd::identity(4), &scaled_eye(4, 0.25))
            .unwrap();
        assert!(p.as_matrix().max_abs_diff(&CMatrix::identity(4).scale(16.0)) < 1e-12);
        assert!(matches!(
            stochastic_pi(&h, &zero(3), &HermitianPsd::identity(4), &zero(3)),
            Err(Error::SingularMatrix(_))
        ));
    }

    #[test]
    fn matches_monte_carlo_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = complex_gaussian::<f64, _>(3, 3, &mut rng);
        let sigma = HermitianPsd::new_unchecked(random_psd(3, 3, &mut rng).scale(0.3));
        let psi = HermitianPsd::new_unchecked(random_psd(3, 3, &mut rng).scale(0.3));
        let rn = HermitianPsd::new_unchecked(&random_psd(3, 3, &mut rng).scale(0.2) + &CMatrix::identity(3).scale(0.5));
        let exact = stochastic_pi(&h, &sigma, &psi, &rn).unwrap();
        let (ss, ps) = (herm_sqrt(&sigma).unwrap(), herm_sqrt(&psi).unwrap());
        let rn_inv = herm_inverse(rn.as_matrix()).unwrap();
        let n = 20_000;
        let mut acc: Vec<KahanSum> = (0..18).map(|_| KahanSum::new()).collect();
        for _ in 0..n {
            let hw = complex_gaussian::<f64, _>(3, 3, &mut rng);
            let ht = &h + &ss.matmul(&hw).matmul(&ps);
            let m = ht.adjoint().matmul(&rn_inv).matmul(&ht);
            for (k, z) in m.data().iter().enumerate() {
                acc[2 * k].add(z.re);
                acc[2 * k + 1].add(z.im);
            }
        }
        let mean = CMatrix::from_fn(3, 3, |i, j| {
            let k = i * 3 + j;
            crate::scalar::C::new(acc[2 * k].value() / n as f64, acc[2 * k + 1].value() / n as f64)
        });
        let rel = mean.max_abs_diff(exact.as_matrix()) / exact.as_matrix().max_abs();
        assert!(rel < 0.03, "relative gap {rel}");
    }

    #[test]
    fn zero_error_matches_perfect_design_and_zero_estimate_follows_psi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = complex_gaussian::<f64, _>(4, 4, &mut rng);
        let obj = Objective::Obj2 { phi: HermitianPsd::identity(2) };
        let d = Design::new(2);
        let ctx = StochasticContext::new(h.clone(), zero(4), HermitianPsd::identity(4), scaled_eye(4, 0.1)).unwrap();
        let a = solve_stochastic(&ctx, &ConstraintSet::SumPower { p: 1.0 }, &obj, &d).unwrap();
        let b = solve_constraints(&perfect_pi(&h, 0.1), &ConstraintSet::SumPower { p: 1.0 }, &obj, &d).unwrap();
        assert!(a.x().gram_outer().max_abs_diff(&b.x().gram_outer()) < 1e-10);

        let psi = HermitianPsd::from_diag(&[1.0, 2.0]).unwrap();
        let ctx = StochasticContext::new(CMatrix::zeros(2, 2), HermitianPsd::identity(2), psi.clone(), scaled_eye(2, 1.0)).unwrap();
        let obj = Objective::Obj2 { phi: HermitianPsd::identity(1) };
        let sol = solve_stochastic(&ctx, &ConstraintSet::Joint { p: 1.0, tau: 0.8 }, &obj, &Design::new(1)).unwrap();
        // the single stream sits on the strongest eigenvector of Ψ
        let u = evd_sorted(&psi, EigenOrder::Descending).unwrap().unitary;
        let overlap = sol.rotation.col(0).iter().zip(u.col(0)).map(|(a, b)| a.conj() * b).sum::<crate::scalar::C<f64>>();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
        assert!(matches!(
            solve_stochastic(&ctx, &ConstraintSet::EigenCaps { taus: vec![1.0] }, &obj, &Design::new(1)),
            Err(Error::Unsupported(_))
        ));
    }
}
