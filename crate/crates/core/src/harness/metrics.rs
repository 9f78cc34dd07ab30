use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::{herm_inverse, svd, CMatrix, HermitianPsd};
use crate::oracle::sample_delta;
use crate::robust::{worst_case_delta, WorstCaseContext};
use crate::scalar::{compensated_sum, Real};

const ASCENT_ITERS: usize = 300;
const RANDOM_STARTS: usize = 3;

fn check_dims<T: Real>(h: &CMatrix<T>, x: &CMatrix<T>, sigma_n2: T) -> Result<()> {
    if h.cols() != x.rows() {
        return invalid("X must have N_t rows");
    }
    if !(sigma_n2 > T::zero()) {
        return invalid("noise power must be positive");
    }
    Ok(())
}

/// `Tr((X^H H^H H X / σ_n² + I)^{-1})`: the sum MSE of the LMMSE receiver
/// that knows `H`.
pub fn sum_mse<T: Real>(h: &CMatrix<T>, x: &CMatrix<T>, sigma_n2: T) -> Result<T> {
    check_dims(h, x, sigma_n2)?;
    let hx = h.matmul(x);
    let a = &hx.gram_inner().scale(T::one() / sigma_n2) + &CMatrix::identity(x.cols());
    Ok(herm_inverse(&a)?.trace_re())
}

/// LMMSE receiver built from the estimate alone:
/// `X^H Ĥ^H (Ĥ X X^H Ĥ^H + (σ_n² + Tr(Ψ X X^H)) I)^{-1}`.
pub fn bayes_receiver<T: Real>(h_hat: &CMatrix<T>, psi: &HermitianPsd<T>, x: &CMatrix<T>, sigma_n2: T) -> Result<CMatrix<T>> {
    check_dims(h_hat, x, sigma_n2)?;
    if psi.dim() != x.rows() {
        return invalid("Ψ must be N_t x N_t");
    }
    let hx = h_hat.matmul(x);
    let k = sigma_n2 + psi.as_matrix().trace_product_re(&x.gram_outer());
    let r = &hx.gram_outer() + &CMatrix::identity(h_hat.rows()).scale(k);
    Ok(hx.adjoint().matmul(&herm_inverse(&r)?))
}

/// `||G H X - I||_F² + σ_n² ||G||_F²`, the sum MSE of receiver `G` on the
/// channel `H`.
pub fn receiver_mse<T: Real>(h: &CMatrix<T>, x: &CMatrix<T>, g: &CMatrix<T>, sigma_n2: T) -> Result<T> {
    check_dims(h, x, sigma_n2)?;
    if g.cols() != h.rows() || g.rows() != x.cols() {
        return invalid("G must be L x N_r");
    }
    let e = &g.matmul(h).matmul(x) - &CMatrix::identity(x.cols());
    let fe = e.frobenius_norm();
    let fg = g.frobenius_norm();
    Ok(fe * fe + sigma_n2 * fg * fg)
}

fn clip_spectral<T: Real>(m: &CMatrix<T>, gamma: T) -> Result<CMatrix<T>> {
    let mut s = svd(m)?;
    if s.singular.first().is_none_or(|&x| x <= gamma) {
        return Ok(m.clone());
    }
    for v in &mut s.singular {
        *v = v.min(gamma);
    }
    Ok(s.reconstruct())
}

/// MSE at `Ĥ - ΔH` and its gradient in `ΔH`, `2 H X A^{-2} X^H / σ_n²`.
fn value_grad<T: Real>(h_hat: &CMatrix<T>, delta: &CMatrix<T>, x: &CMatrix<T>, sigma_n2: T) -> Result<(T, CMatrix<T>)> {
    let h = h_hat - delta;
    let hx = h.matmul(x);
    let a = &hx.gram_inner().scale(T::one() / sigma_n2) + &CMatrix::identity(x.cols());
    let inv = herm_inverse(&a)?;
    let g = hx.matmul(&inv.matmul(&inv)).matmul(&x.adjoint()).scale(T::lit(2.0) / sigma_n2);
    Ok((inv.trace_re(), g))
}

fn ascend<T: Real>(h_hat: &CMatrix<T>, gamma: T, x: &CMatrix<T>, sigma_n2: T, start: &CMatrix<T>) -> Result<(T, CMatrix<T>)> {
    let mut d = clip_spectral(start, gamma)?;
    let (mut f, mut g) = value_grad(h_hat, &d, x, sigma_n2)?;
    let gn = g.frobenius_norm();
    let mut eta = if gn > T::zero() { gamma.max(T::lit(1e-12)) / gn } else { return Ok((f, d)) };
    for _ in 0..ASCENT_ITERS {
        let mut moved = false;
        for _ in 0..40 {
            let cand = clip_spectral(&(&d + &g.scale(eta)), gamma)?;
            let (fc, gc) = value_grad(h_hat, &cand, x, sigma_n2)?;
            if fc > f {
                let gain = fc - f;
                d = cand;
                f = fc;
                g = gc;
                eta = eta * T::lit(1.5);
                moved = gain > T::lit(1e-13) * f;
                break;
            }
            eta = eta * T::lit(0.5);
        }
        if !moved {
            break;
        }
    }
    Ok((f, d))
}

/// Largest sum MSE of `X` over errors with `||ΔH||_2 <= γ`, and the error
/// attaining it.
///
/// Projected gradient ascent (spectral clipping as the projection) from the
/// clamped error in the frame of `Ĥ` and from a few random boundary points;
/// the best end point wins. The problem is not concave in `ΔH`, so this is
/// a lower estimate of the true maximum that is exact when `X` is aligned
/// with the right singular vectors of `Ĥ`.
pub fn worst_case_mse<T: Real>(h_hat: &CMatrix<T>, gamma: T, x: &CMatrix<T>, sigma_n2: T, seed: u64) -> Result<(T, CMatrix<T>)>
where
    StandardNormal: Distribution<T>,
{
    check_dims(h_hat, x, sigma_n2)?;
    let ctx = WorstCaseContext::new(h_hat.clone(), gamma, sigma_n2)?;
    let mut starts = vec![worst_case_delta(&ctx)?];
    if gamma > T::zero() {
        starts.extend(sample_delta(gamma, h_hat.shape(), RANDOM_STARTS, seed, None)?);
    }
    let mut best: Option<(T, CMatrix<T>)> = None;
    for s in &starts {
        let (f, d) = ascend(h_hat, gamma, x, sigma_n2, s)?;
        if best.as_ref().is_none_or(|(b, _)| f > *b) {
            best = Some((f, d));
        }
    }
    Ok(best.expect("at least one start"))
}

/// Sample mean and its standard error `sqrt(s² / n)`, with the unbiased
/// sample variance. The standard error of a single sample is zero.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{complex_gaussian, random_unitary};
    use crate::linalg::spectral_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sum_mse_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = complex_gaussian::<f64, _>(4, 4, &mut rng);
        assert!((sum_mse(&h, &CMatrix::zeros(4, 2), 0.1).unwrap() - 2.0).abs() < 1e-14);
        // orthonormal rows scaled so every stream sees SNR ρ
        let u = random_unitary::<f64, _>(4, &mut rng);
        let rho = 3.0;
        let x = u.adjoint().leading_cols(2);
        let mse = sum_mse(&u.scale((rho * 0.1f64).sqrt()), &x, 0.1).unwrap();
        assert!((mse - 2.0 / (1.0 + rho)).abs() < 1e-12);
        let x = complex_gaussian::<f64, _>(4, 2, &mut rng);
        assert!(sum_mse(&h, &x, 0.1).unwrap() >= sum_mse(&h, &x.scale(2f64.sqrt()), 0.1).unwrap());
    }

    #[test]
    fn bayes_receiver_matches_closed_form_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = complex_gaussian::<f64, _>(4, 4, &mut rng);
        let x = complex_gaussian::<f64, _>(4, 2, &mut rng).scale(0.5);
        let g = bayes_receiver(&h, &HermitianPsd::new_unchecked(CMatrix::zeros(4, 4)), &x, 0.2).unwrap();
        // with Ψ = 0 the receiver is the LMMSE one and attains sum_mse
        let a = receiver_mse(&h, &x, &g, 0.2).unwrap();
        assert!((a - sum_mse(&h, &x, 0.2).unwrap()).abs() < 1e-12);
        let other = g.scale(0.9);
        assert!(receiver_mse(&h, &x, &other, 0.2).unwrap() > a);
    }

    #[test]
    fn worst_case_beats_sampled_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = complex_gaussian::<f64, _>(4, 4, &mut rng);
        let x = complex_gaussian::<f64, _>(4, 2, &mut rng).scale(0.5);
        let gamma = 0.3 * spectral_norm(&h).unwrap();
        let (w, d) = worst_case_mse(&h, gamma, &x, 0.1, 9).unwrap();
        assert!(spectral_norm(&d).unwrap() <= gamma * (1.0 + 1e-12));
        assert!((sum_mse(&(&h - &d), &x, 0.1).unwrap() - w).abs() < 1e-12);
        for e in sample_delta(gamma, (4, 4), 300, 4, None).unwrap() {
            assert!(sum_mse(&(&h - &e), &x, 0.1).unwrap() <= w + 1e-12);
        }
        let (w0, _) = worst_case_mse(&h, 0.0, &x, 0.1, 9).unwrap();
        assert!((w0 - sum_mse(&h, &x, 0.1).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn aligned_precoder_worst_case_is_the_clamped_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = complex_gaussian::<f64, _>(4, 4, &mut rng);
        let s = svd(&h).unwrap();
        let x = s.right.leading_cols(2).scale_cols(&[0.8, 0.5]);
        let gamma = 0.25 * s.singular[0];
        let ctx = WorstCaseContext::new(h.clone(), gamma, 0.1).unwrap();
        let at_clamp = sum_mse(&(&h - &worst_case_delta(&ctx).unwrap()), &x, 0.1).unwrap();
        let (w, _) = worst_case_mse(&h, gamma, &x, 0.1, 1).unwrap();
        assert!((w - at_clamp).abs() < 1e-9 * at_clamp, "{w} {at_clamp}");
    }

    #[test]
    fn stderr_formula() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[7.0]), (7.0, 0.0));
    }
}
