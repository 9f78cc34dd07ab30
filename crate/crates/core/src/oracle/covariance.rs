use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{digest, OracleMethod, OracleReport};
use crate::error::{invalid, Error, Result};
use crate::linalg::random::random_psd;
use crate::linalg::{evd_hermitian, herm_sqrt, CMatrix, EigenOrder, HermitianPsd};
use crate::scalar::Real;

const DYKSTRA_CYCLES: usize = 200;
const NONMONOTONE_MEMORY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceGoal {
    /// `max log det(I + H Q H^H)`.
    MaxLogDet,
    /// `min Tr((I + Π^{1/2} Q Π^{1/2})^{-1})`, the sum MSE with `N_t` streams.
    MinMseTrace,
}

#[derive(Debug, Clone)]
pub struct CovarianceOracle<T: Real> {
    /// `best_objective` is the log-determinant or the MSE itself.
    pub report: OracleReport<T>,
    pub q: HermitianPsd<T>,
    /// Hermitian square root of `q`.
    pub f: CMatrix<T>,
    pub converged: bool,
}

struct Problem<'a, T: Real> {
    root: CMatrix<T>,
    goal: CovarianceGoal,
    omegas: &'a [HermitianPsd<T>],
    ps: &'a [T],
}

impl<T: Real> Problem<'_, T> {
    /// Value to minimize and its gradient in `Q`.
    fn eval(&self, q: &CMatrix<T>) -> Result<(T, CMatrix<T>)> {
        let n = q.rows();
        let m = &CMatrix::identity(n) + &self.root.matmul(q).matmul(&self.root);
        let e = evd_hermitian(&m, EigenOrder::Descending)?;
        if e.eigenvalues.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::SingularMatrix("I + Π^{1/2} Q Π^{1/2} lost definiteness".into()));
        }
        Ok(match self.goal {
            CovarianceGoal::MaxLogDet => {
                let v: T = e.eigenvalues.iter().map(|x| x.ln()).sum();
                let inv = e.apply(|x| T::one() / x);
                (-v, self.root.matmul(&inv).matmul(&self.root).scale(-T::one()))
            }
            CovarianceGoal::MinMseTrace => {
                let v: T = e.eigenvalues.iter().map(|&x| T::one() / x).sum();
                let inv2 = e.apply(|x| T::one() / (x * x));
                (v, self.root.matmul(&inv2).matmul(&self.root).scale(-T::one()))
            }
        })
    }

    fn natural(&self, v: T) -> T {
        match self.goal {
            CovarianceGoal::MaxLogDet => -v,
            CovarianceGoal::MinMseTrace => v,
        }
    }

    /// Dykstra alternation between the PSD cone and each half-space
    /// `Tr(Ω_i Q) <= P_i`, then a PSD clip and a scaling that make the
    /// point feasible regardless of how far the alternation got.
    fn project(&self, v: &CMatrix<T>) -> Result<CMatrix<T>> {
        let n = v.rows();
        let sets = self.omegas.len() + 1;
        let mut incr: Vec<CMatrix<T>> = vec![CMatrix::zeros(n, n); sets];
        let mut x = v.clone();
        let norms: Vec<T> = self.omegas.iter().map(|o| o.as_matrix().trace_product_re(o.as_matrix())).collect();
        for _ in 0..DYKSTRA_CYCLES {
            let before = x.clone();
            for (j, inc) in incr.iter_mut().enumerate() {
                let z = &x + inc;
                let y = if j == 0 {
                    psd_clip(&z)?
                } else {
                    let o = self.omegas[j - 1].as_matrix();
                    let excess = o.trace_product_re(&z) - self.ps[j - 1];
                    if excess > T::zero() {
                        &z - &o.scale(excess / norms[j - 1])
                    } else {
                        z.clone()
                    }
                };
                *inc = &z - &y;
                x = y;
            }
            if (&x - &before).max_abs() <= T::epsilon() * T::lit(16.0) * T::one().max(x.max_abs()) {
                break;
            }
        }
        let x = psd_clip(&x)?;
        let s = self
            .omegas
            .iter()
            .zip(self.ps)
            .map(|(o, &p)| {
                let used = o.as_matrix().trace_product_re(&x);
                if used > p {
                    p / used
                } else {
                    T::one()
                }
            })
            .fold(T::one(), T::min);
        Ok(x.scale(s))
    }
}

fn psd_clip<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let mut h = m.clone();
    h.hermitianize();
    let mut out = evd_hermitian(&h, EigenOrder::Descending)?.apply(|x| x.max(T::zero()));
    out.hermitianize();
    Ok(out)
}

/// Spectral projected gradient on the transmit covariance `Q ⪰ 0` with
/// `Tr(Ω_i Q) <= P_i`, for `Π = h_eff^H h_eff`.
///
/// Barzilai-Borwein steps with a nonmonotone Armijo search; `step` is the
/// first step (non-positive picks `1 / λ_max(Π)²`). Stops when the gradient
/// mapping times the diameter of the feasible set, an upper estimate of the
/// remaining suboptimality, falls below `1e-10 |f|`, or after `iters`.
pub fn projected_gradient_covariance<T: Real>(
    h_eff: &CMatrix<T>,
    omegas: &[HermitianPsd<T>],
    ps: &[T],
    goal: CovarianceGoal,
    iters: usize,
    step: T,
    seed: u64,
) -> Result<CovarianceOracle<T>>
where
    StandardNormal: Distribution<T>,
{
    let n = h_eff.cols();
    if omegas.is_empty() || omegas.len() != ps.len() || iters == 0 {
        return invalid("need matching Ω_i, P_i and a positive iteration count");
    }
    if omegas.iter().any(|o| o.dim() != n) || ps.iter().any(|p| !(*p > T::zero())) {
        return invalid("Ω_i must be N_t x N_t and P_i positive");
    }
    let pi = HermitianPsd::new_unchecked(h_eff.gram_inner());
    let root = herm_sqrt(&pi)?;
    let lmax = evd_hermitian(pi.as_matrix(), EigenOrder::Descending)?.eigenvalues[0];
    if !(lmax > T::zero()) {
        return invalid("channel is zero");
    }
    let prob = Problem { root, goal, omegas, ps };
    let mut sum_o = CMatrix::zeros(n, n);
    for o in omegas {
        sum_o = &sum_o + o.as_matrix();
    }
    let lmin_o = *evd_hermitian(&sum_o, EigenOrder::Descending)?.eigenvalues.last().expect("n >= 1");
    let sum_p: T = ps.iter().copied().sum();
    // every feasible Q has Tr(Q) <= Σ P_i / λ_min(Σ Ω_i)
    let diameter = if lmin_o > T::zero() { T::lit(2.0) * sum_p / lmin_o } else { T::infinity() };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = &CMatrix::identity(n) + &random_psd::<T, _>(n, n, &mut rng).scale(T::lit(0.1) / T::from_usize(n).unwrap());
    let mut x = prob.project(&start)?;
    let (mut fx, mut gx) = prob.eval(&x)?;
    let mut recent = vec![fx];
    let mut t = if step > T::zero() { step } else { T::one() / (lmax * lmax) };
    let (t_min, t_max) = (T::lit(1e-30), T::lit(1e30));
    let mut converged = false;
    let mut used = 0;
    for k in 0..iters {
        used = k + 1;
        let d = &prob.project(&(&x - &gx.scale(t)))? - &x;
        let dn = d.frobenius_norm();
        let reach = if diameter.is_finite() { diameter } else { T::lit(2.0) * x.frobenius_norm().max(T::one()) };
        if dn / t * reach <= T::lit(1e-10) * fx.abs().max(T::min_positive_value()) || dn == T::zero() {
            converged = true;
            break;
        }
        let slope = gx.trace_product_re(&d);
        if !(slope < T::zero()) {
            // no descent direction left at working precision; the
            // certificate says how close that is to a stationary point
            converged = dn / t * reach <= T::lit(1e-6) * fx.abs();
            break;
        }
        let fref = recent.iter().copied().fold(T::neg_infinity(), T::max);
        let mut lam = T::one();
        let mut next = None;
        for _ in 0..60 {
            let cand = &x + &d.scale(lam);
            if let Ok((fc, gc)) = prob.eval(&cand) {
                if fc <= fref + T::lit(1e-4) * lam * slope {
                    next = Some((cand, fc, gc));
                    break;
                }
            }
            lam = lam * T::lit(0.5);
        }
        let Some((xn, fn_, gn)) = next else { break };
        let s_step = &xn - &x;
        let yv = &gn - &gx;
        let sy = s_step.trace_product_re(&yv);
        t = if sy > T::zero() { (s_step.trace_product_re(&s_step) / sy).max(t_min).min(t_max) } else { t_max };
        x = xn;
        fx = fn_;
        gx = gn;
        recent.push(fx);
        if recent.len() > NONMONOTONE_MEMORY {
            recent.remove(0);
        }
    }
    let q = HermitianPsd::new_unchecked(x);
    let f = herm_sqrt(&q)?;
    let report = OracleReport {
        best_objective: prob.natural(fx),
        best_point_digest: digest(q.as_matrix()),
        samples: used,
        method: OracleMethod::ProjectedGradient,
    };
    Ok(CovarianceOracle { report, q, f, converged })
}
