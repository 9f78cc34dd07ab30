use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::random::complex_gaussian;
use crate::linalg::{herm_sqrt, CMatrix, HermitianPsd};
use crate::scalar::{cr, Real};

/// `[R]_{m,n} = scale · ρ^{|m-n|}`.
pub fn exponential_correlation<T: Real>(n: usize, rho: T, scale: T) -> HermitianPsd<T> {
    let m = CMatrix::from_fn(n, n, |i, j| cr(scale * rho.powi(i.abs_diff(j) as i32)));
    HermitianPsd::new_unchecked(m)
}

/// One channel realization: the estimate, the true channel and the error
/// column correlation it was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw<T: Real> {
    pub h_true: CMatrix<T>,
    pub h_hat: CMatrix<T>,
    pub psi: HermitianPsd<T>,
}

/// Estimate with entries `CN(0, 1 - σ_e²)` plus an error `H_W Ψ^{1/2}` with
/// `[Ψ]_{m,n} = σ_e² ρ^{|m-n|}`, so every entry of the true channel has unit
/// power. `rho` is the transmit-side error correlation.
pub fn gen_channel<T: Real, R: Rng + ?Sized>(nr: usize, nt: usize, sigma_e2: T, rho: T, rng: &mut R) -> Result<ChannelDraw<T>>
where
    StandardNormal: Distribution<T>,
{
    if !(sigma_e2 >= T::zero() && sigma_e2 < T::one()) {
        return invalid("σ_e² must lie in [0, 1)");
    }
    if nr == 0 || nt == 0 || !(rho.abs() < T::one()) {
        return invalid("need positive dimensions and |ρ| < 1");
    }
    let psi = exponential_correlation(nt, rho, sigma_e2);
    let h_hat = complex_gaussian::<T, _>(nr, nt, rng).scale((T::one() - sigma_e2).sqrt());
    let hw = complex_gaussian::<T, _>(nr, nt, rng);
    let h_true = &h_hat + &hw.matmul(&herm_sqrt(&psi)?);
    Ok(ChannelDraw { h_true, h_hat, psi })
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under the experiment seed. Grid points share their
/// trial seeds, so neighbouring points see the same underlying draws.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}
