use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::random::random_unitary;
use crate::linalg::{CMatrix, Svd};
use crate::scalar::Real;

/// `n` errors of the given shape with `||ΔH||_2 <= γ`: random singular
/// frames with singular values uniform in `[0, γ]`. The first sample has
/// every singular value equal to `γ`. With `frame`, the second sample is
/// the clamped error `U diag(min(σ_i, γ)) V^H` in that frame.
pub fn sample_delta<T: Real>(
    gamma: T,
    shape: (usize, usize),
    n: usize,
    seed: u64,
    frame: Option<&Svd<T>>,
) -> Result<Vec<CMatrix<T>>>
where
    StandardNormal: Distribution<T>,
{
    let (r, c) = shape;
    if n == 0 || r == 0 || c == 0 || !(gamma >= T::zero()) {
        return invalid("need a nonnegative γ, a nonempty shape and n >= 1");
    }
    let k = r.min(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == 1 {
            if let Some(f) = frame {
                if f.left.rows() != r || f.right.rows() != c {
                    return invalid("frame does not match the shape");
                }
                let s: Vec<T> = f.singular.iter().map(|&x| x.min(gamma)).collect();
                out.push(f.left.matmul(&CMatrix::rect_diag(r, c, &s)).matmul(&f.right.adjoint()));
                continue;
            }
        }
        let u = random_unitary::<T, _>(r, &mut rng);
        let v = random_unitary::<T, _>(c, &mut rng);
        let s: Vec<T> = (0..k).map(|_| if i == 0 { gamma } else { gamma * T::lit(rng.random::<f64>()) }).collect();
        out.push(u.matmul(&CMatrix::rect_diag(r, c, &s)).matmul(&v.adjoint()));
    }
    Ok(out)
}
