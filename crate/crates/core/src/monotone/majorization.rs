use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorizationMode {
    Additive,
    Multiplicative,
}

/// True iff `x` is majorized by `y`: partial sums (or products) of the
/// descending-sorted entries of `x` never exceed those of `y`, with equality
/// over the full length. Relative tolerance `1e-10`.
pub fn majorizes<T: Real>(x: &[T], y: &[T], mode: MajorizationMode) -> Result<bool> {
    if x.len() != y.len() {
        return invalid("vectors must have equal length");
    }
    if x.is_empty() {
        return Ok(true);
    }
    if mode == MajorizationMode::Multiplicative && x.iter().chain(y).any(|&v| !(v > T::zero())) {
        return invalid("multiplicative majorization needs positive entries");
    }
    let sorted = |v: &[T]| {
        let mut s: Vec<T> = match mode {
            MajorizationMode::Additive => v.to_vec(),
            // partial products compared as partial sums of logs
            MajorizationMode::Multiplicative => v.iter().map(|a| a.ln()).collect(),
        };
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        s
    };
    let (sx, sy) = (sorted(x), sorted(y));
    let scale = sx.iter().chain(&sy).fold(T::one(), |m, v| m.max(v.abs())) * T::from_usize(x.len()).unwrap();
    let tol = T::lit(1e-10) * scale;
    let (mut px, mut py) = (T::zero(), T::zero());
    for k in 0..sx.len() {
        px = px + sx[k];
        py = py + sy[k];
        if px > py + tol {
            return Ok(false);
        }
    }
    Ok((px - py).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_hermitian;
    use crate::linalg::eigenvalues_desc;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        use MajorizationMode::*;
        assert!(majorizes(&[1.0, 1.0], &[2.0, 0.0], Additive).unwrap());
        assert!(!majorizes(&[2.0, 0.0], &[1.0, 1.0], Additive).unwrap());
        assert!(majorizes(&[3.0, 1.0, 2.0], &[3.0, 1.0, 2.0], Additive).unwrap());
        assert!(majorizes(&[2.0, 2.0], &[4.0, 1.0], Multiplicative).unwrap());
        assert!(majorizes(&[2.0, 2.0], &[4.0, 0.0], Multiplicative).is_err());
    }

    #[test]
    fn schur_horn_diagonal_is_majorized_by_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 1..=6 {
            for _ in 0..50 {
                let m: crate::linalg::CMatrix<f64> = random_hermitian(n, &mut rng);
                let lam = eigenvalues_desc(&m).unwrap();
                assert!(majorizes(&m.diag_re(), &lam, MajorizationMode::Additive).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn mean_vector_is_majorized_by_anything(v in proptest::collection::vec(0.01f64..10.0, 1..8)) {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!(majorizes(&vec![mean; v.len()], &v, MajorizationMode::Additive).unwrap());
            let gm = (v.iter().map(|a| a.ln()).sum::<f64>() / v.len() as f64).exp();
            prop_assert!(majorizes(&vec![gm; v.len()], &v, MajorizationMode::Multiplicative).unwrap());
        }
    }
}
