use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{digest, OracleMethod, OracleReport};
use crate::error::{invalid, Error, Result};
use crate::linalg::random::complex_gaussian;
use crate::linalg::{herm_sqrt, spectral_norm, CMatrix};
use crate::model::{ConstraintSet, PowerConstraint};
use crate::scalar::Real;

const BISECTION_STEPS: usize = 80;

fn strictly_feasible<T: Real>(c: &ConstraintSet<T>, x: &CMatrix<T>) -> Result<bool> {
    Ok(c.evaluate(x)?.slack.iter().all(|&s| s >= T::zero()))
}

/// Scales `g` up to the boundary of the feasible set.
fn to_boundary<T: Real>(c: &ConstraintSet<T>, g: &CMatrix<T>) -> Result<Option<CMatrix<T>>> {
    if let ConstraintSet::Shaping { rs } = c {
        let root = herm_sqrt(rs)?;
        let s = spectral_norm(g)?;
        if !(s > T::zero()) {
            return Ok(None);
        }
        return Ok(Some(root.matmul(&g.scale(T::one() / s))));
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    while strictly_feasible(c, &g.scale(hi))? {
        lo = hi;
        hi = hi * T::lit(2.0);
        if hi > T::lit(1e12) {
            // direction never hits the boundary
            return Ok(None);
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = T::lit(0.5) * (lo + hi);
        if strictly_feasible(c, &g.scale(mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(lo > T::zero()) {
        return Ok(None);
    }
    Ok(Some(g.scale(lo)))
}

/// `n` random feasible `N_t x cols` precoders on the boundary of the
/// constraint set. Columns get random log-normal gains so the eigenvalue
/// spreads vary widely.
pub fn random_feasible_points<T: Real>(c: &ConstraintSet<T>, nt: usize, cols: usize, n: usize, seed: u64) -> Result<Vec<CMatrix<T>>>
where
    StandardNormal: Distribution<T>,
{
    if n == 0 || cols == 0 {
        return invalid("need at least one sample and one column");
    }
    c.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 4 * n {
        attempts += 1;
        let spread: Vec<T> = (0..cols)
            .map(|_| {
                let z: T = StandardNormal.sample(&mut rng);
                (z * T::lit(rng.random_range(0.0..1.5))).exp()
            })
            .collect();
        let g = complex_gaussian::<T, _>(nt, cols, &mut rng).scale_cols(&spread);
        if let Some(x) = to_boundary(c, &g)? {
            out.push(x);
        }
    }
    if out.is_empty() {
        return Err(Error::Infeasible("no random direction reached a feasible boundary point".into()));
    }
    Ok(out)
}

/// Best (smallest) value of `objective` over `n` random boundary points.
pub fn random_feasible_search<T: Real>(
    c: &ConstraintSet<T>,
    nt: usize,
    cols: usize,
    objective: &dyn Fn(&CMatrix<T>) -> Result<T>,
    n: usize,
    seed: u64,
) -> Result<OracleReport<T>>
where
    StandardNormal: Distribution<T>,
{
    let points = random_feasible_points(c, nt, cols, n, seed)?;
    let mut best: Option<(T, u64)> = None;
    for x in &points {
        let v = objective(x)?;
        if v.is_finite() && best.is_none_or(|(b, _)| v < b) {
            best = Some((v, digest(x)));
        }
    }
    let (best_objective, best_point_digest) =
        best.ok_or_else(|| Error::Infeasible("objective not finite at any sample".into()))?;
    Ok(OracleReport { best_objective, best_point_digest, samples: points.len(), method: OracleMethod::RandomSearch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues_desc, HermitianPsd};
    use crate::model::constraint_satisfied;

    #[test]
    fn samples_are_feasible_and_on_the_boundary() {
        let sets = vec![
            ConstraintSet::SumPower { p: 2.0 },
            ConstraintSet::Joint { p: 2.0, tau: 0.7 },
            ConstraintSet::PerAntenna { p: vec![1.0, 0.5, 2.0] },
            ConstraintSet::Shaping { rs: HermitianPsd::identity(3) },
        ];
        for c in &sets {
            for x in random_feasible_points::<f64>(c, 3, 2, 200, 7).unwrap() {
                let (ok, slack) = constraint_satisfied(c, &x).unwrap();
                assert!(ok, "{c:?}");
                let min = slack.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!(min.abs() < 1e-8, "{c:?} {slack:?}");
            }
        }
        let id = ConstraintSet::Shaping { rs: HermitianPsd::identity(3) };
        for x in random_feasible_points::<f64>(&id, 3, 3, 50, 8).unwrap() {
            assert!(eigenvalues_desc(&x.gram_outer()).unwrap()[0] <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn search_is_deterministic_and_respects_dominance() {
        // capacity under a sum budget with Π = I: equal power is optimal
        let cost = |x: &CMatrix<f64>| -> Result<f64> {
            let m = &CMatrix::identity(2) + &x.gram_inner();
            Ok(-crate::linalg::herm_logdet(&m)?)
        };
        let c = ConstraintSet::SumPower { p: 1.0 };
        let a = random_feasible_search(&c, 2, 2, &cost, 1000, 3).unwrap();
        let b = random_feasible_search(&c, 2, 2, &cost, 1000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.best_objective >= -2.0 * 1.5f64.ln() - 1e-12);
        assert!(a.best_objective < -2.0 * 1.5f64.ln() + 1e-2);
        assert!(random_feasible_points::<f64>(&c, 2, 2, 0, 1).is_err());
    }
}
