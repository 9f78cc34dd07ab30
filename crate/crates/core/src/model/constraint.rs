use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::{eigenvalues_desc, random::random_unitary, CMatrix, HermitianPsd, Tolerances};
use crate::scalar::Real;

/// Transmit power constraint on the precoder `X` (rows = transmit antennas).
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet<T: Real> {
    /// `Tr(X X^H) <= p`
    SumPower { p: T },
    /// `[X X^H]_ii <= p_i`
    PerAntenna { p: Vec<T> },
    /// `Tr(Ω_i X X^H) <= P_i` for every `i`
    Weighted { omegas: Vec<HermitianPsd<T>>, ps: Vec<T> },
    /// `X X^H ⪯ R_s`
    Shaping { rs: HermitianPsd<T> },
    /// `λ_i(X X^H) <= τ_i` for the leading eigenvalues
    EigenCaps { taus: Vec<T> },
    /// `Tr(X X^H) <= p` and `X X^H ⪯ τ I`
    Joint { p: T, tau: T },
    /// `Tr(H_c X X^H H_c^H) <= τ_c`
    Cognitive { hc: CMatrix<T>, tauc: T },
}

/// Result of evaluating a constraint at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck<T: Real> {
    pub ok: bool,
    /// `threshold - attained` per scalar constraint.
    pub slack: Vec<T>,
}

/// Anything that can be evaluated at a precoder.
pub trait PowerConstraint<T: Real> {
    fn evaluate(&self, x: &CMatrix<T>) -> Result<ConstraintCheck<T>>;
}

fn check_from<T: Real>(slack: Vec<T>, thresholds: &[T]) -> ConstraintCheck<T> {
    let tol = T::lit(Tolerances::for_scalar::<T>().feasibility);
    let ok = slack.iter().zip(thresholds).all(|(&s, &t)| s >= -tol * T::one().max(t.abs()));
    ConstraintCheck { ok, slack }
}

fn positive<T: Real>(x: T, what: &str) -> Result<()> {
    if !(x > T::zero()) {
        return invalid(format!("{what} must be positive"));
    }
    Ok(())
}

impl<T: Real> ConstraintSet<T> {
    /// Number of transmit antennas the constraint is defined for, if fixed.
    pub fn antennas(&self) -> Option<usize> {
        match self {
            Self::PerAntenna { p } => Some(p.len()),
            Self::Weighted { omegas, .. } => omegas.first().map(|o| o.dim()),
            Self::Shaping { rs } => Some(rs.dim()),
            Self::Cognitive { hc, .. } => Some(hc.cols()),
            Self::SumPower { .. } | Self::EigenCaps { .. } | Self::Joint { .. } => None,
        }
    }

    /// Checks thresholds and, for `Weighted`, that `Σ Ω_i` is positive definite.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SumPower { p } => positive(*p, "power"),
            Self::PerAntenna { p } => {
                if p.is_empty() {
                    return invalid("per-antenna constraint needs at least one antenna");
                }
                p.iter().try_for_each(|&x| positive(x, "per-antenna power"))
            }
            Self::Weighted { omegas, ps } => {
                if omegas.is_empty() || omegas.len() != ps.len() {
                    return invalid("weighted constraint needs matching Ω_i and P_i lists");
                }
                ps.iter().try_for_each(|&x| positive(x, "weighted power"))?;
                let n = omegas[0].dim();
                if omegas.iter().any(|o| o.dim() != n) {
                    return invalid("Ω_i dimensions differ");
                }
                let mut sum = CMatrix::zeros(n, n);
                for o in omegas {
                    sum = &sum + o.as_matrix();
                }
                let v = eigenvalues_desc(&sum)?;
                let lmax = v[0];
                if !(v[n - 1] > T::lit(Tolerances::for_scalar::<T>().rank) * lmax) {
                    return invalid("no positive definite aggregate of the Ω_i exists");
                }
                Ok(())
            }
            Self::Shaping { .. } => Ok(()),
            Self::EigenCaps { taus } => {
                if taus.is_empty() {
                    return invalid("eigenvalue caps must be non-empty");
                }
                taus.iter().try_for_each(|&x| positive(x, "eigenvalue cap"))
            }
            Self::Joint { p, tau } => {
                positive(*p, "power")?;
                positive(*tau, "eigenvalue cap")
            }
            Self::Cognitive { tauc, .. } => positive(*tauc, "interference threshold"),
        }
    }

    /// Weighted form `(Ω_i, P_i)` of the trace-type constraints.
    pub fn to_weighted(&self, n: usize) -> Result<(Vec<HermitianPsd<T>>, Vec<T>)> {
        match self {
            Self::SumPower { p } => Ok((vec![HermitianPsd::identity(n)], vec![*p])),
            Self::PerAntenna { p } => {
                if p.len() != n {
                    return invalid(format!("{} per-antenna limits for {n} antennas", p.len()));
                }
                let omegas = (0..n)
                    .map(|i| {
                        let mut d = vec![T::zero(); n];
                        d[i] = T::one();
                        HermitianPsd::from_diag(&d)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((omegas, p.clone()))
            }
            Self::Weighted { omegas, ps } => Ok((omegas.clone(), ps.clone())),
            Self::Cognitive { hc, tauc } => Ok((vec![HermitianPsd::new_unchecked(hc.gram_inner())], vec![*tauc])),
            _ => invalid("constraint has no weighted-trace form"),
        }
    }

    /// Structural left unitary invariance: the constraint depends on `X X^H`
    /// only through its eigenvalues.
    pub fn is_left_invariant(&self) -> bool {
        let scaled_identity = |m: &CMatrix<T>| {
            let d = m[(0, 0)];
            let tol = T::lit(1e-12) * T::one().max(m.max_abs());
            (0..m.rows()).all(|i| (0..m.cols()).all(|j| {
                let want = if i == j { d } else { num_complex::Complex::new(T::zero(), T::zero()) };
                (m[(i, j)] - want).norm() <= tol
            }))
        };
        match self {
            Self::SumPower { .. } | Self::EigenCaps { .. } | Self::Joint { .. } => true,
            Self::PerAntenna { p } => p.len() == 1,
            Self::Weighted { omegas, .. } => omegas.iter().all(|o| scaled_identity(o.as_matrix())),
            Self::Shaping { rs } => scaled_identity(rs.as_matrix()),
            Self::Cognitive { hc, .. } => scaled_identity(&hc.gram_inner()),
        }
    }
}

impl<T: Real> PowerConstraint<T> for ConstraintSet<T> {
    fn evaluate(&self, x: &CMatrix<T>) -> Result<ConstraintCheck<T>> {
        let n = x.rows();
        if let Some(k) = self.antennas() {
            if k != n {
                return invalid(format!("constraint is for {k} antennas, precoder has {n} rows"));
            }
        }
        let q = x.gram_outer();
        Ok(match self {
            Self::SumPower { p } => check_from(vec![*p - q.trace_re()], &[*p]),
            Self::PerAntenna { p } => {
                let d = q.diag_re();
                check_from(p.iter().zip(&d).map(|(&a, &b)| a - b).collect(), p)
            }
            Self::Weighted { omegas, ps } => {
                let slack = omegas.iter().zip(ps).map(|(o, &pi)| pi - o.as_matrix().trace_product_re(&q)).collect();
                check_from(slack, ps)
            }
            Self::Shaping { rs } => {
                let v = eigenvalues_desc(&(rs.as_matrix() - &q))?;
                let thr = eigenvalues_desc(rs.as_matrix())?[0];
                check_from(vec![v[n - 1]], &[thr])
            }
            Self::EigenCaps { taus } => {
                let v = eigenvalues_desc(&q)?;
                let slack = taus.iter().zip(v.iter().chain(std::iter::repeat(&T::zero()))).map(|(&t, &l)| t - l).collect();
                check_from(slack, taus)
            }
            Self::Joint { p, tau } => {
                let v = eigenvalues_desc(&q)?;
                check_from(vec![*p - q.trace_re(), *tau - v[0]], &[*p, *tau])
            }
            Self::Cognitive { hc, tauc } => {
                if hc.cols() != n {
                    return invalid("H_c column count differs from antenna count");
                }
                let v = hc.matmul(&q).matmul(&hc.adjoint()).trace_re();
                check_from(vec![*tauc - v], &[*tauc])
            }
        })
    }
}

/// `(ok, slack)` of a constraint at `x`.
pub fn constraint_satisfied<T: Real>(c: &ConstraintSet<T>, x: &CMatrix<T>) -> Result<(bool, Vec<T>)> {
    let r = c.evaluate(x)?;
    Ok((r.ok, r.slack))
}

fn same_check<T: Real>(a: &ConstraintCheck<T>, b: &ConstraintCheck<T>) -> bool {
    let tol = T::lit(1e-9);
    a.ok == b.ok
        && a.slack.len() == b.slack.len()
        && a.slack.iter().zip(&b.slack).all(|(x, y)| (*x - *y).abs() <= tol * T::one().max(x.abs()))
}

fn invariance_check<T: Real, K: PowerConstraint<T> + ?Sized>(
    c: &K,
    x: &CMatrix<T>,
    trials: usize,
    seed: u64,
    right: bool,
) -> bool
where
    StandardNormal: Distribution<T>,
{
    let Ok(base) = c.evaluate(x) else { return false };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let rotated = if right {
            x.matmul(&random_unitary(x.cols(), &mut rng))
        } else {
            random_unitary(x.rows(), &mut rng).matmul(x)
        };
        c.evaluate(&rotated).is_ok_and(|r| same_check(&base, &r))
    })
}

/// True iff the constraint value is unchanged under `x -> x Q` for `trials`
/// random unitaries drawn from `seed`.
pub fn right_unitary_invariance_check<T: Real, K: PowerConstraint<T> + ?Sized>(
    c: &K,
    x: &CMatrix<T>,
    trials: usize,
    seed: u64,
) -> bool
where
    StandardNormal: Distribution<T>,
{
    invariance_check(c, x, trials, seed, true)
}

/// True iff the constraint value is unchanged under `x -> Q x`.
pub fn left_unitary_invariance_check<T: Real, K: PowerConstraint<T> + ?Sized>(
    c: &K,
    x: &CMatrix<T>,
    trials: usize,
    seed: u64,
) -> bool
where
    StandardNormal: Distribution<T>,
{
    invariance_check(c, x, trials, seed, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{complex_gaussian, random_psd};
    use rand::Rng;

    struct EntryCap(f64);

    impl PowerConstraint<f64> for EntryCap {
        fn evaluate(&self, x: &CMatrix<f64>) -> Result<ConstraintCheck<f64>> {
            let s = self.0 - x[(0, 0)].norm();
            Ok(ConstraintCheck { ok: s >= 0.0, slack: vec![s] })
        }
    }

    fn all_kinds(rng: &mut ChaCha8Rng, n: usize) -> Vec<ConstraintSet<f64>> {
        vec![
            ConstraintSet::SumPower { p: 1.0 },
            ConstraintSet::PerAntenna { p: vec![0.5; n] },
            ConstraintSet::Weighted {
                omegas: vec![HermitianPsd::new_unchecked(random_psd(n, n, rng)), HermitianPsd::identity(n)],
                ps: vec![1.0, 2.0],
            },
            ConstraintSet::Shaping { rs: HermitianPsd::new_unchecked(random_psd(n, n, rng)) },
            ConstraintSet::EigenCaps { taus: vec![0.7, 0.3] },
            ConstraintSet::Joint { p: 1.0, tau: 0.4 },
            ConstraintSet::Cognitive { hc: complex_gaussian(2, n, rng), tauc: 0.1 },
        ]
    }

    #[test]
    fn examples() {
        let c = ConstraintSet::SumPower { p: 1.0f64 };
        let x = CMatrix::from_diag(&[1.0, 0.0]);
        let (ok, s) = constraint_satisfied(&c, &x).unwrap();
        assert!(ok && s[0].abs() < 1e-15);
        let c = ConstraintSet::Shaping { rs: HermitianPsd::identity(2) };
        let (ok, s) = constraint_satisfied(&c, &CMatrix::<f64>::zeros(2, 2)).unwrap();
        assert!(ok && (s[0] - 1.0).abs() < 1e-15);
        let c = ConstraintSet::PerAntenna { p: vec![0.5, 0.5] };
        let (ok, s) = constraint_satisfied(&c, &CMatrix::identity(2)).unwrap();
        assert!(!ok);
        assert_eq!(s, vec![-0.5, -0.5]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let c = ConstraintSet::PerAntenna { p: vec![1.0; 3] };
        assert!(constraint_satisfied(&c, &CMatrix::identity(2)).is_err());
    }

    #[test]
    fn every_variant_is_right_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..100 {
            for c in all_kinds(&mut rng, 3) {
                let x: CMatrix<f64> = complex_gaussian(3, 2, &mut rng);
                assert!(right_unitary_invariance_check(&c, &x, 1, trial), "{c:?}");
            }
        }
    }

    #[test]
    fn left_invariance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: CMatrix<f64> = complex_gaussian(3, 2, &mut rng);
        assert!(left_unitary_invariance_check(&ConstraintSet::SumPower { p: 1.0 }, &x, 50, 1));
        assert!(left_unitary_invariance_check(&ConstraintSet::Joint { p: 1.0, tau: 0.5 }, &x, 50, 2));
        let mut rank1 = CMatrix::zeros(3, 1);
        rank1[(0, 0)] = num_complex::Complex::new(1.0, 0.0);
        let pa = ConstraintSet::PerAntenna { p: vec![0.5; 3] };
        assert!(!left_unitary_invariance_check(&pa, &rank1, 5, 3));
        assert!(!pa.is_left_invariant());
        let cog = ConstraintSet::Cognitive { hc: complex_gaussian(2, 3, &mut rng), tauc: 1.0 };
        assert!(right_unitary_invariance_check(&cog, &x, 50, 4));
    }

    #[test]
    fn entry_cap_is_not_right_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: CMatrix<f64> = complex_gaussian(3, 3, &mut rng);
        assert!(!right_unitary_invariance_check(&EntryCap(1.0), &x, 10, 5));
    }

    #[test]
    fn shaping_implies_weighted_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let rs: CMatrix<f64> = random_psd(3, 3, &mut rng);
            let rs_h = HermitianPsd::new_unchecked(rs.clone());
            // X = R_s^{1/2} G with ||G|| <= 1 satisfies the shaping constraint
            let g: CMatrix<f64> = complex_gaussian(3, 3, &mut rng);
            let gn = crate::linalg::spectral_norm(&g).unwrap();
            let x = crate::linalg::herm_sqrt(&rs_h).unwrap().matmul(&g.scale(1.0 / gn));
            assert!(constraint_satisfied(&ConstraintSet::Shaping { rs: rs_h }, &x).unwrap().0);
            let omega: CMatrix<f64> = random_psd(3, 3, &mut rng);
            let q = x.gram_outer();
            assert!(omega.trace_product_re(&q) <= omega.trace_product_re(&rs) + 1e-10);
        }
    }

    #[test]
    fn trace_constraints_are_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for c in all_kinds(&mut rng, 3) {
            let Ok((omegas, _)) = c.to_weighted(3) else { continue };
            for _ in 0..1000 {
                let f1: CMatrix<f64> = complex_gaussian(3, 2, &mut rng);
                let f2: CMatrix<f64> = complex_gaussian(3, 2, &mut rng);
                let a: f64 = rng.random_range(0.0..1.0);
                let mix = &f1.scale(a) + &f2.scale(1.0 - a);
                for o in &omegas {
                    let g = |f: &CMatrix<f64>| o.as_matrix().trace_product_re(&f.gram_outer());
                    assert!(g(&mix) <= a * g(&f1) + (1.0 - a) * g(&f2) + 1e-10);
                }
            }
        }
    }

    #[test]
    fn weighted_needs_pd_aggregate() {
        let c = ConstraintSet::<f64>::Weighted {
            omegas: vec![HermitianPsd::from_diag(&[1.0, 0.0]).unwrap()],
            ps: vec![1.0],
        };
        assert!(c.validate().is_err());
    }
}
