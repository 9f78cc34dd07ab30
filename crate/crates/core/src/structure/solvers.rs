use crate::error::{invalid, Error, Result};
use crate::linalg::{evd_sorted, herm_sqrt, inv_sqrt, CMatrix, EigenOrder, HermitianPsd, Tolerances};
use crate::model::{constraint_satisfied, ConstraintSet, Diagnostics, Objective, PrecoderSolution};
use crate::monotone::optimal_qx;
use crate::scalar::Real;

use super::{derive_allocator, waterfill, AllocationProblem, AllocatorOverride};

/// Diminishing step `t_k = c / (a + k b)` for the weighting-factor loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientSchedule<T: Real> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub max_iter: usize,
    /// Per-constraint tolerances; empty means `1e-4 * P_i`.
    pub eps: Vec<T>,
}

impl<T: Real> Default for SubgradientSchedule<T> {
    fn default() -> Self {
        Self { a: T::one(), b: T::one(), c: T::one(), max_iter: 2000, eps: Vec::new() }
    }
}

impl<T: Real> SubgradientSchedule<T> {
    pub fn step(&self, k: usize) -> T {
        self.c / (self.a + T::from_usize(k).unwrap() * self.b)
    }

    fn tolerances(&self, ps: &[T]) -> Result<Vec<T>> {
        if !(self.a > T::zero() && self.b > T::zero() && self.c > T::zero()) || self.max_iter == 0 {
            return invalid("schedule constants and max_iter must be positive");
        }
        if self.eps.is_empty() {
            return Ok(ps.iter().map(|&p| p * T::lit(1e-4)).collect());
        }
        if self.eps.len() != ps.len() || self.eps.iter().any(|e| !(*e > T::zero())) {
            return invalid("eps must hold one positive tolerance per constraint");
        }
        Ok(self.eps.clone())
    }
}

/// Stream count, weighting-loop schedule and an optional allocator override.
#[derive(Debug, Clone)]
pub struct Design<T: Real> {
    pub streams: usize,
    pub schedule: SubgradientSchedule<T>,
    pub allocator: Option<AllocatorOverride<T>>,
}

impl<T: Real> Design<T> {
    pub fn new(streams: usize) -> Self {
        Self { streams, schedule: SubgradientSchedule::default(), allocator: None }
    }

    pub fn with_allocator(mut self, a: AllocatorOverride<T>) -> Self {
        self.allocator = Some(a);
        self
    }

    pub fn with_schedule(mut self, s: SubgradientSchedule<T>) -> Self {
        self.schedule = s;
        self
    }
}

/// Outer factor for `X X^H ⪯ R_s` with `cols` columns: the Hermitian square
/// root when `cols` equals the dimension, otherwise the leading scaled
/// eigenvectors (zero-padded when `cols` is larger).
pub fn solve_shaping<T: Real>(pi: &HermitianPsd<T>, rs: &HermitianPsd<T>, cols: usize) -> Result<CMatrix<T>> {
    let n = rs.dim();
    if pi.dim() != n {
        return invalid("Π and R_s dimensions differ");
    }
    if cols == 0 {
        return invalid("F needs at least one column");
    }
    let e = evd_sorted(rs, EigenOrder::Descending)?;
    let lmax = e.eigenvalues[0].max(T::zero());
    let tol = T::lit(Tolerances::for_scalar::<T>().rank);
    let rank = e.eigenvalues.iter().filter(|&&l| l > tol * lmax).count();
    if rank > cols {
        return Err(Error::Infeasible(format!("rank(R_s) = {rank} exceeds the {cols} columns of F")));
    }
    if cols >= n {
        let root = herm_sqrt(rs)?;
        let mut f = CMatrix::zeros(n, cols);
        for j in 0..n {
            f.set_col(j, &root.col(j));
        }
        return Ok(f);
    }
    let d: Vec<T> = e.eigenvalues[..cols].iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    Ok(e.unitary.leading_cols(cols).scale_cols(&d))
}

/// Column norms squared and normalized columns of `f`.
pub(crate) fn split_columns<T: Real>(f: &CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let powers: Vec<T> = (0..f.cols()).map(|j| f.col(j).iter().map(|z| z.norm_sqr()).sum()).collect();
    let inv: Vec<T> = powers.iter().map(|&p| if p > T::zero() { T::one() / p.sqrt() } else { T::zero() }).collect();
    (f.scale_cols(&inv), powers)
}

/// Completes an outer factor with its optimal inner unitary. The rotation is
/// `f` with unit columns and `powers` its squared column norms.
pub fn assemble<T: Real>(f: &CMatrix<T>, obj: &Objective<T>, pi: &HermitianPsd<T>) -> Result<PrecoderSolution<T>> {
    let q = optimal_qx(obj, f, pi)?;
    let (rotation, powers) = split_columns(f);
    Ok(PrecoderSolution {
        f: f.clone(),
        qx: q.q,
        rotation,
        powers,
        weights: Vec::new(),
        diagnostics: Diagnostics { approximate_qx: q.approximate, ..Diagnostics::default() },
    })
}

fn finish<T: Real>(
    rotation: CMatrix<T>,
    powers: Vec<T>,
    obj: &Objective<T>,
    pi: &HermitianPsd<T>,
    diagnostics: Diagnostics<T>,
) -> Result<PrecoderSolution<T>> {
    let roots: Vec<T> = powers.iter().map(|p| p.max(T::zero()).sqrt()).collect();
    let f = rotation.scale_cols(&roots);
    let q = optimal_qx(obj, &f, pi)?;
    Ok(PrecoderSolution {
        f,
        qx: q.q,
        rotation,
        powers,
        weights: Vec::new(),
        diagnostics: Diagnostics { approximate_qx: q.approximate, ..diagnostics },
    })
}

/// Leading `streams` eigenpairs of a Hermitian PSD matrix.
fn leading<T: Real>(m: &HermitianPsd<T>, streams: usize) -> Result<(CMatrix<T>, Vec<T>)> {
    if streams == 0 || streams > m.dim() {
        return invalid(format!("streams must lie in 1..={}", m.dim()));
    }
    let e = evd_sorted(m, EigenOrder::Descending)?;
    let gains = e.eigenvalues[..streams].iter().map(|l| l.max(T::zero())).collect();
    Ok((e.unitary.leading_cols(streams), gains))
}

/// `Tr(F F^H) <= p` and `F F^H ⪯ τ I`: `F = U_Π Λ_F` with capped
/// water-filling. `tau = ∞` gives the sum-power design.
pub fn solve_joint<T: Real>(
    pi: &HermitianPsd<T>,
    p: T,
    tau: T,
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    if !(p > T::zero()) || !(tau > T::zero()) {
        return invalid("p and τ must be positive");
    }
    let (rotation, gains) = leading(pi, design.streams)?;
    let (allocator, g) = derive_allocator(obj, &gains, design.allocator.as_ref())?;
    let mut prob = AllocationProblem::new(g, p, allocator);
    if tau.is_finite() {
        prob = prob.with_caps(vec![tau; design.streams]);
    }
    let a = waterfill(&prob)?;
    let diag = Diagnostics { water_level: a.mu, kkt_residual: a.kkt_residual, ..Diagnostics::default() };
    finish(rotation, a.powers, obj, pi, diag)
}

/// Result of the weighting-factor loop before the inner unitary is applied.
#[derive(Debug, Clone)]
pub(crate) struct WeightedOutcome<T: Real> {
    pub rotation: CMatrix<T>,
    pub powers: Vec<T>,
    /// Weights scaled to `Σ α_i P_i = Σ P_i`.
    pub alpha: Vec<T>,
    pub mu: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

fn weighted_sum<T: Real>(omegas: &[HermitianPsd<T>], alpha: &[T]) -> HermitianPsd<T> {
    let n = omegas[0].dim();
    let mut m = CMatrix::zeros(n, n);
    for (o, &a) in omegas.iter().zip(alpha) {
        m = &m + &o.as_matrix().scale(a);
    }
    HermitianPsd::new_unchecked(m)
}

/// Sub-gradient search for the weights `α_i` of `Tr(Ω_i F F^H) <= P_i`.
///
/// Each step solves the single-constraint problem for `Ω = Σ α_i Ω_i` with
/// budget `Σ α_i P_i` and moves `α_i` along `Tr(Ω_i F F^H) - P_i`. The inner
/// problem only sees the direction of `α`, so weights are renormalized every
/// step and no weight may drop below half its value, which keeps `Ω`
/// invertible.
pub(crate) fn weighted_loop<T: Real>(
    pi: &HermitianPsd<T>,
    omegas: &[HermitianPsd<T>],
    ps: &[T],
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<WeightedOutcome<T>> {
    ConstraintSet::Weighted { omegas: omegas.to_vec(), ps: ps.to_vec() }.validate()?;
    if omegas[0].dim() != pi.dim() {
        return invalid("Ω_i and Π dimensions differ");
    }
    let sched = &design.schedule;
    let eps = sched.tolerances(ps)?;
    let sum_p: T = ps.iter().copied().sum();
    let sum_p2: T = ps.iter().map(|&p| p * p).sum();
    let norm_to = |a: &mut Vec<T>, total: T| {
        let s: T = a.iter().zip(ps).map(|(&x, &p)| x * p).sum();
        for x in a.iter_mut() {
            *x = *x * total / s;
        }
    };
    let level = T::lit(0.5) * sum_p2;
    let mut alpha = vec![level / sum_p; ps.len()];

    let inner = |alpha: &[T]| -> Result<(CMatrix<T>, Vec<T>, T, Vec<T>)> {
        let omega = weighted_sum(omegas, alpha);
        let w = inv_sqrt(&omega)?;
        let whitened = HermitianPsd::new_unchecked(w.congruence(pi.as_matrix()));
        let (u, gains) = leading(&whitened, design.streams)?;
        let (allocator, g) = derive_allocator(obj, &gains, design.allocator.as_ref())?;
        let budget: T = alpha.iter().zip(ps).map(|(&a, &p)| a * p).sum();
        let a = waterfill(&AllocationProblem::new(g, budget, allocator))?;
        let rotation = w.matmul(&u);
        let q = rotation.scale_cols(&a.powers).matmul(&rotation.adjoint());
        let used: Vec<T> = omegas.iter().map(|o| o.as_matrix().trace_product_re(&q)).collect();
        Ok((rotation, a.powers, a.mu, used))
    };
    let score = |alpha: &[T], g: &[T]| -> (T, T) {
        let s: T = alpha.iter().zip(ps).map(|(&x, &p)| x * p).sum();
        let mut worst = T::zero();
        let mut rel = T::zero();
        for i in 0..ps.len() {
            let r = (alpha[i] * sum_p / s * g[i]).abs().max(g[i].max(T::zero()));
            worst = worst.max(r / eps[i]);
            rel = rel.max(r / ps[i]);
        }
        (worst, rel)
    };

    let mut best: Option<(T, WeightedOutcome<T>)> = None;
    let mut iterations = 0;
    for k in 0..sched.max_iter {
        iterations = k + 1;
        let (rotation, mut powers, mu, used) = inner(&alpha)?;
        let g: Vec<T> = used.iter().zip(ps).map(|(&u, &p)| u - p).collect();
        // judge the iterate after scaling it onto the feasible set
        let s = used.iter().zip(ps).map(|(&u, &p)| if u > p { p / u } else { T::one() }).fold(T::one(), T::min);
        let g_feasible: Vec<T> = used.iter().zip(ps).map(|(&u, &p)| s * u - p).collect();
        let (worst, rel) = score(&alpha, &g_feasible);
        if best.as_ref().is_none_or(|(b, _)| worst < *b) {
            powers.iter_mut().for_each(|p| *p = *p * s);
            let mut a_hat = alpha.clone();
            norm_to(&mut a_hat, sum_p);
            let out = WeightedOutcome {
                rotation,
                powers,
                alpha: a_hat,
                mu,
                residual: rel,
                iterations,
                converged: worst <= T::one(),
            };
            best = Some((worst, out));
        }
        if worst <= T::one() {
            break;
        }
        let t = sched.step(k);
        let mut next: Vec<T> = alpha.iter().zip(&g).map(|(&a, &gi)| (a + t * gi).max(a * T::lit(0.5))).collect();
        norm_to(&mut next, level);
        alpha = next;
    }
    let (_, mut out) = best.expect("at least one iteration");
    out.iterations = iterations;
    Ok(out)
}

/// Multiple weighted power constraints `Tr(Ω_i F F^H) <= P_i`:
/// `F = Ω^{-1/2} U Λ_F` for the weights found by the sub-gradient loop.
///
/// Non-convergence is reported through `diagnostics.converged` with the best
/// iterate returned.
pub fn solve_weighted<T: Real>(
    pi: &HermitianPsd<T>,
    omegas: &[HermitianPsd<T>],
    ps: &[T],
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    let out = weighted_loop(pi, omegas, ps, obj, design)?;
    let diag = Diagnostics {
        water_level: out.mu,
        kkt_residual: out.residual,
        iterations: out.iterations,
        converged: out.converged,
        ..Diagnostics::default()
    };
    let mut sol = finish(out.rotation, out.powers, obj, pi, diag)?;
    sol.weights = out.alpha;
    Ok(sol)
}

/// Dispatches on the constraint family.
pub fn solve_constraints<T: Real>(
    pi: &HermitianPsd<T>,
    constraints: &ConstraintSet<T>,
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    constraints.validate()?;
    let n = pi.dim();
    let sol = match constraints {
        ConstraintSet::SumPower { p } => solve_joint(pi, *p, T::infinity(), obj, design)?,
        ConstraintSet::Joint { p, tau } => solve_joint(pi, *p, *tau, obj, design)?,
        ConstraintSet::EigenCaps { taus } => {
            if taus.len() > 1 {
                return Err(Error::Unsupported("only a single eigenvalue cap can be solved".into()));
            }
            let budget = taus[0] * T::from_usize(design.streams).unwrap();
            solve_joint(pi, budget, taus[0], obj, design)?
        }
        ConstraintSet::Shaping { rs } => {
            let f = solve_shaping(pi, rs, design.streams)?;
            assemble(&f, obj, pi)?
        }
        ConstraintSet::PerAntenna { .. } | ConstraintSet::Weighted { .. } | ConstraintSet::Cognitive { .. } => {
            let (omegas, ps) = constraints.to_weighted(n)?;
            solve_weighted(pi, &omegas, &ps, obj, design)?
        }
    };
    let (ok, _) = constraint_satisfied(constraints, &sol.x())?;
    if !ok {
        return Err(Error::Infeasible("design violates its constraints".into()));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{complex_gaussian, random_psd};
    use crate::model::{ScalarVectorFn, SchurMode};
    use crate::monotone::eval_objective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> HermitianPsd<f64> {
        HermitianPsd::from_diag(d).unwrap()
    }

    #[test]
    fn shaping_examples() {
        let i2 = HermitianPsd::<f64>::identity(2);
        assert!(solve_shaping(&i2, &i2, 2).unwrap().max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        let f = solve_shaping(&i2, &diag(&[4.0, 1.0]), 2).unwrap();
        assert!(f.max_abs_diff(&CMatrix::from_diag(&[2.0, 1.0])) < 1e-12);
        assert!(matches!(solve_shaping(&i2, &diag(&[4.0, 1.0]), 1), Err(Error::Infeasible(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let rs: HermitianPsd<f64> = HermitianPsd::new_unchecked(random_psd(4, 2, &mut rng));
        let f = solve_shaping(&HermitianPsd::identity(4), &rs, 2).unwrap();
        assert!(f.gram_outer().max_abs_diff(rs.as_matrix()) < 1e-9 * rs.as_matrix().max_abs());
    }

    #[test]
    fn joint_examples() {
        let d = Design::<f64>::new(2);
        let obj = Objective::capacity(2);
        let s = solve_joint(&HermitianPsd::identity(2), 2.0, 1.0, &obj, &d).unwrap();
        assert!((s.powers[0] - 1.0).abs() < 1e-10 && (s.powers[1] - 1.0).abs() < 1e-10);
        let s = solve_joint(&diag(&[2.0, 1.0]), 1.0, 0.5, &obj, &d).unwrap();
        assert!((s.powers[0] - 0.5).abs() < 1e-10 && (s.powers[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn joint_is_diagonal_in_the_pi_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..20 {
            let pi: HermitianPsd<f64> = HermitianPsd::new_unchecked(random_psd(4, 4, &mut rng));
            let s = solve_joint(&pi, 1.0, 0.4, &Objective::capacity(4), &Design::new(4)).unwrap();
            let u = evd_sorted(&pi, EigenOrder::Descending).unwrap().unitary;
            let m = u.adjoint_mul(&s.f);
            let total = m.frobenius_norm().powi(2);
            let off: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| m[(i, j)].norm_sqr()).sum();
            assert!(off < 1e-9 * total);
            let (ok, _) = constraint_satisfied(&ConstraintSet::Joint { p: 1.0, tau: 0.4 }, &s.x()).unwrap();
            assert!(ok);
        }
    }

    #[test]
    fn single_weighted_constraint_is_sum_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let pi: HermitianPsd<f64> = HermitianPsd::new_unchecked(random_psd(3, 3, &mut rng));
        let d = Design::new(2);
        let obj = Objective::capacity(2);
        let w = solve_weighted(&pi, &[HermitianPsd::identity(3)], &[2.0], &obj, &d).unwrap();
        let j = solve_joint(&pi, 2.0, f64::INFINITY, &obj, &d).unwrap();
        assert!((w.f.frobenius_norm().powi(2) - 2.0).abs() < 1e-4);
        assert!(w.diagnostics.converged);
        for (a, b) in w.powers.iter().zip(&j.powers) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn per_antenna_identity_channel() {
        let omegas = [diag(&[1.0, 0.0]), diag(&[0.0, 1.0])];
        let s = solve_weighted(&HermitianPsd::identity(2), &omegas, &[0.5, 0.5], &Objective::capacity(2), &Design::new(2))
            .unwrap();
        let d = s.x().gram_outer().diag_re();
        assert!((d[0] - 0.5).abs() < 1e-6 && (d[1] - 0.5).abs() < 1e-6);
        assert!(s.diagnostics.converged);
    }

    #[test]
    fn assemble_improves_on_identity_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let pi: HermitianPsd<f64> = HermitianPsd::new_unchecked(random_psd(3, 3, &mut rng));
        let f: CMatrix<f64> = complex_gaussian(3, 2, &mut rng);
        let obj = Objective::Obj2 { phi: diag(&[1.0, 2.0]) };
        let s = assemble(&f, &obj, &pi).unwrap();
        assert!(eval_objective(&obj, &s.x(), &pi).unwrap() <= eval_objective(&obj, &f, &pi).unwrap() + 1e-12);
        let obj = Objective::Obj5 { mode: SchurMode::AddConvex, f: ScalarVectorFn::builtin("max").unwrap(), alpha: 1.0 };
        let s = assemble(&f, &obj, &pi).unwrap();
        let c = &s.x().congruence(pi.as_matrix()) + &CMatrix::identity(2);
        let d = crate::linalg::herm_inverse(&c).unwrap().diag_re();
        assert!((d[0] - d[1]).abs() < 1e-6 * d[0]);
    }

    #[test]
    fn unsupported_without_override() {
        let obj = Objective::Obj8 { a: CMatrix::identity(2), alpha: 1.0 };
        let pi = HermitianPsd::identity(2);
        assert!(matches!(solve_joint(&pi, 1.0, 1.0, &obj, &Design::new(2)), Err(Error::Unsupported(_))));
        let d = Design::new(2).with_allocator(AllocatorOverride::MseTrace);
        assert!(solve_joint(&pi, 1.0, 1.0, &obj, &d).unwrap().diagnostics.approximate_qx);
    }

    #[test]
    fn dispatcher_checks_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let pi: HermitianPsd<f64> = HermitianPsd::new_unchecked(random_psd(3, 3, &mut rng));
        let obj = Objective::sum_mse(2);
        let d = Design::new(2);
        for c in [
            ConstraintSet::SumPower { p: 1.0 },
            ConstraintSet::PerAntenna { p: vec![0.3, 0.5, 0.2] },
            ConstraintSet::Joint { p: 1.0, tau: 0.3 },
            ConstraintSet::EigenCaps { taus: vec![0.5] },
            ConstraintSet::Shaping { rs: diag(&[1.0, 0.5, 0.0]) },
        ] {
            assert!(solve_constraints(&pi, &c, &obj, &d).is_ok(), "{c:?}");
        }
        let caps = ConstraintSet::EigenCaps { taus: vec![0.5, 0.2] };
        assert!(matches!(solve_constraints(&pi, &caps, &obj, &d), Err(Error::Unsupported(_))));
    }
}
