use crate::error::{invalid, Error, Result};
use crate::linalg::{eigenvalues_desc, inv_sqrt, CMatrix, HermitianPsd};
use crate::model::{constraint_satisfied, ConstraintSet, Diagnostics, Objective, PrecoderSolution};
use crate::scalar::Real;
use crate::structure::{assemble, solve_joint, solve_shaping, solve_weighted, split_columns, Design};

/// Smallest admissible `1 - Tr(Ψ F̄ F̄^H)` before the rescaling is refused.
const RESCALE_FLOOR: f64 = 1e-10;

/// Estimate `Ĥ` (`N_r x N_t`), transmit-side error covariance `Ψ` and noise power.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesContext<T: Real> {
    pub h_hat: CMatrix<T>,
    pub psi: HermitianPsd<T>,
    pub sigma_n2: T,
}

impl<T: Real> BayesContext<T> {
    pub fn new(h_hat: CMatrix<T>, psi: HermitianPsd<T>, sigma_n2: T) -> Result<Self> {
        if psi.dim() != h_hat.cols() {
            return invalid("Ψ must be N_t x N_t");
        }
        if !(sigma_n2 > T::zero()) || !sigma_n2.is_finite() {
            return invalid("noise power must be positive");
        }
        Ok(Self { h_hat, psi, sigma_n2 })
    }

    fn nt(&self) -> usize {
        self.h_hat.cols()
    }

    /// `Ψ = c I` for some `c >= 0` (including `Ψ = 0`).
    fn psi_is_scaled_identity(&self) -> bool {
        let m = self.psi.as_matrix();
        let d = m[(0, 0)].re;
        let tol = T::lit(1e-12) * T::one().max(m.max_abs());
        (0..m.rows()).all(|i| {
            (0..m.cols()).all(|j| {
                let want = if i == j { d } else { T::zero() };
                (m[(i, j)].re - want).abs() <= tol && m[(i, j)].im.abs() <= tol
            })
        })
    }

    fn psi_is_zero(&self) -> bool {
        self.psi.as_matrix().max_abs() == T::zero()
    }

    fn psi_trace(&self, f: &CMatrix<T>) -> T {
        self.psi.as_matrix().trace_product_re(&f.gram_outer())
    }
}

/// `Ĥ^H (σ_n² + Tr(F F^H Ψ))^{-1} Ĥ`.
pub fn bayes_pi<T: Real>(ctx: &BayesContext<T>, f: &CMatrix<T>) -> Result<HermitianPsd<T>> {
    if f.rows() != ctx.nt() {
        return invalid("F must have N_t rows");
    }
    let kn = ctx.sigma_n2 + ctx.psi_trace(f);
    Ok(HermitianPsd::new_unchecked(ctx.h_hat.gram_inner().scale(T::one() / kn)))
}

/// `F̄ = F / sqrt(σ_n² + Tr(F F^H Ψ))`.
pub fn to_auxiliary<T: Real>(ctx: &BayesContext<T>, f: &CMatrix<T>) -> CMatrix<T> {
    f.scale(T::one() / (ctx.sigma_n2 + ctx.psi_trace(f)).sqrt())
}

/// Inverse of [`to_auxiliary`]: `F = σ_n F̄ / sqrt(1 - Tr(Ψ F̄ F̄^H))`.
pub fn from_auxiliary<T: Real>(ctx: &BayesContext<T>, f_bar: &CMatrix<T>) -> Result<CMatrix<T>> {
    let denom = T::one() - ctx.psi_trace(f_bar);
    if !(denom > T::lit(RESCALE_FLOOR)) {
        return Err(Error::DegenerateRescaling(format!("1 - Tr(Ψ F̄ F̄^H) = {denom}")));
    }
    Ok(f_bar.scale((ctx.sigma_n2 / denom).sqrt()))
}

/// `Tr((σ_n² Ω + P Ψ) F F^H) / (σ_n² + Tr(F F^H Ψ))`, which is at most `P`
/// exactly when `Tr(Ω F F^H) <= P`.
pub fn bayes_constraint_value<T: Real>(ctx: &BayesContext<T>, f: &CMatrix<T>, omega: &HermitianPsd<T>, p: T) -> T {
    let q = f.gram_outer();
    let tpsi = ctx.psi.as_matrix().trace_product_re(&q);
    (ctx.sigma_n2 * omega.as_matrix().trace_product_re(&q) + p * tpsi) / (ctx.sigma_n2 + tpsi)
}

/// Rebuilds a solution around the rescaled outer factor. The inner unitary
/// carries over because `F^H Π(F) F = F̄^H Ĥ^H Ĥ F̄`.
fn rescaled<T: Real>(f: CMatrix<T>, qx: CMatrix<T>, weights: Vec<T>, diagnostics: Diagnostics<T>) -> PrecoderSolution<T> {
    let (rotation, powers) = split_columns(&f);
    PrecoderSolution { f, qx, rotation, powers, weights, diagnostics }
}

fn check_feasible<T: Real>(c: &ConstraintSet<T>, sol: &PrecoderSolution<T>) -> Result<()> {
    if !constraint_satisfied(c, &sol.x())?.0 {
        return Err(Error::Infeasible("rescaled design violates its constraints".into()));
    }
    Ok(())
}

/// Rescales the step of the weighting loop. Moving `α_i` changes
/// `Σ α_i (σ_n² Ω_i + P_i Ψ)` only through `σ_n² Ω_i`, while the shared
/// `Σ α_i P_i Ψ` term is pinned by the normalization, so the steps are
/// enlarged by `1 + λ_max(Σ P_i Ψ) / (σ_n² λ_max(Σ Ω_i))`.
fn leveraged<T: Real>(ctx: &BayesContext<T>, omegas: &[HermitianPsd<T>], ps: &[T], design: &Design<T>) -> Result<Design<T>> {
    let sum_p: T = ps.iter().copied().sum();
    let n = ctx.nt();
    let mut sum_o = CMatrix::zeros(n, n);
    for o in omegas {
        sum_o = &sum_o + o.as_matrix();
    }
    let lo = eigenvalues_desc(&sum_o)?[0];
    let lp = eigenvalues_desc(ctx.psi.as_matrix())?[0].max(T::zero());
    let mut d = design.clone();
    d.schedule.c = d.schedule.c * (T::one() + sum_p * lp / (ctx.sigma_n2 * lo));
    Ok(d)
}

/// `Tr(Ω_i F F^H) <= P_i`: the sub-gradient loop runs on
/// `max F̄^H Ĥ^H Ĥ F̄` subject to `Tr((σ_n² Ω_i + P_i Ψ) F̄ F̄^H) <= P_i`,
/// then `F̄` is mapped back.
pub fn solve_bayes_weighted<T: Real>(
    ctx: &BayesContext<T>,
    omegas: &[HermitianPsd<T>],
    ps: &[T],
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    let set = ConstraintSet::Weighted { omegas: omegas.to_vec(), ps: ps.to_vec() };
    set.validate()?;
    if set.antennas() != Some(ctx.nt()) {
        return invalid("Ω_i must be N_t x N_t");
    }
    let modified: Vec<HermitianPsd<T>> = omegas
        .iter()
        .zip(ps)
        .map(|(o, &p)| {
            HermitianPsd::new_unchecked(&o.as_matrix().scale(ctx.sigma_n2) + &ctx.psi.as_matrix().scale(p))
        })
        .collect();
    let gram = HermitianPsd::new_unchecked(ctx.h_hat.gram_inner());
    let aux = solve_weighted(&gram, &modified, ps, obj, &leveraged(ctx, omegas, ps, design)?)?;
    let f = from_auxiliary(ctx, &aux.f)?;
    let kn = ctx.sigma_n2 + ctx.psi_trace(&f);
    let fixed = ctx.sigma_n2 / (T::one() - ctx.psi_trace(&aux.f));
    if (kn - fixed).abs() > T::lit(1e-8) * fixed {
        return Err(Error::NotConverged(format!("rescaling fixed point off by {}", (kn - fixed).abs())));
    }
    let sol = rescaled(f, aux.qx, aux.weights, aux.diagnostics);
    check_feasible(&set, &sol)?;
    Ok(sol)
}

/// `Tr(F F^H) <= p`, `F F^H ⪯ τ I`: whiten with `Ψ̃ = σ_n² I + p Ψ`, solve the
/// joint problem for `F̃` with the cap lowered to
/// `τ (σ_n² + p λ_min(Ψ)) / (σ_n² + p λ_max(Ψ))`, and map back.
///
/// The lowered cap only matters when `τ` is finite, so the design is exact
/// for a pure sum-power budget and for `Ψ ∝ I`; otherwise it maximizes a
/// lower bound and is flagged `suboptimal`.
pub fn solve_bayes_joint<T: Real>(
    ctx: &BayesContext<T>,
    p: T,
    tau: T,
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    if !(p > T::zero()) || !(tau > T::zero()) {
        return invalid("p and τ must be positive");
    }
    let n = ctx.nt();
    let psi_tilde =
        HermitianPsd::new_unchecked(&CMatrix::identity(n).scale(ctx.sigma_n2) + &ctx.psi.as_matrix().scale(p));
    let w = inv_sqrt(&psi_tilde)?;
    let pi_tilde = HermitianPsd::new_unchecked(w.congruence(&ctx.h_hat.gram_inner()));
    let lam = eigenvalues_desc(ctx.psi.as_matrix())?;
    let (lmax, lmin) = (lam[0].max(T::zero()), lam[n - 1].max(T::zero()));
    let cap = if tau.is_finite() { tau * (ctx.sigma_n2 + p * lmin) / (ctx.sigma_n2 + p * lmax) } else { tau };
    let aux = solve_joint(&pi_tilde, p, cap, obj, design)?;
    let g = w.matmul(&aux.f);
    let f = from_auxiliary(ctx, &g)?;
    let diagnostics = Diagnostics { suboptimal: tau.is_finite() && !ctx.psi_is_scaled_identity(), ..aux.diagnostics };
    let sol = rescaled(f, aux.qx, Vec::new(), diagnostics);
    check_feasible(&ConstraintSet::Joint { p, tau }, &sol)?;
    Ok(sol)
}

/// `F F^H ⪯ R_s`: a square root of `R_s`, which maximizes the lower bound
/// `F^H Ĥ^H Ĥ F / (σ_n² + Tr(R_s Ψ))`. Exact only for `Ψ = 0`.
pub fn solve_bayes_shaping<T: Real>(
    ctx: &BayesContext<T>,
    rs: &HermitianPsd<T>,
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    if rs.dim() != ctx.nt() {
        return invalid("R_s must be N_t x N_t");
    }
    let gram = HermitianPsd::new_unchecked(ctx.h_hat.gram_inner());
    let f = solve_shaping(&gram, rs, design.streams)?;
    let mut sol = assemble(&f, obj, &bayes_pi(ctx, &f)?)?;
    sol.diagnostics.suboptimal = !ctx.psi_is_zero();
    Ok(sol)
}

/// Dispatches on the constraint family. Sum power is the joint design with
/// no cap; per-antenna and cognitive constraints go through the weighted form.
pub fn solve_bayes<T: Real>(
    ctx: &BayesContext<T>,
    constraints: &ConstraintSet<T>,
    obj: &Objective<T>,
    design: &Design<T>,
) -> Result<PrecoderSolution<T>> {
    constraints.validate()?;
    if constraints.antennas().is_some_and(|n| n != ctx.nt()) {
        return invalid("constraint dimension differs from N_t");
    }
    match constraints {
        ConstraintSet::SumPower { p } => solve_bayes_joint(ctx, *p, T::infinity(), obj, design),
        ConstraintSet::Joint { p, tau } => solve_bayes_joint(ctx, *p, *tau, obj, design),
        ConstraintSet::Shaping { rs } => solve_bayes_shaping(ctx, rs, obj, design),
        ConstraintSet::PerAntenna { .. } | ConstraintSet::Weighted { .. } | ConstraintSet::Cognitive { .. } => {
            let (omegas, ps) = constraints.to_weighted(ctx.nt())?;
            solve_bayes_weighted(ctx, &omegas, &ps, obj, design)
        }
        ConstraintSet::EigenCaps { .. } => {
            Err(Error::Unsupported("eigenvalue caps without a sum budget under Bayes errors".into()))
        }
    }
}
