use crate::error::{invalid, Error, Result};
use crate::linalg::{svd, CMatrix, HermitianPsd};
use crate::model::{ConstraintSet, Objective, PrecoderSolution};
use crate::scalar::Real;
use crate::structure::{solve_constraints, Design};

/// Estimate `Ĥ` with a spectral-norm error bound `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseContext<T: Real> {
    pub h_hat: CMatrix<T>,
    pub gamma: T,
    pub sigma_n2: T,
}

impl<T: Real> WorstCaseContext<T> {
    pub fn new(h_hat: CMatrix<T>, gamma: T, sigma_n2: T) -> Result<Self> {
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return invalid("γ must be a finite nonnegative number");
        }
        if !(sigma_n2 > T::zero()) || !sigma_n2.is_finite() {
            return invalid("noise power must be positive");
        }
        Ok(Self { h_hat, gamma, sigma_n2 })
    }
}

/// `U_Ĥ diag(min(σ_i(Ĥ), γ)) V_Ĥ^H`: shrinks every singular value of `Ĥ`
/// by `γ`, clamping at zero.
pub fn worst_case_delta<T: Real>(ctx: &WorstCaseContext<T>) -> Result<CMatrix<T>> {
    let s = svd(&ctx.h_hat)?;
    let clipped: Vec<T> = s.singular.iter().map(|&x| x.min(ctx.gamma)).collect();
    let (r, c) = ctx.h_hat.shape();
    Ok(s.left.matmul(&CMatrix::rect_diag(r, c, &clipped)).matmul(&s.right.adjoint()))
}

/// `σ_n^{-2} (Ĥ - ΔH_worst)^H (Ĥ - ΔH_worst)`.
pub fn worst_case_pi<T: Real>(ctx: &WorstCaseContext<T>) -> Result<HermitianPsd<T>> {
    let h = &ctx.h_hat - &worst_case_delta(ctx)?;
    Ok(HermitianPsd::new_unchecked(h.gram_inner().scale(T::one() / ctx.sigma_n2)))
}

/// Designs against the shrunken channel. The result is the true max-min
/// design when the constraints are also left unitarily invariant
/// (`diagnostics.tight`); otherwise it maximizes an upper bound and is only
/// produced when `allow_upper_bound` is set.
pub fn solve_worstcase<T: Real>(
    ctx: &WorstCaseContext<T>,
    constraints: &ConstraintSet<T>,
    obj: &Objective<T>,
    design: &Design<T>,
    allow_upper_bound: bool,
) -> Result<PrecoderSolution<T>> {
    let tight = constraints.is_left_invariant();
    if !tight && !allow_upper_bound {
        return Err(Error::Unsupported(
            "constraints are not left unitarily invariant; the design would only maximize an upper bound".into(),
        ));
    }
    let mut sol = solve_constraints(&worst_case_pi(ctx)?, constraints, obj, design)?;
    sol.diagnostics.tight = tight;
    Ok(sol)
}
