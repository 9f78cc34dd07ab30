//! Effective Π for imperfect channel knowledge and the matching designs.
//!
//! * Bayes: `H = Ĥ + H_W Ψ^{1/2}`, error known to both ends only in
//!   distribution, so the noise seen after equalization grows with
//!   `Tr(X X^H Ψ)`.
//! * Stochastic: `H = Ĥ + Σ^{1/2} H_W Ψ^{1/2}` with perfect receiver knowledge.
//! * Worst case: `H = Ĥ - ΔH` with `||ΔH||_2 <= γ`.

mod bayes;
mod stochastic;
mod worst;

pub use bayes::{
    bayes_constraint_value, bayes_pi, from_auxiliary, solve_bayes, solve_bayes_joint, solve_bayes_shaping,
    solve_bayes_weighted, to_auxiliary, BayesContext,
};
pub use stochastic::{solve_stochastic, stochastic_pi, StochasticContext};
pub use worst::{solve_worstcase, worst_case_delta, worst_case_pi, WorstCaseContext};

use crate::error::{invalid, Result};
use crate::linalg::{CMatrix, HermitianPsd};
use crate::model::{constraint_satisfied, PrecoderSolution, Regime, Scenario};
use crate::scalar::Real;
use crate::structure::{solve_constraints, Design};

/// `Ĥ^H Ĥ / σ_n²`.
pub fn perfect_pi<T: Real>(h: &CMatrix<T>, sigma_n2: T) -> HermitianPsd<T> {
    HermitianPsd::new_unchecked(h.gram_inner().scale(T::one() / sigma_n2))
}

/// Solves a scenario with the design matching its regime.
///
/// `allow_upper_bound` lets the worst-case design accept constraints that
/// are not left unitarily invariant.
pub fn solve_scenario<T: Real>(
    s: &Scenario<T>,
    design: &Design<T>,
    allow_upper_bound: bool,
) -> Result<PrecoderSolution<T>> {
    s.validate()?;
    if design.streams != s.streams {
        return invalid("design and scenario disagree on the stream count");
    }
    let sol = match &s.regime {
        Regime::Perfect { h } => solve_constraints(&perfect_pi(h, s.noise_var), &s.constraints, &s.objective, design)?,
        Regime::Bayes { h_hat, psi } => {
            let ctx = BayesContext::new(h_hat.clone(), psi.clone(), s.noise_var)?;
            solve_bayes(&ctx, &s.constraints, &s.objective, design)?
        }
        Regime::Stochastic { h_hat, sigma_row, psi_col } => {
            let rn = HermitianPsd::new_unchecked(CMatrix::identity(h_hat.rows()).scale(s.noise_var));
            let ctx = StochasticContext::new(h_hat.clone(), sigma_row.clone(), psi_col.clone(), rn)?;
            solve_stochastic(&ctx, &s.constraints, &s.objective, design)?
        }
        Regime::WorstCase { h_hat, gamma } => {
            let ctx = WorstCaseContext::new(h_hat.clone(), *gamma, s.noise_var)?;
            solve_worstcase(&ctx, &s.constraints, &s.objective, design, allow_upper_bound)?
        }
    };
    debug_assert!(constraint_satisfied(&s.constraints, &sol.x()).map(|r| r.0).unwrap_or(false));
    Ok(sol)
}

/// The `Π` a scenario's design works with, evaluated at the precoder `x`.
/// Only the Bayes form depends on `x`.
pub fn effective_pi<T: Real>(s: &Scenario<T>, x: &CMatrix<T>) -> Result<HermitianPsd<T>> {
    match &s.regime {
        Regime::Perfect { h } => Ok(perfect_pi(h, s.noise_var)),
        Regime::Bayes { h_hat, psi } => bayes_pi(&BayesContext::new(h_hat.clone(), psi.clone(), s.noise_var)?, x),
        Regime::Stochastic { h_hat, sigma_row, psi_col } => {
            let rn = HermitianPsd::new_unchecked(CMatrix::identity(h_hat.rows()).scale(s.noise_var));
            stochastic_pi(h_hat, sigma_row, psi_col, &rn)
        }
        Regime::WorstCase { h_hat, gamma } => worst_case_pi(&WorstCaseContext::new(h_hat.clone(), *gamma, s.noise_var)?),
    }
}
