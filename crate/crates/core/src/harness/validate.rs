use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::random::random_unitary;
use crate::linalg::svd;
use crate::model::{constraint_satisfied, PrecoderSolution, Regime, Scenario};
use crate::monotone::eval_objective;
use crate::oracle::{random_feasible_search, sample_delta};
use crate::robust::{effective_pi, solve_scenario, worst_case_delta, WorstCaseContext};
use crate::structure::Design;

use super::channel::splitmix64;

const UNITARY_TRIALS: usize = 200;
const FEASIBLE_SAMPLES: usize = 2000;
const DELTA_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    /// Not applicable to this instance.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: CheckOutcome,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        Self { name, outcome: if ok { CheckOutcome::Pass } else { CheckOutcome::Fail }, detail }
    }

    fn skip(name: &'static str, detail: impl Into<String>) -> Self {
        Self { name, outcome: CheckOutcome::Skip, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub solution: PrecoderSolution<f64>,
    /// Objective at the design, under the regime's effective `Π`.
    pub objective: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != CheckOutcome::Fail)
    }
}

/// Designs `s` and probes the result: feasibility, the inner unitary against
/// random rotations, the whole design against random feasible precoders,
/// and for bounded errors the singular-value floor of the shrunken channel.
pub fn validate_scenario(s: &Scenario<f64>, seed: u64) -> Result<ValidationReport> {
    let sol = solve_scenario(s, &Design::new(s.streams), false)?;
    let x = sol.x();
    let pi = effective_pi(s, &x)?;
    let objective = eval_objective(&s.objective, &x, &pi)?;
    let scale = objective.abs().max(1.0);
    let mut checks = Vec::new();

    let (ok, slack) = constraint_satisfied(&s.constraints, &x)?;
    let min = slack.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::new("feasible", ok, format!("smallest slack {min:.3e}")));

    let defect = sol.qx.unitarity_defect();
    checks.push(Check::new("unitary inner factor", defect <= 1e-9, format!("defect {defect:.3e}")));

    let tol = if sol.diagnostics.approximate_qx { 1e-3 } else { 1e-8 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut win: f64 = 0.0;
    for _ in 0..UNITARY_TRIALS {
        let u = random_unitary::<f64, _>(s.streams, &mut rng);
        let v = eval_objective(&s.objective, &sol.f.matmul(&u), &pi)?;
        win = win.max((objective - v) / scale);
    }
    checks.push(Check::new(
        "inner unitary",
        win <= tol,
        format!("largest relative win of {UNITARY_TRIALS} random unitaries {win:.3e} (tolerance {tol:.0e})"),
    ));

    if sol.diagnostics.suboptimal || !sol.diagnostics.tight {
        checks.push(Check::skip("random feasible search", "design optimizes a bound"));
    } else {
        let f = |g: &crate::linalg::CMatrix<f64>| eval_objective(&s.objective, g, &effective_pi(s, g)?);
        match random_feasible_search(&s.constraints, s.tx_antennas(), s.streams, &f, FEASIBLE_SAMPLES, splitmix64(seed)) {
            Ok(r) => {
                let win = (objective - r.best_objective) / scale;
                checks.push(Check::new(
                    "random feasible search",
                    win <= 1e-6,
                    format!("best of {} samples {:.6e}, design {objective:.6e}", r.samples, r.best_objective),
                ));
            }
            Err(e) => checks.push(Check::skip("random feasible search", e.to_string())),
        }
    }

    if let Regime::WorstCase { h_hat, gamma } = &s.regime {
        let sv = svd(h_hat)?.singular;
        let floor: Vec<f64> = sv.iter().map(|x| (x - gamma).max(0.0)).collect();
        let mut below = 0;
        for d in sample_delta(*gamma, h_hat.shape(), DELTA_SAMPLES, splitmix64(seed ^ 1), None)? {
            let got = svd(&(h_hat - &d))?.singular;
            below += got.iter().zip(&floor).filter(|(g, f)| **g < **f - 1e-9).count();
        }
        let ctx = WorstCaseContext::new(h_hat.clone(), *gamma, s.noise_var)?;
        let at = svd(&(h_hat - &worst_case_delta(&ctx)?))?.singular;
        let off = at.iter().zip(&floor).map(|(a, f)| (a - f).abs()).fold(0.0, f64::max);
        checks.push(Check::new(
            "worst-case floor",
            below == 0 && off <= 1e-9,
            format!("{below} singular values below the floor over {DELTA_SAMPLES} errors, clamped error off by {off:.1e}"),
        ));
    }

    Ok(ValidationReport { solution: sol, objective, checks })
}
