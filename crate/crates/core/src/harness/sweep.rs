use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::random::complex_gaussian;
use crate::linalg::{herm_inverse, herm_logdet, spectral_norm, CMatrix, HermitianPsd};
use crate::model::{Regime, Scenario};
use crate::oracle::{projected_gradient_covariance, CovarianceGoal};
use crate::robust::{perfect_pi, solve_scenario};
use crate::structure::solve_constraints;

use super::channel::{gen_channel, splitmix64, trial_seed};
use super::config::{Baseline, ConstraintTemplate, ExperimentConfig, ExperimentRegime, ObjectiveTemplate, Point};
use super::metrics::{bayes_receiver, mean_stderr, receiver_mse, sum_mse, worst_case_mse};

const ORACLE_ITERS: usize = 20_000;

/// One CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_var: &'static str,
    pub value: f64,
    pub baseline: &'static str,
    pub metric: f64,
    pub stderr: f64,
    /// Trials that produced a value.
    pub trials: usize,
    /// Trials whose design or evaluation failed.
    pub failures: usize,
}

/// Per-trial values at one grid point, index-aligned across baselines so
/// that paired differences can be formed. `None` marks a failed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSamples {
    pub value: f64,
    pub samples: BTreeMap<Baseline, Vec<Option<f64>>>,
}

/// Solver failures are recorded and the sweep moves on; malformed input is not.
fn recordable(e: &Error) -> bool {
    !matches!(e, Error::InvalidInput(_) | Error::Unsupported(_) | Error::TooLarge(_))
}

fn keep(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Ok(None),
        Err(e) if recordable(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Trial<'a> {
    cfg: &'a ExperimentConfig,
    pt: Point,
    seed: u64,
}

impl Trial<'_> {
    fn design(&self, regime: Regime<f64>) -> Result<CMatrix<f64>> {
        let s = Scenario {
            regime,
            noise_var: self.pt.noise_var,
            streams: self.cfg.streams,
            constraints: self.cfg.constraint_set()?,
            objective: self.cfg.objective_model(),
        };
        Ok(solve_scenario(&s, &self.cfg.design()?, false)?.x())
    }

    fn statistical(&self, rng: &mut ChaCha8Rng, bayes: bool) -> Result<BTreeMap<Baseline, Result<f64>>> {
        let cfg = self.cfg;
        let d = gen_channel::<f64, _>(cfg.nr, cfg.nt, self.pt.sigma_e2, cfg.rho, rng)?;
        let s2 = self.pt.noise_var;
        let mut out = BTreeMap::new();
        for base in cfg.baseline_set() {
            let v = match base {
                Baseline::Ideal => self.design(Regime::Perfect { h: d.h_true.clone() }).and_then(|x| sum_mse(&d.h_true, &x, s2)),
                Baseline::Naive | Baseline::Proposed => {
                    let regime = if base == Baseline::Naive {
                        Regime::Perfect { h: d.h_hat.clone() }
                    } else if bayes {
                        Regime::Bayes { h_hat: d.h_hat.clone(), psi: d.psi.clone() }
                    } else {
                        Regime::Stochastic {
                            h_hat: d.h_hat.clone(),
                            sigma_row: HermitianPsd::identity(cfg.nr),
                            psi_col: d.psi.clone(),
                        }
                    };
                    self.design(regime).and_then(|x| {
                        if bayes {
                            let g = bayes_receiver(&d.h_hat, &d.psi, &x, s2)?;
                            receiver_mse(&d.h_true, &x, &g, s2)
                        } else {
                            sum_mse(&d.h_true, &x, s2)
                        }
                    })
                }
                Baseline::Nonrobust => return invalid("nonrobust needs the worst-case regime"),
            };
            out.insert(base, v);
        }
        Ok(out)
    }

    fn worst(&self, rng: &mut ChaCha8Rng) -> Result<BTreeMap<Baseline, Result<f64>>> {
        let cfg = self.cfg;
        let h = complex_gaussian::<f64, _>(cfg.nr, cfg.nt, rng);
        let gamma = self.pt.s_rel * spectral_norm(&h)?;
        let s2 = self.pt.noise_var;
        let ascent_seed = splitmix64(self.seed ^ 0x5eed);
        let perfect = self.design(Regime::Perfect { h: h.clone() });
        let mut out = BTreeMap::new();
        for base in cfg.baseline_set() {
            let v = match base {
                Baseline::Ideal => perfect.clone().and_then(|x| sum_mse(&h, &x, s2)),
                Baseline::Nonrobust => perfect.clone().and_then(|x| Ok(worst_case_mse(&h, gamma, &x, s2, ascent_seed)?.0)),
                Baseline::Proposed => self
                    .design(Regime::WorstCase { h_hat: h.clone(), gamma })
                    .and_then(|x| Ok(worst_case_mse(&h, gamma, &x, s2, ascent_seed)?.0)),
                Baseline::Naive => return invalid("naive needs a Bayes or stochastic regime"),
            };
            out.insert(base, v);
        }
        Ok(out)
    }

    fn perfect(&self, rng: &mut ChaCha8Rng) -> Result<BTreeMap<Baseline, Result<f64>>> {
        let h = complex_gaussian::<f64, _>(self.cfg.nr, self.cfg.nt, rng);
        let v = self.design(Regime::Perfect { h: h.clone() }).and_then(|x| sum_mse(&h, &x, self.pt.noise_var));
        Ok(self.cfg.baseline_set().into_iter().map(|b| (b, v.clone())).collect())
    }
}

/// Runs every trial of one grid value.
pub fn run_point(cfg: &ExperimentConfig, value: f64) -> Result<PointSamples> {
    cfg.validate()?;
    let pt = cfg.point(value)?;
    let bases = cfg.baseline_set();
    let mut samples: BTreeMap<Baseline, Vec<Option<f64>>> =
        bases.iter().map(|&b| (b, Vec::with_capacity(cfg.trials))).collect();
    for t in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trial = Trial { cfg, pt, seed };
        let vals = match cfg.regime {
            ExperimentRegime::Bayes => trial.statistical(&mut rng, true)?,
            ExperimentRegime::Stochastic => trial.statistical(&mut rng, false)?,
            ExperimentRegime::WorstCase => trial.worst(&mut rng)?,
            ExperimentRegime::Perfect => trial.perfect(&mut rng)?,
        };
        for (b, v) in vals {
            samples.get_mut(&b).expect("baseline present").push(keep(v)?);
        }
    }
    Ok(PointSamples { value, samples })
}

fn summarize(var: &'static str, value: f64, label: &'static str, xs: &[Option<f64>]) -> SweepRow {
    let ok: Vec<f64> = xs.iter().flatten().copied().collect();
    let (metric, stderr) = mean_stderr(&ok);
    SweepRow { sweep_var: var, value, baseline: label, metric, stderr, trials: ok.len(), failures: xs.len() - ok.len() }
}

/// Mean metric and standard error for every grid value and baseline, in
/// grid-major, baseline-alphabetical order. The metric is the Monte-Carlo
/// sum MSE (Bayes, stochastic) or the worst-case sum MSE.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let var = cfg.sweep.var.name();
    let mut rows = Vec::new();
    for &v in &cfg.sweep.grid {
        let p = run_point(cfg, v)?;
        for (b, xs) in &p.samples {
            rows.push(summarize(var, v, b.name(), xs));
        }
    }
    Ok(rows)
}

/// Per-trial objective values of the structured design and of the
/// projected-gradient covariance oracle at one grid value, with perfect CSI.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint {
    pub value: f64,
    pub proposed: Vec<Option<f64>>,
    pub oracle: Vec<Option<f64>>,
    /// `(proposed - oracle) / |oracle|` for MSE, `(oracle - proposed) / |oracle|`
    /// for capacity: positive when the oracle did better.
    pub rel_gap: Vec<Option<f64>>,
}

fn natural(goal: ObjectiveTemplate, x: &CMatrix<f64>, pi: &HermitianPsd<f64>) -> Result<f64> {
    let m = &x.adjoint().matmul(pi.as_matrix()).matmul(x) + &CMatrix::identity(x.cols());
    match goal {
        ObjectiveTemplate::Capacity => herm_logdet(&m),
        ObjectiveTemplate::SumMse => Ok(herm_inverse(&m)?.trace_re()),
    }
}

pub fn oracle_point(cfg: &ExperimentConfig, value: f64) -> Result<OraclePoint> {
    cfg.validate()?;
    if cfg.streams != cfg.nt {
        return invalid("the covariance oracle needs L = N_t");
    }
    if cfg.constraints == ConstraintTemplate::Joint {
        return invalid("the oracle handles weighted power constraints only");
    }
    let pt = cfg.point(value)?;
    let cons = cfg.constraint_set()?;
    let (omegas, ps) = cons.to_weighted(cfg.nt)?;
    let obj = cfg.objective_model();
    let goal = match cfg.objective {
        ObjectiveTemplate::Capacity => CovarianceGoal::MaxLogDet,
        ObjectiveTemplate::SumMse => CovarianceGoal::MinMseTrace,
    };
    let design = cfg.design()?;
    let mut out = OraclePoint { value, proposed: Vec::new(), oracle: Vec::new(), rel_gap: Vec::new() };
    for t in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = complex_gaussian::<f64, _>(cfg.nr, cfg.nt, &mut rng);
        let pi = perfect_pi(&h, pt.noise_var);
        let prop = keep(
            solve_constraints(&pi, &cons, &obj, &design).and_then(|s| natural(cfg.objective, &s.x(), &pi)),
        )?;
        let h_eff = h.scale(1.0 / pt.noise_var.sqrt());
        let orc = keep(
            projected_gradient_covariance(&h_eff, &omegas, &ps, goal, ORACLE_ITERS, 0.0, splitmix64(seed))
                .map(|o| if o.converged { o.report.best_objective } else { f64::NAN }),
        )?;
        let gap = match (prop, orc) {
            (Some(p), Some(o)) => Some(match cfg.objective {
                ObjectiveTemplate::Capacity => (o - p) / o.abs(),
                ObjectiveTemplate::SumMse => (p - o) / o.abs(),
            }),
            _ => None,
        };
        out.proposed.push(prop);
        out.oracle.push(orc);
        out.rel_gap.push(gap);
    }
    Ok(out)
}

/// Structured design against the covariance oracle: rows `oracle`,
/// `proposed` (mean objective) and `relgap` (mean relative gap) per grid value.
pub fn compare_with_oracle(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let var = cfg.sweep.var.name();
    let mut rows = Vec::new();
    for &v in &cfg.sweep.grid {
        let p = oracle_point(cfg, v)?;
        rows.push(summarize(var, v, "oracle", &p.oracle));
        rows.push(summarize(var, v, "proposed", &p.proposed));
        rows.push(summarize(var, v, "relgap", &p.rel_gap));
    }
    Ok(rows)
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

/// CSV text with a header line, LF line endings and 17 significant digits.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("sweep_var,value,baseline,metric,stderr,trials\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.sweep_var, num(r.value), r.baseline, num(r.metric), num(r.stderr), r.trials);
    }
    s
}
