use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{evd_hermitian, CMatrix, EigenOrder, HermitianPsd};
use crate::model::{ConstraintSet, Objective};
use crate::structure::{Design, SubgradientSchedule};

use super::channel::exponential_correlation;

pub const EXPERIMENT_SCHEMA: &str = "matmono-experiment-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentRegime {
    /// Imperfect CSI at both ends; receivers only know `Ĥ` and `Ψ`.
    Bayes,
    /// Imperfect transmit CSI, receivers know the channel.
    Stochastic,
    /// Spectral-norm bounded error `γ = s ||Ĥ||_2`.
    WorstCase,
    /// Perfect CSI; only used by the oracle comparison.
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    SigmaE2,
    SnrDb,
    SRel,
    None,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            Self::SigmaE2 => "sigma_e2",
            Self::SnrDb => "snr_db",
            Self::SRel => "s_rel",
            Self::None => "none",
        }
    }
}

/// Baselines in CSV order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Designed and scored on the true channel.
    Ideal,
    /// Designed as if `Ĥ` were exact.
    Naive,
    /// Designed for `ΔH = 0`, scored at the worst error.
    Nonrobust,
    /// The robust design matching the regime.
    Proposed,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::Naive => "naive",
            Self::Nonrobust => "nonrobust",
            Self::Proposed => "proposed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintTemplate {
    SumPower,
    /// `Tr(e_i e_i^H F F^H) <= P` for every antenna.
    PerAntenna,
    /// `Tr(F F^H) <= (L - 1) P` and `F F^H ⪯ P I`.
    Joint,
    /// Two weights from the eigen-split of `[Ω]_{ij} = 0.3^{|i-j|}`: the
    /// stronger half of the eigenchannels with budget `0.6 P`, the weaker
    /// half with `0.4 P`.
    TwoGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveTemplate {
    SumMse,
    Capacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub var: SweepVar,
    pub grid: Vec<f64>,
}

fn d_nt() -> usize {
    4
}
fn d_streams() -> usize {
    2
}
fn d_power() -> f64 {
    1.0
}
fn d_snr() -> f64 {
    10.0
}
fn d_sigma_e2() -> f64 {
    0.1
}
fn d_rho() -> f64 {
    0.5
}
fn d_s_rel() -> f64 {
    0.2
}
fn d_step_b() -> f64 {
    1.0
}
fn d_eps_rel() -> f64 {
    1e-4
}
fn d_objective() -> ObjectiveTemplate {
    ObjectiveTemplate::SumMse
}

/// One experiment: fixed parameters, one swept variable, and the baselines
/// to run. The swept value overrides the fixed parameter of the same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub regime: ExperimentRegime,
    #[serde(default = "d_nt")]
    pub nt: usize,
    #[serde(default = "d_nt")]
    pub nr: usize,
    #[serde(default = "d_streams")]
    pub streams: usize,
    /// Per-antenna or total budget `P`, depending on the constraint.
    #[serde(default = "d_power")]
    pub power: f64,
    pub constraints: ConstraintTemplate,
    #[serde(default = "d_objective")]
    pub objective: ObjectiveTemplate,
    /// `P / σ_n²` in dB.
    #[serde(default = "d_snr")]
    pub snr_db: f64,
    #[serde(default = "d_sigma_e2")]
    pub sigma_e2: f64,
    /// Transmit-side error correlation `ρ` in `[Ψ]_{mn} = σ_e² ρ^{|m-n|}`.
    #[serde(default = "d_rho")]
    pub rho: f64,
    /// Relative error bound `s`, `γ = s ||Ĥ||_2`.
    #[serde(default = "d_s_rel")]
    pub s_rel: f64,
    /// Decay `b` of the weighting-loop step `c / (a + k b)`.
    #[serde(default = "d_step_b")]
    pub step_b: f64,
    /// Weighting-loop tolerance relative to each budget, `ε_i = eps_rel P_i`.
    #[serde(default = "d_eps_rel")]
    pub eps_rel: f64,
    pub sweep: Sweep,
    pub trials: usize,
    pub seed: u64,
    pub baselines: Vec<Baseline>,
}

/// Fixed parameters at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub value: f64,
    pub noise_var: f64,
    pub sigma_e2: f64,
    pub s_rel: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != EXPERIMENT_SCHEMA {
            return invalid(format!("unsupported schema {:?}, expected {EXPERIMENT_SCHEMA:?}", self.schema));
        }
        if self.nt == 0 || self.nr == 0 || self.streams == 0 || self.streams > self.nt.min(self.nr) {
            return invalid("need 1 <= L <= min(N_t, N_r)");
        }
        if self.nt > 8 || self.nr > 8 {
            return invalid("at most 8 antennas per side");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.power > 0.0 && self.power.is_finite()) || !self.snr_db.is_finite() {
            return invalid("power must be positive and the SNR finite");
        }
        if !(self.step_b > 0.0 && self.step_b.is_finite()) || !(self.eps_rel > 0.0 && self.eps_rel.is_finite()) {
            return invalid("step_b and eps_rel must be positive");
        }
        if !(0.0..1.0).contains(&self.sigma_e2) || !(self.rho.abs() < 1.0) || !(0.0..=1.0).contains(&self.s_rel) {
            return invalid("need 0 <= σ_e² < 1, |ρ| < 1 and 0 <= s <= 1");
        }
        let g = &self.sweep.grid;
        if g.is_empty() || g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("sweep grid must be nonempty, finite and strictly increasing");
        }
        if self.sweep.var == SweepVar::None && g.len() != 1 {
            return invalid("a sweep over `none` takes a single grid value");
        }
        if self.baselines.is_empty() {
            return invalid("no baselines requested");
        }
        let statistical = matches!(self.regime, ExperimentRegime::Bayes | ExperimentRegime::Stochastic);
        match self.sweep.var {
            SweepVar::SigmaE2 if !statistical => return invalid("σ_e² sweeps need a Bayes or stochastic regime"),
            SweepVar::SRel if self.regime != ExperimentRegime::WorstCase => {
                return invalid("s sweeps need the worst-case regime")
            }
            _ => {}
        }
        for b in &self.baselines {
            let ok = match (self.regime, b) {
                (ExperimentRegime::Perfect, _) => true,
                (_, Baseline::Ideal | Baseline::Proposed) => true,
                (ExperimentRegime::WorstCase, Baseline::Nonrobust) => true,
                (ExperimentRegime::Bayes | ExperimentRegime::Stochastic, Baseline::Naive) => true,
                _ => false,
            };
            if !ok {
                return invalid(format!("baseline {} does not apply to {:?}", b.name(), self.regime));
            }
        }
        if self.constraints == ConstraintTemplate::Joint && self.streams < 2 {
            return invalid("the joint template needs L >= 2");
        }
        for &v in g {
            self.point(v)?;
        }
        Ok(())
    }

    /// Parameters at grid value `v`.
    pub fn point(&self, v: f64) -> Result<Point> {
        let (mut snr_db, mut sigma_e2, mut s_rel) = (self.snr_db, self.sigma_e2, self.s_rel);
        match self.sweep.var {
            SweepVar::SnrDb => snr_db = v,
            SweepVar::SigmaE2 => sigma_e2 = v,
            SweepVar::SRel => s_rel = v,
            SweepVar::None => {}
        }
        if !(0.0..1.0).contains(&sigma_e2) || !(0.0..=1.0).contains(&s_rel) {
            return invalid(format!("grid value {v} out of range"));
        }
        Ok(Point { value: v, noise_var: self.power / 10f64.powf(snr_db / 10.0), sigma_e2, s_rel })
    }

    /// Normalized baselines: sorted, without repeats.
    pub fn baseline_set(&self) -> Vec<Baseline> {
        let mut b = self.baselines.clone();
        b.sort();
        b.dedup();
        b
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet<f64>> {
        let p = self.power;
        Ok(match self.constraints {
            ConstraintTemplate::SumPower => ConstraintSet::SumPower { p },
            ConstraintTemplate::PerAntenna => ConstraintSet::PerAntenna { p: vec![p; self.nt] },
            ConstraintTemplate::Joint => ConstraintSet::Joint { p: (self.streams - 1) as f64 * p, tau: p },
            ConstraintTemplate::TwoGroup => {
                let (omegas, ps) = two_group_weights(self.nt, p)?;
                ConstraintSet::Weighted { omegas, ps }
            }
        })
    }

    /// Design record with this experiment's weighting-loop schedule.
    pub fn design(&self) -> Result<Design<f64>> {
        let (_, ps) = self.constraint_set()?.to_weighted(self.nt).unwrap_or_default();
        let schedule = SubgradientSchedule {
            b: self.step_b,
            eps: ps.iter().map(|p| p * self.eps_rel).collect(),
            ..SubgradientSchedule::default()
        };
        Ok(Design::new(self.streams).with_schedule(schedule))
    }

    pub fn objective_model(&self) -> Objective<f64> {
        match self.objective {
            ObjectiveTemplate::SumMse => Objective::sum_mse(self.streams),
            ObjectiveTemplate::Capacity => Objective::capacity(self.streams),
        }
    }
}

/// `Ω_1`, `Ω_2` from the eigen-split of `[Ω]_{ij} = 0.3^{|i-j|}` (stronger
/// half first), with budgets `0.6 p` and `0.4 p`.
pub fn two_group_weights(n: usize, p: f64) -> Result<(Vec<HermitianPsd<f64>>, Vec<f64>)> {
    if n < 2 {
        return invalid("two groups need at least two antennas");
    }
    let omega = exponential_correlation(n, 0.3, 1.0);
    let e = evd_hermitian(omega.as_matrix(), EigenOrder::Descending)?;
    let half = n.div_ceil(2);
    let part = |idx: std::ops::Range<usize>| {
        let mut m = CMatrix::zeros(n, n);
        for k in idx {
            let u = CMatrix::from_vec(n, 1, e.unitary.col(k)).expect("column shape");
            m = &m + &u.gram_outer().scale(e.eigenvalues[k]);
        }
        HermitianPsd::new_unchecked(m)
    };
    Ok((vec![part(0..half), part(half..n)], vec![0.6 * p, 0.4 * p]))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> ExperimentConfig {
        ExperimentConfig {
            schema: EXPERIMENT_SCHEMA.into(),
            regime: ExperimentRegime::Bayes,
            nt: 4,
            nr: 4,
            streams: 2,
            power: 1.0,
            constraints: ConstraintTemplate::PerAntenna,
            objective: ObjectiveTemplate::SumMse,
            snr_db: 10.0,
            sigma_e2: 0.1,
            rho: 0.5,
            s_rel: 0.2,
            step_b: 1.0,
            eps_rel: 1e-4,
            sweep: Sweep { var: SweepVar::SigmaE2, grid: vec![0.05, 0.1] },
            trials: 10,
            seed: 1,
            baselines: vec![Baseline::Proposed, Baseline::Naive],
        }
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let c = sample();
        assert_eq!(ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        let text = r#"{"schema":"matmono-experiment-1","regime":"worst_case","constraints":"joint",
            "sweep":{"var":"snr_db","grid":[0,10]},"trials":3,"seed":5,"baselines":["nonrobust","ideal"]}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!((c.nt, c.nr, c.streams), (4, 4, 2));
        assert_eq!(c.baseline_set(), vec![Baseline::Ideal, Baseline::Nonrobust]);
        assert!((c.point(10.0).unwrap().noise_var - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = sample();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = sample();
        c.sweep.grid = vec![0.1, 0.05];
        assert!(c.validate().is_err());
        let mut c = sample();
        c.baselines = vec![Baseline::Nonrobust];
        assert!(c.validate().is_err());
        let mut c = sample();
        c.sweep.grid = vec![0.5, 1.0];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"schema":"x"}"#).is_err());
    }

    #[test]
    fn two_group_split() {
        let (o, p) = two_group_weights(4, 1.0).unwrap();
        let sum = &o[0].as_matrix().clone() + o[1].as_matrix();
        assert!(sum.max_abs_diff(exponential_correlation(4, 0.3, 1.0).as_matrix()) < 1e-12);
        assert!(o[0].as_matrix().trace_re() > o[1].as_matrix().trace_re());
        assert_eq!(p, vec![0.6, 0.4]);
    }
}
