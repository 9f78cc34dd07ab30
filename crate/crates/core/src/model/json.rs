//! JSON form of a [`Scenario`] (schema `matmono-scenario-1`) and of a
//! designed precoder (`matmono-solution-1`).
//!
//! Matrices are nested row arrays of `[re, im]` pairs. Numbers are written in
//! shortest round-trip form, so a save/load cycle is bit-exact.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, HermitianPsd};
use crate::scalar::c;

use super::{ConstraintSet, Objective, PrecoderSolution, Regime, ScalarVectorFn, Scenario, SchurMode};

pub const SCHEMA: &str = "matmono-scenario-1";

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix<f64>) -> MatrixJson {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix<f64>> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if r == 0 || cols == 0 || rows.iter().any(|row| row.len() != cols) {
        return invalid("matrix must be a non-empty rectangular array");
    }
    let data = rows.iter().flatten().map(|&[re, im]| c(re, im)).collect();
    CMatrix::from_vec(r, cols, data)
}

fn psd_from_json(rows: &MatrixJson) -> Result<HermitianPsd<f64>> {
    HermitianPsd::new(matrix_from_json(rows)?)
}

fn psd_to_json(p: &HermitianPsd<f64>) -> MatrixJson {
    matrix_to_json(p.as_matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Perfect,
    Bayes,
    Stochastic,
    WorstCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintJson {
    SumPower { p: f64 },
    PerAntenna { p: Vec<f64> },
    Weighted { omegas: Vec<MatrixJson>, ps: Vec<f64> },
    Shaping { rs: MatrixJson },
    EigenCaps { taus: Vec<f64> },
    Joint { p: f64, tau: f64 },
    Cognitive { hc: MatrixJson, tauc: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveJson {
    Obj1 { phi: MatrixJson },
    Obj2 { phi: MatrixJson },
    Obj3 { a: MatrixJson, alpha: f64 },
    Obj4 { a: MatrixJson, phi: MatrixJson, alpha: f64 },
    /// `f` names a built-in (see [`ScalarVectorFn::builtin`]).
    Obj5 { mode: SchurMode, f: String, alpha: f64 },
    Obj6 { mode: SchurMode, f: String, alpha: f64 },
    Obj7 { a: MatrixJson, phi: MatrixJson },
    Obj8 { a: MatrixJson, alpha: f64 },
    Obj9 { a: MatrixJson, phi: MatrixJson },
    Obj10 { phi: MatrixJson, sigma1: MatrixJson, sigma2: MatrixJson },
    Obj11 { phi: MatrixJson, sigma1: MatrixJson, sigma2: MatrixJson },
    Obj12 { phi: MatrixJson, sigma1: MatrixJson, sigma2: MatrixJson },
    Obj13 { phi: MatrixJson, sigma1: MatrixJson, sigma2: MatrixJson },
    Obj14 { a: MatrixJson, sigma1: MatrixJson, sigma2: MatrixJson },
    Obj15 { a: MatrixJson, sigma1: MatrixJson, sigma2: MatrixJson },
}

/// Wire form of a scenario. `h_hat` holds the true channel in the perfect
/// regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub schema: String,
    pub regime: RegimeKind,
    pub h_hat: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_row: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub noise_var: f64,
    pub streams: usize,
    pub constraints: ConstraintJson,
    pub objective: ObjectiveJson,
}

impl ConstraintJson {
    pub fn from_model(c: &ConstraintSet<f64>) -> Self {
        match c {
            ConstraintSet::SumPower { p } => Self::SumPower { p: *p },
            ConstraintSet::PerAntenna { p } => Self::PerAntenna { p: p.clone() },
            ConstraintSet::Weighted { omegas, ps } => {
                Self::Weighted { omegas: omegas.iter().map(psd_to_json).collect(), ps: ps.clone() }
            }
            ConstraintSet::Shaping { rs } => Self::Shaping { rs: psd_to_json(rs) },
            ConstraintSet::EigenCaps { taus } => Self::EigenCaps { taus: taus.clone() },
            ConstraintSet::Joint { p, tau } => Self::Joint { p: *p, tau: *tau },
            ConstraintSet::Cognitive { hc, tauc } => Self::Cognitive { hc: matrix_to_json(hc), tauc: *tauc },
        }
    }

    pub fn to_model(&self) -> Result<ConstraintSet<f64>> {
        Ok(match self {
            Self::SumPower { p } => ConstraintSet::SumPower { p: *p },
            Self::PerAntenna { p } => ConstraintSet::PerAntenna { p: p.clone() },
            Self::Weighted { omegas, ps } => ConstraintSet::Weighted {
                omegas: omegas.iter().map(psd_from_json).collect::<Result<_>>()?,
                ps: ps.clone(),
            },
            Self::Shaping { rs } => ConstraintSet::Shaping { rs: psd_from_json(rs)? },
            Self::EigenCaps { taus } => ConstraintSet::EigenCaps { taus: taus.clone() },
            Self::Joint { p, tau } => ConstraintSet::Joint { p: *p, tau: *tau },
            Self::Cognitive { hc, tauc } => ConstraintSet::Cognitive { hc: matrix_from_json(hc)?, tauc: *tauc },
        })
    }
}

impl ObjectiveJson {
    /// Fails for Obj5/Obj6 wrapping a function that is not a built-in.
    pub fn from_model(o: &Objective<f64>) -> Result<Self> {
        let m = matrix_to_json;
        let p = psd_to_json;
        let named = |f: &ScalarVectorFn<f64>| -> Result<String> {
            ScalarVectorFn::<f64>::builtin(f.name())
                .map(|_| f.name().to_string())
                .map_err(|_| Error::InvalidInput(format!("function {:?} is not serializable", f.name())))
        };
        Ok(match o {
            Objective::Obj1 { phi } => Self::Obj1 { phi: p(phi) },
            Objective::Obj2 { phi } => Self::Obj2 { phi: p(phi) },
            Objective::Obj3 { a, alpha } => Self::Obj3 { a: m(a), alpha: *alpha },
            Objective::Obj4 { a, phi, alpha } => Self::Obj4 { a: m(a), phi: p(phi), alpha: *alpha },
            Objective::Obj5 { mode, f, alpha } => Self::Obj5 { mode: *mode, f: named(f)?, alpha: *alpha },
            Objective::Obj6 { mode, f, alpha } => Self::Obj6 { mode: *mode, f: named(f)?, alpha: *alpha },
            Objective::Obj7 { a, phi } => Self::Obj7 { a: m(a), phi: p(phi) },
            Objective::Obj8 { a, alpha } => Self::Obj8 { a: m(a), alpha: *alpha },
            Objective::Obj9 { a, phi } => Self::Obj9 { a: m(a), phi: p(phi) },
            Objective::Obj10 { phi, sigma1, sigma2 } => {
                Self::Obj10 { phi: p(phi), sigma1: p(sigma1), sigma2: p(sigma2) }
            }
            Objective::Obj11 { phi, sigma1, sigma2 } => {
                Self::Obj11 { phi: p(phi), sigma1: p(sigma1), sigma2: p(sigma2) }
            }
            Objective::Obj12 { phi, sigma1, sigma2 } => {
                Self::Obj12 { phi: p(phi), sigma1: p(sigma1), sigma2: p(sigma2) }
            }
            Objective::Obj13 { phi, sigma1, sigma2 } => {
                Self::Obj13 { phi: p(phi), sigma1: p(sigma1), sigma2: p(sigma2) }
            }
            Objective::Obj14 { a, sigma1, sigma2 } => Self::Obj14 { a: m(a), sigma1: p(sigma1), sigma2: p(sigma2) },
            Objective::Obj15 { a, sigma1, sigma2 } => Self::Obj15 { a: m(a), sigma1: p(sigma1), sigma2: p(sigma2) },
        })
    }

    pub fn to_model(&self) -> Result<Objective<f64>> {
        let m = matrix_from_json;
        let p = psd_from_json;
        Ok(match self {
            Self::Obj1 { phi } => Objective::Obj1 { phi: p(phi)? },
            Self::Obj2 { phi } => Objective::Obj2 { phi: p(phi)? },
            Self::Obj3 { a, alpha } => Objective::Obj3 { a: m(a)?, alpha: *alpha },
            Self::Obj4 { a, phi, alpha } => Objective::Obj4 { a: m(a)?, phi: p(phi)?, alpha: *alpha },
            Self::Obj5 { mode, f, alpha } => {
                Objective::Obj5 { mode: *mode, f: ScalarVectorFn::builtin(f)?, alpha: *alpha }
            }
            Self::Obj6 { mode, f, alpha } => {
                Objective::Obj6 { mode: *mode, f: ScalarVectorFn::builtin(f)?, alpha: *alpha }
            }
            Self::Obj7 { a, phi } => Objective::Obj7 { a: m(a)?, phi: p(phi)? },
            Self::Obj8 { a, alpha } => Objective::Obj8 { a: m(a)?, alpha: *alpha },
            Self::Obj9 { a, phi } => Objective::Obj9 { a: m(a)?, phi: p(phi)? },
            Self::Obj10 { phi, sigma1, sigma2 } => {
                Objective::Obj10 { phi: p(phi)?, sigma1: p(sigma1)?, sigma2: p(sigma2)? }
            }
            Self::Obj11 { phi, sigma1, sigma2 } => {
                Objective::Obj11 { phi: p(phi)?, sigma1: p(sigma1)?, sigma2: p(sigma2)? }
            }
            Self::Obj12 { phi, sigma1, sigma2 } => {
                Objective::Obj12 { phi: p(phi)?, sigma1: p(sigma1)?, sigma2: p(sigma2)? }
            }
            Self::Obj13 { phi, sigma1, sigma2 } => {
                Objective::Obj13 { phi: p(phi)?, sigma1: p(sigma1)?, sigma2: p(sigma2)? }
            }
            Self::Obj14 { a, sigma1, sigma2 } => {
                Objective::Obj14 { a: m(a)?, sigma1: p(sigma1)?, sigma2: p(sigma2)? }
            }
            Self::Obj15 { a, sigma1, sigma2 } => {
                Objective::Obj15 { a: m(a)?, sigma1: p(sigma1)?, sigma2: p(sigma2)? }
            }
        })
    }
}

impl ScenarioJson {
    pub fn from_model(s: &Scenario<f64>) -> Result<Self> {
        let (regime, psi, sigma_row, gamma) = match &s.regime {
            Regime::Perfect { .. } => (RegimeKind::Perfect, None, None, None),
            Regime::Bayes { psi, .. } => (RegimeKind::Bayes, Some(psd_to_json(psi)), None, None),
            Regime::Stochastic { sigma_row, psi_col, .. } => {
                (RegimeKind::Stochastic, Some(psd_to_json(psi_col)), Some(psd_to_json(sigma_row)), None)
            }
            Regime::WorstCase { gamma, .. } => (RegimeKind::WorstCase, None, None, Some(*gamma)),
        };
        Ok(Self {
            schema: SCHEMA.to_string(),
            regime,
            h_hat: matrix_to_json(s.regime.h_hat()),
            psi,
            sigma_row,
            gamma,
            noise_var: s.noise_var,
            streams: s.streams,
            constraints: ConstraintJson::from_model(&s.constraints),
            objective: ObjectiveJson::from_model(&s.objective)?,
        })
    }

    /// Converts and validates.
    pub fn to_model(&self) -> Result<Scenario<f64>> {
        if self.schema != SCHEMA {
            return invalid(format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema));
        }
        let h_hat = matrix_from_json(&self.h_hat)?;
        let need = |m: &Option<MatrixJson>, name: &str| -> Result<HermitianPsd<f64>> {
            match m {
                Some(m) => psd_from_json(m),
                None => invalid(format!("regime {:?} needs {name}", self.regime)),
            }
        };
        let regime = match self.regime {
            RegimeKind::Perfect => Regime::Perfect { h: h_hat },
            RegimeKind::Bayes => Regime::Bayes { h_hat, psi: need(&self.psi, "psi")? },
            RegimeKind::Stochastic => Regime::Stochastic {
                h_hat,
                sigma_row: need(&self.sigma_row, "sigma_row")?,
                psi_col: need(&self.psi, "psi")?,
            },
            RegimeKind::WorstCase => match self.gamma {
                Some(gamma) => Regime::WorstCase { h_hat, gamma },
                None => return invalid("regime worst_case needs gamma"),
            },
        };
        let s = Scenario {
            regime,
            noise_var: self.noise_var,
            streams: self.streams,
            constraints: self.constraints.to_model()?,
            objective: self.objective.to_model()?,
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn scenario_to_json(s: &Scenario<f64>) -> Result<String> {
    let dto = ScenarioJson::from_model(s)?;
    serde_json::to_string_pretty(&dto).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn scenario_from_json(text: &str) -> Result<Scenario<f64>> {
    let dto: ScenarioJson = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    dto.to_model()
}

pub const SOLUTION_SCHEMA: &str = "matmono-solution-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub water_level: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub suboptimal: bool,
    pub approximate_qx: bool,
    pub tight: bool,
}

/// Wire form of a [`PrecoderSolution`] together with the objective value it
/// attains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionJson {
    pub schema: String,
    pub objective_value: f64,
    pub x: MatrixJson,
    pub f: MatrixJson,
    pub qx: MatrixJson,
    pub rotation: MatrixJson,
    pub powers: Vec<f64>,
    pub weights: Vec<f64>,
    pub diagnostics: DiagnosticsJson,
}

impl SolutionJson {
    pub fn from_model(sol: &PrecoderSolution<f64>, objective_value: f64) -> Self {
        let d = &sol.diagnostics;
        Self {
            schema: SOLUTION_SCHEMA.to_string(),
            objective_value,
            x: matrix_to_json(&sol.x()),
            f: matrix_to_json(&sol.f),
            qx: matrix_to_json(&sol.qx),
            rotation: matrix_to_json(&sol.rotation),
            powers: sol.powers.clone(),
            weights: sol.weights.clone(),
            diagnostics: DiagnosticsJson {
                water_level: d.water_level,
                kkt_residual: d.kkt_residual,
                iterations: d.iterations,
                converged: d.converged,
                suboptimal: d.suboptimal,
                approximate_qx: d.approximate_qx,
                tight: d.tight,
            },
        }
    }
}

pub fn solution_to_json(sol: &PrecoderSolution<f64>, objective_value: f64) -> Result<String> {
    serde_json::to_string_pretty(&SolutionJson::from_model(sol, objective_value)).map_err(|e| Error::InvalidInput(e.to_string()))
}
