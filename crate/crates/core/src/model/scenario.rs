use crate::error::{invalid, Result};
use crate::linalg::{CMatrix, HermitianPsd};
use crate::scalar::Real;

use super::{ConstraintSet, Objective};

/// Channel-state knowledge available at the transmitter.
///
/// Channels are `N_r x N_t`; the precoder is `N_t x L`.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime<T: Real> {
    Perfect { h: CMatrix<T> },
    /// `H = Ĥ + H_W Ψ^{1/2}` with i.i.d. CN(0, 1) `H_W`.
    Bayes { h_hat: CMatrix<T>, psi: HermitianPsd<T> },
    /// `H = Ĥ + Σ^{1/2} H_W Ψ^{1/2}`.
    Stochastic { h_hat: CMatrix<T>, sigma_row: HermitianPsd<T>, psi_col: HermitianPsd<T> },
    /// `H = Ĥ - ΔH` with `||ΔH||_2 <= γ`.
    WorstCase { h_hat: CMatrix<T>, gamma: T },
}

impl<T: Real> Regime<T> {
    /// The channel matrix the transmitter knows (the estimate, or the true
    /// channel under perfect knowledge).
    pub fn h_hat(&self) -> &CMatrix<T> {
        match self {
            Self::Perfect { h } => h,
            Self::Bayes { h_hat, .. } | Self::Stochastic { h_hat, .. } | Self::WorstCase { h_hat, .. } => h_hat,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Perfect { .. } => "perfect",
            Self::Bayes { .. } => "bayes",
            Self::Stochastic { .. } => "stochastic",
            Self::WorstCase { .. } => "worst_case",
        }
    }
}

/// A complete precoder design problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T: Real> {
    pub regime: Regime<T>,
    pub noise_var: T,
    pub streams: usize,
    pub constraints: ConstraintSet<T>,
    pub objective: Objective<T>,
}

impl<T: Real> Scenario<T> {
    pub fn tx_antennas(&self) -> usize {
        self.regime.h_hat().cols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.regime.h_hat();
        let (nr, nt) = h.shape();
        if nr == 0 || nt == 0 {
            return invalid("channel must be non-empty");
        }
        if h.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("channel has non-finite entries");
        }
        if !(self.noise_var > T::zero()) || !self.noise_var.is_finite() {
            return invalid("noise variance must be positive");
        }
        if self.streams == 0 || self.streams > nr.min(nt) {
            return invalid(format!("streams must lie in 1..={}", nr.min(nt)));
        }
        match &self.regime {
            Regime::Perfect { .. } => {}
            Regime::Bayes { psi, .. } => {
                if psi.dim() != nt {
                    return invalid("Ψ must be N_t x N_t");
                }
            }
            Regime::Stochastic { sigma_row, psi_col, .. } => {
                if sigma_row.dim() != nr || psi_col.dim() != nt {
                    return invalid("Σ must be N_r x N_r and Ψ must be N_t x N_t");
                }
            }
            Regime::WorstCase { gamma, .. } => {
                if !(*gamma >= T::zero()) || !gamma.is_finite() {
                    return invalid("γ must be nonnegative");
                }
            }
        }
        self.constraints.validate()?;
        if let Some(k) = self.constraints.antennas() {
            if k != nt {
                return invalid(format!("constraint is for {k} antennas, channel has {nt}"));
            }
        }
        self.objective.validate(self.streams)
    }
}
