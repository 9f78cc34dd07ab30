use crate::linalg::CMatrix;
use crate::scalar::Real;

/// Solver bookkeeping attached to a design.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T: Real> {
    /// Water level of the final allocation.
    pub water_level: T,
    /// Complementary-slackness (or allocation KKT) residual.
    pub kkt_residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// The design maximizes a lower bound rather than the true objective.
    pub suboptimal: bool,
    /// `qx` is the high-SNR approximation (Obj8, Obj9).
    pub approximate_qx: bool,
    /// Worst-case design whose bound is known to be tight.
    pub tight: bool,
}

impl<T: Real> Default for Diagnostics<T> {
    fn default() -> Self {
        Self {
            water_level: T::zero(),
            kkt_residual: T::zero(),
            iterations: 0,
            converged: true,
            suboptimal: false,
            approximate_qx: false,
            tight: true,
        }
    }
}

/// Factored precoder `X = f * qx` with `f = rotation * diag(sqrt(powers))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution<T: Real> {
    pub f: CMatrix<T>,
    pub qx: CMatrix<T>,
    pub rotation: CMatrix<T>,
    pub powers: Vec<T>,
    /// Weighting factors `α_i` of a multiple-constraint design.
    pub weights: Vec<T>,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> PrecoderSolution<T> {
    pub fn x(&self) -> CMatrix<T> {
        self.f.matmul(&self.qx)
    }
}
