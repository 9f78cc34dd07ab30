//! Objective evaluation, the optimal inner unitary `Q_X`, and the eigenvalue
//! inequalities and majorization tests both rest on.

mod eval;
mod inequality;
mod majorization;
mod qx;

pub use eval::{eval_objective, MAX_KRON_DIM};
pub use inequality::{check_inequality, InequalityReport};
pub use majorization::{majorizes, MajorizationMode};
pub use qx::{optimal_qx, QxSolution};
