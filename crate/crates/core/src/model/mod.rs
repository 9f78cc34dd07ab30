//! Problem vocabulary: objectives, power constraints, channel knowledge
//! regimes and the factored precoder.

mod constraint;
pub mod json;
mod objective;
mod scenario;
mod solution;

pub use constraint::{
    constraint_satisfied, left_unitary_invariance_check, right_unitary_invariance_check, ConstraintCheck,
    ConstraintSet, PowerConstraint,
};
pub use objective::{Objective, ScalarVectorFn, SchurMode};
pub use scenario::{Regime, Scenario};
pub use solution::{Diagnostics, PrecoderSolution};
