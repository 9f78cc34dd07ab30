//! Outer-factor solvers: a rotation times a diagonal power loading, with
//! the loading found by water-filling and, for several weighted
//! constraints, the weights found by a sub-gradient loop.

mod allocator;
mod solvers;
mod waterfill;

pub use allocator::{derive_allocator, AllocatorOverride, CostBuilder};
pub(crate) use solvers::split_columns;
pub use solvers::{
    assemble, solve_constraints, solve_joint, solve_shaping, solve_weighted, Design, SubgradientSchedule,
};
pub use waterfill::{waterfill, Allocation, AllocationProblem, Allocator, StreamCost};
