//! Brute-force and convex reference solvers that check the structured
//! designs. Nothing here calls into `structure`, `monotone` or `robust`.

mod covariance;
mod delta;
mod grid;
mod search;

pub use covariance::{projected_gradient_covariance, CovarianceGoal, CovarianceOracle};
pub use delta::sample_delta;
pub use grid::{grid_search_allocation, GridGoal, GRID_POINT_LIMIT};
pub use search::{random_feasible_points, random_feasible_search};

use crate::linalg::CMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    RandomSearch,
    ProjectedGradient,
    GridSearch,
}

/// Best value an oracle found and a fingerprint of the point achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<T: Real> {
    pub best_objective: T,
    pub best_point_digest: u64,
    pub samples: usize,
    pub method: OracleMethod,
}

/// 64-bit FNV-1a over the IEEE bits of the entries, row-major.
pub fn digest<T: Real>(m: &CMatrix<T>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: f64| {
        for b in x.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(m.rows() as f64);
    feed(m.cols() as f64);
    for z in m.data() {
        feed(z.re.as_f64());
        feed(z.im.as_f64());
    }
    h
}

/// Digest of a real vector, used for allocations.
pub fn digest_vec<T: Real>(v: &[T]) -> u64 {
    digest(&CMatrix::from_diag(v))
}
