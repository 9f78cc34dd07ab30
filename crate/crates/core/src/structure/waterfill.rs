use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::linalg::Tolerances;
use crate::scalar::Real;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Convex, nonincreasing cost of one stream as a function of its power.
#[derive(Clone)]
pub struct StreamCost<T: Real> {
    cost: ScalarFn<T>,
    slope: ScalarFn<T>,
}

impl<T: Real> fmt::Debug for StreamCost<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StreamCost")
    }
}

impl<T: Real> StreamCost<T> {
    /// `cost(p)` together with its derivative `slope(p)`.
    pub fn new(cost: impl Fn(T) -> T + Send + Sync + 'static, slope: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { cost: Arc::new(cost), slope: Arc::new(slope) }
    }

    pub fn cost(&self, p: T) -> T {
        (self.cost)(p)
    }

    pub fn slope(&self, p: T) -> T {
        (self.slope)(p)
    }

    /// Marginal utility `-cost'(p)`.
    fn marginal(&self, p: T) -> T {
        -(self.slope)(p)
    }
}

/// Per-stream utility model of the allocation.
#[derive(Debug, Clone)]
pub enum Allocator<T: Real> {
    /// Maximize `Σ log(1 + λ_i p_i)`.
    Capacity,
    /// Minimize `Σ 1 / (1 + λ_i p_i)`.
    MseTrace,
    /// Minimize `Σ g_i(p_i)`; gains only decide which streams are usable.
    Generic(Vec<StreamCost<T>>),
}

#[derive(Debug, Clone)]
pub struct AllocationProblem<T: Real> {
    /// Descending stream gains.
    pub gains: Vec<T>,
    pub budget: T,
    pub caps: Option<Vec<T>>,
    pub allocator: Allocator<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T: Real> {
    pub powers: Vec<T>,
    /// Water level: `μ` (Capacity), `ν` (MseTrace) or the common marginal
    /// utility (Generic).
    pub mu: T,
    pub kkt_residual: T,
}

impl<T: Real> AllocationProblem<T> {
    pub fn new(gains: Vec<T>, budget: T, allocator: Allocator<T>) -> Self {
        Self { gains, budget, caps: None, allocator }
    }

    pub fn with_caps(mut self, caps: Vec<T>) -> Self {
        self.caps = Some(caps);
        self
    }

    fn cap(&self, i: usize) -> T {
        self.caps.as_ref().map_or(T::infinity(), |c| c[i])
    }

    fn validate(&self) -> Result<()> {
        if !(self.budget > T::zero()) || !self.budget.is_finite() {
            return invalid("budget must be positive");
        }
        let n = self.gains.len();
        if self.gains.iter().any(|g| !(*g >= T::zero()) || !g.is_finite()) {
            return invalid("gains must be finite and nonnegative");
        }
        if self.gains.windows(2).any(|w| w[0] < w[1]) {
            return invalid("gains must be sorted in descending order");
        }
        if let Some(c) = &self.caps {
            if c.len() != n || c.iter().any(|x| !(*x > T::zero())) {
                return invalid("caps must be positive, one per stream");
            }
        }
        if let Allocator::Generic(costs) = &self.allocator {
            if costs.len() != n {
                return invalid("one cost per stream is required");
            }
            let tol = T::lit(1e-9);
            for (i, g) in costs.iter().enumerate() {
                let hi = self.cap(i).min(self.budget);
                let grid: Vec<T> = (0..=16).map(|k| hi * T::lit(k as f64 / 16.0)).collect();
                let s: Vec<T> = grid.iter().map(|&p| g.slope(p)).collect();
                let scale = s.iter().filter(|v| v.is_finite()).fold(T::one(), |m, v| m.max(v.abs()));
                let increasing = s.windows(2).all(|w| w[1] >= w[0] - tol * scale);
                if s.iter().any(|v| v.is_nan() || *v > tol * scale) || !increasing {
                    return invalid(format!("cost {i} is not convex and nonincreasing on [0, {}]", hi.as_f64()));
                }
            }
        }
        Ok(())
    }

    fn marginal(&self, i: usize, p: T) -> T {
        let l = self.gains[i];
        match &self.allocator {
            Allocator::Capacity => l / (T::one() + l * p),
            Allocator::MseTrace => l / ((T::one() + l * p) * (T::one() + l * p)),
            Allocator::Generic(c) => c[i].marginal(p),
        }
    }
}

/// Smallest level in `[0, ∞)` at which the nondecreasing `total` reaches
/// `target`, to relative width `rel`.
fn bisect_level<T: Real>(mut hi: T, target: T, rel: T, total: impl Fn(T) -> T) -> T {
    let mut lo = T::zero();
    let mut guard = 0;
    while total(hi) < target && guard < 2000 {
        lo = hi;
        hi = hi * T::lit(2.0);
        guard += 1;
    }
    for _ in 0..400 {
        let mid = (lo + hi) * T::lit(0.5);
        if total(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel * hi {
            break;
        }
    }
    hi
}

/// Largest `p` in `[0, upper]` with `marginal(p) >= nu` (marginal is
/// nonincreasing).
fn invert_marginal<T: Real>(upper: T, nu: T, rel: T, marginal: impl Fn(T) -> T) -> T {
    if !(marginal(T::zero()) > nu) {
        return T::zero();
    }
    if marginal(upper) >= nu {
        return upper;
    }
    let (mut lo, mut hi) = (T::zero(), upper);
    for _ in 0..400 {
        let mid = (lo + hi) * T::lit(0.5);
        if marginal(mid) >= nu {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel * upper {
            break;
        }
    }
    (lo + hi) * T::lit(0.5)
}

/// Water-filling under a total budget and optional per-stream caps.
pub fn waterfill<T: Real>(prob: &AllocationProblem<T>) -> Result<Allocation<T>> {
    prob.validate()?;
    let tol = Tolerances::for_scalar::<T>();
    let n = prob.gains.len();
    let lmax = prob.gains.first().copied().unwrap_or(T::zero());
    let usable: Vec<bool> = prob.gains.iter().map(|&g| g > T::lit(tol.gain_floor) * lmax && g > T::zero()).collect();
    let active = usable.iter().filter(|&&u| u).count();
    if active == 0 {
        return Ok(Allocation { powers: vec![T::zero(); n], mu: T::zero(), kkt_residual: T::zero() });
    }
    let cap_sum = (0..n).filter(|&i| usable[i]).map(|i| prob.cap(i)).fold(T::zero(), |a, b| a + b);
    let target = prob.budget.min(cap_sum);
    let rel = T::lit(tol.bisection);
    let clamp = |i: usize, p: T| if usable[i] { p.max(T::zero()).min(prob.cap(i)) } else { T::zero() };
    let inv_sum = (0..n).filter(|&i| usable[i]).map(|i| T::one() / prob.gains[i]).fold(T::zero(), |a, b| a + b);
    let count = T::from_usize(active).unwrap();

    let (mut powers, mu) = match &prob.allocator {
        Allocator::Capacity => {
            let at = |mu: T| (0..n).map(|i| clamp(i, mu - T::one() / prob.gains[i])).collect::<Vec<_>>();
            let total = |mu: T| at(mu).into_iter().fold(T::zero(), |a, b| a + b);
            let mu = bisect_level((prob.budget + inv_sum) / count, target, rel, total);
            (at(mu), mu)
        }
        Allocator::MseTrace => {
            let at = |nu: T| {
                (0..n)
                    .map(|i| {
                        let l = prob.gains[i];
                        clamp(i, nu / l.sqrt() - T::one() / l)
                    })
                    .collect::<Vec<_>>()
            };
            let total = |nu: T| at(nu).into_iter().fold(T::zero(), |a, b| a + b);
            let smax = prob.gains.iter().fold(T::zero(), |m, g| m.max(g.sqrt()));
            let nu = bisect_level((prob.budget + inv_sum) * smax / count, target, rel, total);
            (at(nu), nu)
        }
        Allocator::Generic(costs) => {
            // bisect on t = 1/ν so total power is nondecreasing in t
            let at = |t: T| {
                let nu = T::one() / t;
                (0..n)
                    .map(|i| {
                        if !usable[i] {
                            return T::zero();
                        }
                        invert_marginal(prob.cap(i).min(target), nu, rel, |p| costs[i].marginal(p))
                    })
                    .collect::<Vec<_>>()
            };
            let total = |t: T| at(t).into_iter().fold(T::zero(), |a, b| a + b);
            let m0 = (0..n).filter(|&i| usable[i]).map(|i| costs[i].marginal(T::zero())).fold(T::zero(), T::max);
            let start = if m0.is_finite() && m0 > T::zero() { T::one() / m0 } else { T::one() };
            let t = bisect_level(start, target, rel, total);
            (at(t), T::one() / t)
        }
    };

    // remove the bisection residue from the free streams
    let sum = powers.iter().fold(T::zero(), |a, &b| a + b);
    let free: Vec<usize> = (0..n).filter(|&i| powers[i] > T::zero() && powers[i] < prob.cap(i)).collect();
    if !free.is_empty() {
        let shift = (target - sum) / T::from_usize(free.len()).unwrap();
        for &i in &free {
            powers[i] = clamp(i, powers[i] + shift);
        }
    }

    let nu = match prob.allocator {
        Allocator::Capacity => T::one() / mu,
        Allocator::MseTrace => T::one() / (mu * mu),
        Allocator::Generic(_) => mu,
    };
    let mut kkt = T::zero();
    for i in (0..n).filter(|&i| usable[i]) {
        let m = prob.marginal(i, powers[i]);
        let v = if powers[i] >= prob.cap(i) {
            (nu - m).max(T::zero())
        } else if powers[i] > T::zero() {
            (m - nu).abs()
        } else {
            (m - nu).max(T::zero())
        };
        kkt = kkt.max(v / nu);
    }
    let sum = powers.iter().fold(T::zero(), |a, &b| a + b);
    kkt = kkt.max((sum - target).abs() / target);
    Ok(Allocation { powers, mu, kkt_residual: kkt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn capacity_examples() {
        let a = waterfill(&AllocationProblem::new(vec![2.0, 1.0], 1.0, Allocator::Capacity)).unwrap();
        assert!(close(&a.powers, &[0.75, 0.25], 1e-10) && (a.mu - 1.25).abs() < 1e-10);
        let a = waterfill(&AllocationProblem::new(vec![1.0, 1.0], 2.0, Allocator::Capacity)).unwrap();
        assert!(close(&a.powers, &[1.0, 1.0], 1e-10));
        let p = AllocationProblem::new(vec![2.0, 1.0], 1.0, Allocator::Capacity).with_caps(vec![0.5, f64::INFINITY]);
        let a = waterfill(&p).unwrap();
        assert!(close(&a.powers, &[0.5, 0.5], 1e-10));
        assert!(a.kkt_residual < 1e-8);
    }

    #[test]
    fn mse_example() {
        let a = waterfill(&AllocationProblem::new(vec![4.0, 1.0], 1.5, Allocator::MseTrace)).unwrap();
        assert!(close(&a.powers, &[2.0 / 3.0, 5.0 / 6.0], 1e-10));
        assert!((a.mu - 11.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn generic_matches_closed_forms() {
        let gains = vec![3.0, 1.5, 0.2];
        let cap_costs: Vec<StreamCost<f64>> = gains
            .iter()
            .map(|&l: &f64| StreamCost::new(move |p: f64| -(1.0 + l * p).ln(), move |p| -l / (1.0 + l * p)))
            .collect();
        let g = waterfill(&AllocationProblem::new(gains.clone(), 2.0, Allocator::Generic(cap_costs))).unwrap();
        let c = waterfill(&AllocationProblem::new(gains, 2.0, Allocator::Capacity)).unwrap();
        assert!(close(&g.powers, &c.powers, 1e-9));
        assert!(g.kkt_residual < 1e-8);
    }

    #[test]
    fn zero_gain_gets_nothing_and_bad_inputs_fail() {
        let a = waterfill(&AllocationProblem::new(vec![1.0f64, 0.0], 1.0, Allocator::Capacity)).unwrap();
        assert_eq!(a.powers[1], 0.0);
        assert!((a.powers[0] - 1.0).abs() < 1e-12);
        assert!(waterfill(&AllocationProblem::new(vec![1.0], 0.0, Allocator::<f64>::Capacity)).is_err());
        let concave = vec![StreamCost::new(|p: f64| -p * p, |p| -2.0 * p)];
        assert!(waterfill(&AllocationProblem::new(vec![1.0], 1.0, Allocator::Generic(concave))).is_err());
    }

    #[test]
    fn caps_below_budget_fill_every_cap() {
        let p = AllocationProblem::new(vec![2.0, 1.0], 5.0, Allocator::Capacity).with_caps(vec![1.0, 1.0]);
        let a = waterfill(&p).unwrap();
        assert!(close(&a.powers, &[1.0, 1.0], 1e-12));
    }

    proptest! {
        #[test]
        fn kkt_holds(mut gains in proptest::collection::vec(0.01f64..50.0, 1..6), budget in 0.01f64..20.0, mse in any::<bool>()) {
            gains.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let alloc = if mse { Allocator::MseTrace } else { Allocator::Capacity };
            let a = waterfill(&AllocationProblem::new(gains, budget, alloc)).unwrap();
            prop_assert!(a.kkt_residual < 1e-8);
            prop_assert!((a.powers.iter().sum::<f64>() - budget).abs() < 1e-10 * budget.max(1.0));
        }

        #[test]
        fn budget_and_inverse_gain_scaling(mut gains in proptest::collection::vec(0.01f64..50.0, 1..6), budget in 0.01f64..20.0, s in 0.1f64..10.0) {
            gains.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let a = waterfill(&AllocationProblem::new(gains.clone(), budget, Allocator::Capacity)).unwrap();
            let scaled: Vec<f64> = gains.iter().map(|g| g / s).collect();
            let b = waterfill(&AllocationProblem::new(scaled, budget * s, Allocator::Capacity)).unwrap();
            for (x, y) in a.powers.iter().zip(&b.powers) {
                prop_assert!((y - s * x).abs() < 1e-9 * (budget * s).max(1.0));
            }
        }

        #[test]
        fn scaling_budget_with_capacity(mut gains in proptest::collection::vec(0.5f64..5.0, 2..5)) {
            // at high budget every stream is active, and p_i = μ - 1/λ_i
            gains.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let a = waterfill(&AllocationProblem::new(gains.clone(), 40.0, Allocator::Capacity)).unwrap();
            let b = waterfill(&AllocationProblem::new(gains, 80.0, Allocator::Capacity)).unwrap();
            let n = a.powers.len() as f64;
            for (x, y) in a.powers.iter().zip(&b.powers) {
                prop_assert!((y - x - 40.0 / n).abs() < 1e-9);
            }
        }
    }
}
