use super::{digest_vec, OracleMethod, OracleReport};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Largest number of grid points a search may visit.
pub const GRID_POINT_LIMIT: f64 = 2e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridGoal {
    /// `-Σ ln(1 + g_i p_i)`.
    Capacity,
    /// `Σ 1 / (1 + g_i p_i)`.
    MseTrace,
}

fn cost<T: Real>(goal: GridGoal, gains: &[T], p: &[T]) -> T {
    gains
        .iter()
        .zip(p)
        .map(|(&g, &x)| match goal {
            GridGoal::Capacity => -(T::one() + g * x).ln(),
            GridGoal::MseTrace => T::one() / (T::one() + g * x),
        })
        .sum()
}

/// Exhaustive search over `p_i ∈ {0, h, 2h, ...}` for all but the last
/// stream, which takes whatever budget is left (up to its cap). Returns the
/// report and the best allocation.
pub fn grid_search_allocation<T: Real>(
    gains: &[T],
    budget: T,
    caps: Option<&[T]>,
    goal: GridGoal,
    resolution: T,
) -> Result<(OracleReport<T>, Vec<T>)> {
    let n = gains.len();
    if n == 0 || !(budget > T::zero()) || !(resolution > T::zero()) {
        return invalid("need gains, a positive budget and a positive resolution");
    }
    if gains.iter().any(|g| !(*g >= T::zero())) {
        return invalid("gains must be nonnegative");
    }
    let caps: Vec<T> = match caps {
        Some(c) if c.len() != n => return invalid("one cap per stream"),
        Some(c) => c.to_vec(),
        None => vec![T::infinity(); n],
    };
    let steps = (budget / resolution).floor().as_f64() as usize;
    if n > 3 || ((steps + 1) as f64).powi(n as i32 - 1) > GRID_POINT_LIMIT {
        return Err(Error::TooLarge(format!("{n} streams at {} steps each", steps + 1)));
    }
    let mut best: Option<(T, Vec<T>)> = None;
    let mut visited = 0usize;
    let mut p = vec![T::zero(); n];
    let mut idx = vec![0usize; n.saturating_sub(1)];
    loop {
        let mut spent = T::zero();
        let mut ok = true;
        for (i, &k) in idx.iter().enumerate() {
            p[i] = T::from_usize(k).unwrap() * resolution;
            if p[i] > caps[i] {
                ok = false;
            }
            spent = spent + p[i];
        }
        if ok && spent <= budget {
            p[n - 1] = (budget - spent).min(caps[n - 1]);
            visited += 1;
            let v = cost(goal, gains, &p);
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p.clone()));
            }
        }
        // odometer over the first n - 1 streams
        let mut carry = true;
        for k in idx.iter_mut() {
            if !carry {
                break;
            }
            *k += 1;
            carry = *k > steps;
            if carry {
                *k = 0;
            }
        }
        if carry {
            break;
        }
    }
    let (v, p) = best.ok_or_else(|| Error::Infeasible("no grid point respects the caps".into()))?;
    let report = OracleReport { best_objective: v, best_point_digest: digest_vec(&p), samples: visited, method: OracleMethod::GridSearch };
    Ok((report, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let (_, p) = grid_search_allocation(&[2.0f64, 1.0], 1.0, None, GridGoal::Capacity, 1e-3).unwrap();
        assert!((p[0] - 0.75).abs() <= 1e-3 && (p[1] - 0.25).abs() <= 1e-3);
        let (_, p) = grid_search_allocation(&[1.0f64, 1.0], 2.0, None, GridGoal::Capacity, 1e-3).unwrap();
        assert!((p[0] - 1.0).abs() <= 1e-3 && (p[1] - 1.0).abs() <= 1e-3);
        let (_, p) = grid_search_allocation(&[2.0f64, 1.0], 1.0, Some(&[0.5, 0.5]), GridGoal::Capacity, 1e-3).unwrap();
        assert!((p[0] - 0.5).abs() <= 1e-3 && (p[1] - 0.5).abs() <= 1e-3);
        let (r, p) = grid_search_allocation(&[4.0, 1.0, 9.0], 1.0, None, GridGoal::MseTrace, 1e-3).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(r.method, OracleMethod::GridSearch);
    }

    #[test]
    fn guards() {
        assert!(matches!(
            grid_search_allocation(&[1.0; 4], 1.0, None, GridGoal::Capacity, 1e-3),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            grid_search_allocation(&[1.0; 3], 1.0, None, GridGoal::Capacity, 1e-5),
            Err(Error::TooLarge(_))
        ));
        assert!(grid_search_allocation(&[1.0], 0.0, None, GridGoal::Capacity, 1e-3).is_err());
    }
}
