use crate::error::{invalid, Result};
use crate::linalg::{eigenvalues_desc, herm_inverse, CMatrix, HermitianPsd};
use crate::scalar::Real;

/// Bounds of one of the four eigenvalue inequalities at a matrix pair.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport<T: Real> {
    pub which: u8,
    pub lower: T,
    pub value: T,
    pub upper: T,
    pub left_tight: bool,
    pub right_tight: bool,
}

impl<T: Real> InequalityReport<T> {
    /// `lower <= value <= upper` up to `1e-9 * max(1, |value|)`.
    pub fn holds(&self) -> bool {
        let tol = T::lit(1e-9) * self.value.abs().max(T::one());
        self.lower <= self.value + tol && self.value <= self.upper + tol
    }
}

/// Evaluates inequality `which` for PSD `c`, `d` of equal size `N`, with
/// `λ_i` descending:
///
/// 1. `Σ λ_{N+1-i}(C) λ_i(D) <= Tr(CD) <= Σ λ_i(C) λ_i(D)`
/// 2. `Σ (λ_{N+1-i}(C) + λ_i(D))^-1 <= Tr((C+D)^-1) <= Σ (λ_i(C) + λ_i(D))^-1`
/// 3. `Π (λ_i(C) + λ_i(D)) <= |C+D| <= Π (λ_{N+1-i}(C) + λ_i(D))`
/// 4. `Π (λ_{N+1-i}(C) λ_i(D) + 1) <= |CD+I| <= Π (λ_i(C) λ_i(D) + 1)`
pub fn check_inequality<T: Real>(which: u8, c: &HermitianPsd<T>, d: &HermitianPsd<T>) -> Result<InequalityReport<T>> {
    let n = c.dim();
    if d.dim() != n {
        return invalid("C and D must have the same dimension");
    }
    let lc = eigenvalues_desc(c.as_matrix())?;
    let ld = eigenvalues_desc(d.as_matrix())?;
    let aligned = |op: &dyn Fn(T, T) -> T| (0..n).map(|i| op(lc[i], ld[i])).collect::<Vec<_>>();
    let reversed = |op: &dyn Fn(T, T) -> T| (0..n).map(|i| op(lc[n - 1 - i], ld[i])).collect::<Vec<_>>();
    let sum = |v: Vec<T>| v.into_iter().sum::<T>();
    let prod = |v: Vec<T>| v.into_iter().fold(T::one(), |a, b| a * b);
    let (cm, dm) = (c.as_matrix(), d.as_matrix());
    let (lower, value, upper) = match which {
        1 => (sum(reversed(&|a, b| a * b)), cm.trace_product_re(dm), sum(aligned(&|a, b| a * b))),
        2 => {
            let inv = herm_inverse(&(cm + dm))?;
            let r = |a: T, b: T| T::one() / (a + b);
            (sum(reversed(&r)), inv.trace_re(), sum(aligned(&r)))
        }
        3 => {
            let det = (cm + dm).determinant()?.re;
            (prod(aligned(&|a, b| a + b)), det, prod(reversed(&|a, b| a + b)))
        }
        4 => {
            let det = (&cm.matmul(dm) + &CMatrix::identity(n)).determinant()?.re;
            (prod(reversed(&|a, b| a * b + T::one())), det, prod(aligned(&|a, b| a * b + T::one())))
        }
        _ => return invalid(format!("no matrix inequality {which}")),
    };
    let tol = T::lit(1e-9) * value.abs().max(T::one());
    Ok(InequalityReport {
        which,
        lower,
        value,
        upper,
        left_tight: (value - lower).abs() <= tol,
        right_tight: (value - upper).abs() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> HermitianPsd<f64> {
        HermitianPsd::from_diag(d).unwrap()
    }

    #[test]
    fn examples() {
        let r = check_inequality(1, &diag(&[2.0, 1.0]), &diag(&[3.0, 1.0])).unwrap();
        assert_eq!((r.lower, r.value, r.upper), (5.0, 7.0, 7.0));
        assert!(r.right_tight && !r.left_tight);
        let r = check_inequality(3, &diag(&[1.0, 1.0]), &diag(&[1.0, 1.0])).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12 && (r.lower - 4.0).abs() < 1e-12 && (r.upper - 4.0).abs() < 1e-12);
        let r = check_inequality(4, &diag(&[2.0, 1.0]), &diag(&[3.0, 1.0])).unwrap();
        assert!(r.right_tight && (r.value - 14.0).abs() < 1e-12);
    }

    #[test]
    fn singular_sum_and_bad_index() {
        let z = diag(&[0.0, 0.0]);
        assert!(check_inequality(2, &z, &z).is_err());
        assert!(check_inequality(5, &diag(&[1.0]), &diag(&[1.0])).is_err());
    }
}
