use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::{CMatrix, HermitianPsd, Tolerances};
use crate::scalar::Real;

/// Schur class declared for the function inside `Obj5` / `Obj6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchurMode {
    AddConvex,
    AddConcave,
    MultConvex,
    MultConcave,
}

type VecFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Scalar function of a real vector with a declared monotonicity flag.
#[derive(Clone)]
pub struct ScalarVectorFn<T: Real> {
    name: String,
    increasing: bool,
    f: VecFn<T>,
}

impl<T: Real> fmt::Debug for ScalarVectorFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarVectorFn").field("name", &self.name).field("increasing", &self.increasing).finish()
    }
}

impl<T: Real> PartialEq for ScalarVectorFn<T> {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.increasing == other.increasing
    }
}

impl<T: Real> ScalarVectorFn<T> {
    /// Wraps a caller function declared increasing in every coordinate.
    pub fn increasing(name: impl Into<String>, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self { name: name.into(), increasing: true, f: Arc::new(f) }
    }

    /// Wraps a function without a monotonicity declaration; objectives reject it.
    pub fn undeclared(name: impl Into<String>, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self { name: name.into(), increasing: false, f: Arc::new(f) }
    }

    /// Named built-ins, all increasing:
    /// `max`, `min`, `sum`, `sum_sq`, `sum_exp`, `sum_sqrt`, `neg_sum_inv`.
    ///
    /// `max`, `sum_sq`, `sum_exp` are Schur-convex; `min`, `sum_sqrt` are
    /// Schur-concave; `max`, `sum` are multiplicatively Schur-convex;
    /// `min`, `neg_sum_inv` are multiplicatively Schur-concave.
    pub fn builtin(name: &str) -> Result<Self> {
        let f: VecFn<T> = match name {
            "max" => Arc::new(|x: &[T]| x.iter().copied().fold(T::neg_infinity(), T::max)),
            "min" => Arc::new(|x: &[T]| x.iter().copied().fold(T::infinity(), T::min)),
            "sum" => Arc::new(|x: &[T]| x.iter().copied().sum()),
            "sum_sq" => Arc::new(|x: &[T]| x.iter().map(|&v| v * v).sum()),
            "sum_exp" => Arc::new(|x: &[T]| x.iter().map(|v| v.exp()).sum()),
            "sum_sqrt" => Arc::new(|x: &[T]| x.iter().map(|v| v.max(T::zero()).sqrt()).sum()),
            "neg_sum_inv" => Arc::new(|x: &[T]| -x.iter().map(|&v| T::one() / v).sum::<T>()),
            _ => return invalid(format!("no built-in function {name:?}")),
        };
        Ok(Self { name: name.into(), increasing: true, f })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_declared_increasing(&self) -> bool {
        self.increasing
    }

    pub fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }

    /// Probes monotonicity with `probes` random single-coordinate bumps on
    /// positive vectors of length `dim`.
    pub fn check_increasing(&self, dim: usize, probes: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..probes).all(|_| {
            let x: Vec<T> = (0..dim).map(|_| T::lit(rng.random_range(0.1..4.0))).collect();
            let i = rng.random_range(0..dim);
            let mut y = x.clone();
            y[i] = y[i] + T::lit(rng.random_range(1e-3..1.0));
            self.eval(&y) >= self.eval(&x) - T::lit(1e-12) * self.eval(&x).abs().max(T::one())
        })
    }
}

/// Objective families, all minimized over the precoder `X`.
///
/// With `C = X^H Π X`:
/// - `Obj1`: `-log|C + Φ|`
/// - `Obj2`: `Tr((C + Φ)^-1)`
/// - `Obj3`: `Tr(A^H (C + αI)^-1 A)`
/// - `Obj4`: `log|A^H (C + αI)^-1 A + Φ|`
/// - `Obj5`: `f(diag((C + αI)^-1))`, `f` additively Schur-convex or -concave
/// - `Obj6`: `f(diag(L)^2)` with `(C + αI)^-1 = L L^H`, `f` multiplicatively
///   Schur-convex or -concave
/// - `Obj7`: `-log|A^H C A + Φ|`
/// - `Obj8`: `Tr((A^H C A + αI)^-1)`
/// - `Obj9`: `Tr(A^H (C + Φ)^-1 A)`
/// - `Obj10`: `-log|Φ ⊗ Σ1 + C ⊗ Σ2|`, `Obj11`: `-log|Σ1 ⊗ Φ + Σ2 ⊗ C|`
/// - `Obj12`: `Tr((Φ ⊗ Σ1 + C ⊗ Σ2)^-1)`, `Obj13`: `Tr((Σ1 ⊗ Φ + Σ2 ⊗ C)^-1)`
/// - `Obj14`: `Tr((A A^H ⊗ Σ1)(I + C ⊗ Σ2)^-1)`, `Obj15`: `Tr((Σ1 ⊗ A A^H)(I + Σ2 ⊗ C)^-1)`
#[derive(Debug, Clone, PartialEq)]
pub enum Objective<T: Real> {
    Obj1 { phi: HermitianPsd<T> },
    Obj2 { phi: HermitianPsd<T> },
    Obj3 { a: CMatrix<T>, alpha: T },
    Obj4 { a: CMatrix<T>, phi: HermitianPsd<T>, alpha: T },
    Obj5 { mode: SchurMode, f: ScalarVectorFn<T>, alpha: T },
    Obj6 { mode: SchurMode, f: ScalarVectorFn<T>, alpha: T },
    Obj7 { a: CMatrix<T>, phi: HermitianPsd<T> },
    Obj8 { a: CMatrix<T>, alpha: T },
    Obj9 { a: CMatrix<T>, phi: HermitianPsd<T> },
    Obj10 { phi: HermitianPsd<T>, sigma1: HermitianPsd<T>, sigma2: HermitianPsd<T> },
    Obj11 { phi: HermitianPsd<T>, sigma1: HermitianPsd<T>, sigma2: HermitianPsd<T> },
    Obj12 { phi: HermitianPsd<T>, sigma1: HermitianPsd<T>, sigma2: HermitianPsd<T> },
    Obj13 { phi: HermitianPsd<T>, sigma1: HermitianPsd<T>, sigma2: HermitianPsd<T> },
    Obj14 { a: CMatrix<T>, sigma1: HermitianPsd<T>, sigma2: HermitianPsd<T> },
    Obj15 { a: CMatrix<T>, sigma1: HermitianPsd<T>, sigma2: HermitianPsd<T> },
}

impl<T: Real> Objective<T> {
    /// Sum-rate objective with `Φ = I`.
    pub fn capacity(streams: usize) -> Self {
        Self::Obj1 { phi: HermitianPsd::identity(streams) }
    }

    /// Sum-MSE objective with `Φ = I`.
    pub fn sum_mse(streams: usize) -> Self {
        Self::Obj2 { phi: HermitianPsd::identity(streams) }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Obj1 { .. } => "obj1",
            Self::Obj2 { .. } => "obj2",
            Self::Obj3 { .. } => "obj3",
            Self::Obj4 { .. } => "obj4",
            Self::Obj5 { .. } => "obj5",
            Self::Obj6 { .. } => "obj6",
            Self::Obj7 { .. } => "obj7",
            Self::Obj8 { .. } => "obj8",
            Self::Obj9 { .. } => "obj9",
            Self::Obj10 { .. } => "obj10",
            Self::Obj11 { .. } => "obj11",
            Self::Obj12 { .. } => "obj12",
            Self::Obj13 { .. } => "obj13",
            Self::Obj14 { .. } => "obj14",
            Self::Obj15 { .. } => "obj15",
        }
    }

    /// Checks payload shapes against `m`, the column count of `X`.
    pub fn validate(&self, m: usize) -> Result<()> {
        let tol = Tolerances::for_scalar::<T>();
        let dim = |name: &str, p: &HermitianPsd<T>, n: usize| -> Result<()> {
            if p.dim() != n {
                return invalid(format!("{name} must be {n}x{n}, got {}x{}", p.dim(), p.dim()));
            }
            Ok(())
        };
        let pos = |alpha: T| -> Result<()> {
            if !(alpha > T::zero()) || !alpha.is_finite() {
                return invalid("alpha must be positive");
            }
            Ok(())
        };
        let rows = |a: &CMatrix<T>| -> Result<()> {
            if a.rows() != m {
                return invalid(format!("A must have {m} rows, got {}", a.rows()));
            }
            Ok(())
        };
        let commute = |s1: &HermitianPsd<T>, s2: &HermitianPsd<T>| -> Result<()> {
            if s1.dim() != s2.dim() {
                return invalid("Σ1 and Σ2 dimensions differ");
            }
            let a = s1.as_matrix().matmul(s2.as_matrix());
            let b = s2.as_matrix().matmul(s1.as_matrix());
            let scale = s1.as_matrix().max_abs().max(T::one()) * s2.as_matrix().max_abs().max(T::one());
            if a.max_abs_diff(&b) > T::lit(tol.herm * 100.0) * scale {
                return invalid("Σ1 and Σ2 must share an eigenbasis");
            }
            Ok(())
        };
        let func = |f: &ScalarVectorFn<T>, mode: SchurMode, allowed: [SchurMode; 2]| -> Result<()> {
            if !allowed.contains(&mode) {
                return invalid(format!("Schur mode {mode:?} not valid here"));
            }
            if !f.is_declared_increasing() {
                return invalid(format!("function {} is not declared increasing", f.name()));
            }
            Ok(())
        };
        let pd = |p: &HermitianPsd<T>| -> Result<()> {
            let v = crate::linalg::eigenvalues_desc(p.as_matrix())?;
            let lmax = v.first().copied().unwrap_or(T::zero());
            if !(v.last().copied().unwrap_or(T::zero()) > T::lit(tol.rank) * lmax) {
                return invalid("Φ must be positive definite");
            }
            Ok(())
        };
        match self {
            Self::Obj1 { phi } | Self::Obj2 { phi } => dim("Φ", phi, m),
            Self::Obj3 { a, alpha } | Self::Obj8 { a, alpha } => {
                rows(a)?;
                pos(*alpha)
            }
            Self::Obj4 { a, phi, alpha } => {
                rows(a)?;
                dim("Φ", phi, a.cols())?;
                pd(phi)?;
                pos(*alpha)
            }
            Self::Obj5 { mode, f, alpha } => {
                func(f, *mode, [SchurMode::AddConvex, SchurMode::AddConcave])?;
                pos(*alpha)
            }
            Self::Obj6 { mode, f, alpha } => {
                func(f, *mode, [SchurMode::MultConvex, SchurMode::MultConcave])?;
                pos(*alpha)
            }
            Self::Obj7 { a, phi } => {
                rows(a)?;
                dim("Φ", phi, a.cols())?;
                pd(phi)
            }
            Self::Obj9 { a, phi } => {
                rows(a)?;
                dim("Φ", phi, m)
            }
            Self::Obj10 { phi, sigma1, sigma2 }
            | Self::Obj11 { phi, sigma1, sigma2 }
            | Self::Obj12 { phi, sigma1, sigma2 }
            | Self::Obj13 { phi, sigma1, sigma2 } => {
                dim("Φ", phi, m)?;
                commute(sigma1, sigma2)
            }
            Self::Obj14 { a, sigma1, sigma2 } | Self::Obj15 { a, sigma1, sigma2 } => {
                rows(a)?;
                commute(sigma1, sigma2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_increasing() {
        for name in ["max", "min", "sum", "sum_sq", "sum_exp", "sum_sqrt", "neg_sum_inv"] {
            let f = ScalarVectorFn::<f64>::builtin(name).unwrap();
            assert!(f.check_increasing(4, 100, 1), "{name}");
        }
        assert!(ScalarVectorFn::<f64>::builtin("median").is_err());
    }

    #[test]
    fn decreasing_function_is_caught() {
        let f = ScalarVectorFn::<f64>::increasing("neg", |x| -x.iter().sum::<f64>());
        assert!(!f.check_increasing(3, 100, 2));
    }

    #[test]
    fn validation_catches_mismatches() {
        let o = Objective::<f64>::capacity(2);
        assert!(o.validate(2).is_ok());
        assert!(o.validate(3).is_err());
        let f = ScalarVectorFn::builtin("max").unwrap();
        assert!(Objective::Obj5 { mode: SchurMode::AddConvex, f: f.clone(), alpha: 0.0 }.validate(2).is_err());
        assert!(Objective::Obj6 { mode: SchurMode::AddConvex, f: f.clone(), alpha: 1.0 }.validate(2).is_err());
        let g = ScalarVectorFn::undeclared("g", |x: &[f64]| x[0]);
        assert!(Objective::Obj5 { mode: SchurMode::AddConvex, f: g, alpha: 1.0 }.validate(2).is_err());
        let s1 = HermitianPsd::from_diag(&[1.0, 2.0]).unwrap();
        let s2 = HermitianPsd::new(CMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap()).unwrap();
        let phi = HermitianPsd::identity(2);
        assert!(Objective::Obj10 { phi, sigma1: s1, sigma2: s2 }.validate(2).is_err());
        let a = CMatrix::identity(2);
        let singular = HermitianPsd::from_diag(&[1.0, 0.0]).unwrap();
        assert!(Objective::Obj7 { a, phi: singular }.validate(2).is_err());
    }
}
