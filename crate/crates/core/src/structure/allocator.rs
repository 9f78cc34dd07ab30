use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_desc, evd_hermitian, herm_inverse, svd, CMatrix, EigenOrder, HermitianPsd};
use crate::model::Objective;
use crate::scalar::Real;

use super::{Allocator, StreamCost};

/// Builds per-stream costs from the stream gains.
pub type CostBuilder<T> = Arc<dyn Fn(&[T]) -> Vec<StreamCost<T>> + Send + Sync>;

/// Caller choice overriding the allocator derived from the objective.
#[derive(Clone)]
pub enum AllocatorOverride<T: Real> {
    Capacity,
    MseTrace,
    Custom(CostBuilder<T>),
}

impl<T: Real> std::fmt::Debug for AllocatorOverride<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Capacity => f.write_str("Capacity"),
            Self::MseTrace => f.write_str("MseTrace"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// `Some(β)` when `m = β I`.
fn scaled_identity<T: Real>(m: &HermitianPsd<T>) -> Option<T> {
    let a = m.as_matrix();
    let b = a[(0, 0)].re;
    let tol = T::lit(1e-12) * a.max_abs().max(T::one());
    let d = a.max_abs_diff(&CMatrix::identity(a.rows()).scale(b));
    (d <= tol && b > T::zero()).then_some(b)
}

fn ascending<T: Real>(m: &HermitianPsd<T>) -> Result<Vec<T>> {
    Ok(evd_hermitian(m.as_matrix(), EigenOrder::Ascending)?.eigenvalues)
}

fn padded<T: Real>(mut v: Vec<T>, n: usize) -> Vec<T> {
    v.resize(n, T::zero());
    v.truncate(n);
    v
}

/// Squared singular values of `A`, descending, padded to `n`.
fn sq_singulars<T: Real>(a: &CMatrix<T>, n: usize) -> Result<Vec<T>> {
    Ok(padded(svd(a)?.singular.iter().map(|&s| s * s).collect(), n))
}

/// Eigenvalues of `A Φ^-1 A^H`, descending.
fn a_phi_a<T: Real>(a: &CMatrix<T>, phi: &HermitianPsd<T>) -> Result<Vec<T>> {
    let d = a.matmul(&herm_inverse(phi.as_matrix())?).matmul(&a.adjoint());
    Ok(eigenvalues_desc(&d)?.into_iter().map(|x| x.max(T::zero())).collect())
}

/// Shared-basis eigenvalues of commuting `Σ1`, `Σ2`, paired by a common
/// eigenvector set.
fn joint_spectrum<T: Real>(s1: &HermitianPsd<T>, s2: &HermitianPsd<T>) -> Result<(Vec<T>, Vec<T>)> {
    // eigenvectors of Σ1 + c Σ2 with an irrational c separate ties of either
    let mix = s1.as_matrix() + &s2.as_matrix().scale(T::lit(std::f64::consts::SQRT_2 * 0.618_033_988_749_895));
    let u = evd_hermitian(&mix, EigenOrder::Descending)?.unitary;
    let d1 = u.congruence(s1.as_matrix()).diag_re();
    let d2 = u.congruence(s2.as_matrix()).diag_re();
    Ok((d1, d2))
}

fn generic<T: Real>(n: usize, f: impl Fn(usize) -> StreamCost<T>) -> Allocator<T> {
    Allocator::Generic((0..n).map(f).collect())
}

/// Allocator for `obj` on streams with the given (descending) gains, plus
/// the gains the allocator should see.
///
/// Capacity and MSE objectives with `Φ = β I` map to the closed forms.
/// Other families get separable costs with the eigenvalues of `C` taken in
/// the order of the gains; Obj5, Obj6, Obj8 and Obj9 need an override.
pub fn derive_allocator<T: Real>(
    obj: &Objective<T>,
    gains: &[T],
    over: Option<&AllocatorOverride<T>>,
) -> Result<(Allocator<T>, Vec<T>)> {
    let n = gains.len();
    if let Some(o) = over {
        return Ok(match o {
            AllocatorOverride::Capacity => (Allocator::Capacity, gains.to_vec()),
            AllocatorOverride::MseTrace => (Allocator::MseTrace, gains.to_vec()),
            AllocatorOverride::Custom(build) => (Allocator::Generic(build(gains)), gains.to_vec()),
        });
    }
    let g = gains.to_vec();
    let scaled = |beta: T| gains.iter().map(|&x| x / beta).collect::<Vec<_>>();
    Ok(match obj {
        Objective::Obj1 { phi } => match scaled_identity(phi) {
            Some(b) => (Allocator::Capacity, scaled(b)),
            None => {
                let f = padded(ascending(phi)?, n);
                let a = generic(n, |i| {
                    let (l, fi) = (g[i], f[i]);
                    StreamCost::new(move |p: T| -(fi + l * p).ln(), move |p: T| -l / (fi + l * p))
                });
                (a, g)
            }
        },
        Objective::Obj2 { phi } => match scaled_identity(phi) {
            Some(b) => (Allocator::MseTrace, scaled(b)),
            None => {
                let f = padded(ascending(phi)?, n);
                let a = generic(n, |i| {
                    let (l, fi) = (g[i], f[i]);
                    StreamCost::new(move |p: T| T::one() / (fi + l * p), move |p: T| -l / ((fi + l * p) * (fi + l * p)))
                });
                (a, g)
            }
        },
        Objective::Obj3 { a, alpha } => {
            let w = sq_singulars(a, n)?;
            let al = *alpha;
            let a = generic(n, |i| {
                let (l, wi) = (g[i], w[i]);
                StreamCost::new(move |p: T| wi / (l * p + al), move |p: T| -wi * l / ((l * p + al) * (l * p + al)))
            });
            (a, g)
        }
        Objective::Obj4 { a, phi, alpha } => {
            let d = padded(a_phi_a(a, phi)?, n);
            let al = *alpha;
            let a = generic(n, |i| {
                let (l, di) = (g[i], d[i]);
                // log(1 + d / (λp + α))
                StreamCost::new(
                    move |p: T| (T::one() + di / (l * p + al)).ln(),
                    move |p: T| {
                        let x = l * p + al;
                        -di * l / (x * (x + di))
                    },
                )
            });
            (a, g)
        }
        Objective::Obj7 { a, phi } => {
            let d = padded(a_phi_a(a, phi)?, n);
            let a = generic(n, |i| {
                let (l, di) = (g[i], d[i]);
                StreamCost::new(move |p: T| -(T::one() + di * l * p).ln(), move |p: T| -di * l / (T::one() + di * l * p))
            });
            (a, g)
        }
        Objective::Obj10 { phi, sigma1, sigma2 }
        | Objective::Obj11 { phi, sigma1, sigma2 }
        | Objective::Obj12 { phi, sigma1, sigma2 }
        | Objective::Obj13 { phi, sigma1, sigma2 } => {
            let f = padded(ascending(phi)?, n);
            let (s1, s2) = joint_spectrum(sigma1, sigma2)?;
            let log_form = matches!(obj, Objective::Obj10 { .. } | Objective::Obj11 { .. });
            let a = generic(n, |i| {
                let (l, fi) = (g[i], f[i]);
                let (s1, s2) = (s1.clone(), s2.clone());
                let (t1, t2) = (s1.clone(), s2.clone());
                if log_form {
                    StreamCost::new(
                        move |p: T| -s1.iter().zip(&s2).map(|(&a, &b)| (fi * a + l * p * b).ln()).sum::<T>(),
                        move |p: T| -t1.iter().zip(&t2).map(|(&a, &b)| l * b / (fi * a + l * p * b)).sum::<T>(),
                    )
                } else {
                    StreamCost::new(
                        move |p: T| s1.iter().zip(&s2).map(|(&a, &b)| T::one() / (fi * a + l * p * b)).sum::<T>(),
                        move |p: T| {
                            -t1.iter()
                                .zip(&t2)
                                .map(|(&a, &b)| {
                                    let x = fi * a + l * p * b;
                                    l * b / (x * x)
                                })
                                .sum::<T>()
                        },
                    )
                }
            });
            (a, g)
        }
        Objective::Obj14 { a, sigma1, sigma2 } | Objective::Obj15 { a, sigma1, sigma2 } => {
            let w = sq_singulars(a, n)?;
            let (s1, s2) = joint_spectrum(sigma1, sigma2)?;
            let a = generic(n, |i| {
                let (l, wi) = (g[i], w[i]);
                let (s1, s2) = (s1.clone(), s2.clone());
                let (t1, t2) = (s1.clone(), s2.clone());
                StreamCost::new(
                    move |p: T| s1.iter().zip(&s2).map(|(&a, &b)| wi * a / (T::one() + l * p * b)).sum::<T>(),
                    move |p: T| {
                        -t1.iter()
                            .zip(&t2)
                            .map(|(&a, &b)| {
                                let x = T::one() + l * p * b;
                                wi * a * l * b / (x * x)
                            })
                            .sum::<T>()
                    },
                )
            });
            (a, g)
        }
        Objective::Obj5 { .. } | Objective::Obj6 { .. } | Objective::Obj8 { .. } | Objective::Obj9 { .. } => {
            return Err(Error::Unsupported(format!(
                "{} has no built-in power allocation; supply an allocator override",
                obj.label()
            )))
        }
    })
}
