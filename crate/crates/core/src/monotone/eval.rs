use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_lower, herm_inverse, herm_logdet, CMatrix, HermitianPsd};
use crate::model::Objective;
use crate::scalar::Real;

/// Largest Kronecker-product dimension formed explicitly.
pub const MAX_KRON_DIM: usize = 4096;

fn plus_scaled_identity<T: Real>(m: &CMatrix<T>, alpha: T) -> CMatrix<T> {
    m + &CMatrix::identity(m.rows()).scale(alpha)
}

fn kron_checked<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows() * b.rows();
    if n > MAX_KRON_DIM {
        return Err(Error::TooLarge(format!("Kronecker dimension {n} exceeds {MAX_KRON_DIM}")));
    }
    Ok(a.kron(b))
}

/// Value of `obj` at precoder `x` for the effective channel `pi`.
///
/// Every expression is evaluated literally (Kronecker products included), so
/// this is the reference the structured solvers are checked against.
pub fn eval_objective<T: Real>(obj: &Objective<T>, x: &CMatrix<T>, pi: &HermitianPsd<T>) -> Result<T> {
    if x.rows() != pi.dim() {
        return invalid(format!("X has {} rows but Π is {}x{}", x.rows(), pi.dim(), pi.dim()));
    }
    obj.validate(x.cols())?;
    let mut c = x.congruence(pi.as_matrix());
    c.hermitianize();
    let phi_of = |p: &HermitianPsd<T>| p.as_matrix().clone();
    Ok(match obj {
        Objective::Obj1 { phi } => -herm_logdet(&(&c + &phi_of(phi)))?,
        Objective::Obj2 { phi } => herm_inverse(&(&c + &phi_of(phi)))?.trace_re(),
        Objective::Obj3 { a, alpha } => {
            let inv = herm_inverse(&plus_scaled_identity(&c, *alpha))?;
            a.congruence(&inv).trace_re()
        }
        Objective::Obj4 { a, phi, alpha } => {
            let inv = herm_inverse(&plus_scaled_identity(&c, *alpha))?;
            herm_logdet(&(&a.congruence(&inv) + phi.as_matrix()))?
        }
        Objective::Obj5 { f, alpha, .. } => {
            let inv = herm_inverse(&plus_scaled_identity(&c, *alpha))?;
            f.eval(&inv.diag_re())
        }
        Objective::Obj6 { f, alpha, .. } => {
            let inv = herm_inverse(&plus_scaled_identity(&c, *alpha))?;
            let l = cholesky_lower(&inv)?;
            let d: Vec<T> = (0..l.rows()).map(|i| l[(i, i)].norm_sqr()).collect();
            f.eval(&d)
        }
        Objective::Obj7 { a, phi } => -herm_logdet(&(&a.congruence(&c) + phi.as_matrix()))?,
        Objective::Obj8 { a, alpha } => herm_inverse(&plus_scaled_identity(&a.congruence(&c), *alpha))?.trace_re(),
        Objective::Obj9 { a, phi } => {
            let inv = herm_inverse(&(&c + phi.as_matrix()))?;
            a.congruence(&inv).trace_re()
        }
        Objective::Obj10 { phi, sigma1, sigma2 } => {
            let m = &kron_checked(phi.as_matrix(), sigma1.as_matrix())? + &kron_checked(&c, sigma2.as_matrix())?;
            -herm_logdet(&m)?
        }
        Objective::Obj11 { phi, sigma1, sigma2 } => {
            let m = &kron_checked(sigma1.as_matrix(), phi.as_matrix())? + &kron_checked(sigma2.as_matrix(), &c)?;
            -herm_logdet(&m)?
        }
        Objective::Obj12 { phi, sigma1, sigma2 } => {
            let m = &kron_checked(phi.as_matrix(), sigma1.as_matrix())? + &kron_checked(&c, sigma2.as_matrix())?;
            herm_inverse(&m)?.trace_re()
        }
        Objective::Obj13 { phi, sigma1, sigma2 } => {
            let m = &kron_checked(sigma1.as_matrix(), phi.as_matrix())? + &kron_checked(sigma2.as_matrix(), &c)?;
            herm_inverse(&m)?.trace_re()
        }
        Objective::Obj14 { a, sigma1, sigma2 } => {
            let k = kron_checked(&c, sigma2.as_matrix())?;
            let inv = herm_inverse(&plus_scaled_identity(&k, T::one()))?;
            kron_checked(&a.gram_outer(), sigma1.as_matrix())?.trace_product_re(&inv)
        }
        Objective::Obj15 { a, sigma1, sigma2 } => {
            let k = kron_checked(sigma2.as_matrix(), &c)?;
            let inv = herm_inverse(&plus_scaled_identity(&k, T::one()))?;
            kron_checked(sigma1.as_matrix(), &a.gram_outer())?.trace_product_re(&inv)
        }
    })
}
