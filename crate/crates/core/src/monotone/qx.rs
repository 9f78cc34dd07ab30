use crate::error::{invalid, Result};
use crate::linalg::{dft_matrix, evd_hermitian, gmd, herm_inverse, svd, CMatrix, EigenOrder, HermitianPsd};
use crate::model::{Objective, SchurMode};
use crate::scalar::Real;

/// Inner unitary `Q_X`, with a flag when it is only a high-SNR approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct QxSolution<T: Real> {
    pub q: CMatrix<T>,
    pub approximate: bool,
}

fn eigvecs<T: Real>(m: &CMatrix<T>, order: EigenOrder) -> Result<CMatrix<T>> {
    Ok(evd_hermitian(m, order)?.unitary)
}

/// Target eigenbasis `V` for `C = Q^H F^H Π F Q`: the optimum puts the
/// i-th largest eigenvalue of `F^H Π F` on the i-th column of `V`.
fn target_basis<T: Real>(obj: &Objective<T>, lambda: &[T]) -> Result<(CMatrix<T>, bool)> {
    let n = lambda.len();
    Ok(match obj {
        Objective::Obj1 { phi }
        | Objective::Obj2 { phi }
        | Objective::Obj10 { phi, .. }
        | Objective::Obj11 { phi, .. }
        | Objective::Obj12 { phi, .. }
        | Objective::Obj13 { phi, .. } => (eigvecs(phi.as_matrix(), EigenOrder::Ascending)?, false),
        Objective::Obj3 { a, .. } | Objective::Obj14 { a, .. } | Objective::Obj15 { a, .. } => (svd(a)?.left, false),
        Objective::Obj8 { a, .. } => {
            // Σ 1/(σ_i² λ_i) pairs the strongest eigenvalues with the weakest
            // directions of A, inside the span of A.
            let s = svd(a)?;
            let k = s.singular.len();
            let idx: Vec<usize> = (0..k).rev().chain(k..n).collect();
            (s.left.select_cols(&idx), true)
        }
        Objective::Obj9 { a, .. } => (svd(a)?.left, true),
        Objective::Obj4 { a, phi, .. } | Objective::Obj7 { a, phi } => {
            let d = a.matmul(&herm_inverse(phi.as_matrix())?).matmul(&a.adjoint());
            (eigvecs(&d, EigenOrder::Descending)?, false)
        }
        Objective::Obj5 { mode, alpha, .. } | Objective::Obj6 { mode, alpha, .. } => match mode {
            SchurMode::AddConvex => (dft_matrix(n), false),
            SchurMode::AddConcave | SchurMode::MultConcave => (CMatrix::identity(n), false),
            SchurMode::MultConvex => {
                // (C + αI)^{-1/2} has singular values s_i; with diag(s) = q r p^H
                // the choice V = p^H makes the Cholesky factor r^H.
                let s: Vec<T> = lambda.iter().map(|&l| T::one() / (l.max(T::zero()) + *alpha).sqrt()).collect();
                (gmd(&s)?.p.adjoint(), false)
            }
        },
    })
}

/// Optimal `Q_X` for `obj` given the outer factor `f`.
pub fn optimal_qx<T: Real>(obj: &Objective<T>, f: &CMatrix<T>, pi: &HermitianPsd<T>) -> Result<QxSolution<T>> {
    if f.rows() != pi.dim() {
        return invalid(format!("F has {} rows but Π is {}x{}", f.rows(), pi.dim(), pi.dim()));
    }
    obj.validate(f.cols())?;
    let mut m = f.congruence(pi.as_matrix());
    m.hermitianize();
    let e = evd_hermitian(&m, EigenOrder::Descending)?;
    let (v, approximate) = target_basis(obj, &e.eigenvalues)?;
    Ok(QxSolution { q: e.unitary.matmul(&v.adjoint()), approximate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky_lower;
    use crate::linalg::random::{complex_gaussian, random_psd, random_unitary};
    use crate::model::ScalarVectorFn;
    use crate::monotone::eval_objective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_f(lambda: &[f64]) -> (CMatrix<f64>, HermitianPsd<f64>) {
        (CMatrix::identity(lambda.len()), HermitianPsd::from_diag(lambda).unwrap())
    }

    #[test]
    fn obj2_pairs_large_gain_with_small_phi() {
        let (f, pi) = diag_f(&[3.0, 1.0]);
        let obj = Objective::Obj2 { phi: HermitianPsd::from_diag(&[1.0, 2.0]).unwrap() };
        let q = optimal_qx(&obj, &f, &pi).unwrap();
        let best = eval_objective(&obj, &f.matmul(&q.q), &pi).unwrap();
        assert!((best - 7.0 / 12.0).abs() < 1e-9);
        let swapped = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(eval_objective(&obj, &f.matmul(&swapped), &pi).unwrap() > best);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let u: CMatrix<f64> = random_unitary(2, &mut rng);
            assert!(eval_objective(&obj, &f.matmul(&u), &pi).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn obj5_max_equalizes_mse_diagonal() {
        let (f, pi) = diag_f(&[3.0, 1.0]);
        // α tiny so (C + αI)^{-1} stays invertible while matching α → 0
        let obj = Objective::Obj5 {
            mode: SchurMode::AddConvex,
            f: ScalarVectorFn::builtin("max").unwrap(),
            alpha: 1e-300,
        };
        let q = optimal_qx(&obj, &f, &pi).unwrap();
        let v = eval_objective(&obj, &f.matmul(&q.q), &pi).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let plain = eval_objective(&obj, &f, &pi).unwrap();
        assert!((plain - 1.0).abs() < 1e-12);
    }

    #[test]
    fn obj1_with_scaled_identity_phi_ignores_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let f: CMatrix<f64> = complex_gaussian(3, 3, &mut rng);
        let pi = HermitianPsd::new_unchecked(random_psd(3, 3, &mut rng));
        let obj = Objective::Obj1 { phi: HermitianPsd::from_diag(&[2.0; 3]).unwrap() };
        let q = optimal_qx(&obj, &f, &pi).unwrap();
        let best = eval_objective(&obj, &f.matmul(&q.q), &pi).unwrap();
        for _ in 0..200 {
            let u: CMatrix<f64> = random_unitary(3, &mut rng);
            assert!((eval_objective(&obj, &f.matmul(&u), &pi).unwrap() - best).abs() < 1e-10);
        }
    }

    #[test]
    fn gmd_rotation_equalizes_cholesky_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for n in 2..=4 {
            let f: CMatrix<f64> = complex_gaussian(n, n, &mut rng);
            let pi = HermitianPsd::new_unchecked(random_psd(n, n, &mut rng));
            let obj = Objective::Obj6 {
                mode: SchurMode::MultConvex,
                f: ScalarVectorFn::builtin("max").unwrap(),
                alpha: 0.5,
            };
            let q = optimal_qx(&obj, &f, &pi).unwrap();
            assert!(q.q.unitarity_defect() < 1e-9);
            let x = f.matmul(&q.q);
            let c = &x.congruence(pi.as_matrix()) + &CMatrix::identity(n).scale(0.5);
            let l = cholesky_lower(&herm_inverse(&c).unwrap()).unwrap();
            let d: Vec<f64> = (0..n).map(|i| l[(i, i)].norm_sqr()).collect();
            let spread = d.iter().cloned().fold(f64::MIN, f64::max) / d.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread - 1.0 < 1e-6, "{d:?}");
        }
    }

    #[test]
    fn high_snr_objectives_are_flagged() {
        let (f, pi) = diag_f(&[3.0, 1.0]);
        let obj = Objective::Obj8 { a: CMatrix::identity(2), alpha: 1.0 };
        assert!(optimal_qx(&obj, &f, &pi).unwrap().approximate);
        assert!(!optimal_qx(&Objective::capacity(2), &f, &pi).unwrap().approximate);
    }
}
