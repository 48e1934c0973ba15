//! Orthogonal projections onto column spaces and canonical angles.

use crate::error::{Error, Result};
use crate::linalg::svd::svd;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Orthonormal basis for the column space of a full-column-rank matrix.
#[derive(Clone, Debug)]
pub struct ColumnSpace<T = f64> {
    basis: Matrix<T>,
}

impl<T: Scalar> ColumnSpace<T> {
    /// Fails with `RankDeficient` when `σ_min ≤ tol · σ_max`.
    ///
    /// A basis with zero columns spans the trivial subspace.
    pub fn new(basis: &Matrix<T>) -> Result<Self> {
        Self::named(basis, "basis")
    }

    pub(crate) fn named(basis: &Matrix<T>, what: &'static str) -> Result<Self> {
        let f = svd(basis)?;
        if let (Some(&smax), Some(&smin)) = (f.sigma.first(), f.sigma.last()) {
            if basis.cols() > basis.rows()
                || smin <= T::rank_tolerance() * smax
                || smax == T::zero()
            {
                return Err(Error::RankDeficient {
                    what,
                    sigma_min: smin.to_f64_lossy(),
                    sigma_max: smax.to_f64_lossy(),
                });
            }
        }
        Ok(Self { basis: f.u })
    }

    /// Orthonormal columns spanning the space.
    pub fn orthonormal_basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    fn check_rows(&self, target: &Matrix<T>) -> Result<()> {
        if target.rows() != self.basis.rows() {
            return Err(Error::ShapeMismatch {
                op: "projection",
                left: self.basis.shape(),
                right: target.shape(),
            });
        }
        Ok(())
    }

    /// `P(t) = Q Qᵀ t`.
    pub fn project(&self, target: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_rows(target)?;
        Ok(&self.basis * &self.basis.t_matmul(target))
    }

    /// `P⊥(t) = t − P(t)`.
    pub fn project_complement(&self, target: &Matrix<T>) -> Result<Matrix<T>> {
        Ok(target - &self.project(target)?)
    }

    /// The m×m projector `Q Qᵀ`.
    pub fn projector(&self) -> Matrix<T> {
        self.basis.matmul_t(&self.basis)
    }
}

pub fn project_onto_colspace<T: Scalar>(
    basis: &Matrix<T>,
    target: &Matrix<T>,
) -> Result<Matrix<T>> {
    ColumnSpace::new(basis)?.project(target)
}

pub fn project_onto_complement<T: Scalar>(
    basis: &Matrix<T>,
    target: &Matrix<T>,
) -> Result<Matrix<T>> {
    ColumnSpace::new(basis)?.project_complement(target)
}

/// Sines of the canonical angles between `span(b)` and `span(b_tilde)`,
/// non-increasing.
///
/// Computed as the singular values of `P⊥_b Q̃`, which keeps small angles
/// accurate (the cosine route loses half the digits there).
pub fn canonical_angle_sines<T: Scalar>(b: &Matrix<T>, b_tilde: &Matrix<T>) -> Result<Vec<T>> {
    if b.cols() != b_tilde.cols() || b.rows() != b_tilde.rows() {
        return Err(Error::ShapeMismatch {
            op: "canonical_angle_sines",
            left: b.shape(),
            right: b_tilde.shape(),
        });
    }
    let s = ColumnSpace::new(b)?;
    let st = ColumnSpace::new(b_tilde)?;
    let residual = s.project_complement(st.orthonormal_basis())?;
    let sines = svd(&residual)?.sigma;
    Ok(sines
        .into_iter()
        .map(|x| x.max(T::zero()).min(T::one()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{gaussian, rel_err};

    fn e(n: usize, i: usize) -> Matrix {
        Matrix::from_fn(n, 1, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn projecting_basis_onto_itself() {
        let b = gaussian(6, 2, 1);
        assert!(rel_err(&project_onto_colspace(&b, &b).unwrap(), &b) < 1e-12);
    }

    #[test]
    fn unit_vector_examples() {
        let t = Matrix::from_rows(&[[2.0], [0.0], [0.0]]).unwrap();
        let p = project_onto_colspace(&e(3, 0), &t).unwrap();
        assert!(rel_err(&p, &t) < 1e-15);
        let c = project_onto_complement(&e(3, 0), &e(3, 1)).unwrap();
        assert!(rel_err(&c, &e(3, 1)) < 1e-15);
        let z = project_onto_complement(&e(3, 0), &t).unwrap();
        assert!(z.frobenius_norm() < 1e-15);
    }

    #[test]
    fn decomposition_orthogonality_idempotence() {
        let b = gaussian(6, 2, 2);
        let t = gaussian(6, 3, 3);
        let cs = ColumnSpace::new(&b).unwrap();
        let p = cs.project(&t).unwrap();
        let c = cs.project_complement(&t).unwrap();
        assert!(rel_err(&(&p + &c), &t) < 1e-10);
        assert!(b.t_matmul(&c).frobenius_norm() < 1e-10 * t.frobenius_norm());
        assert!(rel_err(&cs.project(&p).unwrap(), &p) < 1e-10);
    }

    #[test]
    fn rank_deficient_basis_is_rejected() {
        let c = gaussian(5, 1, 4);
        let b = c.hstack(&c.scale(3.0)).unwrap();
        assert!(matches!(
            project_onto_colspace(&b, &c),
            Err(Error::RankDeficient { .. })
        ));
        assert!(ColumnSpace::new(&Matrix::<f64>::zeros(4, 1)).is_err());
    }

    #[test]
    fn empty_basis_is_trivial_subspace() {
        let t = gaussian(4, 2, 5);
        let b = Matrix::zeros(4, 0);
        assert_eq!(project_onto_complement(&b, &t).unwrap(), t);
        assert_eq!(project_onto_colspace(&b, &t).unwrap(), Matrix::zeros(4, 2));
    }

    #[test]
    fn canonical_angle_examples() {
        let b = gaussian(7, 3, 6);
        let s = canonical_angle_sines(&b, &b.scale(2.0)).unwrap();
        assert!(s.iter().all(|&x| x < 1e-7));
        assert_eq!(
            canonical_angle_sines(&e(3, 0), &e(3, 1)).unwrap(),
            vec![1.0]
        );
        assert!(canonical_angle_sines(&b, &gaussian(7, 2, 1)).is_err());
    }

    #[test]
    fn sqrt_two_identity() {
        for seed in 0..20 {
            let b = gaussian(8, 3, 100 + seed);
            let bt = &b + &gaussian(8, 3, 200 + seed).scale(0.1);
            let lhs = (&ColumnSpace::new(&b).unwrap().projector()
                - &ColumnSpace::new(&bt).unwrap().projector())
                .frobenius_norm();
            let s = canonical_angle_sines(&b, &bt).unwrap();
            let rhs = 2f64.sqrt() * s.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
