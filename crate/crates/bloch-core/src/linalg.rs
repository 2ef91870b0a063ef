//! Small dense-algebra layer shared by every module.
//!
//! Everything downstream works with `DMatrix<Complex<f64>>`, and the few
//! primitives needed — Hermitian eigendecomposition with a deterministic
//! ordering, operator norms, thin orthonormal bases — are wrapped here so the
//! numerical backend is committed to in exactly one place.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::SpectralError;
use crate::Result;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense complex vector.
pub type CVector = DVector<C64>;

/// Maximum entrywise deviation of `m` from its conjugate transpose.
///
/// Zero for exactly Hermitian matrices; assembly gates and validation checks
/// compare this defect against a tolerance.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Symmetrize in place: `m <- (m + m^H) / 2`.
///
/// Applied after the Hermiticity gate so that the eigensolver always sees an
/// exactly Hermitian matrix; the spectral perturbation is at most half the
/// (already accepted) defect.
pub fn symmetrize(m: &mut CMatrix) {
    let adjoint = m.adjoint();
    *m += adjoint;
    m.scale_mut(0.5);
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in nondecreasing
/// order and eigenvector columns permuted to match.
///
/// Returns an error if the QL iteration fails to converge, which for the
/// matrix sizes in this crate indicates NaN/Inf contamination rather than a
/// hard problem.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(SpectralError::InvalidInput(format!(
            "hermitian_eigen needs a square nonempty matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let decomp = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| {
            SpectralError::NumericalFailure(format!(
                "Hermitian eigensolver did not converge on a {n}x{n} matrix"
            ))
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .expect("eigenvalues of a Hermitian matrix are finite")
    });

    let values = DVector::from_iterator(n, order.iter().map(|&i| decomp.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Largest singular value, computed as the square root of the top eigenvalue
/// of the Gram matrix `m^H m`.
///
/// This routes every norm through the same Hermitian eigensolver instead of a
/// separate SVD, and is exact enough for the matrix sizes used here.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = m.adjoint() * m;
    let (values, _) = hermitian_eigen(&gram)?;
    Ok(values[values.len() - 1].max(0.0).sqrt())
}

/// Thin orthonormal basis of the column space via Householder QR.
///
/// The input must have full column rank (all uses in this crate stack an
/// identity block, which guarantees it).
pub fn thin_orthonormal_basis(m: &CMatrix) -> CMatrix {
    m.clone().qr().q()
}

/// Solve `a x = b` for a square complex system by LU with partial pivoting.
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.clone().lu().solve(b).ok_or_else(|| {
        SpectralError::NumericalFailure("singular linear system in resolvent solve".into())
    })
}

/// Standard complex inner product, conjugate-linear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_eigen_recovers_known_pair_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
        for k in 0..2 {
            let v = vecs.column(k).clone_owned();
            let residual = (&m * &v - v.scale(vals[k])).norm();
            assert!(residual < 1e-12, "residual {residual}");
        }
    }

    #[test]
    fn hermitian_eigen_orders_and_orthonormalizes() {
        // Deterministic pseudo-random Hermitian 8x8.
        let n = 8;
        let mut seedling = 0.3_f64;
        let mut raw = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                seedling = (seedling * 997.0 + 0.123).fract();
                let re = seedling - 0.5;
                seedling = (seedling * 997.0 + 0.123).fract();
                let im = seedling - 0.5;
                raw[(i, j)] = c(re, im);
            }
        }
        let m = (&raw + raw.adjoint()).scale(0.5);
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        for k in 1..n {
            assert!(vals[k] >= vals[k - 1]);
        }
        let gram = vecs.adjoint() * &vecs;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
        for k in 0..n {
            let v = vecs.column(k).clone_owned();
            let residual = (&m * &v - v.scale(vals[k])).norm();
            assert!(residual < 1e-11, "residual {residual}");
        }
    }

    #[test]
    fn operator_norm_matches_hand_cases() {
        let id = CMatrix::identity(3, 3);
        assert_relative_eq!(operator_norm(&id).unwrap(), 1.0, epsilon = 1e-12);

        // Rank-one uv^H has norm |u||v|.
        let u = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let v = CVector::from_vec(vec![c(3.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]);
        let m = &u * v.adjoint();
        assert_relative_eq!(operator_norm(&m).unwrap(), u.norm() * v.norm(), epsilon = 1e-10);
    }

    #[test]
    fn thin_basis_is_orthonormal_and_spans() {
        // Stack [I; A] for a 3x3 A: the Q factor must be 6x3 with Q^H Q = I.
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0), c(0.5, 0.2), c(0.0, -1.0),
                c(0.5, -0.2), c(2.0, 0.0), c(0.3, 0.0),
                c(0.0, 1.0), c(0.3, 0.0), c(-1.0, 0.0),
            ],
        );
        let mut stacked = CMatrix::zeros(6, 3);
        stacked.view_mut((0, 0), (3, 3)).copy_from(&CMatrix::identity(3, 3));
        stacked.view_mut((3, 0), (3, 3)).copy_from(&a);
        let q = thin_orthonormal_basis(&stacked);
        assert_eq!(q.nrows(), 6);
        assert_eq!(q.ncols(), 3);
        let gram = q.adjoint() * &q;
        assert!((gram - CMatrix::identity(3, 3)).norm() < 1e-12);
        // Columns of `stacked` lie in the span of q.
        let projected = &q * (q.adjoint() * &stacked);
        assert!((projected - stacked).norm() < 1e-12);
    }

    #[test]
    fn lu_solve_inverts_small_system() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]);
        let rhs = CMatrix::identity(2, 2);
        let x = lu_solve(&a, &rhs).unwrap();
        assert!(((&a * &x) - CMatrix::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn hermiticity_defect_flags_asymmetry() {
        let mut m = CMatrix::identity(2, 2);
        assert_eq!(hermiticity_defect(&m), 0.0);
        m[(0, 1)] = c(0.0, 1e-6);
        assert!(hermiticity_defect(&m) > 9e-7);
        symmetrize(&mut m);
        assert_eq!(hermiticity_defect(&m), 0.0);
    }
}
