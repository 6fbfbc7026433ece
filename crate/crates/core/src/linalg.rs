//! Small dense helpers shared by the criteria, the BLUP and the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{DesignError, Result};

/// Matrices whose reciprocal condition number falls below this are treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

fn norm_one(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reciprocal condition number in the 1-norm, computed from an explicit inverse.
pub fn rcond_from_inverse(a: &DMatrix<f64>, inv: &DMatrix<f64>) -> f64 {
    let denom = norm_one(a) * norm_one(inv);
    if denom.is_finite() && denom > 0.0 {
        1.0 / denom
    } else {
        0.0
    }
}

/// Inverse of a symmetric positive (semi)definite matrix.
///
/// Fails with [`DesignError::SingularCriterion`] naming `name` when the Cholesky
/// factorisation breaks down or the 1-norm reciprocal condition number is below
/// [`RCOND_THRESHOLD`].
pub fn spd_inverse(a: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    checked_cholesky_inverse(a, name)
}

/// Like [`spd_inverse`], but the condition test is applied to the diagonally
/// equilibrated matrix `S A S`, `S = diag(a_ii^-1/2)`.
///
/// Used for penalised matrices `M + diag(delta)` where a huge penalty makes the
/// plain condition number tiny although the inverse is perfectly accurate.
pub fn spd_inverse_equilibrated(a: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let d = a[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(DesignError::SingularCriterion {
                matrix: name.to_string(),
                rcond: 0.0,
            });
        }
        scale.push(d.sqrt().recip());
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * scale[i] * scale[j]);
    let inv = checked_cholesky_inverse(&scaled, name)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        inv[(i, j)] * scale[i] * scale[j]
    }))
}

fn checked_cholesky_inverse(a: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let singular = |rcond| DesignError::SingularCriterion {
        matrix: name.to_string(),
        rcond,
    };
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let chol = a.clone().cholesky().ok_or_else(|| singular(0.0))?;
    let inv = chol.inverse();
    let rcond = rcond_from_inverse(a, &inv);
    if !(rcond > RCOND_THRESHOLD) {
        return Err(singular(rcond));
    }
    Ok(inv)
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Principal sub-block on the given (sorted) index set.
pub fn principal_block(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Symmetrise in place, averaging the two triangles.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Pairwise (cascade) summation of equally shaped vectors.
pub fn pairwise_sum(parts: &[DVector<f64>]) -> Option<DVector<f64>> {
    match parts.len() {
        0 => None,
        1 => Some(parts[0].clone()),
        len => {
            let (lo, hi) = parts.split_at(len / 2);
            let a = pairwise_sum(lo)?;
            let b = pairwise_sum(hi)?;
            Some(a + b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_well_conditioned_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let inv = spd_inverse(&a, "A").unwrap();
        let id = &a * &inv;
        assert!((id - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn rank_one_is_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        match spd_inverse(&a, "M(xi)") {
            Err(DesignError::SingularCriterion { matrix, .. }) => assert_eq!(matrix, "M(xi)"),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn nearly_singular_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(spd_inverse(&a, "A").is_err());
    }

    #[test]
    fn equilibration_still_detects_rank_deficiency() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 1.0]);
        assert!(spd_inverse_equilibrated(&a, "A").is_err());
    }

    #[test]
    fn diagonal_penalty_is_not_ill_conditioning() {
        let a = DMatrix::from_row_slice(2, 2, &[1e13, 0.5, 0.5, 0.5]);
        assert!(spd_inverse(&a, "A").is_err());
        let inv = spd_inverse_equilibrated(&a, "A").unwrap();
        assert!(((&a * &inv) - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let parts: Vec<_> = (0..7).map(|i| DVector::from_element(3, i as f64)).collect();
        assert_eq!(
            pairwise_sum(&parts).unwrap(),
            DVector::from_element(3, 21.0)
        );
        assert!(pairwise_sum(&[]).is_none());
    }
}
