//! Small dense eigenproblems used for the spectral constants.

use faer::prelude::*;
use faer::Side;

use crate::error::{Error, Result};

/// Eigenpairs of the symmetric-definite pencil `S x = lambda B x`.
///
/// Eigenvalues are ascending; eigenvectors are returned as columns and are
/// `B`-orthonormal.
pub fn generalized_symmetric_eigen(s: &[Vec<f64>], b: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = s.len();
    let sm = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (s[i][j] + s[j][i]));
    let bm = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (b[i][j] + b[j][i]));
    let llt = bm
        .llt(Side::Lower)
        .map_err(|_| Error::Config("boundary mass matrix is not positive definite".into()))?;
    let l = llt.L().to_owned();
    let linv = l.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    let c = &linv * &sm * linv.transpose();
    let c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Config(format!("eigensolver failed: {e:?}")))?;
    let vals: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let x = linv.transpose() * eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = order.iter().map(|&k| vals[k]).collect();
    let vecs = order
        .iter()
        .map(|&k| (0..n).map(|i| x[(i, k)]).collect())
        .collect();
    Ok((sorted_vals, vecs))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(s: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = s.len();
    let sm = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (s[i][j] + s[j][i]));
    let mut vals = sm
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Config(format!("eigensolver failed: {e:?}")))?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_with_diagonal_mass() {
        let s = vec![vec![2.0, -1.0], vec![-1.0, 2.0]];
        let b = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (vals, vecs) = generalized_symmetric_eigen(&s, &b).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!((vecs[0][0] - vecs[0][1]).abs() < 1e-14);
        let b2 = vec![vec![4.0, 0.0], vec![0.0, 4.0]];
        let (vals2, vecs2) = generalized_symmetric_eigen(&s, &b2).unwrap();
        assert!((vals2[0] - 0.25).abs() < 1e-14);
        let nrm: f64 = vecs2[0].iter().map(|x| 4.0 * x * x).sum();
        assert!((nrm - 1.0).abs() < 1e-13);
        assert_eq!(symmetric_eigenvalues(&s).unwrap().len(), 2);
    }

    #[test]
    fn indefinite_mass_is_rejected() {
        let s = vec![vec![1.0]];
        assert!(generalized_symmetric_eigen(&s, &[vec![-1.0]]).is_err());
    }
}
