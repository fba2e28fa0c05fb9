//! Small dense-linear-algebra helpers shared by the bodies, randomness and
//! log-concave modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalue floor below which a covariance is treated as rank deficient.
pub const EIG_FLOOR: f64 = 1e-10;

/// Symmetric inverse square root `S^{-1/2}` of a covariance matrix, together
/// with `S^{1/2}`. Fails if any eigenvalue is at or below the floor.
pub fn whitening_from_cov(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = cov.nrows();
    let mut sym = cov.clone();
    // Enforce exact symmetry before the eigensolver.
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = m;
            sym[(j, i)] = m;
        }
    }
    let eig = sym.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig <= EIG_FLOOR {
        return Err(Error::RankDeficient { min_eig });
    }
    let v = &eig.eigenvectors;
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()));
    let w = v * inv_sqrt * v.transpose();
    let w_inv = v * sqrt * v.transpose();
    Ok((w, w_inv))
}

/// Max-abs entry of `A^T A - I`; the orthonormality residual of a frame.
pub fn orthonormality_residual(frame: &DMatrix<f64>) -> f64 {
    let g = frame.transpose() * frame;
    let k = g.nrows();
    let mut r: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((g[(i, j)] - target).abs());
        }
    }
    r
}

/// Deterministic orthonormal basis of the orthogonal complement of the column
/// span of `frame` (n x l, orthonormal columns), built by Gram-Schmidt over the
/// standard basis.
pub fn complement_frame(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let n = frame.nrows();
    let l = frame.ncols();
    let mut cols: Vec<DVector<f64>> = (0..l).map(|j| frame.column(j).into_owned()).collect();
    let mut complement: Vec<DVector<f64>> = Vec::with_capacity(n - l);
    for i in 0..n {
        if complement.len() == n - l {
            break;
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        // Re-orthogonalize once; plain Gram-Schmidt loses digits.
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            cols.push(v.clone());
            complement.push(v);
        }
    }
    assert_eq!(complement.len(), n - l, "complement construction failed");
    DMatrix::from_columns(&complement)
}

/// Spearman rank correlation of two equal-length slices.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..xs.len() {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx).powi(2);
        dy += (ry[i] - my).powi(2);
    }
    num / (dx * dy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitening_inverts_scaling() {
        let cov = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let (w, w_inv) = whitening_from_cov(&cov).unwrap();
        let id = &w * &cov * &w;
        for i in 0..2 {
            for j in 0..2 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - t).abs() < 1e-12);
            }
        }
        let prod = &w * &w_inv;
        assert!((prod[(0, 0)] - 1.0).abs() < 1e-12 && prod[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            whitening_from_cov(&cov),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let frame = DMatrix::from_row_slice(3, 1, &[1.0 / 3f64.sqrt(); 3]);
        let c = complement_frame(&frame);
        assert_eq!(c.ncols(), 2);
        assert!(orthonormality_residual(&c) < 1e-12);
        let cross = frame.transpose() * &c;
        assert!(cross.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn spearman_monotone() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let inc = [10.0, 20.0, 25.0, 80.0];
        let dec = [5.0, 4.0, 3.0, 1.0];
        assert!((spearman(&xs, &inc) - 1.0).abs() < 1e-12);
        assert!((spearman(&xs, &dec) + 1.0).abs() < 1e-12);
    }
}
