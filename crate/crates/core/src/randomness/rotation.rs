//! Haar-distributed rotations, uniform random subspaces, and the
//! Hilbert-Schmidt sandwich for the geodesic distance on SO(n).

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::streams::stream_rng;
use crate::error::{Error, Result};
use crate::linalg::orthonormality_residual;

/// An element of SO(n): orthogonal with determinant +1.
#[derive(Debug, Clone)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    /// Validates orthogonality to 1e-12 (max-abs of `U^T U - I`) and
    /// determinant +1 to 1e-10.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let res = orthonormality_residual(&matrix);
        if res > 1e-12 {
            return Err(Error::Precondition(format!(
                "orthogonality residual {res:.3e} exceeds 1e-12"
            )));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!(
                "determinant {det} is not +1 within 1e-10"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn compose(&self, other: &Rotation) -> Result<Rotation> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        Rotation::new(&self.matrix * &other.matrix)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// Rotation by `theta` in the (i, j) coordinate plane.
    pub fn plane_rotation(n: usize, i: usize, j: usize, theta: f64) -> Self {
        let mut m = DMatrix::identity(n, n);
        m[(i, i)] = theta.cos();
        m[(j, j)] = theta.cos();
        m[(i, j)] = -theta.sin();
        m[(j, i)] = theta.sin();
        Self { matrix: m }
    }
}

/// An orthonormal l-frame in R^n: a point of the Stiefel manifold representing
/// an element of the Grassmannian G_{n,l}.
#[derive(Debug, Clone)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    pub fn new(frame: DMatrix<f64>) -> Result<Self> {
        let res = orthonormality_residual(&frame);
        if res > 1e-12 {
            return Err(Error::Precondition(format!(
                "frame orthonormality residual {res:.3e} exceeds 1e-12"
            )));
        }
        Ok(Self { frame })
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Span of the first l coordinate axes.
    pub fn coordinate(n: usize, l: usize) -> Self {
        let mut m = DMatrix::zeros(n, l);
        for j in 0..l {
            m[(j, j)] = 1.0;
        }
        Self { frame: m }
    }

    /// Span of a single direction (normalized).
    pub fn from_direction(dir: &[f64]) -> Result<Self> {
        let norm = dir.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Precondition("zero direction".into()));
        }
        let m = DMatrix::from_iterator(dir.len(), 1, dir.iter().map(|t| t / norm));
        Ok(Self { frame: m })
    }

    /// Coordinates of `x` in the frame: `frame^T x`.
    pub fn project_coords(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ambient_dim());
        let v = nalgebra::DVector::from_column_slice(x);
        (self.frame.transpose() * v).as_slice().to_vec()
    }

    /// Embeds frame coordinates back into R^n: `frame * c`.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.dim());
        let v = nalgebra::DVector::from_column_slice(coords);
        (&self.frame * v).as_slice().to_vec()
    }

    /// Image of the subspace under a rotation: the frame `U * F`.
    pub fn rotate(&self, u: &Rotation) -> Result<Subspace> {
        if u.n() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: u.n(),
            });
        }
        Subspace::new(u.matrix() * &self.frame)
    }

    /// Stable id for provenance records: hash of the frame bytes.
    pub fn id(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for v in self.frame.iter() {
            h.update(v.to_le_bytes());
        }
        let digest = h.finalize();
        format!(
            "E{}x{}-{:02x}{:02x}{:02x}{:02x}",
            self.ambient_dim(),
            self.dim(),
            digest[0],
            digest[1],
            digest[2],
            digest[3]
        )
    }
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the `R_ii > 0` sign
/// convention, then the determinant fixed to +1 by negating the first column
/// (a fixed element of O(n) minus, so the pushforward stays Haar).
pub fn haar_rotation(n: usize, seed: u64) -> Rotation {
    haar_rotation_indexed(n, seed, 0)
}

/// Stream-indexed variant for drawing many independent rotations.
pub fn haar_rotation_indexed(n: usize, seed: u64, index: u64) -> Rotation {
    assert!(n >= 2, "haar rotations need n >= 2");
    let mut rng = stream_rng(seed, "haar-rotation", index);
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if q.determinant() < 0.0 {
            for i in 0..n {
                q[(i, 0)] = -q[(i, 0)];
            }
        }
        // A Gaussian matrix is full rank almost surely; retry on the
        // measure-zero failure of the residual check.
        if let Ok(rot) = Rotation::new(q) {
            return rot;
        }
    }
}

/// Uniform random l-dimensional subspace: the first l columns of a Haar
/// rotation.
pub fn random_subspace(n: usize, l: usize, seed: u64) -> Result<Subspace> {
    random_subspace_indexed(n, l, seed, 0)
}

pub fn random_subspace_indexed(n: usize, l: usize, seed: u64, index: u64) -> Result<Subspace> {
    if l == 0 || l > n {
        return Err(Error::Precondition(format!(
            "subspace dimension {l} out of range 1..={n}"
        )));
    }
    if n == 1 {
        return Ok(Subspace::coordinate(1, 1));
    }
    let u = haar_rotation_indexed(n, seed, index);
    let frame = u.matrix().columns(0, l).into_owned();
    Subspace::new(frame)
}

/// The Hilbert-Schmidt sandwich for the geodesic distance on SO(n):
/// `|U1 - U2|_HS <= d(U1, U2) <= (pi/2) |U1 - U2|_HS`. Returns (lower, upper).
/// All Lipschitz checks in this crate use the upper bound as the distance
/// surrogate.
pub fn geodesic_distance_bounds(u1: &Rotation, u2: &Rotation) -> Result<(f64, f64)> {
    if u1.n() != u2.n() {
        return Err(Error::DimensionMismatch {
            expected: u1.n(),
            got: u2.n(),
        });
    }
    let hs = (u1.matrix() - u2.matrix()).norm();
    Ok((hs, std::f64::consts::FRAC_PI_2 * hs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_rotation_contract() {
        for n in [2, 5, 16] {
            let u = haar_rotation(n, 42);
            assert!(orthonormality_residual(u.matrix()) <= 1e-12);
            assert!((u.matrix().determinant() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn haar_rotation_deterministic() {
        let a = haar_rotation(8, 3);
        let b = haar_rotation(8, 3);
        assert_eq!(a.matrix(), b.matrix());
        let c = haar_rotation(8, 4);
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn rotation_group_closure() {
        let a = haar_rotation_indexed(6, 9, 0);
        let b = haar_rotation_indexed(6, 9, 1);
        let c = a.compose(&b).unwrap();
        assert!(orthonormality_residual(c.matrix()) <= 1e-12);
        assert!((c.matrix().determinant() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn subspace_full_and_partial() {
        let full = random_subspace(5, 5, 1).unwrap();
        assert!(orthonormality_residual(full.frame()) <= 1e-12);
        let s = random_subspace(3, 2, 7).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(orthonormality_residual(s.frame()) <= 1e-12);
        assert!(random_subspace(3, 4, 0).is_err());
    }

    #[test]
    fn geodesic_bounds_plane_rotation() {
        // A rotation by theta in a single 2-plane has HS distance from the
        // identity 2 sqrt(1 - cos theta); at theta = pi/2 that is 2.
        let n = 6;
        let u1 = Rotation::identity(n);
        let u2 = Rotation::plane_rotation(n, 0, 1, std::f64::consts::FRAC_PI_2);
        let (lo, hi) = geodesic_distance_bounds(&u1, &u2).unwrap();
        assert!((lo - 2.0).abs() < 1e-12);
        assert!((hi - std::f64::consts::PI).abs() < 1e-12);
        let (z_lo, z_hi) = geodesic_distance_bounds(&u1, &u1).unwrap();
        assert_eq!((z_lo, z_hi), (0.0, 0.0));
        assert!(lo <= hi);
    }

    #[test]
    fn projection_contracts_norm() {
        let s = random_subspace(8, 3, 11).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
        let p = s.project_coords(&x);
        assert!(norm(&p) <= norm(&x) + 1e-12);
    }
}
