//! Log-concave densities on `R^d` and the quadrature-backed operations on them:
//! Gaussian convolution, marginals onto subspaces, analytic landmarks
//! (barycenter, sup, level sets), the logarithmic Laplace transform, tilted
//! moments and convolved log-gradients.
//!
//! Everything here is an oracle for the Monte Carlo modules: dimensions are
//! capped at 3 and all integrals are deterministic adaptive quadrature.

mod corpus;
mod landmarks;
mod ops;
mod radial;

pub use corpus::{random_decreasing_profile, random_density, random_radial_profile, isotropize};
pub use landmarks::{density_landmarks, DensityLandmarks};
pub use ops::{
    convolve_gaussian, convolve_gaussian_at, grad_log_convolved, log_laplace,
    marginal_log_quadrature, marginal_quadrature, tilted_moments,
};
pub use radial::{mass_window, monotone_reweight_check, t_p, RadialProfile};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Normalized,
    Unnormalized,
}

/// An evaluatable (possibly unnormalized) log-density on `R^dim`.
///
/// `log_density` may return `-inf` (outside the support) but never `+inf` or
/// NaN; construction probes for that and for midpoint log-concavity.
#[derive(Clone)]
pub struct LogConcaveDensity {
    dim: usize,
    log_density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    normalization: Normalization,
    /// Exponential decay rate: the density is assumed to satisfy
    /// `f(x) <= C exp(-rate * |x|)` past radius ~10. Drives quadrature
    /// truncation.
    decay_hint: Option<f64>,
}

impl LogConcaveDensity {
    pub fn new(
        dim: usize,
        log_density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        normalization: Normalization,
        decay_hint: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DegenerateDensity("dimension must be positive".into()));
        }
        if let Some(c) = decay_hint {
            if !(c > 0.0) {
                return Err(Error::DegenerateDensity("decay hint must be positive".into()));
            }
        }
        let d = Self {
            dim,
            log_density: Arc::new(log_density),
            normalization,
            decay_hint,
        };
        d.validate_probes()?;
        Ok(d)
    }

    /// Skips the probe validation; for densities built internally from an
    /// already validated one (convolutions, affine images).
    pub(crate) fn new_unchecked(
        dim: usize,
        log_density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        normalization: Normalization,
        decay_hint: Option<f64>,
    ) -> Self {
        Self {
            dim,
            log_density: Arc::new(log_density),
            normalization,
            decay_hint,
        }
    }

    fn validate_probes(&self) -> Result<()> {
        // Probe a coarse grid in [-4, 4]^dim: at least one finite value, no
        // NaN/+inf anywhere, midpoint concavity on finite pairs.
        let per_axis: usize = match self.dim {
            1 => 33,
            2 => 9,
            _ => 5,
        };
        let total = per_axis.pow(self.dim.min(3) as u32);
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut x = vec![0.0; self.dim];
            for d in 0..self.dim.min(3) {
                let j = rem % per_axis;
                rem /= per_axis;
                x[d] = -4.0 + 8.0 * j as f64 / (per_axis - 1) as f64;
            }
            points.push(x);
        }
        let mut any_finite = false;
        let mut values = Vec::with_capacity(points.len());
        for p in &points {
            let v = (self.log_density)(p);
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::DegenerateDensity(format!(
                    "log-density returned {v} at {p:?}"
                )));
            }
            any_finite |= v.is_finite();
            values.push(v);
        }
        if !any_finite {
            return Err(Error::DegenerateDensity(
                "no finite log-density value found on the probe grid (zero mass or off-scale support)"
                    .into(),
            ));
        }
        // Midpoint concavity on a deterministic set of probe pairs.
        let stride = (points.len() / 40).max(1);
        for i in (0..points.len()).step_by(stride) {
            for j in ((i + 1)..points.len()).step_by(stride * 3 + 1) {
                let (vi, vj) = (values[i], values[j]);
                if !vi.is_finite() || !vj.is_finite() {
                    continue;
                }
                let mid: Vec<f64> = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                let vm = (self.log_density)(&mid);
                if vm + 1e-7 < 0.5 * (vi + vj) {
                    return Err(Error::DegenerateDensity(format!(
                        "midpoint concavity violated between {:?} and {:?}: {} < ({} + {})/2",
                        points[i], points[j], vm, vi, vj
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn decay_hint(&self) -> Option<f64> {
        self.decay_hint
    }

    /// Log-density at `x`. Panics on dimension mismatch; asserts the
    /// no-NaN/no-+inf invariant.
    pub fn log_at(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        let v = (self.log_density)(x);
        debug_assert!(!v.is_nan() && v != f64::INFINITY, "invalid log-density {v}");
        v
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        let v = self.log_at(x);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            v.exp()
        }
    }

    /// Quadrature truncation radius derived from the decay hint: past it the
    /// density is below ~1e-16 of its bulk values.
    pub fn truncation_radius(&self) -> f64 {
        match self.decay_hint {
            Some(c) => (10.0 + 37.0 / c).min(1e4),
            None => 40.0,
        }
    }

    /// Standard centered Gaussian with covariance `v * Id`.
    pub fn gaussian(dim: usize, v: f64) -> Self {
        assert!(v > 0.0);
        let log_norm = -0.5 * dim as f64 * (2.0 * std::f64::consts::PI * v).ln();
        let rate = 3.0 / v.sqrt();
        Self::new_unchecked(
            dim,
            move |x: &[f64]| log_norm - x.iter().map(|t| t * t).sum::<f64>() / (2.0 * v),
            Normalization::Normalized,
            Some(rate.min(1e3)),
        )
    }

    /// Uniform density on the cube `[-a, a]^dim`, normalized.
    pub fn uniform_box(dim: usize, a: f64) -> Self {
        assert!(a > 0.0);
        let log_val = -(dim as f64) * (2.0 * a).ln();
        Self::new_unchecked(
            dim,
            move |x: &[f64]| {
                if x.iter().all(|t| t.abs() <= a) {
                    log_val
                } else {
                    f64::NEG_INFINITY
                }
            },
            Normalization::Normalized,
            Some(37.0 / a),
        )
    }

    /// `exp(-t)` on `[0, inf)`, zero elsewhere (dim 1, normalized).
    pub fn exponential_1d() -> Self {
        Self::new_unchecked(
            1,
            |x: &[f64]| if x[0] >= 0.0 { -x[0] } else { f64::NEG_INFINITY },
            Normalization::Normalized,
            Some(1.0),
        )
    }

    /// Pullback under `y -> m * y` for an orthogonal `m`: the density of the
    /// rotated vector, `y -> f(m y)`.
    pub fn rotated(&self, m: &nalgebra::DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), self.dim);
        assert_eq!(m.ncols(), self.dim);
        let inner = self.log_density.clone();
        let m = m.clone();
        let dim = self.dim;
        Self::new_unchecked(
            dim,
            move |x: &[f64]| {
                let v = nalgebra::DVector::from_column_slice(x);
                let y = &m * v;
                inner(y.as_slice())
            },
            self.normalization,
            self.decay_hint,
        )
    }

    /// Pullback under the affine map `y -> a * y + b` (density of the image of
    /// X under the inverse map, up to the constant Jacobian, which is dropped:
    /// landmark and ratio operations are scale invariant).
    pub fn affine_pullback(
        &self,
        a: &nalgebra::DMatrix<f64>,
        b: &[f64],
        decay_hint: Option<f64>,
    ) -> Self {
        assert_eq!(a.nrows(), self.dim);
        let inner = self.log_density.clone();
        let a = a.clone();
        let b = nalgebra::DVector::from_column_slice(b);
        Self::new_unchecked(
            self.dim,
            move |x: &[f64]| {
                let v = nalgebra::DVector::from_column_slice(x);
                let y = &a * v + &b;
                inner(y.as_slice())
            },
            Normalization::Unnormalized,
            decay_hint,
        )
    }
}

impl std::fmt::Debug for LogConcaveDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogConcaveDensity")
            .field("dim", &self.dim)
            .field("normalization", &self.normalization)
            .field("decay_hint", &self.decay_hint)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_log_density() {
        let r = LogConcaveDensity::new(1, |_x| f64::NAN, Normalization::Unnormalized, None);
        assert!(matches!(r, Err(Error::DegenerateDensity(_))));
    }

    #[test]
    fn rejects_zero_mass() {
        let r = LogConcaveDensity::new(
            1,
            |_x| f64::NEG_INFINITY,
            Normalization::Unnormalized,
            None,
        );
        assert!(matches!(r, Err(Error::DegenerateDensity(_))));
    }

    #[test]
    fn rejects_convexity_bump() {
        // log f = |x| is convex, not concave.
        let r = LogConcaveDensity::new(1, |x| x[0].abs(), Normalization::Unnormalized, Some(1.0));
        assert!(matches!(r, Err(Error::DegenerateDensity(_))));
    }

    #[test]
    fn accepts_gaussian_and_box() {
        let g = LogConcaveDensity::gaussian(2, 1.0);
        assert_eq!(g.dim(), 2);
        assert!((g.at(&[0.0, 0.0]) - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let b = LogConcaveDensity::uniform_box(1, 3f64.sqrt());
        assert!(b.at(&[2.0]) == 0.0);
        assert!((b.at(&[0.0]) - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
    }
}
