//! Quadrature-backed operations on low-dimensional log-concave densities.

use nalgebra::DVector;

use super::LogConcaveDensity;
use crate::error::{Error, Result};
use crate::quad::{log_integrate_box, QuadOutcome, QuadratureSpec};
use crate::randomness::Subspace;

fn check_dim_le3(d: &LogConcaveDensity) -> Result<()> {
    if d.dim() > 3 {
        Err(Error::UnsupportedDimension(d.dim()))
    } else {
        Ok(())
    }
}

/// Gaussian exp(-|z|^2 / 2v) drops below 1e-16.5 of its peak past this radius.
fn gaussian_window(v: f64) -> f64 {
    (76.0 * v).sqrt()
}

/// Log of `(f * gamma[v])(x)` by quadrature over the overlap of the density's
/// truncation box and the +-gaussian_window box around `x`.
fn log_convolve_eval(
    d: &LogConcaveDensity,
    v: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> (f64, QuadOutcome) {
    let dim = d.dim();
    let r_d = d.truncation_radius().min(spec.truncation_radius.max(1.0));
    let r_g = gaussian_window(v);
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for i in 0..dim {
        lo[i] = (x[i] - r_g).max(-r_d);
        hi[i] = (x[i] + r_g).min(r_d);
        if lo[i] >= hi[i] {
            return (
                f64::NEG_INFINITY,
                QuadOutcome { value: 0.0, err_estimate: 0.0, converged: true },
            );
        }
    }
    let log_norm = -0.5 * dim as f64 * (2.0 * std::f64::consts::PI * v).ln();
    let integrand = |y: &[f64]| -> f64 {
        let mut q = 0.0;
        for i in 0..dim {
            let t = x[i] - y[i];
            q += t * t;
        }
        d.log_at(y) + log_norm - q / (2.0 * v)
    };
    log_integrate_box(&integrand, &lo, &hi, spec)
}

/// Value of the convolution `(d * gamma[v])(x)`, with an explicit error when
/// the adaptive quadrature does not converge within its depth budget.
pub fn convolve_gaussian_at(
    d: &LogConcaveDensity,
    v: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Precondition("convolution variance must be positive".into()));
    }
    check_dim_le3(d)?;
    let (logv, out) = log_convolve_eval(d, v, x, spec);
    out.into_result(spec.abs_tol)?;
    Ok(if logv == f64::NEG_INFINITY { 0.0 } else { logv.exp() })
}

/// The convolution `d * gamma_n[v]` as a density whose evaluations run the
/// quadrature of `convolve_gaussian_at`. Log-concavity of the result is
/// inherited (Prekopa-Leindler), so probe validation is skipped.
pub fn convolve_gaussian(
    d: &LogConcaveDensity,
    v: f64,
    spec: &QuadratureSpec,
) -> Result<LogConcaveDensity> {
    if !(v > 0.0) {
        return Err(Error::Precondition("convolution variance must be positive".into()));
    }
    check_dim_le3(d)?;
    let inner = d.clone();
    let spec = *spec;
    Ok(LogConcaveDensity::new_unchecked(
        d.dim(),
        move |x: &[f64]| log_convolve_eval(&inner, v, x, &spec).0,
        d.normalization(),
        d.decay_hint(),
    ))
}

/// Log of the marginal `pi_E(d)(x)`: the integral of `d` over `x + E^perp`,
/// with `x` given in the coordinates of the frame of `E`.
pub fn marginal_log_quadrature(
    d: &LogConcaveDensity,
    subspace: &Subspace,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_dim_le3(d)?;
    if subspace.ambient_dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: subspace.ambient_dim() });
    }
    if x.len() != subspace.dim() {
        return Err(Error::DimensionMismatch { expected: subspace.dim(), got: x.len() });
    }
    let base = subspace.embed(x);
    let codim = d.dim() - subspace.dim();
    if codim == 0 {
        return Ok(d.log_at(&base));
    }
    let comp = crate::linalg::complement_frame(subspace.frame());
    let r = d.truncation_radius().min(spec.truncation_radius.max(1.0));
    let lo = vec![-r; codim];
    let hi = vec![r; codim];
    let base_v = DVector::from_column_slice(&base);
    let integrand = |u: &[f64]| -> f64 {
        let uv = DVector::from_column_slice(u);
        let y = &base_v + &comp * uv;
        d.log_at(y.as_slice())
    };
    let (logv, out) = log_integrate_box(&integrand, &lo, &hi, spec);
    out.into_result(spec.abs_tol)?;
    Ok(logv)
}

pub fn marginal_quadrature(
    d: &LogConcaveDensity,
    subspace: &Subspace,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let logv = marginal_log_quadrature(d, subspace, x, spec)?;
    Ok(if logv == f64::NEG_INFINITY { 0.0 } else { logv.exp() })
}

/// Logarithmic Laplace transform `log int exp(<x, y>) d(y) dy`.
pub fn log_laplace(d: &LogConcaveDensity, x: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    check_dim_le3(d)?;
    if x.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: x.len() });
    }
    let decay = d.decay_hint().ok_or_else(|| {
        Error::Precondition("log_laplace needs a decay hint to certify integrability".into())
    })?;
    let tilt = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    if tilt >= decay {
        return Err(Error::DivergentIntegral { tilt, decay });
    }
    // Effective decay rate of exp(<x,y>) f(y) is decay - |x|.
    let r = (10.0 + 37.0 / (decay - tilt)).min(1e4);
    let lo = vec![-r; d.dim()];
    let hi = vec![r; d.dim()];
    let x = x.to_vec();
    let integrand = |y: &[f64]| -> f64 {
        let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        dot + d.log_at(y)
    };
    let (logv, out) = log_integrate_box(&integrand, &lo, &hi, spec);
    out.into_result(spec.abs_tol)?;
    Ok(logv)
}

fn quadrature_moments(
    d: &LogConcaveDensity,
    weight_log: &dyn Fn(&[f64]) -> f64,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    // Mean and (uncentered) second-moment matrix of the probability measure
    // proportional to exp(weight_log). All ratios share one log-shift.
    let dim = d.dim();
    let lo = vec![-r; dim];
    let hi = vec![r; dim];
    let (log_mass, out) = log_integrate_box(weight_log, &lo, &hi, spec);
    out.into_result(spec.abs_tol)?;
    if log_mass == f64::NEG_INFINITY {
        return Err(Error::DegenerateDensity("zero mass in moment computation".into()));
    }
    let shifted = |y: &[f64]| (weight_log(y) - log_mass).exp();
    let mut mean = vec![0.0; dim];
    for i in 0..dim {
        let f = |y: &[f64]| y[i] * shifted(y);
        mean[i] = crate::quad::integrate_box(&f, &lo, &hi, spec)?;
    }
    let mut second = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let f = |y: &[f64]| y[i] * y[j] * shifted(y);
            let v = crate::quad::integrate_box(&f, &lo, &hi, spec)?;
            second[i][j] = v;
            second[j][i] = v;
        }
    }
    Ok((mean, second))
}

/// Verifies by quadrature that `d` has near-zero mean and near-identity
/// covariance; tolerance 0.05 on mean coordinates, 0.1 on covariance entries.
pub fn check_isotropic(d: &LogConcaveDensity, spec: &QuadratureSpec) -> Result<()> {
    check_dim_le3(d)?;
    let dim = d.dim();
    let r = d.truncation_radius();
    let inner = d.clone();
    let w = move |y: &[f64]| inner.log_at(y);
    let (mean, second) = quadrature_moments(d, &w, r, spec)?;
    for i in 0..dim {
        if mean[i].abs() > 0.05 {
            return Err(Error::Precondition(format!(
                "density is not isotropic: mean[{i}] = {:.4}",
                mean[i]
            )));
        }
        for j in 0..dim {
            let cov = second[i][j] - mean[i] * mean[j];
            let target = if i == j { 1.0 } else { 0.0 };
            if (cov - target).abs() > 0.1 {
                return Err(Error::Precondition(format!(
                    "density is not isotropic: cov[{i}][{j}] = {cov:.4}"
                )));
            }
        }
    }
    Ok(())
}

/// Moments of the Gaussian-tilted density `y -> d(y) exp(-|x-y|^2 / 2v)`:
/// returns `(E|X - x|^2, |E X - x|)` for X distributed proportionally to it.
pub fn tilted_moments(
    d: &LogConcaveDensity,
    x: &[f64],
    v: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_dim_le3(d)?;
    if !(v > 0.0) {
        return Err(Error::Precondition("tilt variance must be positive".into()));
    }
    check_isotropic(d, spec)?;
    let dim = d.dim();
    let r_d = d.truncation_radius();
    let norm_x = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    let r = r_d.min(norm_x + gaussian_window(v) + 1.0).max(1.0);
    let xv = x.to_vec();
    let inner = d.clone();
    let w = move |y: &[f64]| {
        let mut q = 0.0;
        for i in 0..y.len() {
            let t = xv[i] - y[i];
            q += t * t;
        }
        inner.log_at(y) - q / (2.0 * v)
    };
    let (mean, second) = quadrature_moments(d, &w, r, spec)?;
    let mut second_moment = 0.0;
    let mut shift_sq = 0.0;
    for i in 0..dim {
        // E|X - x|^2 = E|X|^2 - 2 <x, EX> + |x|^2, coordinatewise.
        second_moment += second[i][i] - 2.0 * x[i] * mean[i] + x[i] * x[i];
        shift_sq += (mean[i] - x[i]).powi(2);
    }
    Ok((second_moment, shift_sq.sqrt()))
}

/// Central finite-difference gradient of `log (d * gamma[v])` at `x`.
pub fn grad_log_convolved(
    d: &LogConcaveDensity,
    v: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    check_dim_le3(d)?;
    if !(v > 0.0) {
        return Err(Error::Precondition("convolution variance must be positive".into()));
    }
    let norm_x = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm_x > 10.0 * (d.dim() as f64).sqrt() + 1e-9 {
        return Err(Error::Precondition(format!(
            "|x| = {norm_x:.3} outside the 10 sqrt(n) window"
        )));
    }
    // Quadrature noise enters the difference quotient as tol/h; tighten the
    // integration tolerance so the h balancing the two error terms stays
    // comfortably above machine scale.
    let tight = spec.with_tol((spec.abs_tol * 1e-2).max(1e-13));
    let h = 1e-3 * (1.0 + norm_x);
    if h < 1e3 * f64::EPSILON * (1.0 + norm_x) {
        return Err(Error::StepSize { step: h, tol: spec.abs_tol });
    }
    let mut grad = vec![0.0; d.dim()];
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for i in 0..d.dim() {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        let (lp, op) = log_convolve_eval(d, v, &xp, &tight);
        let (lm, om) = log_convolve_eval(d, v, &xm, &tight);
        op.into_result(tight.abs_tol)?;
        om.into_result(tight.abs_tol)?;
        if !lp.is_finite() || !lm.is_finite() {
            return Err(Error::LandmarkFailure(
                "convolved density vanishes at a finite-difference stencil point".into(),
            ));
        }
        grad[i] = (lp - lm) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default().with_tol(1e-10)
    }

    #[test]
    fn gaussian_semigroup() {
        // gamma[1] * gamma[2] = gamma[3] pointwise.
        let g1 = LogConcaveDensity::gaussian(1, 1.0);
        let g3 = LogConcaveDensity::gaussian(1, 3.0);
        for x in [0.0, 0.7, -1.3, 2.5] {
            let got = convolve_gaussian_at(&g1, 2.0, &[x], &spec()).unwrap();
            assert!((got - g3.at(&[x])).abs() < 1e-8, "x={x}: {got} vs {}", g3.at(&[x]));
        }
    }

    #[test]
    fn uniform_convolution_matches_phi_difference() {
        // (uniform[-a,a] * gamma[1])(0) = (Phi(a) - Phi(-a)) / (2a), a = sqrt(3).
        let a = 3f64.sqrt();
        let u = LogConcaveDensity::uniform_box(1, a);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let oracle = (normal.cdf(a) - normal.cdf(-a)) / (2.0 * a);
        let got = convolve_gaussian_at(&u, 1.0, &[0.0], &spec()).unwrap();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    }

    #[test]
    fn vanishing_variance_is_identity() {
        let a = 3f64.sqrt();
        let u = LogConcaveDensity::uniform_box(1, a);
        // Continuity point well inside the support.
        let got = convolve_gaussian_at(&u, 1e-8, &[0.4], &spec()).unwrap();
        assert!((got - u.at(&[0.4])).abs() < 1e-4);
        let g = LogConcaveDensity::gaussian(2, 1.0);
        let got2 = convolve_gaussian_at(&g, 1e-8, &[0.3, -0.2], &spec()).unwrap();
        assert!((got2 - g.at(&[0.3, -0.2])).abs() < 1e-4);
    }

    #[test]
    fn marginal_of_standard_gaussian() {
        let g3 = LogConcaveDensity::gaussian(3, 1.0);
        let line = Subspace::from_direction(&[1.0, 1.0, 1.0]).unwrap();
        let got = marginal_quadrature(&g3, &line, &[0.0], &spec()).unwrap();
        let oracle = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
    }

    #[test]
    fn marginal_of_cube_diagonal_is_irwin_hall_mode() {
        // Marginal of the isotropic cube along (1,1,1)/sqrt(3) at 0 equals the
        // Irwin-Hall(3) density at its mode, rescaled: 3/8.
        let cube = LogConcaveDensity::uniform_box(3, 3f64.sqrt());
        let diag = Subspace::from_direction(&[1.0, 1.0, 1.0]).unwrap();
        let got = marginal_quadrature(&cube, &diag, &[0.0], &spec()).unwrap();
        assert!((got - 0.375).abs() < 1e-7, "{got}");
    }

    #[test]
    fn marginal_full_space_is_pointwise() {
        let g = LogConcaveDensity::gaussian(2, 1.0);
        let full = Subspace::coordinate(2, 2);
        let got = marginal_quadrature(&g, &full, &[0.5, -0.7], &spec()).unwrap();
        assert!((got - g.at(&[0.5, -0.7])).abs() < 1e-14);
    }

    #[test]
    fn log_laplace_gaussian_and_uniform() {
        let g = LogConcaveDensity::gaussian(1, 1.0);
        let v2 = log_laplace(&g, &[2.0], &spec()).unwrap();
        assert!((v2 - 2.0).abs() < 1e-8, "{v2}");
        let v0 = log_laplace(&g, &[0.0], &spec()).unwrap();
        assert!(v0.abs() < 1e-8, "{v0}");
        // Uniform on [-a, a]: Upsilon(1) = log(sinh(a)/a), a = sqrt(3).
        let a = 3f64.sqrt();
        let u = LogConcaveDensity::uniform_box(1, a);
        let v1 = log_laplace(&u, &[1.0], &spec()).unwrap();
        let oracle = (a.sinh() / a).ln();
        assert!((v1 - oracle).abs() < 1e-8, "{v1} vs {oracle}");
    }

    #[test]
    fn log_laplace_divergence_detected() {
        let e = LogConcaveDensity::exponential_1d();
        // decay rate 1: tilt 2 diverges.
        assert!(matches!(
            log_laplace(&e, &[2.0], &spec()),
            Err(Error::DivergentIntegral { .. })
        ));
    }

    #[test]
    fn tilted_moments_gaussian_cases() {
        let g1 = LogConcaveDensity::gaussian(1, 1.0);
        let (m2, shift) = tilted_moments(&g1, &[0.0], 1.0, &spec()).unwrap();
        assert!((m2 - 0.5).abs() < 1e-8, "{m2}");
        assert!(shift.abs() < 1e-8);
        assert!(m2 <= 1.0 + 1e-9);

        let g2 = LogConcaveDensity::gaussian(2, 1.0);
        let (m2b, shiftb) = tilted_moments(&g2, &[1.0, 0.0], 1.0, &spec()).unwrap();
        // Posterior mean is x/2, hence shift 1/2.
        assert!((shiftb - 0.5).abs() < 1e-8, "{shiftb}");
        assert!(m2b <= 2.0 + 1.0 + 1e-9);
        assert!(shiftb <= 2f64.sqrt() + 1.0 + 1e-9);
    }

    #[test]
    fn tilted_moments_uniform_bounds() {
        let a = 3f64.sqrt();
        let u = LogConcaveDensity::uniform_box(1, a);
        let x = [2.0];
        let (m2, shift) = tilted_moments(&u, &x, 0.5, &spec()).unwrap();
        assert!(m2 <= 1.0 + 4.0 + 1e-6, "{m2}");
        assert!(shift <= 1.0 + 2.0 + 1e-6, "{shift}");
        // Independent 1-D oracle on the explicit integrand.
        let f = |y: f64| (-(2.0 - y) * (2.0 - y) / 1.0).exp() / (2.0 * a);
        let simpson = |g: &dyn Fn(f64) -> f64| {
            let n = 20000;
            let (lo, hi) = (-a, a);
            let h = (hi - lo) / n as f64;
            let mut s = g(lo) + g(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * g(lo + i as f64 * h);
            }
            s * h / 3.0
        };
        let mass = simpson(&|y| f(y));
        let m1 = simpson(&|y| y * f(y)) / mass;
        let m2_oracle = simpson(&|y| (y - 2.0) * (y - 2.0) * f(y)) / mass;
        assert!((m2 - m2_oracle).abs() < 1e-6, "{m2} vs {m2_oracle}");
        assert!((shift - (m1 - 2.0).abs()).abs() < 1e-6);
    }

    #[test]
    fn tilted_moments_rejects_anisotropic() {
        let wide = LogConcaveDensity::gaussian(1, 4.0);
        assert!(matches!(
            tilted_moments(&wide, &[0.0], 1.0, &spec()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn grad_log_convolved_gaussian_closed_form() {
        // gamma[1] * gamma[1] = gamma[2]: grad log = -x/2.
        let g = LogConcaveDensity::gaussian(2, 1.0);
        let grad = grad_log_convolved(&g, 1.0, &[3.0, 0.0], &spec()).unwrap();
        assert!((grad[0] + 1.5).abs() < 1e-5, "{:?}", grad);
        assert!(grad[1].abs() < 1e-5);
    }

    #[test]
    fn grad_log_convolved_even_density_zero_at_origin() {
        let a = 3f64.sqrt();
        let u = LogConcaveDensity::uniform_box(2, a);
        let grad = grad_log_convolved(&u, 0.5, &[0.0, 0.0], &spec()).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-6), "{grad:?}");
    }

    #[test]
    fn grad_log_convolved_cube_bound() {
        let a = 3f64.sqrt();
        let u = LogConcaveDensity::uniform_box(2, a);
        let v = 0.5;
        let grad = grad_log_convolved(&u, v, &[1.0, 1.0], &spec()).unwrap();
        let norm = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
        assert!(norm.is_finite());
        assert!(norm * v / 2f64.sqrt() <= 100.0);
    }
}
