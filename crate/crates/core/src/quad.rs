//! Deterministic quadrature: adaptive Simpson in 1-D and nested (tensor-product)
//! adaptive integration in 2-D and 3-D.
//!
//! These integrals are the ground truth the Monte Carlo side of the crate is
//! checked against, so the integrator favors robustness over speed: every call
//! starts from a fixed base grid (integrands here are often supported on a small
//! part of the truncation box) and refines until the local Simpson error
//! estimate is below the budget for that segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integration scheme selector. 1-D integrals always use the adaptive Simpson
/// rule; multi-dimensional integrals nest it coordinate by coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Adaptive1D,
    TensorGrid,
}

/// Tolerances and truncation controls for the quadrature oracles.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Absolute tolerance on the peak-normalized scale (integrands are shifted
    /// by their log-peak before integration, so this is effectively relative
    /// to the integral's natural size).
    pub abs_tol: f64,
    pub max_depth: u32,
    pub truncation_radius: f64,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, truncation_radius: f64) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::Precondition("abs_tol must be positive".into()));
        }
        if !(truncation_radius > 0.0) {
            return Err(Error::Precondition(
                "truncation_radius must be positive".into(),
            ));
        }
        Ok(Self {
            scheme: Scheme::Adaptive1D,
            abs_tol,
            max_depth: 48,
            truncation_radius,
        })
    }

    /// Default oracle accuracy: 1e-8, truncation radius derived by the caller
    /// from the density's decay hint.
    pub fn with_radius(truncation_radius: f64) -> Self {
        Self::new(1e-8, truncation_radius).expect("positive constants")
    }

    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::with_radius(40.0)
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    /// Sum of local error estimates actually achieved.
    pub err_estimate: f64,
    pub converged: bool,
}

impl QuadOutcome {
    pub fn into_result(self, requested: f64) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureNonConvergence {
                achieved: self.err_estimate,
                requested,
            })
        }
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct Adaptive<'a> {
    f: &'a dyn Fn(f64) -> f64,
    span: f64,
    max_depth: u32,
    err: f64,
    converged: bool,
}

impl<'a> Adaptive<'a> {
    // Classic adaptive Simpson with the 1/15 Richardson error estimate. A
    // segment is also accepted once its correction sits at the roundoff floor
    // of the values involved; without that guard a tolerance below machine
    // precision relative to the integrand scale recurses into a full-depth
    // binary tree.
    fn go(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        let roundoff = 1e-15 * (left.abs() + right.abs() + whole.abs()) + 1e-300;
        if delta.abs() <= 15.0 * tol || delta.abs() <= roundoff || (b - a) < 1e-13 * self.span {
            self.err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth {
            self.err += delta.abs() / 15.0;
            self.converged = false;
            return left + right + delta / 15.0;
        }
        self.go(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.go(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Adaptive Simpson over `[a, b]`, seeded with `base` initial segments so that
/// narrowly supported integrands are not missed by the first coarse pass.
pub fn integrate_1d_outcome(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
    base: usize,
) -> QuadOutcome {
    if !(b > a) {
        return QuadOutcome { value: 0.0, err_estimate: 0.0, converged: true };
    }
    let base = base.max(2);
    let mut state = Adaptive { f, span: b - a, max_depth, err: 0.0, converged: true };
    let mut total = 0.0;
    let seg_tol = abs_tol / base as f64;
    for i in 0..base {
        let x0 = a + (b - a) * i as f64 / base as f64;
        let x1 = a + (b - a) * (i + 1) as f64 / base as f64;
        let xm = 0.5 * (x0 + x1);
        let f0 = f(x0);
        let fm = f(xm);
        let f1 = f(x1);
        let whole = simpson(f0, fm, f1, x1 - x0);
        total += state.go(x0, x1, f0, fm, f1, whole, seg_tol, 0);
    }
    QuadOutcome { value: total, err_estimate: state.err, converged: state.converged }
}

pub fn integrate_1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_1d_outcome(f, a, b, spec.abs_tol, spec.max_depth, 16).into_result(spec.abs_tol)
}

/// Nested adaptive integration of `f` over the box `lo[i]..hi[i]` (dim 1..=3).
/// The inner levels get a tighter tolerance so the outer Simpson estimate stays
/// meaningful.
pub fn integrate_box_outcome(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    spec: &QuadratureSpec,
) -> QuadOutcome {
    assert_eq!(lo.len(), hi.len());
    let dim = lo.len();
    assert!(dim >= 1 && dim <= 3, "quadrature oracle limited to dim <= 3");
    match dim {
        1 => integrate_1d_outcome(&|x| f(&[x]), lo[0], hi[0], spec.abs_tol, spec.max_depth, 16),
        _ => {
            let width = hi[0] - lo[0];
            let inner_tol = spec.abs_tol / (4.0 * width.max(1.0));
            let inner_spec = QuadratureSpec { abs_tol: inner_tol, ..*spec };
            // Error/convergence flags from inner integrals are folded into the
            // outer accumulator through a shared cell.
            let inner_err = std::cell::Cell::new(0.0f64);
            let inner_ok = std::cell::Cell::new(true);
            let g = |x0: f64| -> f64 {
                let out = match dim {
                    2 => integrate_1d_outcome(
                        &|x1| f(&[x0, x1]),
                        lo[1],
                        hi[1],
                        inner_spec.abs_tol,
                        inner_spec.max_depth,
                        12,
                    ),
                    _ => integrate_box_outcome(
                        &|rest: &[f64]| f(&[x0, rest[0], rest[1]]),
                        &lo[1..],
                        &hi[1..],
                        &inner_spec,
                    ),
                };
                inner_err.set(inner_err.get() + out.err_estimate);
                if !out.converged {
                    inner_ok.set(false);
                }
                out.value
            };
            let outer = integrate_1d_outcome(&g, lo[0], hi[0], spec.abs_tol, spec.max_depth, 12);
            QuadOutcome {
                value: outer.value,
                err_estimate: outer.err_estimate + inner_err.get(),
                converged: outer.converged && inner_ok.get(),
            }
        }
    }
}

pub fn integrate_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_box_outcome(f, lo, hi, spec).into_result(spec.abs_tol)
}

/// Locate the maximum of a per-axis-unimodal `log_f` over a box: a coarse
/// endpoint-inclusive grid scan followed by coordinate-wise golden-section
/// refinement. Used to anchor the log-shift; an underestimate by a few units
/// is harmless, an underestimate by tens of units makes shifted tolerances
/// unreachable.
fn locate_log_peak(log_f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64]) -> (Vec<f64>, f64) {
    let dim = lo.len();
    let per_axis: usize = match dim {
        1 => 33,
        2 => 11,
        _ => 7,
    };
    let total = per_axis.pow(dim as u32);
    let mut best = vec![0.0f64; dim];
    let mut best_v = f64::NEG_INFINITY;
    for idx in 0..total {
        let mut rem = idx;
        let mut x = [0.0f64; 3];
        for d in 0..dim {
            let j = rem % per_axis;
            rem /= per_axis;
            x[d] = lo[d] + (hi[d] - lo[d]) * j as f64 / (per_axis - 1) as f64;
        }
        let v = log_f(&x[..dim]);
        if v > best_v {
            best_v = v;
            best.copy_from_slice(&x[..dim]);
        }
    }
    if !best_v.is_finite() {
        return (best, best_v);
    }
    // Golden-section sweeps around the grid argmax, one cell wide per axis.
    let inv_phi = 0.618_033_988_749_894_9_f64;
    for _sweep in 0..2 {
        for d in 0..dim {
            let cell = (hi[d] - lo[d]) / (per_axis - 1) as f64;
            let mut a = (best[d] - cell).max(lo[d]);
            let mut b = (best[d] + cell).min(hi[d]);
            let mut x = best.clone();
            let eval = |x: &mut Vec<f64>, t: f64| {
                x[d] = t;
                log_f(x)
            };
            let mut c = b - inv_phi * (b - a);
            let mut e = a + inv_phi * (b - a);
            let mut fc = eval(&mut x, c);
            let mut fe = eval(&mut x, e);
            for _ in 0..40 {
                if fc >= fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - inv_phi * (b - a);
                    fc = eval(&mut x, c);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + inv_phi * (b - a);
                    fe = eval(&mut x, e);
                }
            }
            let mid = 0.5 * (a + b);
            let fm = eval(&mut x, mid);
            if fm > best_v {
                best_v = fm;
                best[d] = mid;
            }
        }
    }
    (best, best_v)
}

/// Integral of `exp(log_f)` over a box, computed on the peak-shifted scale:
/// returns `(log of integral, outcome of the shifted integral)`. Keeps relative
/// precision even when the integral underflows f64.
pub fn log_integrate_box(
    log_f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    spec: &QuadratureSpec,
) -> (f64, QuadOutcome) {
    let (_peak_point, peak) = locate_log_peak(log_f, lo, hi);
    if !peak.is_finite() {
        // Nothing visible on the scan grid: treat as zero mass.
        return (
            f64::NEG_INFINITY,
            QuadOutcome { value: 0.0, err_estimate: 0.0, converged: true },
        );
    }
    let shifted = |x: &[f64]| {
        let v = log_f(x) - peak;
        if v < -745.0 {
            0.0
        } else {
            v.exp()
        }
    };
    let out = integrate_box_outcome(&shifted, lo, hi, spec);
    let log_value = if out.value > 0.0 {
        peak + out.value.ln()
    } else {
        f64::NEG_INFINITY
    };
    (log_value, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        // Simpson is exact for cubics.
        let spec = QuadratureSpec::default();
        let v = integrate_1d(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, &spec).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass_1d() {
        let spec = QuadratureSpec::default().with_tol(1e-10);
        let v = integrate_1d(
            &|x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -12.0,
            12.0,
            &spec,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn gaussian_mass_2d_and_3d() {
        let spec = QuadratureSpec::default().with_tol(1e-8);
        let g2 = integrate_box(
            &|x: &[f64]| {
                (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp() / (2.0 * std::f64::consts::PI)
            },
            &[-9.0, -9.0],
            &[9.0, 9.0],
            &spec,
        )
        .unwrap();
        assert!((g2 - 1.0).abs() < 1e-7, "got {g2}");
        let c3 = (2.0 * std::f64::consts::PI).powf(1.5);
        let g3 = integrate_box(
            &|x: &[f64]| (-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() / c3,
            &[-7.0, -7.0, -7.0],
            &[7.0, 7.0, 7.0],
            &spec,
        )
        .unwrap();
        assert!((g3 - 1.0).abs() < 1e-6, "got {g3}");
    }

    #[test]
    fn narrow_spike_not_missed() {
        // Width-1e-3 bump inside [-40, 40]; the base grid plus refinement must find it.
        let spec = QuadratureSpec::default().with_tol(1e-10);
        let s = 1e-3;
        let v = integrate_1d(
            &|x| (-0.5 * (x / s) * (x / s)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s),
            -40.0,
            40.0,
            &spec,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn log_integration_boundary_peak() {
        // Peak at the left endpoint of a long interval: the shift anchor must
        // find it or the shifted tolerance is unreachable.
        let spec = QuadratureSpec::default();
        let (logv, out) = log_integrate_box(&|x: &[f64]| -2.0 * x[0], &[0.0], &[200.0], &spec);
        assert!(out.converged);
        assert!((logv - 0.5f64.ln()).abs() < 1e-9, "got {logv}");
    }

    #[test]
    fn log_integration_handles_underflow() {
        // integral of exp(-x^2/2 - 800) is e^{-800} * sqrt(2 pi): far below f64 range.
        let spec = QuadratureSpec::default();
        let (logv, out) = log_integrate_box(&|x: &[f64]| -0.5 * x[0] * x[0] - 800.0, &[-12.0], &[12.0], &spec);
        assert!(out.converged);
        let expected = -800.0 + 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((logv - expected).abs() < 1e-8, "got {logv}, want {expected}");
    }

    #[test]
    fn nonconvergence_is_reported() {
        // A max_depth of 0 cannot resolve |x| to 1e-12.
        let mut spec = QuadratureSpec::default().with_tol(1e-12);
        spec.max_depth = 0;
        let r = integrate_1d(&|x: f64| x.abs().sqrt(), -1.0, 1.0, &spec);
        match r {
            Err(Error::QuadratureNonConvergence { achieved, requested }) => {
                assert!(achieved > requested);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
