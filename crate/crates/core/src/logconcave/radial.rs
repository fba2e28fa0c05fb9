//! One-dimensional radial profiles: the mass landmark `t_p`, windowed mass
//! fractions, and the monotone-reweighting inequality for second moments.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{log_integrate_box, QuadratureSpec};

/// A log-profile on `t >= 0` with finite truncation bounds for quadrature.
#[derive(Clone)]
pub struct RadialProfile {
    log_profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support_hint: (f64, f64),
}

impl RadialProfile {
    pub fn new(
        log_profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_hint: (f64, f64),
    ) -> Result<Self> {
        let p = Self::new_unconstrained(log_profile, support_hint)?;
        // Midpoint log-concavity on the probe grid.
        let (t0, t1) = support_hint;
        let probes: Vec<f64> = (0..65)
            .map(|i| t0 + (t1 - t0) * i as f64 / 64.0)
            .collect();
        let vals: Vec<f64> = probes.iter().map(|&t| (p.log_profile)(t)).collect();
        for i in 0..probes.len() {
            for j in (i + 2)..probes.len() {
                if (j - i) % 2 != 0 {
                    continue;
                }
                let (vi, vj) = (vals[i], vals[j]);
                if !vi.is_finite() || !vj.is_finite() {
                    continue;
                }
                let vm = vals[(i + j) / 2];
                if vm + 1e-7 < 0.5 * (vi + vj) {
                    return Err(Error::DegenerateDensity(format!(
                        "log-profile not concave between t = {} and t = {}",
                        probes[i], probes[j]
                    )));
                }
            }
        }
        Ok(p)
    }

    /// Skips the log-concavity probe. Weight profiles (the non-increasing `g`
    /// of the reweighting inequality) need only positivity and monotonicity,
    /// which `monotone_reweight_check` verifies itself.
    pub fn new_unconstrained(
        log_profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_hint: (f64, f64),
    ) -> Result<Self> {
        let (t0, t1) = support_hint;
        if !(t0 >= 0.0 && t1 > t0) {
            return Err(Error::Precondition(format!(
                "support hint ({t0}, {t1}) must satisfy 0 <= t_min < t_max"
            )));
        }
        let p = Self {
            log_profile: Arc::new(log_profile),
            support_hint,
        };
        let probes: Vec<f64> = (0..65)
            .map(|i| t0 + (t1 - t0) * i as f64 / 64.0)
            .collect();
        let mut any_finite = false;
        for &t in &probes {
            let v = (p.log_profile)(t);
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::DegenerateDensity(format!(
                    "log-profile returned {v} at t = {t}"
                )));
            }
            any_finite |= v.is_finite();
        }
        if !any_finite {
            return Err(Error::DegenerateDensity(
                "log-profile has no finite value on the support hint".into(),
            ));
        }
        Ok(p)
    }

    pub fn log_at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NEG_INFINITY;
        }
        let v = (self.log_profile)(t);
        debug_assert!(!v.is_nan() && v != f64::INFINITY);
        v
    }

    pub fn at(&self, t: f64) -> f64 {
        let v = self.log_at(t);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            v.exp()
        }
    }

    pub fn support_hint(&self) -> (f64, f64) {
        self.support_hint
    }

    /// Gaussian profile exp(-t^2 / 2).
    pub fn gaussian() -> Self {
        Self::new(|t| -0.5 * t * t, (0.0, 40.0)).expect("valid profile")
    }

    /// Exponential profile exp(-t).
    pub fn exponential() -> Self {
        Self::new(|t| -t, (0.0, 200.0)).expect("valid profile")
    }
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("support_hint", &self.support_hint)
            .finish()
    }
}

/// Centered log-derivative with relative step 1e-6 t; one-sided slopes average
/// out at kinks of piecewise-linear profiles.
fn dlog(f: &RadialProfile, t: f64) -> f64 {
    let h = 1e-6 * t;
    let (lp, lm) = (f.log_at(t + h), f.log_at(t - h));
    if lp.is_finite() && lm.is_finite() {
        (lp - lm) / (2.0 * h)
    } else {
        f64::NEG_INFINITY
    }
}

/// The unique `t > 0` with `t (log f)'(t) = -(p - 1)`: bracketed by a geometric
/// scan and then bisected. Monotonicity of `h(t) = t (log f)'(t) + (p-1)` past
/// its last sign change follows from concavity of `log f`.
pub fn t_p(f: &RadialProfile, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::Precondition(format!("t_p requires p >= 2, got {p}")));
    }
    let (t0, t1) = f.support_hint();
    let target = p - 1.0;
    let h = |t: f64| -> f64 {
        let d = dlog(f, t);
        if d == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            t * d + target
        }
    };
    // Geometric scan for a +- sign change strictly inside the support; a
    // profile that simply drops to zero (constant on its support, say) is not
    // a crossing.
    let lo_scale = (t0.max(1e-9 * t1)).max(1e-12);
    let mut bracket: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut first_scanned = f64::NAN;
    let mut last_scanned = f64::NAN;
    let mut t = lo_scale.max(1e-9);
    while t < t1 {
        let ht = h(t);
        if ht.is_finite() {
            if first_scanned.is_nan() {
                first_scanned = t;
            }
            last_scanned = t;
            if let Some((tp, hp)) = prev {
                if hp > 0.0 && ht <= 0.0 {
                    bracket = Some((tp, t));
                    break;
                }
            }
            prev = Some((t, ht));
        } else if prev.is_some() {
            // Past the support end: no further finite values.
            break;
        }
        t *= 1.25;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoRoot {
        lo: if first_scanned.is_nan() { lo_scale } else { first_scanned },
        hi: if last_scanned.is_nan() { t1 } else { last_scanned },
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        if hm == f64::NEG_INFINITY || hm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    let resid = h(root);
    // Smooth profiles satisfy the residual contract; at a kink the bracket
    // collapses instead (one-sided slopes straddle the target).
    if resid.is_finite() && resid.abs() <= 1e-10 * target {
        return Ok(root);
    }
    if hi - lo <= 1e-12 * hi.max(1.0) {
        return Ok(root);
    }
    Err(Error::NoRoot { lo, hi })
}

/// Fraction of the mass of `t^{p-1} f(t)` inside `[t_p (1-eps), t_p (1+eps)]`.
pub fn mass_window(f: &RadialProfile, p: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Precondition(format!("eps must lie in [0,1], got {eps}")));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let tp = t_p(f, p)?;
    let (t0, t1) = f.support_hint();
    let spec = QuadratureSpec::new(1e-10, t1.max(1.0))?;
    let weight = |t: &[f64]| {
        let t = t[0];
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (p - 1.0) * t.ln() + f.log_at(t)
        }
    };
    let (log_total, out_total) = log_integrate_box(&weight, &[t0], &[t1], &spec);
    out_total.into_result(spec.abs_tol)?;
    if log_total == f64::NEG_INFINITY {
        return Err(Error::DegenerateDensity("zero mass under t^{p-1} f".into()));
    }
    let (wlo, whi) = ((tp * (1.0 - eps)).max(t0), (tp * (1.0 + eps)).min(t1));
    if wlo >= whi {
        return Ok(0.0);
    }
    let (log_win, out_win) = log_integrate_box(&weight, &[wlo], &[whi], &spec);
    out_win.into_result(spec.abs_tol)?;
    Ok(((log_win - log_total).exp()).clamp(0.0, 1.0))
}

/// Second-moment ratios of `f` with and without a positive non-increasing
/// reweighting `g`: returns `(lhs, rhs)` with the contract `lhs <= rhs`.
pub fn monotone_reweight_check(f: &RadialProfile, g: &RadialProfile) -> Result<(f64, f64)> {
    let (t0, t1) = f.support_hint();
    // g must be positive and non-increasing on the probe grid.
    let probes = 129;
    let mut prev = f64::INFINITY;
    for i in 0..probes {
        let t = t0 + (t1 - t0) * i as f64 / (probes - 1) as f64;
        let lg = g.log_at(t);
        if !lg.is_finite() {
            return Err(Error::Precondition(format!("g is not positive at t = {t}")));
        }
        if lg > prev + 1e-9 {
            return Err(Error::Precondition(format!("g is increasing at t = {t}")));
        }
        prev = lg;
    }
    let spec = QuadratureSpec::new(1e-10, t1.max(1.0))?;
    let ratio = |with_g: bool| -> Result<f64> {
        let base = |t: &[f64]| {
            let t = t[0];
            let mut v = f.log_at(t);
            if with_g {
                v += g.log_at(t);
            }
            v
        };
        let (log_mass, o1) = log_integrate_box(&base, &[t0], &[t1], &spec);
        o1.into_result(spec.abs_tol)?;
        if log_mass == f64::NEG_INFINITY {
            return Err(Error::DegenerateDensity("zero mass in reweighting check".into()));
        }
        let second = |t: &[f64]| {
            let tt = t[0];
            if tt <= 0.0 {
                f64::NEG_INFINITY
            } else {
                2.0 * tt.ln() + base(t)
            }
        };
        let (log_second, o2) = log_integrate_box(&second, &[t0], &[t1], &spec);
        o2.into_result(spec.abs_tol)?;
        Ok((log_second - log_mass).exp())
    };
    Ok((ratio(true)?, ratio(false)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_p_gaussian_profile() {
        let f = RadialProfile::gaussian();
        // (log f)' = -t, so t * (-t) = -(p-1) gives t = sqrt(p-1).
        let t = t_p(&f, 10.0).unwrap();
        assert!((t - 3.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn t_p_exponential_profile() {
        let f = RadialProfile::exponential();
        let t = t_p(&f, 5.0).unwrap();
        assert!((t - 4.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn t_p_mixed_profile_quadratic_root() {
        // f = exp(-t^2/2 - t): t (t + 1) = p - 1 = 4, t = (-1 + sqrt(17)) / 2.
        let f = RadialProfile::new(|t| -0.5 * t * t - t, (0.0, 50.0)).unwrap();
        let t = t_p(&f, 5.0).unwrap();
        let expect = (-1.0 + 17f64.sqrt()) / 2.0;
        assert!((t - expect).abs() < 1e-9, "{t} vs {expect}");
    }

    #[test]
    fn t_p_constant_profile_has_no_root() {
        let f = RadialProfile::new(
            |t| if t <= 5.0 { 0.0 } else { f64::NEG_INFINITY },
            (0.0, 6.0),
        )
        .unwrap();
        // h = p - 1 > 0 on the whole interior: no sign change to bracket.
        assert!(matches!(t_p(&f, 3.0), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn mass_window_gaussian_closed_form() {
        let f = RadialProfile::gaussian();
        // p = 2: t_p = 1, window [0, 2], mass of t e^{-t^2/2}: 1 - e^{-2}.
        let frac = mass_window(&f, 2.0, 1.0).unwrap();
        let expect = 1.0 - (-2.0f64).exp();
        assert!((frac - expect).abs() < 1e-8, "{frac} vs {expect}");
    }

    #[test]
    fn mass_window_empty_at_zero_eps() {
        let f = RadialProfile::gaussian();
        assert_eq!(mass_window(&f, 7.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn mass_window_high_p_concentrates() {
        use statrs::distribution::{ContinuousCDF, Gamma};
        let f = RadialProfile::gaussian();
        let frac = mass_window(&f, 100.0, 0.2).unwrap();
        // Substituting u = t^2/2 turns the window mass of t^99 e^{-t^2/2} into
        // a Gamma(50) probability.
        let gamma = Gamma::new(50.0, 1.0).unwrap();
        let tp = 99f64.sqrt();
        let lo = (tp * 0.8).powi(2) / 2.0;
        let hi = (tp * 1.2).powi(2) / 2.0;
        let oracle = gamma.cdf(hi) - gamma.cdf(lo);
        assert!((frac - oracle).abs() < 1e-7, "{frac} vs {oracle}");
        assert!(frac >= 0.95);
    }

    #[test]
    fn monotone_reweight_exponential_pair() {
        let f = RadialProfile::exponential();
        let g = RadialProfile::exponential();
        let (lhs, rhs) = monotone_reweight_check(&f, &g).unwrap();
        assert!((lhs - 0.5).abs() < 1e-8, "{lhs}");
        assert!((rhs - 2.0).abs() < 1e-8, "{rhs}");
        assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn monotone_reweight_constant_g_is_equality() {
        let f = RadialProfile::new(|t| -0.5 * t * t - 0.3 * t, (0.0, 40.0)).unwrap();
        let g = RadialProfile::new(|_t| 0.0, (0.0, 40.0)).unwrap();
        let (lhs, rhs) = monotone_reweight_check(&f, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn monotone_reweight_rational_g() {
        // f = t e^{-t} on [0, 50], g = 1/(1+t).
        let f = RadialProfile::new(
            |t| if t > 0.0 { t.ln() - t } else { f64::NEG_INFINITY },
            (0.0, 50.0),
        )
        .unwrap();
        let g = RadialProfile::new_unconstrained(|t| -(1.0 + t).ln(), (0.0, 50.0)).unwrap();
        let (lhs, rhs) = monotone_reweight_check(&f, &g).unwrap();
        assert!(lhs <= rhs + 1e-9, "{lhs} vs {rhs}");
        // Independent Simpson oracle on the explicit integrands.
        let simpson = |h: &dyn Fn(f64) -> f64| {
            let n = 40000;
            let (a, b) = (0.0, 50.0);
            let step = (b - a) / n as f64;
            let mut s = h(a) + h(b);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * h(a + i as f64 * step);
            }
            s * step / 3.0
        };
        let fe = |t: f64| t * (-t).exp();
        let ge = |t: f64| 1.0 / (1.0 + t);
        let lhs_oracle = simpson(&|t| t * t * fe(t) * ge(t)) / simpson(&|t| fe(t) * ge(t));
        let rhs_oracle = simpson(&|t| t * t * fe(t)) / simpson(&|t| fe(t));
        assert!((lhs - lhs_oracle).abs() < 1e-6, "{lhs} vs {lhs_oracle}");
        assert!((rhs - rhs_oracle).abs() < 1e-6, "{rhs} vs {rhs_oracle}");
    }

    #[test]
    fn monotone_reweight_rejects_increasing_g() {
        let f = RadialProfile::exponential();
        let g = RadialProfile::new(|t| 0.1 * t - 20.0, (0.0, 200.0)).unwrap();
        assert!(matches!(
            monotone_reweight_check(&f, &g),
            Err(Error::Precondition(_))
        ));
    }
}
