//! Analytic landmarks of a low-dimensional log-concave density: barycenter,
//! supremum, level-set radius and level-set mass.

use super::LogConcaveDensity;
use crate::error::{Error, Result};
use crate::quad::{integrate_box, log_integrate_box, QuadratureSpec};

#[derive(Debug, Clone)]
pub struct DensityLandmarks {
    pub barycenter: Vec<f64>,
    pub sup_value: f64,
    pub sup_log: f64,
    pub sup_point: Vec<f64>,
    /// Largest probed |x| with f(x) >= e^{-n} f(0).
    pub level_set_radius_e_n: f64,
    /// Mass of {f >= e^{-10 n} sup f} relative to the total mass.
    pub level_set_mass_10n: f64,
}

fn grid_points(dim: usize, r: f64, per_axis: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total).map(move |idx| {
        let mut rem = idx;
        let mut x = vec![0.0; dim];
        for d in 0..dim {
            let j = rem % per_axis;
            rem /= per_axis;
            x[d] = -r + 2.0 * r * j as f64 / (per_axis - 1) as f64;
        }
        x
    })
}

/// Maximize the (concave) log-density: coarse grid, then compass search with a
/// shrinking step over axis and diagonal directions.
fn locate_sup(d: &LogConcaveDensity, r: f64) -> Result<(Vec<f64>, f64)> {
    let dim = d.dim();
    let per_axis = match dim {
        1 => 513,
        2 => 97,
        _ => 33,
    };
    let mut best = vec![0.0; dim];
    let mut best_v = f64::NEG_INFINITY;
    for x in grid_points(dim, r, per_axis) {
        let v = d.log_at(&x);
        if v > best_v {
            best_v = v;
            best = x;
        }
    }
    if best_v == f64::NEG_INFINITY {
        return Err(Error::LandmarkFailure("no positive density value on the search grid".into()));
    }
    let cell = 2.0 * r / (per_axis - 1) as f64;
    if best.iter().any(|&c| c.abs() > r - 1.5 * cell) {
        return Err(Error::LandmarkFailure(
            "density increasing toward the truncation boundary".into(),
        ));
    }
    // Compass directions: all nonzero sign patterns over the axes.
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let patterns = 3usize.pow(dim as u32);
    for p in 0..patterns {
        let mut rem = p;
        let mut dir = vec![0.0; dim];
        for i in 0..dim {
            dir[i] = (rem % 3) as f64 - 1.0;
            rem /= 3;
        }
        if dir.iter().any(|&t| t != 0.0) {
            let norm = dir.iter().map(|t| t * t).sum::<f64>().sqrt();
            dirs.push(dir.into_iter().map(|t| t / norm).collect());
        }
    }
    let mut step = cell;
    while step > 1e-10 {
        let mut improved = false;
        for dir in &dirs {
            let cand: Vec<f64> = best.iter().zip(dir).map(|(b, d)| b + step * d).collect();
            let v = d.log_at(&cand);
            if v > best_v {
                best_v = v;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, best_v))
}

pub fn density_landmarks(
    d: &LogConcaveDensity,
    spec: &QuadratureSpec,
) -> Result<DensityLandmarks> {
    if d.dim() > 3 {
        return Err(Error::UnsupportedDimension(d.dim()));
    }
    if d.decay_hint().is_none() {
        return Err(Error::Precondition("density_landmarks needs a decay hint".into()));
    }
    let dim = d.dim();
    let r = d.truncation_radius().min(spec.truncation_radius.max(1.0));
    let lo = vec![-r; dim];
    let hi = vec![r; dim];

    let (sup_point, sup_log) = locate_sup(d, r)?;

    let inner = d.clone();
    let w = move |y: &[f64]| inner.log_at(y);
    let (log_mass, out) = log_integrate_box(&w, &lo, &hi, spec);
    out.into_result(spec.abs_tol)?;
    if log_mass == f64::NEG_INFINITY {
        return Err(Error::DegenerateDensity("zero total mass".into()));
    }

    let shifted = |y: &[f64]| (d.log_at(y) - log_mass).exp();
    let mut barycenter = vec![0.0; dim];
    for i in 0..dim {
        let f = |y: &[f64]| y[i] * shifted(y);
        barycenter[i] = integrate_box(&f, &lo, &hi, spec)?;
    }

    // Mass of the superlevel set {log f >= log sup - 10 n}, relative to total.
    let tau = sup_log - 10.0 * dim as f64;
    let fk = |y: &[f64]| {
        let v = d.log_at(y);
        if v >= tau {
            (v - log_mass).exp()
        } else {
            0.0
        }
    };
    let mass_10n = integrate_box(&fk, &lo, &hi, spec)?.clamp(0.0, 1.0);

    // Largest |x| with f(x) >= e^{-n} f(0), over a deterministic direction set.
    let f0 = d.log_at(&vec![0.0; dim]);
    if !f0.is_finite() {
        return Err(Error::LandmarkFailure("f(0) = 0: level-set radius undefined".into()));
    }
    let thresh = f0 - dim as f64;
    let dirs: Vec<Vec<f64>> = match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..128)
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / 128.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci sphere.
            let m = 192;
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..m)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / golden;
                    vec![rho * phi.cos(), rho * phi.sin(), z]
                })
                .collect()
        }
    };
    let mut radius: f64 = 0.0;
    for dir in &dirs {
        let eval = |t: f64| {
            let x: Vec<f64> = dir.iter().map(|c| c * t).collect();
            d.log_at(&x)
        };
        // The superlevel set along a ray is an interval starting at 0.
        if eval(r) >= thresh {
            radius = radius.max(r);
            continue;
        }
        let (mut lo_t, mut hi_t) = (0.0, r);
        for _ in 0..80 {
            let mid = 0.5 * (lo_t + hi_t);
            if eval(mid) >= thresh {
                lo_t = mid;
            } else {
                hi_t = mid;
            }
        }
        radius = radius.max(lo_t);
    }

    Ok(DensityLandmarks {
        barycenter,
        sup_value: if sup_log > 700.0 { f64::INFINITY } else { sup_log.exp() },
        sup_log,
        sup_point,
        level_set_radius_e_n: radius,
        level_set_mass_10n: mass_10n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logconcave::Normalization;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gaussian_landmarks() {
        let g = LogConcaveDensity::gaussian(2, 1.0);
        let lm = density_landmarks(&g, &spec()).unwrap();
        assert!(lm.barycenter.iter().all(|c| c.abs() < 1e-7), "{:?}", lm.barycenter);
        assert!(lm.sup_point.iter().all(|c| c.abs() < 1e-7));
        // f(barycenter) / sup f = 1 for the symmetric case.
        let ratio = (g.log_at(&lm.barycenter) - lm.sup_log).exp();
        assert!((ratio - 1.0).abs() < 1e-9);
        assert!(lm.sup_value >= g.at(&lm.barycenter));
    }

    #[test]
    fn exponential_landmarks_meet_fradelizi_bound_with_equality() {
        let e = LogConcaveDensity::exponential_1d();
        let lm = density_landmarks(&e, &spec()).unwrap();
        assert!((lm.barycenter[0] - 1.0).abs() < 1e-7, "{:?}", lm.barycenter);
        let ratio = (e.log_at(&lm.barycenter) - lm.sup_log).exp();
        assert!((ratio - (-1f64).exp()).abs() < 1e-6, "ratio {ratio}");
    }

    #[test]
    fn gaussian_level_set_radius_is_sqrt_2n() {
        for dim in [1usize, 2] {
            let g = LogConcaveDensity::gaussian(dim, 1.0);
            let lm = density_landmarks(&g, &spec()).unwrap();
            let expect = (2.0 * dim as f64).sqrt();
            assert!(
                (lm.level_set_radius_e_n - expect).abs() < 1e-4,
                "dim {dim}: {} vs {expect}",
                lm.level_set_radius_e_n
            );
        }
    }

    #[test]
    fn level_set_mass_in_unit_interval_and_large() {
        let g = LogConcaveDensity::gaussian(2, 1.0);
        let lm = density_landmarks(&g, &spec()).unwrap();
        assert!(lm.level_set_mass_10n >= 1.0 - (-2f64).exp() - 1e-6);
        assert!(lm.level_set_mass_10n <= 1.0);
    }

    #[test]
    fn increasing_density_fails_landmarks() {
        // log f = x on [-R, R]: sup sits on the truncation boundary.
        let d = LogConcaveDensity::new(
            1,
            |x: &[f64]| 0.1 * x[0],
            Normalization::Unnormalized,
            Some(1.0),
        )
        .unwrap();
        assert!(matches!(
            density_landmarks(&d, &spec()),
            Err(Error::LandmarkFailure(_))
        ));
    }
}
