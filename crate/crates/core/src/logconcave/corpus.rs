//! Randomized log-concave test corpus: piecewise log-linear densities in
//! dimensions 1-2, radial profiles, and quadrature-based isotropization.
//!
//! Generators are addressed by `(seed, index)` so suites can enumerate
//! reproducible instances.

use nalgebra::DMatrix;
use rand::Rng;

use super::{LogConcaveDensity, Normalization, RadialProfile};
use crate::error::Result;
use crate::quad::{integrate_box, log_integrate_box, QuadratureSpec};
use crate::randomness::streams::stream_rng;

/// Random piecewise log-linear concave density. Dimension 1 uses explicit
/// knots with decreasing slopes; dimension 2 uses a min of affine pieces whose
/// directions positively span the plane, which forces exponential decay.
pub fn random_density(seed: u64, index: u64, dim: usize) -> LogConcaveDensity {
    assert!(dim == 1 || dim == 2, "corpus densities live in dims 1-2");
    let mut rng = stream_rng(seed, "corpus-density", index);
    if dim == 1 {
        let knot_count = rng.random_range(5..=20usize);
        // Knot positions around the origin.
        let mut knots = Vec::with_capacity(knot_count);
        let mut t = -rng.random_range(1.0..4.0);
        for _ in 0..knot_count {
            knots.push(t);
            t += rng.random_range(0.3..1.2);
        }
        // Slopes sorted decreasing, positive before the bulk and negative after.
        let mut slopes: Vec<f64> = (0..knot_count + 1)
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        slopes[0] = rng.random_range(0.75..3.0);
        slopes[knot_count] = -rng.random_range(0.75..3.0);
        slopes.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // Accumulated values at the knots, anchored at 0.
        let mut values = vec![0.0f64; knot_count];
        for i in 1..knot_count {
            values[i] = values[i - 1] + slopes[i] * (knots[i] - knots[i - 1]);
        }
        let rate = slopes[0].min(-slopes[knot_count]).max(0.5);
        LogConcaveDensity::new(
            1,
            move |x: &[f64]| {
                let t = x[0];
                // Segment lookup; the profile extends linearly beyond the end knots.
                if t <= knots[0] {
                    return values[0] + slopes[0] * (t - knots[0]);
                }
                if t >= knots[knot_count - 1] {
                    return values[knot_count - 1]
                        + slopes[knot_count] * (t - knots[knot_count - 1]);
                }
                let i = knots.partition_point(|&k| k <= t) - 1;
                values[i] + slopes[i + 1] * (t - knots[i])
            },
            Normalization::Unnormalized,
            Some(rate),
        )
        .expect("piecewise log-linear corpus density is log-concave by construction")
    } else {
        let piece_count = rng.random_range(5..=20usize).max(6);
        let mut normals: Vec<[f64; 2]> = Vec::with_capacity(piece_count);
        let mut slopes: Vec<f64> = Vec::with_capacity(piece_count);
        let mut offsets: Vec<f64> = Vec::with_capacity(piece_count);
        // Six jittered cone pieces guarantee positive spanning.
        for j in 0..6 {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / 6.0
                + rng.random_range(-0.25..0.25);
            normals.push([angle.cos(), angle.sin()]);
            slopes.push(rng.random_range(1.0..2.5));
            offsets.push(rng.random_range(0.5..3.0));
        }
        for _ in 6..piece_count {
            let angle = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            normals.push([angle.cos(), angle.sin()]);
            slopes.push(rng.random_range(0.2..2.0));
            offsets.push(rng.random_range(0.5..3.0));
        }
        // Directional decay rate over an angular grid, for the truncation hint.
        let mut rate = f64::INFINITY;
        for j in 0..64 {
            let a = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
            let (c, s) = (a.cos(), a.sin());
            let dir_rate = normals
                .iter()
                .zip(&slopes)
                .map(|(n, sl)| sl * (n[0] * c + n[1] * s))
                .fold(f64::NEG_INFINITY, f64::max);
            rate = rate.min(dir_rate);
        }
        let rate = rate.max(0.05) * 0.9;
        LogConcaveDensity::new(
            2,
            move |x: &[f64]| {
                let mut v = f64::INFINITY;
                for i in 0..normals.len() {
                    let dot = normals[i][0] * x[0] + normals[i][1] * x[1];
                    v = v.min(offsets[i] - slopes[i] * dot);
                }
                v
            },
            Normalization::Unnormalized,
            Some(rate),
        )
        .expect("min of affine pieces is log-concave by construction")
    }
}

/// Random log-concave radial profile on `[0, T]`: piecewise linear log with
/// decreasing slopes, ending steeply negative so the `t_p` crossing is
/// interior for moderate p.
pub fn random_radial_profile(seed: u64, index: u64) -> RadialProfile {
    let mut rng = stream_rng(seed, "corpus-radial", index);
    let knot_count = rng.random_range(5..=20usize);
    let t_max = rng.random_range(20.0..40.0);
    let mut knots = vec![0.0f64];
    for i in 1..knot_count {
        knots.push(t_max * i as f64 / knot_count as f64 + rng.random_range(-0.2..0.2));
    }
    let mut slopes: Vec<f64> = (0..knot_count).map(|_| rng.random_range(-2.0..1.0)).collect();
    slopes[knot_count - 1] = -rng.random_range(2.0..4.0);
    slopes.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut values = vec![0.0f64; knot_count];
    for i in 1..knot_count {
        values[i] = values[i - 1] + slopes[i - 1] * (knots[i] - knots[i - 1]);
    }
    RadialProfile::new(
        move |t: f64| {
            if t < 0.0 {
                return f64::NEG_INFINITY;
            }
            if t >= knots[knot_count - 1] {
                return values[knot_count - 1]
                    + slopes[knot_count - 1] * (t - knots[knot_count - 1]);
            }
            let i = knots.partition_point(|&k| k <= t) - 1;
            values[i] + slopes[i] * (t - knots[i])
        },
        (0.0, t_max + 60.0),
    )
    .expect("piecewise linear concave log-profile")
}

/// Random positive non-increasing profile (for the reweighting inequality):
/// `exp(-H(t))` with `H` piecewise linear, non-decreasing, convex or not.
pub fn random_decreasing_profile(seed: u64, index: u64) -> RadialProfile {
    let mut rng = stream_rng(seed, "corpus-decreasing", index);
    let kind: u8 = rng.random_range(0..3);
    match kind {
        0 => {
            let a = rng.random_range(0.05..1.5);
            RadialProfile::new(move |t| -a * t, (0.0, 400.0)).unwrap()
        }
        1 => {
            let b = rng.random_range(0.1..2.0);
            RadialProfile::new_unconstrained(move |t| -((1.0 + b * t).ln()), (0.0, 400.0)).unwrap()
        }
        _ => {
            // Non-increasing staircase smoothed into a piecewise linear ramp.
            let steps = rng.random_range(3..8usize);
            let mut breakpoints = Vec::with_capacity(steps);
            let mut t = 0.0;
            for _ in 0..steps {
                t += rng.random_range(0.5..5.0);
                breakpoints.push(t);
            }
            let rates: Vec<f64> = (0..steps).map(|_| rng.random_range(0.0..1.0)).collect();
            RadialProfile::new_unconstrained(
                move |t: f64| {
                    let mut h = 0.0;
                    let mut prev = 0.0;
                    for (i, &b) in breakpoints.iter().enumerate() {
                        let seg = (t.min(b) - prev).max(0.0);
                        h += rates[i] * seg;
                        prev = b;
                    }
                    h += 0.2 * (t - prev).max(0.0);
                    -h
                },
                (0.0, 400.0),
            )
            .unwrap()
        }
    }
}

/// Whiten a density by its quadrature moments: the result has zero mean and
/// identity covariance up to the quadrature tolerance. The constant Jacobian
/// is dropped (landmark and ratio operations are scale invariant).
pub fn isotropize(d: &LogConcaveDensity, spec: &QuadratureSpec) -> Result<LogConcaveDensity> {
    let dim = d.dim();
    let r = d.truncation_radius().min(spec.truncation_radius.max(1.0));
    let lo = vec![-r; dim];
    let hi = vec![r; dim];
    let inner = d.clone();
    let w = move |y: &[f64]| inner.log_at(y);
    let (log_mass, out) = log_integrate_box(&w, &lo, &hi, spec);
    out.into_result(spec.abs_tol)?;
    let shifted = |y: &[f64]| (d.log_at(y) - log_mass).exp();
    let mut mean = vec![0.0; dim];
    for i in 0..dim {
        let f = |y: &[f64]| y[i] * shifted(y);
        mean[i] = integrate_box(&f, &lo, &hi, spec)?;
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let f = |y: &[f64]| (y[i] - mean[i]) * (y[j] - mean[j]) * shifted(y);
            let v = integrate_box(&f, &lo, &hi, spec)?;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let (_w, w_inv) = crate::linalg::whitening_from_cov(&cov)?;
    // Decay transforms by the smallest singular value of the pullback matrix.
    let min_sigma = cov
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .sqrt();
    let hint = d.decay_hint().map(|c| (c * min_sigma).max(0.02));
    Ok(d.affine_pullback(&w_inv, &mean, hint))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_densities_construct_in_both_dims() {
        for idx in 0..10 {
            let d1 = random_density(11, idx, 1);
            assert_eq!(d1.dim(), 1);
            let d2 = random_density(11, idx, 2);
            assert_eq!(d2.dim(), 2);
            assert!(d2.log_at(&[0.0, 0.0]).is_finite());
        }
    }

    #[test]
    fn corpus_deterministic_in_seed_and_index() {
        let a = random_density(5, 3, 2);
        let b = random_density(5, 3, 2);
        let c = random_density(5, 4, 2);
        let x = [0.7, -1.1];
        assert_eq!(a.log_at(&x), b.log_at(&x));
        assert_ne!(a.log_at(&x), c.log_at(&x));
    }

    #[test]
    fn isotropize_centers_and_whitens() {
        let d = random_density(1, 0, 2);
        let spec = QuadratureSpec::default();
        let iso = isotropize(&d, &spec).unwrap();
        // Recompute moments of the whitened density.
        let r = iso.truncation_radius();
        let lo = vec![-r; 2];
        let hi = vec![r; 2];
        let inner = iso.clone();
        let (log_mass, _) = log_integrate_box(&move |y: &[f64]| inner.log_at(y), &lo, &hi, &spec);
        let shifted = |y: &[f64]| (iso.log_at(y) - log_mass).exp();
        for i in 0..2 {
            let m = integrate_box(&|y: &[f64]| y[i] * shifted(y), &lo, &hi, &spec).unwrap();
            assert!(m.abs() < 1e-4, "mean[{i}] = {m}");
            let v = integrate_box(&|y: &[f64]| y[i] * y[i] * shifted(y), &lo, &hi, &spec).unwrap();
            assert!((v - 1.0).abs() < 1e-3, "var[{i}] = {v}");
        }
    }

    #[test]
    fn radial_profiles_have_interior_t_p() {
        for idx in 0..8 {
            let f = random_radial_profile(21, idx);
            let t = super::super::t_p(&f, 5.0);
            assert!(t.is_ok(), "index {idx}: {t:?}");
        }
    }
}
