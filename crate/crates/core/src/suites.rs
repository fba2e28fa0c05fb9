//! Property suites over the randomized log-concave corpus: barycenter and
//! level-set bounds, decay envelopes, monotone reweighting, tilted moments,
//! convolved gradient bounds, log-Laplace convexity and the `t_p` mass window.
//!
//! Each suite returns an outcome with a violation list (empty = pass) and any
//! fitted constants worth logging. Universal constants in the underlying
//! statements are never asserted against; suites check the stated shapes and
//! log the fitted values.

use crate::error::Result;
use crate::logconcave::{
    density_landmarks, grad_log_convolved, isotropize, log_laplace, mass_window,
    monotone_reweight_check, random_decreasing_profile, random_density, random_radial_profile,
    t_p, tilted_moments, LogConcaveDensity,
};
use crate::quad::QuadratureSpec;
use crate::randomness::stream_rng;
use crate::stats::linear_fit;
use rand::Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub violations: Vec<String>,
    /// Fitted constants and extreme statistics, for the report log.
    pub logged: Vec<(String, f64)>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn suite_spec() -> QuadratureSpec {
    // Corpus property margins are >= 1e-1 in log units; 1e-6 integrals leave
    // the quadrature error orders of magnitude below every asserted slack
    // while keeping the 2-D adaptive cost affordable.
    QuadratureSpec::default().with_tol(1e-6)
}

fn corpus_density(seed: u64, index: u64) -> LogConcaveDensity {
    // Alternate dimensions 1 and 2 across the corpus.
    let dim = if index % 2 == 0 { 1 } else { 2 };
    random_density(seed, index, dim)
}

/// Barycenter bound: f(barycenter) >= e^{-dim} sup f on every corpus member.
pub fn fradelizi_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let spec = suite_spec();
    let margins: Vec<Result<(usize, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = corpus_density(seed, i as u64);
            let lm = density_landmarks(&d, &spec)?;
            let margin = d.log_at(&lm.barycenter) - (lm.sup_log - d.dim() as f64);
            Ok((d.dim(), margin))
        })
        .collect();
    let mut violations = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for (i, r) in margins.into_iter().enumerate() {
        let (dim, margin) = r?;
        worst_margin = worst_margin.min(margin);
        if margin < -1e-6 {
            violations.push(format!(
                "instance {i} (dim {dim}): log f(barycenter) - (log sup - n) = {margin:.3e}"
            ));
        }
    }
    Ok(SuiteOutcome {
        name: "fradelizi-barycenter".into(),
        cases: count,
        violations,
        logged: vec![("worst_log_margin".into(), worst_margin)],
    })
}

/// Level-set mass: the set {f >= e^{-10 n} sup f} holds at least 1 - e^{-n} of
/// the mass (dimension 2 corpus; the statement needs n >= 2).
pub fn level_set_mass_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let spec = suite_spec();
    let masses: Vec<Result<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = random_density(seed, i as u64, 2);
            Ok(density_landmarks(&d, &spec)?.level_set_mass_10n)
        })
        .collect();
    let bound = 1.0 - (-2.0f64).exp() - 10.0 * spec.abs_tol;
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, r) in masses.into_iter().enumerate() {
        let mass = r?;
        worst = worst.min(mass);
        if mass < bound {
            violations.push(format!("instance {i}: level-set mass {mass:.6} below {bound:.6}"));
        }
    }
    Ok(SuiteOutcome {
        name: "level-set-mass".into(),
        cases: count,
        violations,
        logged: vec![("min_mass".into(), worst)],
    })
}

/// Level-set radius for isotropic members: {f >= e^{-n} f(0)} stays inside a
/// ball of radius <= 100 n. The max ratio radius/dim is logged.
pub fn level_set_radius_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let spec = suite_spec();
    let ratios: Vec<Result<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = corpus_density(seed, i as u64);
            let iso = isotropize(&d, &spec)?;
            let lm = density_landmarks(&iso, &spec)?;
            Ok(lm.level_set_radius_e_n / iso.dim() as f64)
        })
        .collect();
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for (i, r) in ratios.into_iter().enumerate() {
        let ratio = r?;
        max_ratio = max_ratio.max(ratio);
        if ratio > 100.0 {
            violations.push(format!("instance {i}: radius/dim = {ratio:.3}"));
        }
    }
    Ok(SuiteOutcome {
        name: "level-set-radius".into(),
        cases: count,
        violations,
        logged: vec![("max_radius_over_dim".into(), max_ratio)],
    })
}

/// Decay envelope for isotropic members: r -> max over directions of
/// log f(r theta) decreases past a threshold radius, and f(x) <= f(0) for
/// |x| = 10 dim. The fitted decay slope is logged.
pub fn decay_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let spec = suite_spec();
    let results: Vec<Result<(Vec<String>, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut violations = Vec::new();
            let mut min_slope: f64 = f64::INFINITY;
            let d = corpus_density(seed, i as u64);
            let iso = isotropize(&d, &spec)?;
            let dim = iso.dim();
            let dirs: Vec<Vec<f64>> = if dim == 1 {
                vec![vec![1.0], vec![-1.0]]
            } else {
                (0..32)
                    .map(|j| {
                        let a = 2.0 * std::f64::consts::PI * j as f64 / 32.0;
                        vec![a.cos(), a.sin()]
                    })
                    .collect()
            };
            let envelope = |r: f64| -> f64 {
                dirs.iter()
                    .map(|u| iso.log_at(&u.iter().map(|c| c * r).collect::<Vec<_>>()))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let f0 = iso.log_at(&vec![0.0; dim]);
            let r10 = 10.0 * dim as f64;
            if envelope(r10) > f0 {
                violations.push(format!(
                    "instance {i}: max log f at |x| = 10 dim exceeds log f(0)"
                ));
            }
            // Envelope values past the bulk; fit the slope on the decreasing part.
            let radii: Vec<f64> = (1..=8).map(|k| 2.0 * dim as f64 * k as f64).collect();
            let vals: Vec<f64> = radii.iter().map(|&r| envelope(r)).collect();
            let finite: Vec<(f64, f64)> = radii
                .iter()
                .zip(&vals)
                .filter(|(_, v)| v.is_finite())
                .map(|(&r, &v)| (r, v))
                .collect();
            if finite.len() >= 3 {
                let xs: Vec<f64> = finite.iter().map(|(r, _)| *r).collect();
                let ys: Vec<f64> = finite.iter().map(|(_, v)| *v).collect();
                let (_, slope, _) = linear_fit(&xs, &ys);
                min_slope = min_slope.min(-slope);
                if slope >= 0.0 {
                    violations
                        .push(format!("instance {i}: envelope slope {slope:.3e} not negative"));
                }
                for w in finite.windows(2) {
                    if w[1].1 > w[0].1 + 1e-9 {
                        violations.push(format!(
                            "instance {i}: envelope increases between r = {} and r = {}",
                            w[0].0, w[1].0
                        ));
                        break;
                    }
                }
            }
            Ok((violations, min_slope))
        })
        .collect();
    let mut violations = Vec::new();
    let mut min_slope: f64 = f64::INFINITY;
    for r in results {
        let (mut v, slope) = r?;
        violations.append(&mut v);
        min_slope = min_slope.min(slope);
    }
    Ok(SuiteOutcome {
        name: "decay-envelope".into(),
        cases: count,
        violations,
        logged: vec![("fitted_decay_rate_c".into(), min_slope)],
    })
}

/// Monotone reweighting: lhs <= rhs for random (f, g) pairs with g positive
/// non-increasing.
pub fn monotone_suite(pairs: usize, seed: u64) -> Result<SuiteOutcome> {
    let results: Vec<Result<(f64, f64)>> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let f = random_radial_profile(seed, i as u64);
            let g = random_decreasing_profile(seed, i as u64);
            monotone_reweight_check(&f, &g)
        })
        .collect();
    let mut violations = Vec::new();
    let mut worst_gap = f64::INFINITY;
    for (i, r) in results.into_iter().enumerate() {
        let (lhs, rhs) = r?;
        let gap = rhs - lhs;
        worst_gap = worst_gap.min(gap);
        if lhs > rhs + 1e-6 * rhs.abs().max(1.0) {
            violations.push(format!("pair {i}: lhs {lhs:.9} > rhs {rhs:.9}"));
        }
    }
    Ok(SuiteOutcome {
        name: "monotone-reweighting".into(),
        cases: pairs,
        violations,
        logged: vec![("min_gap".into(), worst_gap)],
    })
}

/// Tilted moments on isotropic instances: E|X-x|^2 <= n + |x|^2 and
/// |EX - x| <= sqrt(n) + |x|.
pub fn tilted_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    // Bound slack is ~0.5; 1e-5 integrals are ample.
    let spec = suite_spec().with_tol(1e-5);
    let results: Vec<Result<(usize, Vec<f64>, f64, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = corpus_density(seed, i as u64);
            let iso = isotropize(&d, &spec)?;
            let dim = iso.dim();
            let mut rng = stream_rng(seed, "tilted-suite", i as u64);
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let v = [0.25, 0.5, 1.0, 2.0][i % 4];
            let (second, shift) = tilted_moments(&iso, &x, v, &spec)?;
            Ok((dim, x, second, shift))
        })
        .collect();
    let mut violations = Vec::new();
    let mut max_second_slack: f64 = f64::NEG_INFINITY;
    for (i, r) in results.into_iter().enumerate() {
        let (dim, x, second, shift) = r?;
        let x2: f64 = x.iter().map(|t| t * t).sum();
        let tol = 1e-6;
        max_second_slack = max_second_slack.max(second - (dim as f64 + x2));
        if second > dim as f64 + x2 + tol {
            violations.push(format!(
                "instance {i}: E|X-x|^2 = {second:.6} > n + |x|^2 = {:.6}",
                dim as f64 + x2
            ));
        }
        if shift > (dim as f64).sqrt() + x2.sqrt() + tol {
            violations.push(format!(
                "instance {i}: |EX - x| = {shift:.6} > sqrt(n) + |x|"
            ));
        }
    }
    Ok(SuiteOutcome {
        name: "tilted-moments".into(),
        cases: count,
        violations,
        logged: vec![("max_second_moment_slack".into(), max_second_slack)],
    })
}

/// Convolved log-gradient bound: max over the corpus and probe points of
/// |grad log g| v / sqrt(n) is finite; asserted <= 100 for v in {0.25, 1}.
pub fn gradient_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    // The suite asserts a bound of 100, so 1e-6 quadrature accuracy is ample
    // and keeps the nested convolution integrals affordable.
    let spec = suite_spec().with_tol(1e-6);
    let results: Vec<Result<Vec<(f64, f64, f64)>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = corpus_density(seed, i as u64);
            let iso = isotropize(&d, &spec)?;
            let dim = iso.dim();
            let sd = (dim as f64).sqrt();
            let mut rng = stream_rng(seed, "gradient-suite", i as u64);
            let mut out = Vec::new();
            for &v in &[0.25, 1.0] {
                for &scale in &[0.0, 1.0, 5.0, 10.0] {
                    let dir: Vec<f64> = if dim == 1 {
                        vec![if rng.random::<bool>() { 1.0 } else { -1.0 }]
                    } else {
                        let a = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                        vec![a.cos(), a.sin()]
                    };
                    let x: Vec<f64> = dir.iter().map(|c| c * scale * sd * 0.999).collect();
                    let grad = grad_log_convolved(&iso, v, &x, &spec)?;
                    let norm = grad.iter().map(|t| t * t).sum::<f64>().sqrt();
                    out.push((v, scale * sd, norm * v / sd));
                }
            }
            Ok(out)
        })
        .collect();
    let mut violations = Vec::new();
    let mut max_scaled: f64 = 0.0;
    for (i, r) in results.into_iter().enumerate() {
        for (v, radius, scaled) in r? {
            max_scaled = max_scaled.max(scaled);
            if !scaled.is_finite() || scaled > 100.0 {
                violations.push(format!(
                    "instance {i}, v = {v}, |x| = {radius:.2}: scaled gradient {scaled:.3}"
                ));
            }
        }
    }
    Ok(SuiteOutcome {
        name: "convolved-gradient".into(),
        cases: count,
        violations,
        logged: vec![("max_grad_v_over_sqrt_n".into(), max_scaled)],
    })
}

/// Midpoint convexity of the logarithmic Laplace transform on probe triples.
pub fn log_laplace_convexity_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    // Convexity margins are checked to 1e-6, so 1e-7 integrals suffice.
    let spec = suite_spec().with_tol(1e-7);
    let results: Vec<Result<Vec<f64>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = corpus_density(seed, i as u64);
            let dim = d.dim();
            let decay = d.decay_hint().unwrap_or(0.3);
            let mut rng = stream_rng(seed, "laplace-suite", i as u64);
            let mut margins = Vec::new();
            for _ in 0..3 {
                // Tilts well inside the decay ball keep all three transforms
                // finite without ballooning the truncation box.
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                    let r: f64 = rng.random_range(0.0..0.35 * decay);
                    if dim == 1 {
                        vec![if rng.random::<bool>() { r } else { -r }]
                    } else {
                        let a = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                        vec![r * a.cos(), r * a.sin()]
                    }
                };
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                let ux = log_laplace(&d, &x, &spec)?;
                let uy = log_laplace(&d, &y, &spec)?;
                let um = log_laplace(&d, &mid, &spec)?;
                margins.push(0.5 * (ux + uy) - um);
            }
            Ok(margins)
        })
        .collect();
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, r) in results.into_iter().enumerate() {
        for margin in r? {
            worst = worst.min(margin);
            if margin < -1e-6 {
                violations.push(format!("instance {i}: midpoint convexity margin {margin:.3e}"));
            }
        }
    }
    Ok(SuiteOutcome {
        name: "log-laplace-convexity".into(),
        cases: count,
        violations,
        logged: vec![("worst_convexity_margin".into(), worst)],
    })
}

/// t_p solvability and the mass-window shape on corpus radial profiles:
/// windows are monotone in eps, and 1 - fraction decays like C exp(-c eps^2 p)
/// with the fitted (C, c) logged.
pub fn tp_mass_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut violations = Vec::new();
    let mut fit_xs = Vec::new();
    let mut fit_ys = Vec::new();
    for i in 0..count {
        let f = random_radial_profile(seed, i as u64);
        for &p in &[2.0, 5.0, 10.0] {
            match t_p(&f, p) {
                Ok(tp) => {
                    if !(tp > 0.0) {
                        violations.push(format!("profile {i}, p = {p}: nonpositive t_p"));
                        continue;
                    }
                    let mut prev = -1.0;
                    for &eps in &[0.1, 0.2, 0.4, 0.7, 1.0] {
                        let frac = mass_window(&f, p, eps)?;
                        if frac < prev - 1e-9 {
                            violations.push(format!(
                                "profile {i}, p = {p}: window mass decreased at eps = {eps}"
                            ));
                        }
                        prev = frac;
                        let miss = 1.0 - frac;
                        if miss > 1e-12 && miss < 1.0 {
                            fit_xs.push(eps * eps * p);
                            fit_ys.push(miss.ln());
                        }
                    }
                }
                Err(crate::error::Error::NoRoot { .. }) => {
                    // Profiles whose crossing falls outside the support are
                    // skipped, not failed; the generator makes them rare.
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut logged = Vec::new();
    if fit_xs.len() >= 3 {
        let (intercept, slope, r2) = linear_fit(&fit_xs, &fit_ys);
        logged.push(("mass_window_c_hat".into(), intercept.exp()));
        logged.push(("mass_window_c_rate".into(), -slope));
        logged.push(("mass_window_fit_r2".into(), r2));
        if slope >= 0.0 {
            violations.push(format!(
                "window miss mass does not decay in eps^2 p (slope {slope:.3e})"
            ));
        }
    }
    Ok(SuiteOutcome {
        name: "tp-mass-window".into(),
        cases: count,
        violations,
        logged,
    })
}

/// Runs all lemma suites at the standard acceptance sizes.
pub fn run_all(seed: u64) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        fradelizi_suite(200, seed)?,
        level_set_mass_suite(200, seed)?,
        level_set_radius_suite(60, seed)?,
        decay_suite(60, seed)?,
        monotone_suite(500, seed)?,
        tilted_suite(200, seed)?,
        gradient_suite(24, seed)?,
        log_laplace_convexity_suite(60, seed)?,
        tp_mass_suite(80, seed)?,
    ])
}
