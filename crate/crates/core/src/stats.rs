//! Shared statistical helpers: Kolmogorov-Smirnov tests, Wilson confidence
//! intervals, chi-square binned uniformity, and ordinary least squares on a
//! line.

/// Asymptotic CDF of the Kolmogorov distribution, via the alternating series.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if (k as i64) % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against a CDF; returns (statistic, asymptotic p-value).
pub fn ks_one_sample(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    let p = 1.0 - kolmogorov_cdf(n.sqrt() * d);
    (d, p)
}

/// Two-sample KS test; returns (statistic, asymptotic p-value).
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    let (na, nb) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let p = 1.0 - kolmogorov_cdf(ne.sqrt() * d);
    (d, p)
}

/// Wilson score interval for a binomial proportion at z standard deviations.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Chi-square statistic for observed counts against expected probabilities,
/// plus the p-value from the chi-square law with `counts.len() - 1` dof.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> (f64, f64) {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    for (&c, &p) in counts.iter().zip(probs) {
        let e = n as f64 * p;
        stat += (c as f64 - e).powi(2) / e;
    }
    let dof = (counts.len() - 1) as f64;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let law = ChiSquared::new(dof).expect("dof > 0");
    (stat, 1.0 - law.cdf(stat))
}

/// OLS fit y = intercept + slope * x; returns (intercept, slope, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (intercept, slope, r2)
}

/// Expected range (max minus min) of `m` iid standard normals, via the Blom
/// approximation of the expected extreme order statistic.
pub fn expected_normal_range(m: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    if m < 2 {
        return 0.0;
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let q = (m as f64 - 0.375) / (m as f64 + 0.25);
    2.0 * normal.inverse_cdf(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_known_values() {
        // K(0.8276) ~ 0.5 (median of the Kolmogorov law).
        assert!((kolmogorov_cdf(0.8276) - 0.5).abs() < 1e-3);
        assert!(kolmogorov_cdf(2.0) > 0.999);
    }

    #[test]
    fn ks_uniform_self_test() {
        // Deterministic van der Corput-like sequence is uniform enough to pass.
        let mut xs: Vec<f64> = (0..2048)
            .map(|i| {
                let mut v = 0.0;
                let mut base = 0.5;
                let mut k = i;
                while k > 0 {
                    v += base * (k % 2) as f64;
                    k /= 2;
                    base *= 0.5;
                }
                v
            })
            .collect();
        let (_, p) = ks_one_sample(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn wilson_contains_truth_for_fair_coin() {
        let (lo, hi) = wilson_interval(480, 1000, 1.96);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(lo > 0.4 && hi < 0.6);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (b, m, r2) = linear_fit(&xs, &ys);
        assert!((b - 3.0).abs() < 1e-12);
        assert!((m + 2.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_range_grows_slowly() {
        let r8 = expected_normal_range(8);
        let r16 = expected_normal_range(16);
        assert!(r8 > 2.5 && r8 < 3.2, "r8 = {r8}");
        assert!(r16 > r8);
    }
}
