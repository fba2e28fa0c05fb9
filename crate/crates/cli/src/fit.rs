//! Power-law fits on scan rows: least squares of `log value = log C - kappa
//! log n`.

use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub c_hat: f64,
    pub kappa_hat: f64,
    pub r_squared: f64,
}

/// Fits `value ~ C n^{-kappa}` to `(n, value)` rows. Needs at least three rows
/// with distinct n, all values positive.
pub fn fit_power_law(rows: &[(f64, f64)]) -> Result<PowerLawFit, CliError> {
    let mut distinct: Vec<f64> = rows.iter().map(|(n, _)| *n).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(CliError::Config(format!(
            "power-law fit needs >= 3 distinct n values, got {}",
            distinct.len()
        )));
    }
    let bad: Vec<String> = rows
        .iter()
        .filter(|(_, v)| !(*v > 0.0))
        .map(|(n, v)| format!("(n = {n}, value = {v})"))
        .collect();
    if !bad.is_empty() {
        return Err(CliError::Config(format!(
            "power-law fit requires positive values; offending rows: {}",
            bad.join(", ")
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, v)| v.ln()).collect();
    let (intercept, slope, r_squared) = thinshell::stats::linear_fit(&xs, &ys);
    Ok(PowerLawFit {
        c_hat: intercept.exp(),
        kappa_hat: -slope,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_recovery() {
        let rows: Vec<(f64, f64)> = [16.0, 64.0, 256.0]
            .iter()
            .map(|&n: &f64| (n, 2.0 * n.powf(-0.5)))
            .collect();
        let fit = fit_power_law(&rows).unwrap();
        assert!((fit.c_hat - 2.0).abs() < 1e-12, "{}", fit.c_hat);
        assert!((fit.kappa_hat - 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_rows_rejected() {
        let rows = vec![(16.0, 1.0), (64.0, 0.5)];
        assert!(fit_power_law(&rows).is_err());
    }

    #[test]
    fn nonpositive_value_named() {
        let rows = vec![(16.0, 1.0), (64.0, 0.0), (256.0, 0.1)];
        let err = fit_power_law(&rows).unwrap_err().to_string();
        assert!(err.contains("n = 64"), "{err}");
    }

    #[test]
    fn noisy_recovery_within_tolerance() {
        // 5% multiplicative noise from a fixed pattern.
        let noise = [1.05, 0.95, 1.03, 0.97, 1.02];
        let rows: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .zip(noise.iter())
            .map(|(&n, &eps): (&f64, &f64)| (n, 3.0 * n.powf(-0.5) * eps))
            .collect();
        let fit = fit_power_law(&rows).unwrap();
        assert!((fit.kappa_hat - 0.5).abs() < 0.1, "{}", fit.kappa_hat);
    }

    #[test]
    fn scale_equivariance() {
        let rows: Vec<(f64, f64)> = [8.0, 32.0, 128.0, 512.0]
            .iter()
            .map(|&n: &f64| (n, 1.7 * n.powf(-0.37)))
            .collect();
        let scaled: Vec<(f64, f64)> = rows.iter().map(|&(n, v)| (n, 10.0 * v)).collect();
        let f1 = fit_power_law(&rows).unwrap();
        let f2 = fit_power_law(&scaled).unwrap();
        assert!((f2.c_hat / f1.c_hat - 10.0).abs() < 1e-10);
        assert!((f2.kappa_hat - f1.kappa_hat).abs() < 1e-10);
    }
}
