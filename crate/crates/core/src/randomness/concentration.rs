//! Empirical concentration of Lipschitz statistics over Haar rotations: tail
//! frequencies around the median and a fitted exponential-in-(n eps^2 / L^2)
//! envelope.

use rayon::prelude::*;

use super::rotation::{haar_rotation_indexed, Rotation};
use crate::stats::linear_fit;

#[derive(Debug, Clone)]
pub struct ConcentrationTable {
    pub n: usize,
    pub trials: usize,
    pub lipschitz: f64,
    pub median: f64,
    pub mean: f64,
    pub variance: f64,
    /// (eps, empirical frequency of |f(U) - median| >= eps).
    pub tails: Vec<(f64, f64)>,
    /// Fit of `freq ~ C exp(-c n eps^2 / L^2)` over the positive-frequency
    /// rows: (C, c), when at least two such rows exist.
    pub envelope_fit: Option<(f64, f64)>,
}

/// Draws `trials` Haar rotations, evaluates the statistic, and tabulates tail
/// frequencies per epsilon. `lipschitz` is supplied by the caller; it only
/// scales the fitted envelope.
pub fn so_concentration_tail<F>(
    n: usize,
    statistic: F,
    lipschitz: f64,
    trials: usize,
    eps_grid: &[f64],
    seed: u64,
) -> ConcentrationTable
where
    F: Fn(&Rotation) -> f64 + Sync,
{
    assert!(trials >= 2);
    assert!(lipschitz > 0.0);
    let mut values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| statistic(&haar_rotation_indexed(n, seed, i as u64)))
        .collect();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let variance =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (trials as f64 - 1.0);
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if trials % 2 == 0 {
        0.5 * (values[trials / 2 - 1] + values[trials / 2])
    } else {
        values[trials / 2]
    };
    let tails: Vec<(f64, f64)> = eps_grid
        .iter()
        .map(|&eps| {
            let hits = values.iter().filter(|&&v| (v - median).abs() >= eps).count();
            (eps, hits as f64 / trials as f64)
        })
        .collect();
    // ln freq = ln C - c * (n eps^2 / L^2) on the rows with freq > 0.
    let xs: Vec<f64> = tails
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|(e, _)| n as f64 * e * e / (lipschitz * lipschitz))
        .collect();
    let ys: Vec<f64> = tails
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|(_, f)| f.ln())
        .collect();
    let envelope_fit = if xs.len() >= 2 {
        let (intercept, slope, _) = linear_fit(&xs, &ys);
        Some((intercept.exp(), -slope))
    } else {
        None
    };
    ConcentrationTable { n, trials, lipschitz, median, mean, variance, tails, envelope_fit }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_statistic_has_empty_tails() {
        let t = so_concentration_tail(8, |_| 1.0, 1.0, 100, &[0.01, 0.1], 3);
        assert!(t.tails.iter().all(|(_, f)| *f == 0.0));
        assert_eq!(t.variance, 0.0);
    }

    #[test]
    fn sphere_coordinate_variance_matches_one_over_n() {
        // <U e1, e1> is the first coordinate of a uniform sphere point: exact
        // variance 1/n.
        let n = 64;
        let t = so_concentration_tail(
            n,
            |u| u.matrix()[(0, 0)],
            1.0,
            3000,
            &[0.05, 0.1, 0.2],
            7,
        );
        let target = 1.0 / n as f64;
        assert!(
            t.variance > target / 2.0 && t.variance < target * 2.0,
            "variance {} vs 1/n {}",
            t.variance,
            target
        );
    }

    #[test]
    fn tails_shrink_with_dimension() {
        let eps = [0.2];
        let t16 = so_concentration_tail(16, |u| u.matrix()[(0, 0)], 1.0, 1500, &eps, 11);
        let t64 = so_concentration_tail(64, |u| u.matrix()[(0, 0)], 1.0, 1500, &eps, 11);
        assert!(t64.tails[0].1 <= t16.tails[0].1, "{} vs {}", t64.tails[0].1, t16.tails[0].1);
    }
}
