//! Johnson-Lindenstrauss norm-preservation checks: the distribution of
//! `|Proj_E x| / |x|` over random subspaces against its sqrt(l/n) anchor.

use super::rotation::random_subspace_indexed;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct JlSummary {
    pub n: usize,
    pub l: usize,
    pub ratios: Vec<f64>,
}

impl JlSummary {
    pub fn anchor(&self) -> f64 {
        (self.l as f64 / self.n as f64).sqrt()
    }

    pub fn mean_ratio(&self) -> f64 {
        self.ratios.iter().sum::<f64>() / self.ratios.len() as f64
    }

    pub fn mean_ratio_sq(&self) -> f64 {
        self.ratios.iter().map(|r| r * r).sum::<f64>() / self.ratios.len() as f64
    }

    /// Frequency of `|ratio - sqrt(l/n)| >= rel_dev * sqrt(l/n)`.
    pub fn tail_freq(&self, rel_dev: f64) -> f64 {
        let anchor = self.anchor();
        let thr = rel_dev * anchor;
        let hits = self
            .ratios
            .iter()
            .filter(|&&r| (r - anchor).abs() >= thr)
            .count();
        hits as f64 / self.ratios.len() as f64
    }
}

/// Projects a fixed nonzero `x` onto `trials` independent random l-dimensional
/// subspaces and records the norm ratios.
pub fn jl_norm_ratio(x: &[f64], l: usize, trials: usize, seed: u64) -> Result<JlSummary> {
    let n = x.len();
    let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Precondition("jl_norm_ratio needs a nonzero point".into()));
    }
    let mut ratios = Vec::with_capacity(trials);
    for i in 0..trials {
        let s = random_subspace_indexed(n, l, seed, i as u64)?;
        let p = s.project_coords(x);
        let pn = p.iter().map(|t| t * t).sum::<f64>().sqrt();
        ratios.push(pn / norm);
    }
    Ok(JlSummary { n, l, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_space_ratio_is_one() {
        let x = [0.3, -1.0, 2.0];
        let s = jl_norm_ratio(&x, 3, 20, 1).unwrap();
        assert!(s.ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_point_rejected() {
        assert!(jl_norm_ratio(&[0.0, 0.0], 1, 10, 0).is_err());
    }
}
