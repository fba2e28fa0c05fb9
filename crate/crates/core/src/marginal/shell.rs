//! Thin-shell statistics of |X|/sqrt(n): mean ratio, shell width, and tail
//! frequencies with Wilson confidence intervals. An accumulator form allows
//! chunked sampling without materializing the whole batch.

use crate::error::{Error, Result};
use crate::randomness::SampleBatch;
use crate::stats::wilson_interval;

#[derive(Debug, Clone)]
pub struct TailEntry {
    pub eps: f64,
    pub freq: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
}

#[derive(Debug, Clone)]
pub struct ThinShellStats {
    pub n: usize,
    pub sample_count: usize,
    /// Mean of |X| / sqrt(n).
    pub mean_norm_ratio: f64,
    /// Standard deviation of |X| / sqrt(n).
    pub shell_width: f64,
    /// Non-increasing in eps.
    pub tail_freq: Vec<TailEntry>,
}

/// Streaming accumulator over norm ratios; sums are kept around the centered
/// value (ratio - 1) to avoid cancellation at large sample counts.
#[derive(Debug, Clone)]
pub struct ThinShellAccumulator {
    n: usize,
    eps_grid: Vec<f64>,
    count: u64,
    sum_centered: f64,
    sum_centered_sq: f64,
    tail_hits: Vec<u64>,
}

impl ThinShellAccumulator {
    pub fn new(n: usize, eps_grid: &[f64]) -> Self {
        let mut grid = eps_grid.to_vec();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            n,
            tail_hits: vec![0; grid.len()],
            eps_grid: grid,
            count: 0,
            sum_centered: 0.0,
            sum_centered_sq: 0.0,
        }
    }

    pub fn push_norm(&mut self, norm: f64) {
        let ratio = norm / (self.n as f64).sqrt();
        let c = ratio - 1.0;
        self.count += 1;
        self.sum_centered += c;
        self.sum_centered_sq += c * c;
        for (i, &eps) in self.eps_grid.iter().enumerate() {
            if c.abs() >= eps {
                self.tail_hits[i] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &ThinShellAccumulator) {
        assert_eq!(self.n, other.n);
        assert_eq!(self.eps_grid, other.eps_grid);
        self.count += other.count;
        self.sum_centered += other.sum_centered;
        self.sum_centered_sq += other.sum_centered_sq;
        for (a, b) in self.tail_hits.iter_mut().zip(&other.tail_hits) {
            *a += b;
        }
    }

    pub fn finalize(&self) -> Result<ThinShellStats> {
        if self.count == 0 {
            return Err(Error::DegenerateBatch("empty batch in thin-shell statistics".into()));
        }
        let cnt = self.count as f64;
        let mean_c = self.sum_centered / cnt;
        let var = if self.count > 1 {
            ((self.sum_centered_sq - cnt * mean_c * mean_c) / (cnt - 1.0)).max(0.0)
        } else {
            0.0
        };
        let tail_freq = self
            .eps_grid
            .iter()
            .zip(&self.tail_hits)
            .map(|(&eps, &hits)| {
                let (ci_low, ci_high) = wilson_interval(hits, self.count, 1.96);
                TailEntry { eps, freq: hits as f64 / cnt, ci_low, ci_high, hits }
            })
            .collect();
        Ok(ThinShellStats {
            n: self.n,
            sample_count: self.count as usize,
            mean_norm_ratio: 1.0 + mean_c,
            shell_width: var.sqrt(),
            tail_freq,
        })
    }
}

/// Exact empirical thin-shell statistics of a batch.
pub fn thin_shell_stats(batch: &SampleBatch, eps_grid: &[f64]) -> Result<ThinShellStats> {
    let mut acc = ThinShellAccumulator::new(batch.dim(), eps_grid);
    for row in batch.rows() {
        acc.push_norm(row.iter().map(|t| t * t).sum::<f64>().sqrt());
    }
    acc.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{Provenance, SampleSource};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn single_sample_on_the_shell() {
        let n = 4;
        let mut point = vec![0.0; n];
        point[0] = (n as f64).sqrt();
        let b = SampleBatch::new(
            point,
            1,
            n,
            Provenance {
                seed: 0,
                source: "test".into(),
                chain: SampleSource::Synthetic,
                gaussian_v_added: 0.0,
                subspace: None,
            },
        )
        .unwrap();
        let s = thin_shell_stats(&b, &[0.1]).unwrap();
        assert_eq!(s.shell_width, 0.0);
        assert!((s.mean_norm_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_freq_non_increasing_in_eps() {
        let b = SampleBatch::gaussian(16, 20_000, 1.0, 3).unwrap();
        let s = thin_shell_stats(&b, &[0.05, 0.1, 0.2, 0.4]).unwrap();
        for w in s.tail_freq.windows(2) {
            assert!(w[1].freq <= w[0].freq);
        }
    }

    #[test]
    fn gaussian_tail_matches_chi_square_oracle() {
        let n = 100;
        let count = 200_000;
        let b = SampleBatch::gaussian(n, count, 1.0, 5).unwrap();
        let s = thin_shell_stats(&b, &[0.1]).unwrap();
        // P(||X|/sqrt(n) - 1| >= eps) = P(chi2 <= n (1-eps)^2) + P(chi2 >= n (1+eps)^2).
        let chi = ChiSquared::new(n as f64).unwrap();
        let oracle =
            chi.cdf(n as f64 * 0.9f64.powi(2)) + (1.0 - chi.cdf(n as f64 * 1.1f64.powi(2)));
        let entry = &s.tail_freq[0];
        assert!(
            entry.ci_low <= oracle && oracle <= entry.ci_high,
            "oracle {oracle} outside CI [{}, {}]",
            entry.ci_low,
            entry.ci_high
        );
    }

    #[test]
    fn accumulator_merge_matches_whole_batch() {
        let b = SampleBatch::gaussian(8, 5000, 1.0, 7).unwrap();
        let whole = thin_shell_stats(&b, &[0.1, 0.3]).unwrap();
        let mut a1 = ThinShellAccumulator::new(8, &[0.1, 0.3]);
        let mut a2 = ThinShellAccumulator::new(8, &[0.1, 0.3]);
        for (i, row) in b.rows().enumerate() {
            let norm = row.iter().map(|t| t * t).sum::<f64>().sqrt();
            if i < 2500 {
                a1.push_norm(norm);
            } else {
                a2.push_norm(norm);
            }
        }
        a1.merge(&a2);
        let merged = a1.finalize().unwrap();
        assert_eq!(merged.sample_count, whole.sample_count);
        assert!((merged.shell_width - whole.shell_width).abs() < 1e-15);
        assert_eq!(merged.tail_freq[0].hits, whole.tail_freq[0].hits);
    }
}
