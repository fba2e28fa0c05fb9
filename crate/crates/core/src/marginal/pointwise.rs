//! Binned pointwise density-ratio deviation of a 1-D batch against the
//! standard Gaussian: `max over bins of |empirical/gaussian - 1|`, with the
//! binomial noise floor reported per bin.
//!
//! Density estimation past ~3 sigma needs prohibitive sample counts, so the
//! probe window is capped; the cap is recorded in the result.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::randomness::SampleBatch;

pub const DEFAULT_BIN_WIDTH: f64 = 0.125;

#[derive(Debug, Clone)]
pub struct BinRatio {
    pub center: f64,
    pub count: u64,
    /// empirical mass / gaussian mass - 1.
    pub deviation: f64,
    /// Relative binomial standard error of the ratio.
    pub noise_floor: f64,
}

#[derive(Debug, Clone)]
pub struct PointwiseRatio {
    pub t_cap: f64,
    pub bin_width: f64,
    pub bins: Vec<BinRatio>,
    pub max_abs_deviation: f64,
    pub max_noise_floor: f64,
}

impl PointwiseRatio {
    /// The bin whose interval contains `t`.
    pub fn bin_at(&self, t: f64) -> Option<&BinRatio> {
        self.bins
            .iter()
            .find(|b| t >= b.center - self.bin_width / 2.0 && t < b.center + self.bin_width / 2.0)
    }
}

pub fn pointwise_ratio(batch: &SampleBatch, t_cap: f64) -> Result<PointwiseRatio> {
    if batch.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: batch.dim() });
    }
    if !(t_cap > 0.0) {
        return Err(Error::Precondition(format!(
            "degenerate probe range: t_cap = {t_cap}"
        )));
    }
    if t_cap > 3.0 {
        return Err(Error::Precondition(
            "t_cap > 3 needs prohibitive sample sizes for density estimation".into(),
        ));
    }
    if batch.count() < 100_000 {
        return Err(Error::InsufficientData(format!(
            "pointwise_ratio needs >= 1e5 samples, got {}",
            batch.count()
        )));
    }
    let width = DEFAULT_BIN_WIDTH;
    let bins_n = ((2.0 * t_cap / width).ceil() as usize).max(1);
    let lo = -t_cap;
    let mut counts = vec![0u64; bins_n];
    for row in batch.rows() {
        let t = row[0];
        if t >= lo && t < lo + bins_n as f64 * width {
            let b = (((t - lo) / width) as usize).min(bins_n - 1);
            counts[b] += 1;
        }
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let total = batch.count() as f64;
    let mut bins = Vec::with_capacity(bins_n);
    let mut max_abs = 0.0f64;
    let mut max_noise = 0.0f64;
    for (b, &c) in counts.iter().enumerate() {
        let a = lo + b as f64 * width;
        let center = a + width / 2.0;
        if c == 0 {
            return Err(Error::InsufficientData(format!(
                "empty bin centered at {center:.4} inside the probe range"
            )));
        }
        let p = normal.cdf(a + width) - normal.cdf(a);
        let emp = c as f64 / total;
        let deviation = emp / p - 1.0;
        let noise_floor = ((1.0 - p) / (total * p)).sqrt();
        max_abs = max_abs.max(deviation.abs());
        max_noise = max_noise.max(noise_floor);
        bins.push(BinRatio { center, count: c, deviation, noise_floor });
    }
    Ok(PointwiseRatio {
        t_cap,
        bin_width: width,
        bins,
        max_abs_deviation: max_abs,
        max_noise_floor: max_noise,
    })
}
