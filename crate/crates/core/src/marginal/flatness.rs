//! Radial flatness of a smoothed projected marginal: log-density estimates by
//! ball counting at probe points `radius x direction`, and the maximal angular
//! oscillation across same-radius probes.
//!
//! Ball counting keeps the bias sign-controlled and makes the noise floor an
//! exact binomial quantity; the reported floor for an angular range is the
//! expected range of the per-probe noise.

use crate::error::{Error, Result};
use crate::randomness::SampleBatch;
use crate::stats::expected_normal_range;

#[derive(Debug, Clone)]
pub struct FlatnessParams {
    pub k: usize,
    /// Smoothing-exponent metadata from the experiment family; recorded in
    /// reports, not used by the estimator.
    pub alpha: f64,
    pub radius_cap: f64,
    pub probe_radii: Vec<f64>,
    pub directions_per_radius: usize,
}

impl FlatnessParams {
    pub fn default_for(k: usize) -> Self {
        let sk = (k as f64).sqrt();
        Self {
            k,
            alpha: 0.0,
            radius_cap: 10.0 * sk,
            probe_radii: vec![0.5 * sk, sk, 1.5 * sk, 2.0 * sk],
            directions_per_radius: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.k > 3 {
            return Err(Error::Precondition(format!(
                "flatness probes support k in {{2, 3}}, got {}",
                self.k
            )));
        }
        if !(self.radius_cap > 0.0) {
            return Err(Error::Precondition("radius_cap must be positive".into()));
        }
        if self.probe_radii.iter().any(|&r| !(r > 0.0) || r > self.radius_cap) {
            return Err(Error::Precondition(
                "probe radii must be positive and below the radius cap".into(),
            ));
        }
        if self.directions_per_radius < 2 {
            return Err(Error::Precondition("need at least 2 directions per radius".into()));
        }
        Ok(())
    }

    pub fn directions(&self) -> Vec<Vec<f64>> {
        let m = self.directions_per_radius;
        match self.k {
            2 => (0..m)
                .map(|j| {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            _ => {
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
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadiusRow {
    pub radius: f64,
    /// max_j - min_j of the estimated log density over the directions.
    pub range: f64,
    /// Expected range of the per-probe counting noise at this radius.
    pub noise_floor: f64,
    pub min_count: u64,
    pub log_estimates: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FlatnessReport {
    pub params_k: usize,
    pub oscillation: f64,
    pub argmax_radius: f64,
    /// Noise floor at the radius achieving the oscillation.
    pub noise_floor: f64,
    pub per_radius: Vec<RadiusRow>,
}

/// Counting accumulator so scans can stream chunks instead of materializing
/// the batch.
#[derive(Debug, Clone)]
pub struct FlatnessAccumulator {
    params: FlatnessParams,
    probes: Vec<(f64, Vec<f64>)>,
    ball_radii: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl FlatnessAccumulator {
    pub fn new(params: FlatnessParams) -> Result<Self> {
        params.validate()?;
        let dirs = params.directions();
        let mut probes = Vec::new();
        let mut ball_radii = Vec::new();
        for &r in &params.probe_radii {
            for d in &dirs {
                probes.push((r, d.iter().map(|c| c * r).collect()));
                ball_radii.push(0.2 * r);
            }
        }
        let counts = vec![0u64; probes.len()];
        Ok(Self { params, probes, ball_radii, counts, total: 0 })
    }

    pub fn push_point(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.params.k);
        self.total += 1;
        for (i, (_, center)) in self.probes.iter().enumerate() {
            let h = self.ball_radii[i];
            let mut d2 = 0.0;
            for (a, b) in center.iter().zip(p) {
                let d = a - b;
                d2 += d * d;
                if d2 > h * h {
                    break;
                }
            }
            if d2 <= h * h {
                self.counts[i] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &FlatnessAccumulator) {
        assert_eq!(self.probes.len(), other.probes.len());
        self.total += other.total;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn finalize(&self) -> Result<FlatnessReport> {
        let k = self.params.k;
        let m = self.params.directions_per_radius;
        let unit_ball_vol = match k {
            2 => std::f64::consts::PI,
            _ => 4.0 * std::f64::consts::PI / 3.0,
        };
        let range_coeff = expected_normal_range(m);
        let mut per_radius = Vec::with_capacity(self.params.probe_radii.len());
        for (ri, &radius) in self.params.probe_radii.iter().enumerate() {
            let mut logs = Vec::with_capacity(m);
            let mut worst_sigma = 0.0f64;
            let mut min_count = u64::MAX;
            for j in 0..m {
                let idx = ri * m + j;
                let c = self.counts[idx];
                min_count = min_count.min(c);
                if c < 50 {
                    return Err(Error::InsufficientData(format!(
                        "probe ball at radius {radius:.3}, direction {j} holds {c} < 50 samples"
                    )));
                }
                let h = self.ball_radii[idx];
                let vol = unit_ball_vol * h.powi(k as i32);
                logs.push((c as f64 / (self.total as f64 * vol)).ln());
                // Poisson noise on the log estimate: 1/sqrt(count).
                worst_sigma = worst_sigma.max(1.0 / (c as f64).sqrt());
            }
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = logs.iter().cloned().fold(f64::INFINITY, f64::min);
            per_radius.push(RadiusRow {
                radius,
                range: max - min,
                noise_floor: range_coeff * worst_sigma,
                min_count,
                log_estimates: logs,
            });
        }
        let best = per_radius
            .iter()
            .max_by(|a, b| a.range.partial_cmp(&b.range).unwrap())
            .expect("at least one radius");
        Ok(FlatnessReport {
            params_k: k,
            oscillation: best.range,
            argmax_radius: best.radius,
            noise_floor: best.noise_floor,
            per_radius,
        })
    }
}

/// Flatness of a projected-and-smoothed batch. The provenance must show a
/// positive smoothing variance, matching the convolution hypothesis behind the
/// radial-flatness statements this probes.
pub fn radial_flatness(batch: &SampleBatch, params: &FlatnessParams) -> Result<FlatnessReport> {
    if batch.dim() != params.k {
        return Err(Error::DimensionMismatch { expected: params.k, got: batch.dim() });
    }
    if batch.provenance().gaussian_v_added <= 0.0 {
        return Err(Error::Precondition(
            "radial_flatness requires a smoothed batch (gaussian_v_added > 0)".into(),
        ));
    }
    let mut acc = FlatnessAccumulator::new(params.clone())?;
    for row in batch.rows() {
        acc.push_point(row);
    }
    acc.finalize()
}
