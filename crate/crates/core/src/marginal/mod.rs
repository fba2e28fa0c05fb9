//! Statistics of projected sample batches: subspace projection, total
//! variation against Gaussians, moment-matched variance, pointwise density
//! ratios, thin-shell concentration and radial flatness.

mod flatness;
mod pointwise;
mod shell;
mod tv;

pub use flatness::{radial_flatness, FlatnessAccumulator, FlatnessParams, FlatnessReport, RadiusRow};
pub use pointwise::{pointwise_ratio, BinRatio, PointwiseRatio};
pub use shell::{thin_shell_stats, TailEntry, ThinShellAccumulator, ThinShellStats};
pub use tv::{best_fit_variance, tv_radial_to_gaussian, tv_to_gaussian, TVEstimate};

use crate::error::{Error, Result};
use crate::randomness::{SampleBatch, Subspace};

/// Projects every row onto the subspace, expressed in its frame coordinates;
/// provenance is extended with the subspace id.
pub fn project(batch: &SampleBatch, subspace: &Subspace) -> Result<SampleBatch> {
    if batch.dim() != subspace.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: batch.dim(),
            got: subspace.ambient_dim(),
        });
    }
    let l = subspace.dim();
    let mut points = Vec::with_capacity(batch.count() * l);
    let frame = subspace.frame();
    for row in batch.rows() {
        for j in 0..l {
            let mut acc = 0.0;
            for i in 0..batch.dim() {
                acc += frame[(i, j)] * row[i];
            }
            points.push(acc);
        }
    }
    let mut provenance = batch.provenance().clone();
    provenance.subspace = Some(subspace.id());
    SampleBatch::new(points, batch.count(), l, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{random_subspace, SampleBatch};

    #[test]
    fn coordinate_projection_truncates() {
        let b = SampleBatch::gaussian(4, 50, 1.0, 1).unwrap();
        let s = Subspace::coordinate(4, 2);
        let p = project(&b, &s).unwrap();
        for (orig, proj) in b.rows().zip(p.rows()) {
            assert_eq!(&orig[..2], proj);
        }
        assert!(p.provenance().subspace.is_some());
    }

    #[test]
    fn gaussian_projection_keeps_unit_variance() {
        let n = 16;
        let count = 100_000;
        let b = SampleBatch::gaussian(n, count, 1.0, 2).unwrap();
        let s = random_subspace(n, 2, 3).unwrap();
        let p = project(&b, &s).unwrap();
        for j in 0..2 {
            let mut var = 0.0;
            for row in p.rows() {
                var += row[j] * row[j];
            }
            var /= count as f64;
            let se = 3.0 * 2f64.sqrt() / (count as f64).sqrt();
            assert!((var - 1.0).abs() <= se, "coord {j} var {var}");
        }
    }

    #[test]
    fn projection_contracts_every_row() {
        let b = SampleBatch::gaussian(8, 500, 1.0, 4).unwrap();
        let s = random_subspace(8, 3, 5).unwrap();
        let p = project(&b, &s).unwrap();
        for (orig, proj) in b.rows().zip(p.rows()) {
            let no: f64 = orig.iter().map(|t| t * t).sum::<f64>().sqrt();
            let np: f64 = proj.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert!(np <= no + 1e-12);
        }
    }
}
