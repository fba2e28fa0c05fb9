//! Sample batches: row-major point matrices with full provenance (seed, source,
//! chain parameters, Gaussian smoothing applied), plus CSV/JSON persistence.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::streams::stream_rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Exact,
    Chain { burn_in: usize, thinning: usize },
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// Body or density the points were drawn from.
    pub source: String,
    pub chain: SampleSource,
    /// Total Gaussian variance added on top of the base law: the batch is
    /// distributed as `base * gamma_n[v]`.
    pub gaussian_v_added: f64,
    pub subspace: Option<String>,
}

/// `count` points of dimension `dim`, stored row-major. No NaN entries.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    points: Vec<f64>,
    count: usize,
    dim: usize,
    provenance: Provenance,
}

impl SampleBatch {
    pub fn new(points: Vec<f64>, count: usize, dim: usize, provenance: Provenance) -> Result<Self> {
        if points.len() != count * dim {
            return Err(Error::DimensionMismatch {
                expected: count * dim,
                got: points.len(),
            });
        }
        if points.iter().any(|v| v.is_nan()) {
            return Err(Error::DegenerateBatch("NaN entry in sample batch".into()));
        }
        Ok(Self { points, count, dim, provenance })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn norms(&self) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().map(|t| t * t).sum::<f64>().sqrt())
            .collect()
    }

    /// Standard Gaussian batch `gamma_n[v]`; provenance records the variance
    /// as smoothing over a point mass.
    pub fn gaussian(n: usize, count: usize, v: f64, seed: u64) -> Result<Self> {
        let mut points = vec![0.0f64; count * n];
        let s = v.sqrt();
        for idx in 0..count {
            let mut rng = stream_rng(seed, "gaussian-batch", idx as u64);
            for t in points[idx * n..(idx + 1) * n].iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *t = s * z;
            }
        }
        Self::new(
            points,
            count,
            n,
            Provenance {
                seed,
                source: format!("gaussian{n}"),
                chain: SampleSource::Synthetic,
                gaussian_v_added: v,
                subspace: None,
            },
        )
    }

    /// Writes points as CSV (one row per point) with a JSON provenance sidecar
    /// `<path>.provenance.json`.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io { path: path.display().to_string(), source: e };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(f, "{}", line.join(",")).map_err(io_err)?;
        }
        f.flush().map_err(io_err)?;
        let sidecar = path.with_extension("provenance.json");
        let json = serde_json::to_string_pretty(&self.provenance)?;
        std::fs::write(&sidecar, json).map_err(|e| Error::Io {
            path: sidecar.display().to_string(),
            source: e,
        })?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let io_err = |e: std::io::Error| Error::Io { path: path.display().to_string(), source: e };
        let f = std::io::BufReader::new(std::fs::File::open(path).map_err(io_err)?);
        let mut points = Vec::new();
        let mut dim = 0usize;
        let mut count = 0usize;
        for line in f.lines() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::DegenerateBatch(format!("bad CSV float: {e}")))?;
            if dim == 0 {
                dim = row.len();
            } else if row.len() != dim {
                return Err(Error::DegenerateBatch("ragged CSV rows".into()));
            }
            points.extend(row);
            count += 1;
        }
        let sidecar = path.with_extension("provenance.json");
        let json = std::fs::read_to_string(&sidecar).map_err(|e| Error::Io {
            path: sidecar.display().to_string(),
            source: e,
        })?;
        let provenance: Provenance = serde_json::from_str(&json)?;
        Self::new(points, count, dim, provenance)
    }
}

/// Replace each point `x` by `x + sqrt(v) Z` with a fresh standard Gaussian
/// `Z` per point; the new batch is distributed as `base * gamma_n[v]`.
pub fn add_gaussian(batch: &SampleBatch, v: f64, seed: u64) -> Result<SampleBatch> {
    if v < 0.0 {
        return Err(Error::Precondition("smoothing variance must be >= 0".into()));
    }
    let mut provenance = batch.provenance().clone();
    if v == 0.0 {
        return SampleBatch::new(batch.points().to_vec(), batch.count(), batch.dim(), provenance);
    }
    provenance.gaussian_v_added += v;
    let n = batch.dim();
    let s = v.sqrt();
    let mut points = batch.points().to_vec();
    for idx in 0..batch.count() {
        let mut rng = stream_rng(seed, "add-gaussian", idx as u64);
        for t in points[idx * n..(idx + 1) * n].iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *t += s * z;
        }
    }
    SampleBatch::new(points, batch.count(), batch.dim(), provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_gaussian_zero_is_identity() {
        let b = SampleBatch::gaussian(4, 100, 1.0, 1).unwrap();
        let c = add_gaussian(&b, 0.0, 99).unwrap();
        assert_eq!(b.points(), c.points());
        assert_eq!(c.provenance().gaussian_v_added, 1.0);
    }

    #[test]
    fn add_gaussian_doubles_variance() {
        let n = 8;
        let count = 50_000;
        let b = SampleBatch::gaussian(n, count, 1.0, 2).unwrap();
        let c = add_gaussian(&b, 1.0, 3).unwrap();
        assert_eq!(c.provenance().gaussian_v_added, 2.0);
        for j in 0..n {
            let mut var = 0.0;
            for row in c.rows() {
                var += row[j] * row[j];
            }
            var /= count as f64;
            // Var of x^2 under gamma[2] is 2 * 4 = 8.
            let se = 3.0 * 8f64.sqrt() / (count as f64).sqrt();
            assert!((var - 2.0).abs() <= se, "coord {j} var {var}");
        }
    }

    #[test]
    fn batch_rejects_nan() {
        let p = Provenance {
            seed: 0,
            source: "test".into(),
            chain: SampleSource::Synthetic,
            gaussian_v_added: 0.0,
            subspace: None,
        };
        assert!(SampleBatch::new(vec![0.0, f64::NAN], 1, 2, p).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let b = SampleBatch::gaussian(3, 17, 1.0, 7).unwrap();
        let dir = std::env::temp_dir().join("thinshell-batch-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("batch.csv");
        b.save_csv(&path).unwrap();
        let back = SampleBatch::load_csv(&path).unwrap();
        assert_eq!(back.count(), 17);
        assert_eq!(back.dim(), 3);
        assert_eq!(back.points(), b.points());
        assert_eq!(back.provenance(), b.provenance());
    }
}
