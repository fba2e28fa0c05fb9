//! Haar and net diagnostics backing the `haar` and `net` subcommands.

use thinshell::linalg::orthonormality_residual;
use thinshell::quad::{integrate_1d_outcome, QuadratureSpec};
use thinshell::randomness::{ball_net, haar_rotation_indexed, stream_rng};
use thinshell::stats::ks_one_sample;

use crate::CliError;

/// CDF of the first coordinate of a uniform point on S^{n-1}: the density is
/// proportional to (1 - t^2)^{(n-3)/2} on [-1, 1], integrated numerically on a
/// fixed grid.
pub struct SphereCoordinateCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl SphereCoordinateCdf {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "the density form needs n >= 3");
        let exponent = (n as f64 - 3.0) / 2.0;
        let density = |t: f64| (1.0 - t * t).max(0.0).powf(exponent);
        let m = 4096usize;
        let mut grid = Vec::with_capacity(m + 1);
        let mut cdf = Vec::with_capacity(m + 1);
        let spec = QuadratureSpec::default().with_tol(1e-12);
        let mut acc = 0.0;
        grid.push(-1.0);
        cdf.push(0.0);
        for i in 1..=m {
            let a = -1.0 + 2.0 * (i - 1) as f64 / m as f64;
            let b = -1.0 + 2.0 * i as f64 / m as f64;
            let out = integrate_1d_outcome(&density, a, b, spec.abs_tol, spec.max_depth, 4);
            acc += out.value;
            grid.push(b);
            cdf.push(acc);
        }
        let total = acc;
        for v in cdf.iter_mut() {
            *v /= total;
        }
        Self { grid, cdf }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let idx = self.grid.partition_point(|&g| g <= t);
        let (g0, g1) = (self.grid[idx - 1], self.grid[idx]);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        c0 + (c1 - c0) * (t - g0) / (g1 - g0)
    }
}

pub struct HaarDiagnostics {
    pub n: usize,
    pub trials: usize,
    pub max_orthogonality_residual: f64,
    pub max_det_deviation: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

/// Draws `trials` Haar rotations: orthogonality and determinant residuals over
/// all of them, plus a KS test of `<U e1, e1>` against the sphere-coordinate
/// law.
pub fn haar_diagnostics(n: usize, trials: usize, seed: u64) -> HaarDiagnostics {
    let mut max_orth: f64 = 0.0;
    let mut max_det: f64 = 0.0;
    let mut coords = Vec::with_capacity(trials);
    for i in 0..trials {
        let u = haar_rotation_indexed(n, seed, i as u64);
        max_orth = max_orth.max(orthonormality_residual(u.matrix()));
        max_det = max_det.max((u.matrix().determinant() - 1.0).abs());
        coords.push(u.matrix()[(0, 0)]);
    }
    let cdf = SphereCoordinateCdf::new(n);
    let (ks, p) = ks_one_sample(&mut coords, |t| cdf.eval(t));
    HaarDiagnostics {
        n,
        trials,
        max_orthogonality_residual: max_orth,
        max_det_deviation: max_det,
        ks_statistic: ks,
        ks_p_value: p,
    }
}

pub struct NetDiagnostics {
    pub cardinality: usize,
    pub volumetric_bound: f64,
    pub probes: usize,
    pub uncovered: usize,
}

/// Builds a net and probes coverage with fresh random points.
pub fn net_diagnostics(
    dim: usize,
    radius: f64,
    eps: f64,
    seed: u64,
    probes: usize,
) -> Result<NetDiagnostics, CliError> {
    let net = ball_net(dim, radius, eps, seed).map_err(CliError::Core)?;
    let mut rng = stream_rng(seed, "net-diag-probe", 0);
    let mut uncovered = 0;
    use rand::Rng;
    use rand_distr::StandardNormal;
    for _ in 0..probes {
        let mut p = vec![0.0f64; dim];
        let mut norm = 0.0f64;
        for v in p.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            norm += g * g;
        }
        let norm = norm.sqrt().max(1e-300);
        let u: f64 = rng.random();
        let scale = radius * u.powf(1.0 / dim as f64) / norm;
        for v in p.iter_mut() {
            *v *= scale;
        }
        let covered = net.points.iter().any(|q| {
            q.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps * eps
        });
        if !covered {
            uncovered += 1;
        }
    }
    Ok(NetDiagnostics {
        cardinality: net.points.len(),
        volumetric_bound: net.volumetric_bound,
        probes,
        uncovered,
    })
}
