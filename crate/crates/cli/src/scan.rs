//! Scan execution: one cell per (suite, body, n), run independently and merged
//! in a fixed order so reports are byte-identical across runs and thread
//! counts. Each cell derives its own seed from the config seed and the cell
//! coordinates, so any row can be re-derived in isolation.

use rayon::prelude::*;

use thinshell::bodies::{BodyKind, ConvexBody};
use thinshell::marginal::{
    tv_to_gaussian, FlatnessAccumulator, FlatnessParams, ThinShellAccumulator,
};
use thinshell::randomness::{
    derive_seed, hit_and_run_batch, random_subspace_indexed, so_concentration_tail, ChainSpec,
    Provenance, SampleBatch, SampleSource,
};
use thinshell::stats::wilson_interval;
use thinshell::suites;

use crate::config::{ScanConfig, SuiteKind};
use crate::fit::fit_power_law;
use crate::report::{Fit, Row, ScanReport};
use crate::CliError;

const CHUNK: usize = 20_000;
/// Statistics that scale as powers of n and get a fitted line in the report.
const FITTED_STATISTICS: [&str; 4] =
    ["shell_width", "tv_gaussian_l1", "tv_gaussian_l2", "oscillation"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Body { suite: SuiteKind, body: String, n: usize },
    SoConcentration { n: usize },
    Lemmas,
}

impl Cell {
    fn label(&self) -> (String, String, usize) {
        match self {
            Cell::Body { suite, body, n } => (suite.name().into(), body.clone(), *n),
            Cell::SoConcentration { n } => ("so_concentration".into(), "rotation".into(), *n),
            Cell::Lemmas => ("lemmas".into(), "corpus".into(), 0),
        }
    }

    fn seed(&self, config_seed: u64) -> u64 {
        let (suite, body, n) = self.label();
        derive_seed(config_seed, &format!("cell:{suite}:{body}:{n}"), 0)
    }
}

pub fn enumerate_cells(config: &ScanConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for suite in &config.suites {
        match suite {
            SuiteKind::Lemmas => cells.push(Cell::Lemmas),
            SuiteKind::SoConcentration => {
                for &n in &config.dims {
                    cells.push(Cell::SoConcentration { n });
                }
            }
            _ => {
                for body in &config.bodies {
                    for &n in &config.dims {
                        cells.push(Cell::Body { suite: *suite, body: body.clone(), n });
                    }
                }
            }
        }
    }
    cells
}

/// Builds the named body at dimension n in isotropic position. Simplex and
/// cross-polytope go through the empirical normalization path.
pub fn build_body(name: &str, n: usize, cell_seed: u64) -> Result<ConvexBody, CliError> {
    let core = |e: thinshell::Error| CliError::Core(e);
    match name {
        "cube" => ConvexBody::make(BodyKind::Cube, n).map_err(core),
        "ball" => ConvexBody::make(BodyKind::Ball, n).map_err(core),
        "halfspace_cube" => ConvexBody::cube_as_halfspaces(n).map_err(core),
        "simplex" | "cross_polytope" => {
            let kind = if name == "simplex" { BodyKind::Simplex } else { BodyKind::CrossPolytope };
            let raw = ConvexBody::make(kind, n).map_err(core)?;
            let (iso, _) = raw
                .isotropic_normalize(200_000, derive_seed(cell_seed, "normalize", 0))
                .map_err(core)?;
            Ok(iso)
        }
        other => Err(CliError::Config(format!("unknown body {other:?}"))),
    }
}

enum Sampler {
    Exact(ConvexBody),
    Chain(SampleBatch),
}

impl Sampler {
    fn build(body: &ConvexBody, count: usize, seed: u64) -> Result<Self, CliError> {
        if body.kind() == BodyKind::Halfspaces {
            let chain = ChainSpec::default_for(body.dim());
            Ok(Sampler::Chain(
                hit_and_run_batch(body, count, &chain, seed).map_err(CliError::Core)?,
            ))
        } else {
            Ok(Sampler::Exact(body.clone()))
        }
    }

    /// Visits samples `start..start+len` as rows.
    fn visit_chunk(
        &self,
        start: usize,
        len: usize,
        seed: u64,
        mut f: impl FnMut(&[f64]),
    ) -> Result<(), CliError> {
        match self {
            Sampler::Exact(body) => {
                let batch = body.exact_sample_range(start, len, seed).map_err(CliError::Core)?;
                for row in batch.rows() {
                    f(row);
                }
                Ok(())
            }
            Sampler::Chain(batch) => {
                for i in start..start + len {
                    f(batch.row(i));
                }
                Ok(())
            }
        }
    }
}

fn thinshell_cell(
    config: &ScanConfig,
    body_name: &str,
    n: usize,
    cell_seed: u64,
) -> Result<Vec<Row>, CliError> {
    let body = build_body(body_name, n, cell_seed)?;
    let count = config.samples_per_run;
    let sampler = Sampler::build(&body, count, cell_seed)?;
    let mut acc = ThinShellAccumulator::new(n, &config.eps_grid);
    let mut start = 0;
    while start < count {
        let len = CHUNK.min(count - start);
        sampler.visit_chunk(start, len, cell_seed, |row| {
            acc.push_norm(row.iter().map(|t| t * t).sum::<f64>().sqrt());
        })?;
        start += len;
    }
    let stats = acc.finalize().map_err(CliError::Core)?;
    let m = count as f64;
    let se_sd = stats.shell_width / (2.0 * (m - 1.0)).sqrt();
    let se_mean = stats.shell_width / m.sqrt();
    let mk = |statistic: String, value: f64, ci_low: f64, ci_high: f64, noise: f64| Row {
        suite: "thinshell".into(),
        body: body_name.into(),
        n,
        l: 0,
        statistic,
        value,
        ci_low,
        ci_high,
        noise_floor: noise,
        seed: cell_seed,
        message: None,
    };
    let mut rows = vec![
        mk(
            "shell_width".into(),
            stats.shell_width,
            stats.shell_width - 1.96 * se_sd,
            stats.shell_width + 1.96 * se_sd,
            se_sd,
        ),
        mk(
            "mean_norm_ratio".into(),
            stats.mean_norm_ratio,
            stats.mean_norm_ratio - 1.96 * se_mean,
            stats.mean_norm_ratio + 1.96 * se_mean,
            se_mean,
        ),
    ];
    for entry in &stats.tail_freq {
        rows.push(mk(
            format!("tail_freq_eps{}", entry.eps),
            entry.freq,
            entry.ci_low,
            entry.ci_high,
            (entry.ci_high - entry.ci_low) / 2.0,
        ));
    }
    Ok(rows)
}

fn marginal_clt_cell(
    config: &ScanConfig,
    body_name: &str,
    n: usize,
    cell_seed: u64,
) -> Result<Vec<Row>, CliError> {
    let body = build_body(body_name, n, cell_seed)?;
    let count = config.samples_per_run;
    let sampler = Sampler::build(&body, count, cell_seed)?;
    let mut rows = Vec::new();
    for &l in &config.subspace_dims {
        if l > n {
            continue;
        }
        let subspace =
            random_subspace_indexed(n, l, derive_seed(cell_seed, "subspace", l as u64), 0)
                .map_err(CliError::Core)?;
        let frame = subspace.frame().clone();
        let mut projected = Vec::with_capacity(count * l);
        let mut start = 0;
        while start < count {
            let len = CHUNK.min(count - start);
            sampler.visit_chunk(start, len, cell_seed, |row| {
                for j in 0..l {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += frame[(i, j)] * row[i];
                    }
                    projected.push(acc);
                }
            })?;
            start += len;
        }
        let batch = SampleBatch::new(
            projected,
            count,
            l,
            Provenance {
                seed: cell_seed,
                source: format!("{body_name}{n}"),
                chain: match &sampler {
                    Sampler::Exact(_) => SampleSource::Exact,
                    Sampler::Chain(b) => b.provenance().chain.clone(),
                },
                gaussian_v_added: 0.0,
                subspace: Some(subspace.id()),
            },
        )
        .map_err(CliError::Core)?;
        let tv = tv_to_gaussian(&batch, 1.0).map_err(CliError::Core)?;
        rows.push(Row {
            suite: "marginal_clt".into(),
            body: body_name.into(),
            n,
            l,
            statistic: format!("tv_gaussian_l{l}"),
            value: tv.value,
            ci_low: (tv.value - tv.estimator_bias_bound).max(0.0),
            ci_high: tv.value + tv.estimator_bias_bound,
            noise_floor: tv.estimator_bias_bound,
            seed: cell_seed,
            message: None,
        });
    }
    Ok(rows)
}

fn flatness_cell(
    config: &ScanConfig,
    body_name: &str,
    n: usize,
    cell_seed: u64,
) -> Result<Vec<Row>, CliError> {
    let k = config
        .subspace_dims
        .iter()
        .copied()
        .find(|&l| l == 2 || l == 3)
        .unwrap_or(2);
    if k > n {
        return Ok(Vec::new());
    }
    let body = build_body(body_name, n, cell_seed)?;
    let count = config.samples_per_run;
    let v = config.smoothing_v;
    if !(v > 0.0) {
        return Err(CliError::Config(
            "flatness suite needs smoothing_v > 0 (the estimate is defined for smoothed marginals)"
                .into(),
        ));
    }
    let sampler = Sampler::build(&body, count, cell_seed)?;
    let subspace = random_subspace_indexed(n, k, derive_seed(cell_seed, "subspace", k as u64), 0)
        .map_err(CliError::Core)?;
    let frame = subspace.frame().clone();
    let mut acc = FlatnessAccumulator::new(FlatnessParams::default_for(k)).map_err(CliError::Core)?;
    // Projecting an isotropic n-dim Gaussian gives an isotropic k-dim one, so
    // smoothing after projection matches smoothing before it.
    let sqrt_v = v.sqrt();
    let mut start = 0;
    while start < count {
        let len = CHUNK.min(count - start);
        let mut idx = start as u64;
        sampler.visit_chunk(start, len, cell_seed, |row| {
            let mut p = [0.0f64; 3];
            for j in 0..k {
                let mut acc_v = 0.0;
                for i in 0..n {
                    acc_v += frame[(i, j)] * row[i];
                }
                p[j] = acc_v;
            }
            use rand::Rng;
            use rand_distr::StandardNormal;
            let mut rng = thinshell::randomness::stream_rng(cell_seed, "flatness-smooth", idx);
            for pj in p.iter_mut().take(k) {
                let z: f64 = rng.sample(StandardNormal);
                *pj += sqrt_v * z;
            }
            idx += 1;
            acc.push_point(&p[..k]);
        })?;
        start += len;
    }
    let report = acc.finalize().map_err(CliError::Core)?;
    let mk = |statistic: String, value: f64, noise: f64| Row {
        suite: "flatness".into(),
        body: body_name.into(),
        n,
        l: k,
        statistic,
        value,
        ci_low: (value - noise).max(0.0),
        ci_high: value + noise,
        noise_floor: noise,
        seed: cell_seed,
        message: None,
    };
    Ok(vec![
        mk("oscillation".into(), report.oscillation, report.noise_floor),
        mk(
            format!("flatness_delta_k{k}"),
            report.oscillation / k as f64,
            report.noise_floor / k as f64,
        ),
    ])
}

fn so_concentration_cell(config: &ScanConfig, n: usize, cell_seed: u64) -> Result<Vec<Row>, CliError> {
    let trials = (config.samples_per_run / 50).clamp(500, 5000);
    let table = so_concentration_tail(
        n,
        |u| u.matrix()[(0, 0)],
        1.0,
        trials,
        &config.eps_grid,
        cell_seed,
    );
    let mk = |statistic: String, value: f64, ci_low: f64, ci_high: f64, noise: f64| Row {
        suite: "so_concentration".into(),
        body: "rotation".into(),
        n,
        l: 0,
        statistic,
        value,
        ci_low,
        ci_high,
        noise_floor: noise,
        seed: cell_seed,
        message: None,
    };
    // Variance of the sample variance ~ 2 var^2 / (trials - 1).
    let se_var = table.variance * (2.0 / (trials as f64 - 1.0)).sqrt();
    let mut rows = vec![mk(
        "so_variance".into(),
        table.variance,
        table.variance - 1.96 * se_var,
        table.variance + 1.96 * se_var,
        se_var,
    )];
    for &(eps, freq) in &table.tails {
        let hits = (freq * trials as f64).round() as u64;
        let (lo, hi) = wilson_interval(hits, trials as u64, 1.96);
        rows.push(mk(format!("so_tail_eps{eps}"), freq, lo, hi, (hi - lo) / 2.0));
    }
    if let Some((c_big, c_small)) = table.envelope_fit {
        rows.push(mk("so_envelope_C".into(), c_big, c_big, c_big, 0.0));
        rows.push(mk("so_envelope_c".into(), c_small, c_small, c_small, 0.0));
    }
    Ok(rows)
}

fn lemmas_cell(cell_seed: u64) -> Result<Vec<Row>, CliError> {
    let outcomes = suites::run_all(cell_seed).map_err(CliError::Core)?;
    let mut rows = Vec::new();
    for o in outcomes {
        rows.push(Row {
            suite: "lemmas".into(),
            body: "corpus".into(),
            n: o.cases,
            l: 0,
            statistic: format!("violations_{}", o.name),
            value: o.violations.len() as f64,
            ci_low: o.violations.len() as f64,
            ci_high: o.violations.len() as f64,
            noise_floor: 0.0,
            seed: cell_seed,
            message: None,
        });
        for (key, value) in o.logged {
            rows.push(Row {
                suite: "lemmas".into(),
                body: "corpus".into(),
                n: o.cases,
                l: 0,
                statistic: format!("{}_{key}", o.name),
                value,
                ci_low: value,
                ci_high: value,
                noise_floor: 0.0,
                seed: cell_seed,
                message: None,
            });
        }
    }
    Ok(rows)
}

/// Runs one cell; public so tests and the row spot-check can re-derive any
/// row in isolation.
pub fn run_cell(config: &ScanConfig, cell: &Cell) -> Result<Vec<Row>, CliError> {
    let cell_seed = cell.seed(config.seed);
    match cell {
        Cell::Body { suite, body, n } => match suite {
            SuiteKind::Thinshell => thinshell_cell(config, body, *n, cell_seed),
            SuiteKind::MarginalClt => marginal_clt_cell(config, body, *n, cell_seed),
            SuiteKind::Flatness => flatness_cell(config, body, *n, cell_seed),
            _ => unreachable!("lemmas/so cells are separate variants"),
        },
        Cell::SoConcentration { n } => so_concentration_cell(config, *n, cell_seed),
        Cell::Lemmas => lemmas_cell(cell_seed),
    }
}

fn compute_fits(rows: &[Row]) -> Vec<Fit> {
    let mut fits = Vec::new();
    let mut keys: Vec<(String, String)> = rows
        .iter()
        .filter(|r| r.message.is_none())
        .filter(|r| FITTED_STATISTICS.contains(&r.statistic.as_str()))
        .map(|r| (r.statistic.clone(), r.body.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    for (stat, body) in keys {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.statistic == stat && r.body == body && r.value > 0.0)
            .map(|r| (r.n as f64, r.value))
            .collect();
        let mut ns: Vec<f64> = pts.iter().map(|(n, _)| *n).collect();
        ns.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ns.dedup();
        if ns.len() < 3 {
            continue;
        }
        if let Ok(f) = fit_power_law(&pts) {
            fits.push(Fit {
                statistic: format!("{stat}:{body}"),
                c_hat: f.c_hat,
                kappa_hat: f.kappa_hat,
                r_squared: f.r_squared,
            });
        }
    }
    fits
}

/// Runs every cell of the scan; per-cell failures become error rows and the
/// scan continues. Rerunning with the same config is bit-identical.
pub fn run_scan(config: &ScanConfig) -> Result<ScanReport, CliError> {
    config.validate()?;
    let cells = enumerate_cells(config);
    let results: Vec<(Cell, Result<Vec<Row>, CliError>)> = cells
        .into_par_iter()
        .map(|cell| {
            let out = run_cell(config, &cell);
            (cell, out)
        })
        .collect();
    let mut rows = Vec::new();
    for (cell, result) in results {
        match result {
            Ok(mut cell_rows) => rows.append(&mut cell_rows),
            Err(e) => {
                let (suite, body, n) = cell.label();
                rows.push(Row {
                    suite,
                    body,
                    n,
                    l: 0,
                    statistic: "error".into(),
                    value: 0.0,
                    ci_low: 0.0,
                    ci_high: 0.0,
                    noise_floor: 0.0,
                    seed: cell.seed(config.seed),
                    message: Some(e.to_string()),
                });
            }
        }
    }
    let fits = compute_fits(&rows);
    let report = ScanReport { rows, fits };
    report.validate()?;
    Ok(report)
}
