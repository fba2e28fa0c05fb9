//! Hit-and-run chains over a convex-body membership oracle, for bodies without
//! an exact sampler.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch::{Provenance, SampleBatch, SampleSource};
use super::streams::stream_rng;
use crate::bodies::ConvexBody;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStart {
    Origin,
    Warm,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainSpec {
    pub burn_in: usize,
    pub thinning: usize,
    pub start: ChainStart,
}

impl ChainSpec {
    /// Defaults with no mixing-time certificate behind them: burn-in 50n and
    /// thinning n leave the moment-agreement suites passing with margin.
    pub fn default_for(n: usize) -> Self {
        Self {
            burn_in: 50 * n,
            thinning: n.max(1),
            start: ChainStart::Origin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::Precondition("thinning must be >= 1".into()));
        }
        Ok(())
    }
}

/// Absolute tolerance for the chord-endpoint bisection along the direction
/// parameter.
const CHORD_TOL: f64 = 1e-10;

/// Number of logical chains a batch is split over; fixed so results do not
/// depend on the physical thread count.
const CHAINS: usize = 8;

fn chord_endpoint(
    body: &ConvexBody,
    x: &[f64],
    dir: &[f64],
    sign: f64,
    seed_step: f64,
) -> Result<f64> {
    // Grow the bracket geometrically from a scale the body is known to contain,
    // then bisect the boundary crossing to CHORD_TOL.
    let probe = |t: f64| -> bool {
        let p: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + sign * t * d).collect();
        body.contains(&p)
    };
    let mut t_in = 0.0;
    let mut t = seed_step.max(1e-6);
    let mut iters = 0;
    while probe(t) {
        t_in = t;
        t *= 2.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::OracleInconsistency {
                context: "chord never left the body (unbounded or inconsistent oracle)".into(),
                witness: dir.to_vec(),
            });
        }
    }
    let mut t_out = t;
    while t_out - t_in > CHORD_TOL {
        let mid = 0.5 * (t_in + t_out);
        if probe(mid) {
            t_in = mid;
        } else {
            t_out = mid;
        }
    }
    Ok(t_in)
}

fn run_chain(
    body: &ConvexBody,
    take: usize,
    chain: &ChainSpec,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<f64>,
) -> Result<()> {
    let n = body.dim();
    let mut x = vec![0.0f64; n];
    if chain.start == ChainStart::Warm {
        let mut dir = vec![0.0f64; n];
        let mut norm = 0.0;
        for d in dir.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *d = g;
            norm += g * g;
        }
        let norm = norm.sqrt().max(1e-300);
        let r = 0.5 * body.inner_radius();
        for (xi, d) in x.iter_mut().zip(&dir) {
            *xi = r * d / norm;
        }
    }
    if !body.contains(&x) {
        return Err(Error::OracleInconsistency {
            context: "chain start point rejected by the membership oracle".into(),
            witness: x,
        });
    }
    let seed_step = (0.5 * body.inner_radius()).max(1e-6);
    let total_steps = chain.burn_in + take * chain.thinning;
    let mut dir = vec![0.0f64; n];
    let mut taken = 0usize;
    for step in 0..total_steps {
        let mut norm = 0.0;
        for d in dir.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *d = g;
            norm += g * g;
        }
        let norm = norm.sqrt().max(1e-300);
        for d in dir.iter_mut() {
            *d /= norm;
        }
        let t_plus = chord_endpoint(body, &x, &dir, 1.0, seed_step)?;
        let t_minus = chord_endpoint(body, &x, &dir, -1.0, seed_step)?;
        let t = rng.random_range(-t_minus..=t_plus);
        for (xi, d) in x.iter_mut().zip(&dir) {
            *xi += t * d;
        }
        if step >= chain.burn_in && (step - chain.burn_in + 1) % chain.thinning == 0 {
            out.extend_from_slice(&x);
            taken += 1;
            if taken == take {
                break;
            }
        }
    }
    Ok(())
}

/// Uniform samples from `body` by hit-and-run: uniform random chord direction,
/// exact chord endpoints by bisection against the membership oracle, uniform
/// point on the chord. Work is split over a fixed set of logical chains, each
/// with its own RNG stream, merged in chain order.
pub fn hit_and_run_batch(
    body: &ConvexBody,
    count: usize,
    chain: &ChainSpec,
    seed: u64,
) -> Result<SampleBatch> {
    chain.validate()?;
    let n = body.dim();
    let provenance = Provenance {
        seed,
        source: body.label().to_string(),
        chain: SampleSource::Chain {
            burn_in: chain.burn_in,
            thinning: chain.thinning,
        },
        gaussian_v_added: 0.0,
        subspace: None,
    };
    if count == 0 {
        return SampleBatch::new(Vec::new(), 0, n, provenance);
    }
    let chains = CHAINS.min(count);
    let base = count / chains;
    let rem = count % chains;
    let takes: Vec<usize> = (0..chains).map(|c| base + usize::from(c < rem)).collect();
    let parts: Vec<Result<Vec<f64>>> = takes
        .par_iter()
        .enumerate()
        .map(|(c, &take)| {
            let mut rng = stream_rng(seed, "hit-and-run", c as u64);
            let mut out = Vec::with_capacity(take * n);
            run_chain(body, take, chain, &mut rng, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut points = Vec::with_capacity(count * n);
    for part in parts {
        points.extend(part?);
    }
    SampleBatch::new(points, count, n, provenance)
}
