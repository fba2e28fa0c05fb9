//! Greedy epsilon-nets of centered Euclidean balls, with a probabilistic
//! coverage repair pass.

use rand::Rng;
use rand_distr::StandardNormal;

use super::streams::stream_rng;
use crate::error::{Error, Result};

const NET_BUDGET: f64 = 1e7;

/// Uniform point in the radius-`r` ball in dimension `l`.
fn ball_point<R: Rng>(rng: &mut R, l: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0f64; l];
    let mut norm = 0.0;
    for v in x.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *v = g;
        norm += g * g;
    }
    let norm = norm.sqrt().max(1e-300);
    let u: f64 = rng.random();
    let scale = r * u.powf(1.0 / l as f64) / norm;
    for v in x.iter_mut() {
        *v *= scale;
    }
    x
}

struct Grid {
    cell: f64,
    l: usize,
    map: std::collections::HashMap<Vec<i64>, Vec<usize>>,
}

impl Grid {
    fn new(cell: f64, l: usize) -> Self {
        Self { cell, l, map: std::collections::HashMap::new() }
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|&v| (v / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, p: &[f64], idx: usize) {
        self.map.entry(self.key(p)).or_default().push(idx);
    }

    /// Any stored index within `eps` of `p`? Cell size equals eps, so only the
    /// 3^l neighborhood needs scanning.
    fn has_within(&self, p: &[f64], eps: f64, points: &[Vec<f64>]) -> bool {
        let base = self.key(p);
        let mut offsets = vec![0i64; self.l];
        loop {
            let key: Vec<i64> = base.iter().zip(&offsets).map(|(b, o)| b + o).collect();
            if let Some(bucket) = self.map.get(&key) {
                for &idx in bucket {
                    let d2: f64 = points[idx]
                        .iter()
                        .zip(p)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 <= eps * eps {
                        return true;
                    }
                }
            }
            // Advance the odometer over {-1, 0, 1}^l.
            let mut i = 0;
            loop {
                if i == self.l {
                    return false;
                }
                offsets[i] += 1;
                if offsets[i] <= 1 {
                    break;
                }
                offsets[i] = -1;
                i += 1;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BallNet {
    pub points: Vec<Vec<f64>>,
    pub radius: f64,
    pub eps: f64,
    /// Volumetric upper bound (1 + 2r/eps)^l the construction was budgeted
    /// against.
    pub volumetric_bound: f64,
}

/// Greedy packing-based eps-net of the radius ball in dimension `l`: a maximal
/// eps-separated subset of a dense random pool, followed by a repair pass that
/// inserts any probe point left uncovered. Every point of the ball is within
/// eps of the net up to the probabilistic confidence of the probe pass.
pub fn ball_net(l: usize, radius: f64, eps: f64, seed: u64) -> Result<BallNet> {
    if l == 0 || l > 10 {
        return Err(Error::Precondition(format!("net dimension {l} outside 1..=10")));
    }
    if !(eps > 0.0) || !(radius > 0.0) {
        return Err(Error::Precondition("radius and eps must be positive".into()));
    }
    let volumetric_bound = (1.0 + 2.0 * radius / eps).powi(l as i32);
    if volumetric_bound > NET_BUDGET {
        return Err(Error::NetBudget { projected: volumetric_bound, budget: NET_BUDGET });
    }
    let mut rng = stream_rng(seed, "ball-net", 0);
    let pool = ((20.0 * volumetric_bound) as usize).clamp(4_000, 300_000);
    let round = ((10.0 * volumetric_bound) as usize).clamp(20_000, 200_000);

    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut grid = Grid::new(eps, l);
    let push = |p: Vec<f64>, points: &mut Vec<Vec<f64>>, grid: &mut Grid| {
        grid.insert(&p, points.len());
        points.push(p);
    };
    // Seed with the center, then greedy first-fit packing over the pool.
    push(vec![0.0; l], &mut points, &mut grid);
    for _ in 0..pool {
        let p = ball_point(&mut rng, l, radius);
        if !grid.has_within(&p, eps, &points) {
            push(p, &mut points, &mut grid);
        }
    }
    // Probe-and-repair rounds: an uncovered probe is itself eps-separated from
    // the net, so inserting it preserves the packing property (and with it the
    // volumetric cardinality bound). Stop once a whole fresh round is clean.
    for _round in 0..60 {
        let mut added = 0usize;
        for _ in 0..round {
            let p = ball_point(&mut rng, l, radius);
            if !grid.has_within(&p, eps, &points) {
                push(p, &mut points, &mut grid);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
    }
    Ok(BallNet { points, radius, eps, volumetric_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn covers(net: &BallNet, probes: usize, seed: u64) -> bool {
        let mut rng = stream_rng(seed, "net-coverage-probe", 0);
        for _ in 0..probes {
            let p = ball_point(&mut rng, net.points[0].len(), net.radius);
            let ok = net.points.iter().any(|q| {
                q.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= net.eps * net.eps
            });
            if !ok {
                return false;
            }
        }
        true
    }

    #[test]
    fn interval_net_is_small_and_covering() {
        let net = ball_net(1, 1.0, 0.5, 3).unwrap();
        assert!(net.points.len() <= 5, "cardinality {}", net.points.len());
        assert!(covers(&net, 5_000, 4));
    }

    #[test]
    fn disc_net_covers_probes() {
        let net = ball_net(2, 1.0, 0.2, 5).unwrap();
        assert!(covers(&net, 10_000, 6));
        assert!((net.points.len() as f64) <= net.volumetric_bound);
    }

    #[test]
    fn three_dim_net_within_budget() {
        let r = 10.0 * 3f64.sqrt();
        let net = ball_net(3, r, 1.0, 7).unwrap();
        assert!((net.points.len() as f64) <= net.volumetric_bound);
        assert!((net.points.len() as f64) <= NET_BUDGET);
        assert!(covers(&net, 20_000, 8));
    }

    #[test]
    fn budget_error_before_allocation() {
        match ball_net(10, 100.0, 0.01, 0) {
            Err(Error::NetBudget { projected, .. }) => assert!(projected > NET_BUDGET),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
