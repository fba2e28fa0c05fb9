//! Convex bodies: standard test bodies in isotropic position, halfspace
//! intersections with a membership oracle, exact samplers, and empirical
//! isotropic normalization (whitening by pilot-sample moments).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::whitening_from_cov;
use crate::randomness::streams::stream_rng;
use crate::randomness::{ChainSpec, Provenance, SampleBatch, SampleSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Cube,
    Ball,
    Simplex,
    CrossPolytope,
    Halfspaces,
}

impl BodyKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cube" => Ok(Self::Cube),
            "ball" => Ok(Self::Ball),
            "simplex" => Ok(Self::Simplex),
            "cross_polytope" => Ok(Self::CrossPolytope),
            "halfspaces" => Ok(Self::Halfspaces),
            other => Err(Error::UnknownBodyKind(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cube => "cube",
            Self::Ball => "ball",
            Self::Simplex => "simplex",
            Self::CrossPolytope => "cross_polytope",
            Self::Halfspaces => "halfspaces",
        }
    }
}

/// A halfspace `<normal, x> <= offset` with a unit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Affine placement into isotropic position: `y = whitening * (x - shift)`.
/// Transforms compose left to right and are kept for audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotropicTransform {
    pub shift: Vec<f64>,
    /// Row-major whitening matrix (the inverse square root of the estimated
    /// covariance), symmetric positive definite.
    pub whitening: Vec<Vec<f64>>,
    pub sample_count_used: usize,
}

impl IsotropicTransform {
    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![0.0; dim],
            whitening: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            sample_count_used: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sample_count_used == 0
    }

    fn w(&self) -> DMatrix<f64> {
        let n = self.shift.len();
        DMatrix::from_fn(n, n, |i, j| self.whitening[i][j])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.shift.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.whitening[i][j] * (x[j] - self.shift[j]);
            }
            out[i] = acc;
        }
        out
    }

    /// Inverse map `x = W^{-1} y + shift`, via the stored inverse.
    pub fn apply_inverse(&self, y: &[f64], w_inv: &DMatrix<f64>) -> Vec<f64> {
        let v = DVector::from_column_slice(y);
        let x = w_inv * v;
        x.iter().zip(&self.shift).map(|(a, b)| a + b).collect()
    }
}

/// A convex body with a membership oracle, optional exact sampler and an
/// isotropic placement. Value object: immutable after construction.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    kind: BodyKind,
    halfspaces: Option<Vec<Halfspace>>,
    inner_radius: f64,
    placement: IsotropicTransform,
    whitening_inv: DMatrix<f64>,
    /// Human-readable id for provenance records.
    label: String,
}

/// Serializable descriptor for reproducible reruns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyDescriptor {
    pub kind: BodyKind,
    pub dim: usize,
    pub halfspaces: Option<Vec<Halfspace>>,
    pub transform: IsotropicTransform,
}

const CUBE_HALF_WIDTH: f64 = 1.732_050_807_568_877_2; // sqrt(3): unit coordinate variance

fn ball_radius(n: usize) -> f64 {
    ((n + 2) as f64).sqrt()
}

impl ConvexBody {
    /// Standard body, pre-scaled to isotropic position where the closed form
    /// is known (cube, ball). Simplex and cross-polytope come out in their
    /// centered raw shape and report `needs_normalization()`.
    pub fn make(kind: BodyKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        match kind {
            BodyKind::Halfspaces => Err(Error::Precondition(
                "construct halfspace bodies with from_halfspaces".into(),
            )),
            _ => Ok(Self {
                dim: n,
                kind,
                halfspaces: None,
                inner_radius: Self::base_inner_radius(kind, n),
                placement: IsotropicTransform::identity(n),
                whitening_inv: DMatrix::identity(n, n),
                label: format!("{}{}", kind.name(), n),
            }),
        }
    }

    fn base_inner_radius(kind: BodyKind, n: usize) -> f64 {
        match kind {
            BodyKind::Cube => CUBE_HALF_WIDTH,
            BodyKind::Ball => ball_radius(n),
            // Centered simplex {x_i >= -1/(n+1), sum x <= 1/(n+1)}: distance to
            // the sum face is 1/((n+1) sqrt(n)).
            BodyKind::Simplex => 1.0 / ((n as f64 + 1.0) * (n as f64).sqrt()),
            // Cross-polytope {sum |x_i| <= 1}: inradius 1/sqrt(n).
            BodyKind::CrossPolytope => 1.0 / (n as f64).sqrt(),
            BodyKind::Halfspaces => 0.0,
        }
    }

    /// Whether the body still needs an empirical isotropic normalization pass.
    pub fn needs_normalization(&self) -> bool {
        matches!(
            self.kind,
            BodyKind::Simplex | BodyKind::CrossPolytope | BodyKind::Halfspaces
        ) && self.placement.is_identity()
    }

    /// Intersection of halfspaces `<a_i, x> <= b_i`. Normals are normalized to
    /// unit length; the origin must be strictly interior, and boundedness is
    /// checked by probing the +- coordinate directions.
    pub fn from_halfspaces(constraints: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::Precondition("no halfspace constraints given".into()));
        }
        let dim = constraints[0].0.len();
        let mut halfspaces = Vec::with_capacity(constraints.len());
        for (normal, offset) in constraints {
            if normal.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: normal.len() });
            }
            let norm = normal.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::Precondition("zero halfspace normal".into()));
            }
            halfspaces.push(Halfspace {
                normal: normal.iter().map(|t| t / norm).collect(),
                offset: offset / norm,
            });
        }
        // Origin interior (strictly feasible) gives the probe rays a start point.
        let min_slack = halfspaces.iter().map(|h| h.offset).fold(f64::INFINITY, f64::min);
        if min_slack <= 1e-9 {
            return Err(Error::Precondition(format!(
                "origin is not strictly interior: minimal slack {min_slack:.3e}"
            )));
        }
        let body = Self {
            dim,
            kind: BodyKind::Halfspaces,
            inner_radius: min_slack,
            halfspaces: Some(halfspaces),
            placement: IsotropicTransform::identity(dim),
            whitening_inv: DMatrix::identity(dim, dim),
            label: format!("halfspaces{dim}"),
        };
        // Boundedness probe: along each +-e_i the ray from the origin must
        // leave the body within a finite parameter.
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut dir = vec![0.0; dim];
                dir[i] = sign;
                let mut t = 1.0;
                let mut bounded = false;
                while t < 1e8 {
                    let x: Vec<f64> = dir.iter().map(|d| d * t).collect();
                    if !body.contains(&x) {
                        bounded = true;
                        break;
                    }
                    t *= 4.0;
                }
                if !bounded {
                    return Err(Error::UnboundedRegion { witness: dir });
                }
            }
        }
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> BodyKind {
        self.kind
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn placement(&self) -> &IsotropicTransform {
        &self.placement
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn halfspaces(&self) -> Option<&[Halfspace]> {
        self.halfspaces.as_deref()
    }

    /// Membership in the base (pre-placement) shape.
    fn base_contains(&self, x: &[f64]) -> bool {
        match self.kind {
            BodyKind::Cube => x.iter().all(|t| t.abs() <= CUBE_HALF_WIDTH),
            BodyKind::Ball => {
                x.iter().map(|t| t * t).sum::<f64>() <= ball_radius(self.dim).powi(2)
            }
            BodyKind::Simplex => {
                let c = 1.0 / (self.dim as f64 + 1.0);
                x.iter().all(|&t| t >= -c) && x.iter().sum::<f64>() <= c
            }
            BodyKind::CrossPolytope => x.iter().map(|t| t.abs()).sum::<f64>() <= 1.0,
            BodyKind::Halfspaces => {
                let hs = self.halfspaces.as_ref().expect("halfspace body has constraints");
                hs.iter().all(|h| {
                    let dot: f64 = h.normal.iter().zip(x).map(|(a, b)| a * b).sum();
                    dot <= h.offset + 1e-12
                })
            }
        }
    }

    /// Membership oracle in placed coordinates.
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        if self.placement.is_identity() {
            return self.base_contains(x);
        }
        let base = self.placement.apply_inverse(x, &self.whitening_inv);
        self.base_contains(&base)
    }

    /// Exact i.i.d. uniform samples; deterministic per `(seed, index)`.
    pub fn exact_sample(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        self.exact_sample_range(0, count, seed)
    }

    /// Samples with indices `start .. start + count`: a chunk of the stream
    /// `exact_sample` draws from, so chunked generation concatenates to the
    /// whole batch bit-for-bit.
    pub fn exact_sample_range(&self, start: usize, count: usize, seed: u64) -> Result<SampleBatch> {
        if self.kind == BodyKind::Halfspaces {
            return Err(Error::ExactSamplingUnsupported("halfspaces".into()));
        }
        let n = self.dim;
        let mut points = vec![0.0f64; count * n];
        for i in 0..count {
            let mut rng = stream_rng(seed, "exact-sample", (start + i) as u64);
            let row = &mut points[i * n..(i + 1) * n];
            self.base_sample_into(&mut rng, row);
            if !self.placement.is_identity() {
                let placed = self.placement.apply(row);
                row.copy_from_slice(&placed);
            }
        }
        SampleBatch::new(
            points,
            count,
            n,
            Provenance {
                seed,
                source: self.label.clone(),
                chain: SampleSource::Exact,
                gaussian_v_added: 0.0,
                subspace: None,
            },
        )
    }

    fn base_sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.dim;
        match self.kind {
            BodyKind::Cube => {
                for v in out.iter_mut() {
                    *v = rng.random_range(-CUBE_HALF_WIDTH..CUBE_HALF_WIDTH);
                }
            }
            BodyKind::Ball => {
                let mut norm_sq = 0.0;
                for v in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *v = g;
                    norm_sq += g * g;
                }
                let norm = norm_sq.sqrt().max(1e-300);
                let u: f64 = rng.random();
                let radius = ball_radius(n) * u.powf(1.0 / n as f64);
                for v in out.iter_mut() {
                    *v *= radius / norm;
                }
            }
            BodyKind::Simplex => {
                // Exponential spacings: Dirichlet(1,..,1) truncated to the
                // first n coordinates is uniform on the solid simplex.
                let mut total = 0.0;
                for v in out.iter_mut() {
                    let e = -rng.random::<f64>().max(1e-300).ln();
                    *v = e;
                    total += e;
                }
                total += -rng.random::<f64>().max(1e-300).ln();
                let c = 1.0 / (n as f64 + 1.0);
                for v in out.iter_mut() {
                    *v = *v / total - c;
                }
            }
            BodyKind::CrossPolytope => {
                let mut total = 0.0;
                for v in out.iter_mut() {
                    let e = -rng.random::<f64>().max(1e-300).ln();
                    *v = e;
                    total += e;
                }
                total += -rng.random::<f64>().max(1e-300).ln();
                for v in out.iter_mut() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *v = sign * *v / total;
                }
            }
            BodyKind::Halfspaces => unreachable!("checked above"),
        }
    }

    /// Estimate the mean and covariance from `pilot_count` samples (exact where
    /// available, hit-and-run otherwise) and re-express the body so those pilot
    /// statistics are whitened away. Returns the new body and the incremental
    /// transform.
    pub fn isotropic_normalize(
        &self,
        pilot_count: usize,
        seed: u64,
    ) -> Result<(ConvexBody, IsotropicTransform)> {
        let n = self.dim;
        let batch = match self.kind {
            BodyKind::Halfspaces => crate::randomness::hit_and_run_batch(
                self,
                pilot_count,
                &ChainSpec::default_for(n),
                seed,
            )?,
            _ => self.exact_sample(pilot_count, seed)?,
        };
        let mut mean = vec![0.0f64; n];
        for row in batch.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= pilot_count as f64;
        }
        let mut cov = DMatrix::zeros(n, n);
        for row in batch.rows() {
            for i in 0..n {
                let di = row[i] - mean[i];
                for j in i..n {
                    cov[(i, j)] += di * (row[j] - mean[j]);
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                let v = cov[(i, j)] / (pilot_count as f64 - 1.0);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        let (w, w_inv) = whitening_from_cov(&cov)?;
        let increment = IsotropicTransform {
            shift: mean.clone(),
            whitening: (0..n).map(|i| (0..n).map(|j| w[(i, j)]).collect()).collect(),
            sample_count_used: pilot_count,
        };
        // Compose with the existing placement: new total map is
        // y = W (old(x) - mean), i.e. whitening W_total = W * W_old and shift
        // shift_total = shift_old + W_old^{-1} mean.
        let old_w = self.placement.w();
        let new_w = &w * &old_w;
        let mean_v = DVector::from_column_slice(&mean);
        let back = &self.whitening_inv * &mean_v;
        let new_shift: Vec<f64> = self
            .placement
            .shift
            .iter()
            .zip(back.iter())
            .map(|(a, b)| a + b)
            .collect();
        let placement = IsotropicTransform {
            shift: new_shift,
            whitening: (0..n)
                .map(|i| (0..n).map(|j| new_w[(i, j)]).collect())
                .collect(),
            sample_count_used: pilot_count + self.placement.sample_count_used,
        };
        let whitening_inv = &self.whitening_inv * &w_inv;
        // Conservative inner radius: base inradius shrinks by at most the
        // smallest singular value of the new whitening.
        let min_sigma = new_w
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let base_r = match self.kind {
            BodyKind::Halfspaces => {
                let hs = self.halfspaces.as_ref().unwrap();
                hs.iter()
                    .map(|h| {
                        let dot: f64 = h.normal.iter().zip(&placement.shift).map(|(a, b)| a * b).sum();
                        h.offset - dot
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            BodyKind::Cube => {
                CUBE_HALF_WIDTH
                    - placement
                        .shift
                        .iter()
                        .map(|t| t.abs())
                        .fold(0.0f64, f64::max)
            }
            BodyKind::Ball => {
                ball_radius(n) - placement.shift.iter().map(|t| t * t).sum::<f64>().sqrt()
            }
            BodyKind::Simplex => {
                let c = 1.0 / (n as f64 + 1.0);
                let face = placement
                    .shift
                    .iter()
                    .map(|&t| t + c)
                    .fold(f64::INFINITY, f64::min);
                let sum_face = (c - placement.shift.iter().sum::<f64>()) / (n as f64).sqrt();
                face.min(sum_face)
            }
            BodyKind::CrossPolytope => {
                (1.0 - placement.shift.iter().map(|t| t.abs()).sum::<f64>())
                    / (n as f64).sqrt()
            }
        };
        if base_r <= 0.0 {
            return Err(Error::Precondition(
                "estimated center fell outside the body; increase the pilot count".into(),
            ));
        }
        let body = ConvexBody {
            dim: n,
            kind: self.kind,
            halfspaces: self.halfspaces.clone(),
            inner_radius: base_r * min_sigma,
            placement,
            whitening_inv,
            label: format!("{}-iso", self.label),
        };
        Ok((body, increment))
    }

    pub fn descriptor(&self) -> BodyDescriptor {
        BodyDescriptor {
            kind: self.kind,
            dim: self.dim,
            halfspaces: self.halfspaces.clone(),
            transform: self.placement.clone(),
        }
    }

    pub fn from_descriptor(desc: &BodyDescriptor) -> Result<Self> {
        let base = match desc.kind {
            BodyKind::Halfspaces => Self::from_halfspaces(
                desc.halfspaces
                    .clone()
                    .ok_or_else(|| Error::Precondition("descriptor lacks halfspaces".into()))?
                    .into_iter()
                    .map(|h| (h.normal, h.offset))
                    .collect(),
            )?,
            kind => Self::make(kind, desc.dim)?,
        };
        if desc.transform.is_identity() {
            return Ok(base);
        }
        let n = desc.dim;
        let w = DMatrix::from_fn(n, n, |i, j| desc.transform.whitening[i][j]);
        let w_inv = w
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("descriptor whitening is singular".into()))?;
        Ok(ConvexBody {
            dim: n,
            kind: desc.kind,
            halfspaces: desc.halfspaces.clone(),
            inner_radius: base.inner_radius * 0.5, // conservative; refined on demand
            placement: desc.transform.clone(),
            whitening_inv: w_inv,
            label: format!("{}-iso", base.label),
        })
    }

    /// The cube as an explicit halfspace intersection (2n constraints); used to
    /// exercise the chain sampler against the exact one.
    pub fn cube_as_halfspaces(n: usize) -> Result<Self> {
        let mut cons = Vec::with_capacity(2 * n);
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut normal = vec![0.0; n];
                normal[i] = sign;
                cons.push((normal, CUBE_HALF_WIDTH));
            }
        }
        let mut body = Self::from_halfspaces(cons)?;
        body.label = format!("halfspace-cube{n}");
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_membership_and_base_cases() {
        let c = ConvexBody::make(BodyKind::Cube, 3).unwrap();
        assert!(c.contains(&[0.0, 0.0, 0.0]));
        assert!(c.contains(&[CUBE_HALF_WIDTH, 0.0, 0.0]));
        assert!(!c.contains(&[CUBE_HALF_WIDTH + 1e-9, 0.0, 0.0]));
        let seg = ConvexBody::make(BodyKind::Cube, 1).unwrap();
        assert!(seg.contains(&[1.7]));
        assert!(!seg.contains(&[1.8]));
    }

    #[test]
    fn ball_boundary_epsilon() {
        let n = 4;
        let b = ConvexBody::make(BodyKind::Ball, n).unwrap();
        let r = ball_radius(n);
        let mut x = vec![0.0; n];
        x[0] = r + 1e-6;
        assert!(!b.contains(&x));
        x[0] = r - 1e-6;
        assert!(b.contains(&x));
    }

    #[test]
    fn unknown_kind_is_an_error() {
        assert!(matches!(
            BodyKind::parse("dodecahedron"),
            Err(Error::UnknownBodyKind(_))
        ));
    }

    #[test]
    fn single_halfspace_is_unbounded() {
        let r = ConvexBody::from_halfspaces(vec![(vec![1.0, 0.0], 1.0)]);
        match r {
            Err(Error::UnboundedRegion { witness }) => {
                assert_eq!(witness.len(), 2);
            }
            other => panic!("expected unbounded error, got {other:?}"),
        }
    }

    #[test]
    fn halfspace_simplex_is_bounded_and_contains_origin() {
        // {x_i >= -a, sum x_i <= a} for a > 0.
        let a = 0.7;
        let n = 3;
        let mut cons = Vec::new();
        for i in 0..n {
            let mut normal = vec![0.0; n];
            normal[i] = -1.0;
            cons.push((normal, a));
        }
        cons.push((vec![1.0; n], a));
        let b = ConvexBody::from_halfspaces(cons).unwrap();
        assert!(b.contains(&vec![0.0; n]));
    }

    #[test]
    fn halfspace_cube_matches_exact_cube_membership() {
        let n = 4;
        let exact = ConvexBody::make(BodyKind::Cube, n).unwrap();
        let hs = ConvexBody::cube_as_halfspaces(n).unwrap();
        let mut rng = stream_rng(77, "membership-probe", 0);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.5..2.5)).collect();
            assert_eq!(exact.contains(&x), hs.contains(&x), "disagree at {x:?}");
        }
    }

    #[test]
    fn exact_cube_sample_moments() {
        let n = 16;
        let count = 100_000;
        let c = ConvexBody::make(BodyKind::Cube, n).unwrap();
        let batch = c.exact_sample(count, 5).unwrap();
        let inv_sqrt = 1.0 / (count as f64).sqrt();
        for j in 0..n {
            let mut mean = 0.0;
            let mut var = 0.0;
            for row in batch.rows() {
                mean += row[j];
            }
            mean /= count as f64;
            for row in batch.rows() {
                var += (row[j] - mean) * (row[j] - mean);
            }
            var /= count as f64 - 1.0;
            assert!(mean.abs() <= 4.0 * inv_sqrt, "coordinate {j} mean {mean}");
            // Var of x^2 for the coordinate law is 4/5.
            assert!(
                (var - 1.0).abs() <= 4.0 * (4.0f64 / 5.0).sqrt() * inv_sqrt,
                "coordinate {j} var {var}"
            );
        }
    }

    #[test]
    fn exact_ball_sample_second_moment() {
        let n = 8;
        let count = 100_000;
        let b = ConvexBody::make(BodyKind::Ball, n).unwrap();
        let batch = b.exact_sample(count, 6).unwrap();
        let mut m2 = 0.0;
        for row in batch.rows() {
            m2 += row.iter().map(|t| t * t).sum::<f64>();
        }
        m2 /= count as f64;
        // E|X|^2 = n with noise scale sd(|X|^2) = sqrt(Var) ~ 2 for n=8.
        let se = 3.0 * (2.0 * n as f64).sqrt() / (count as f64).sqrt();
        assert!((m2 - n as f64).abs() <= se, "m2 = {m2}");
    }

    #[test]
    fn samples_always_inside_body() {
        for kind in [BodyKind::Cube, BodyKind::Ball, BodyKind::Simplex, BodyKind::CrossPolytope] {
            let b = ConvexBody::make(kind, 5).unwrap();
            let batch = b.exact_sample(2000, 9).unwrap();
            for row in batch.rows() {
                assert!(b.contains(row), "{kind:?} sample {row:?} escaped");
            }
        }
    }

    #[test]
    fn sampling_deterministic_per_seed() {
        let b = ConvexBody::make(BodyKind::Ball, 6).unwrap();
        let a = b.exact_sample(100, 3).unwrap();
        let c = b.exact_sample(100, 3).unwrap();
        assert_eq!(a.points(), c.points());
        let d = b.exact_sample(100, 4).unwrap();
        assert_ne!(a.points(), d.points());
    }

    #[test]
    fn isotropic_normalize_simplex() {
        let n = 2;
        let count = 200_000;
        let s = ConvexBody::make(BodyKind::Simplex, n).unwrap();
        assert!(s.needs_normalization());
        let (iso, transform) = s.isotropic_normalize(count, 11).unwrap();
        assert_eq!(transform.sample_count_used, count);
        // Fresh samples from the normalized body are isotropic within noise.
        let batch = iso.exact_sample(count, 12).unwrap();
        let mut mean = [0.0f64; 2];
        for row in batch.rows() {
            mean[0] += row[0];
            mean[1] += row[1];
        }
        mean[0] /= count as f64;
        mean[1] /= count as f64;
        let norm = (mean[0] * mean[0] + mean[1] * mean[1]).sqrt();
        assert!(norm <= 0.02 * (n as f64).sqrt(), "|mean| = {norm}");
        let mut cov = [[0.0f64; 2]; 2];
        for row in batch.rows() {
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] /= count as f64 - 1.0;
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov[i][j] - target).abs() <= 0.05, "cov[{i}][{j}] = {}", cov[i][j]);
            }
        }
        for row in batch.rows().take(1000) {
            assert!(iso.contains(row));
        }
    }

    #[test]
    fn isotropic_normalize_idempotent_up_to_noise() {
        let n = 3;
        let c = ConvexBody::make(BodyKind::Cube, n).unwrap();
        // The cube is already isotropic: whitening should be near identity.
        let (_iso, t1) = c.isotropic_normalize(200_000, 21).unwrap();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((t1.whitening[i][j] - target).abs() <= 0.05);
            }
        }
    }

    #[test]
    fn scaled_cube_whitening_halves() {
        // A cube scaled by 2 has covariance 4 Id, so whitening ~ Id/2.
        let n = 2;
        let mut cons = Vec::new();
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut normal = vec![0.0; n];
                normal[i] = sign;
                cons.push((normal, 2.0 * CUBE_HALF_WIDTH));
            }
        }
        let b = ConvexBody::from_halfspaces(cons).unwrap();
        let (_iso, t) = b.isotropic_normalize(100_000, 31).unwrap();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 0.5 } else { 0.0 };
                assert!(
                    (t.whitening[i][j] - target).abs() <= 0.05,
                    "w[{i}][{j}] = {}",
                    t.whitening[i][j]
                );
            }
        }
    }

    #[test]
    fn shifted_body_shift_recovered() {
        // Cube shifted by 0.5 e1 (origin still interior): the pilot shift
        // estimate lands within 3 SE of the true center.
        let n = 2;
        let count = 100_000;
        let mut cons = Vec::new();
        for i in 0..n {
            for sign in [1.0f64, -1.0] {
                let mut normal = vec![0.0; n];
                normal[i] = sign;
                let offset = if i == 0 {
                    CUBE_HALF_WIDTH + sign * 0.5
                } else {
                    CUBE_HALF_WIDTH
                };
                cons.push((normal, offset));
            }
        }
        let b = ConvexBody::from_halfspaces(cons).unwrap();
        let (_iso, t) = b.isotropic_normalize(count, 41).unwrap();
        let se = 1.0 / (count as f64).sqrt();
        // Hit-and-run correlation inflates the i.i.d. SE; allow a wide factor.
        assert!((t.shift[0] - 0.5).abs() <= 12.0 * se, "shift {:?}", t.shift);
        assert!(t.shift[1].abs() <= 12.0 * se, "shift {:?}", t.shift);
    }

    #[test]
    fn membership_is_convex_on_probe_pairs() {
        let b = ConvexBody::make(BodyKind::CrossPolytope, 4).unwrap();
        let batch = b.exact_sample(2000, 51).unwrap();
        let rows: Vec<&[f64]> = batch.rows().collect();
        for k in 0..1000 {
            let x = rows[k % rows.len()];
            let y = rows[(3 * k + 7) % rows.len()];
            let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
            assert!(b.contains(&mid));
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let s = ConvexBody::make(BodyKind::Simplex, 2).unwrap();
        let (iso, _) = s.isotropic_normalize(50_000, 61).unwrap();
        let desc = iso.descriptor();
        let json = serde_json::to_string(&desc).unwrap();
        let back: BodyDescriptor = serde_json::from_str(&json).unwrap();
        let rebuilt = ConvexBody::from_descriptor(&back).unwrap();
        let batch = iso.exact_sample(500, 71).unwrap();
        for row in batch.rows() {
            assert_eq!(iso.contains(row), rebuilt.contains(row));
        }
    }
}
