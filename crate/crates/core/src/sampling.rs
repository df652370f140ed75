//! Seeded sources for projection directions, latent priors and synthetic data.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`) keyed by
//! `seed_from_u64(seed)` and selected with `set_stream(stream_id)`, so output
//! is identical across runs and platforms for a given `(seed, stream_id)`.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cloud::{PointCloud, ProjectionSet};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Root seed from which independent generator streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Independent generator for the given stream id.
    pub fn stream(self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(id);
        rng
    }
}

/// `l` directions drawn uniformly from the unit sphere in `R^d`, as
/// normalized standard-Gaussian vectors.
pub fn sample_unit_sphere<T: Scalar, R: Rng + ?Sized>(
    l: usize,
    d: usize,
    rng: &mut R,
) -> Result<ProjectionSet<T>> {
    if l == 0 || d == 0 {
        return invalid(format!(
            "unit-sphere sampling needs l >= 1 and d >= 1, got l = {l}, d = {d}"
        ));
    }
    let mut data = Vec::with_capacity(l * d);
    let mut v = vec![0.0f64; d];
    for _ in 0..l {
        loop {
            v.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-300 {
                data.extend(v.iter().map(|x| T::of(x / n)));
                break;
            }
        }
    }
    ProjectionSet::normalized(Matrix::from_vec(l, d, data)?)
}

/// Shape of a latent prior.
///
/// The ring, circle and bowl shapes are interpretations of the named 2D
/// priors: an area-uniform annulus, a noisy circle, and a box density
/// increasing toward the corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorKind {
    /// Uniform on `[-half_width, half_width]^K`.
    UniformBox { half_width: f64 },
    /// Area-uniform on the annulus `inner <= r <= outer`.
    Ring { inner: f64, outer: f64 },
    /// Uniform angle on a circle of `radius`, plus isotropic Gaussian noise.
    Circle { radius: f64, sigma: f64 },
    /// Points of `[-1, 1]^2` with density proportional to `||z||^exponent`.
    /// Whether the bowl is quadratic is an interpretation; `exponent = 2` by default.
    Bowl { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub dim: usize,
}

impl PriorSpec {
    pub fn uniform_box(dim: usize, half_width: f64) -> Self {
        Self {
            kind: PriorKind::UniformBox { half_width },
            dim,
        }
    }

    pub fn ring(inner: f64, outer: f64) -> Self {
        Self {
            kind: PriorKind::Ring { inner, outer },
            dim: 2,
        }
    }

    pub fn circle(radius: f64, sigma: f64) -> Self {
        Self {
            kind: PriorKind::Circle { radius, sigma },
            dim: 2,
        }
    }

    pub fn bowl(exponent: f64) -> Self {
        Self {
            kind: PriorKind::Bowl { exponent },
            dim: 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PriorKind::UniformBox { .. } => "uniform_box",
            PriorKind::Ring { .. } => "ring",
            PriorKind::Circle { .. } => "circle",
            PriorKind::Bowl { .. } => "bowl",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return invalid("prior dimension must be at least 1");
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                invalid(format!("prior parameter {name} must be positive, got {v}"))
            }
        };
        match self.kind {
            PriorKind::UniformBox { half_width } => positive("half_width", half_width)?,
            PriorKind::Ring { inner, outer } => {
                positive("outer", outer)?;
                if !(inner.is_finite() && inner >= 0.0 && inner < outer) {
                    return invalid(format!(
                        "ring radii must satisfy 0 <= inner < outer, got {inner}, {outer}"
                    ));
                }
            }
            PriorKind::Circle { radius, sigma } => {
                positive("radius", radius)?;
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return invalid(format!("circle sigma must be >= 0, got {sigma}"));
                }
            }
            PriorKind::Bowl { exponent } => positive("exponent", exponent)?,
        }
        if !matches!(self.kind, PriorKind::UniformBox { .. }) && self.dim != 2 {
            return Err(Error::DimensionMismatch {
                context: "ring/circle/bowl prior",
                expected: 2,
                actual: self.dim,
            });
        }
        Ok(())
    }

    /// Per-axis bounding interval `[lo, hi]` of the prior's support. For the
    /// circle, the Gaussian noise is cut at three standard deviations.
    pub fn bounding_box(&self) -> (f64, f64) {
        let h = match self.kind {
            PriorKind::UniformBox { half_width } => half_width,
            PriorKind::Ring { outer, .. } => outer,
            PriorKind::Circle { radius, sigma } => radius + 3.0 * sigma,
            PriorKind::Bowl { .. } => 1.0,
        };
        (-h, h)
    }
}

/// Draws `m` samples from the prior.
pub fn sample_prior<T: Scalar, R: Rng + ?Sized>(
    spec: &PriorSpec,
    m: usize,
    rng: &mut R,
) -> Result<PointCloud<T>> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::Empty("prior sample"));
    }
    let k = spec.dim;
    let mut data: Vec<f64> = Vec::with_capacity(m * k);
    match spec.kind {
        PriorKind::UniformBox { half_width } => {
            for _ in 0..m * k {
                data.push(half_width * (2.0 * rng.random::<f64>() - 1.0));
            }
        }
        PriorKind::Ring { inner, outer } => {
            for _ in 0..m {
                let u: f64 = rng.random();
                let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
                let angle = 2.0 * PI * rng.random::<f64>();
                data.extend([r * angle.cos(), r * angle.sin()]);
            }
        }
        PriorKind::Circle { radius, sigma } => {
            for _ in 0..m {
                let angle = 2.0 * PI * rng.random::<f64>();
                let nx: f64 = rng.sample(StandardNormal);
                let ny: f64 = rng.sample(StandardNormal);
                data.extend([
                    radius * angle.cos() + sigma * nx,
                    radius * angle.sin() + sigma * ny,
                ]);
            }
        }
        PriorKind::Bowl { exponent } => {
            while data.len() < m * 2 {
                let x = 2.0 * rng.random::<f64>() - 1.0;
                let y = 2.0 * rng.random::<f64>() - 1.0;
                // acceptance (||z||^2 / 2)^(exponent/2) peaks at 1 in the corners
                let accept = ((x * x + y * y) / 2.0).powf(exponent / 2.0);
                if rng.random::<f64>() < accept {
                    data.extend([x, y]);
                }
            }
        }
    }
    PointCloud::new(Matrix::from_vec(
        m,
        k,
        data.into_iter().map(T::of).collect(),
    )?)
}

/// Swiss-roll sample together with each point's unrolled parameter `t`.
#[derive(Debug, Clone)]
pub struct SwissRoll<T> {
    pub cloud: PointCloud<T>,
    pub params: Vec<f64>,
}

/// `(t cos t, h, t sin t)` plus Gaussian noise of scale `noise`, with
/// `t ~ U[1.5 pi, 4.5 pi]` and `h ~ U[0, 10]`, rescaled into `[-1, 1]^3`.
///
/// The two spiral axes share one scale factor (the largest absolute spiral
/// coordinate), so the distance from the roll axis stays monotone in `t`; the
/// height axis is min-max mapped onto `[-1, 1]`.
pub fn sample_swiss_roll<T: Scalar, R: Rng + ?Sized>(
    m: usize,
    noise: f64,
    rng: &mut R,
) -> Result<SwissRoll<T>> {
    if m == 0 {
        return Err(Error::Empty("swiss roll sample"));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return invalid(format!("swiss roll noise must be >= 0, got {noise}"));
    }
    let mut params = Vec::with_capacity(m);
    let mut raw = Vec::with_capacity(m * 3);
    for _ in 0..m {
        let t = 1.5 * PI + 3.0 * PI * rng.random::<f64>();
        let h = 10.0 * rng.random::<f64>();
        let mut p = [t * t.cos(), h, t * t.sin()];
        if noise > 0.0 {
            for v in &mut p {
                *v += noise * rng.sample::<f64, _>(StandardNormal);
            }
        }
        params.push(t);
        raw.extend(p);
    }
    let spiral_scale = raw
        .chunks_exact(3)
        .map(|p| p[0].abs().max(p[2].abs()))
        .fold(0.0f64, f64::max);
    let (hmin, hmax) = raw
        .chunks_exact(3)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        });
    let data = raw
        .chunks_exact(3)
        .flat_map(|p| {
            let h = if hmax > hmin {
                2.0 * (p[1] - hmin) / (hmax - hmin) - 1.0
            } else {
                0.0
            };
            [p[0] / spiral_scale, h, p[2] / spiral_scale]
        })
        .map(|v| T::of(v.clamp(-1.0, 1.0)))
        .collect();
    Ok(SwissRoll {
        cloud: PointCloud::new(Matrix::from_vec(m, 3, data)?)?,
        params,
    })
}

/// Epoch-shuffled minibatch schedule: every epoch draws a fresh permutation of
/// `0..n` and cuts it into `floor(n / batch)` disjoint batches. A trailing
/// remainder smaller than a batch is skipped for that epoch.
#[derive(Debug, Clone)]
pub struct Minibatcher {
    n: usize,
    batch: usize,
}

impl Minibatcher {
    pub fn new(n: usize, batch: usize) -> Result<Self> {
        if batch == 0 {
            return invalid("batch size must be at least 1");
        }
        if batch > n {
            return invalid(format!("batch size {batch} exceeds dataset size {n}"));
        }
        Ok(Self { n, batch })
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.n / self.batch
    }

    pub fn epoch<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<usize>> {
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.shuffle(rng);
        perm.chunks_exact(self.batch)
            .map(<[usize]>::to_vec)
            .collect()
    }
}

/// `m` distinct rows of `data`, taken from a fresh uniform permutation.
pub fn sample_minibatch<T: Scalar, R: Rng + ?Sized>(
    data: &PointCloud<T>,
    m: usize,
    rng: &mut R,
) -> Result<PointCloud<T>> {
    let batcher = Minibatcher::new(data.n(), m)?;
    let first = batcher.epoch(rng).swap_remove(0);
    data.select(&first)
}
