//! Counter-based deterministic sampling.
//!
//! Sample `k` of a stream is produced by a ChaCha8 generator keyed on
//! `(seed, stream, k)`, so any sample can be recomputed in isolation and the
//! result does not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{check_axioms_on, AxiomReport, Metric, MetricKind, MetricSpace, Point};

/// How base points are drawn.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// Uniform on the space's sampling box.
    UniformBox,
    /// Isotropic Gaussian around `center`, clamped into the sampling box.
    GaussianAroundCenter { center: Point, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampler {
    pub seed: u64,
    pub scheme: Scheme,
    stream: u64,
}

/// FNV-1a over a tag and integer parts; names independent sample streams.
pub fn stream_id(tag: &str, parts: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u8| {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    tag.bytes().for_each(&mut eat);
    for p in parts {
        p.to_le_bytes().into_iter().for_each(&mut eat);
    }
    h
}

impl Sampler {
    pub fn uniform(seed: u64) -> Sampler {
        Sampler {
            seed,
            scheme: Scheme::UniformBox,
            stream: 0,
        }
    }

    pub fn gaussian(seed: u64, center: Point, sigma: f64) -> Result<Sampler> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Usage(format!("gaussian sigma must be positive, got {sigma}")));
        }
        Ok(Sampler {
            seed,
            scheme: Scheme::GaussianAroundCenter { center, sigma },
            stream: 0,
        })
    }

    /// A sampler on an independent stream derived from this one.
    pub fn fork(&self, tag: &str, parts: &[u64]) -> Sampler {
        let mut all = Vec::with_capacity(parts.len() + 1);
        all.push(self.stream);
        all.extend_from_slice(parts);
        Sampler {
            seed: self.seed,
            scheme: self.scheme.clone(),
            stream: stream_id(tag, &all),
        }
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Generator for sample `index` of this stream.
    pub fn rng_at(&self, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    fn draw_point<R: Rng>(&self, space: &MetricSpace, rng: &mut R) -> Point {
        match &self.scheme {
            Scheme::UniformBox => uniform_in_box(space, rng),
            Scheme::GaussianAroundCenter { center, sigma } => {
                gaussian_in_box(space, center.coords(), *sigma, rng)
            }
        }
    }

    /// The `index`-th point of this stream.
    pub fn point(&self, space: &MetricSpace, index: u64) -> Point {
        self.draw_point(space, &mut self.rng_at(index))
    }

    /// The `index`-th pair of this stream.
    pub fn pair(&self, space: &MetricSpace, index: u64) -> (Point, Point) {
        let mut rng = self.rng_at(index);
        let p = self.draw_point(space, &mut rng);
        let q = self.draw_point(space, &mut rng);
        (p, q)
    }

    /// The `index`-th triple of this stream.
    pub fn triple(&self, space: &MetricSpace, index: u64) -> [Point; 3] {
        let mut rng = self.rng_at(index);
        [
            self.draw_point(space, &mut rng),
            self.draw_point(space, &mut rng),
            self.draw_point(space, &mut rng),
        ]
    }
}

fn uniform_in_box<R: Rng>(space: &MetricSpace, rng: &mut R) -> Point {
    let coords = space
        .sampling_box()
        .iter()
        .map(|iv| {
            let x = iv.lower + rng.random::<f64>() * iv.width();
            x.clamp(iv.lower, iv.upper)
        })
        .collect();
    Point::from_vec_unchecked(coords)
}

fn gaussian_in_box<R: Rng>(space: &MetricSpace, center: &[f64], sigma: f64, rng: &mut R) -> Point {
    let coords = space
        .sampling_box()
        .iter()
        .zip(center)
        .map(|(iv, c)| {
            let z: f64 = rng.sample(StandardNormal);
            (c + sigma * z).clamp(iv.lower, iv.upper)
        })
        .collect();
    Point::from_vec_unchecked(coords)
}

// Unit vector under the given metric's norm, or None for a degenerate draw.
fn unit_direction<R: Rng>(metric: MetricKind, dim: usize, rng: &mut R) -> Option<Vec<f64>> {
    let v: Vec<f64> = match metric {
        MetricKind::Euclidean => (0..dim).map(|_| rng.sample(StandardNormal)).collect(),
        _ => (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    };
    let norm = match metric {
        MetricKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        MetricKind::Chebyshev => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        MetricKind::Manhattan => v.iter().map(|x| x.abs()).sum(),
        MetricKind::Discrete => 1.0,
    };
    (norm > 0.0 && norm.is_finite()).then(|| v.into_iter().map(|x| x / norm).collect())
}

// A random vertex of the sampling box and the vertex opposite it.
fn antipodal_corners<R: Rng>(space: &MetricSpace, rng: &mut R) -> (Point, Point) {
    let (p, q) = space
        .sampling_box()
        .iter()
        .map(|iv| {
            if rng.random::<bool>() {
                (iv.lower, iv.upper)
            } else {
                (iv.upper, iv.lower)
            }
        })
        .unzip();
    (Point::from_vec_unchecked(p), Point::from_vec_unchecked(q))
}

/// Check the metric axioms of `space` on `n_triples` sampled triples.
pub fn check_metric_axioms(space: &MetricSpace, sampler: &Sampler, n_triples: u64) -> Result<AxiomReport> {
    check_metric_axioms_with(space, space, sampler, n_triples)
}

/// As [`check_metric_axioms`], but measuring with `metric` instead of the
/// space's own metric. Triples are still drawn from `space`.
pub fn check_metric_axioms_with<M: Metric + Sync + ?Sized>(
    metric: &M,
    space: &MetricSpace,
    sampler: &Sampler,
    n_triples: u64,
) -> Result<AxiomReport> {
    if n_triples == 0 {
        return Err(Error::Usage("n_triples must be at least 1".into()));
    }
    let triples: Vec<[Point; 3]> = (0..n_triples)
        .into_par_iter()
        .map(|i| sampler.triple(space, i))
        .collect();
    Ok(check_axioms_on(metric, triples))
}

/// Result of [`sample_pair_in_annulus`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusSample {
    pub pairs: Vec<(Point, Point)>,
    pub requested: usize,
    pub attempts: u64,
    /// True when the retry cap ran out before `requested` pairs were found.
    pub exhausted: bool,
}

/// Attempts per accepted pair before giving up.
pub const ANNULUS_RETRY_FACTOR: u64 = 64;

const CHUNK: u64 = 512;

/// Check that some pair of the sampling box can have ε ≤ d < ε + width.
pub fn check_band(space: &MetricSpace, epsilon: f64, width: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(width > 0.0 && width.is_finite()) {
        return Err(Error::Usage(format!(
            "band needs epsilon > 0 and width > 0, got epsilon={epsilon}, width={width}"
        )));
    }
    let diameter = space.sampled_diameter();
    let infeasible = match space.metric() {
        // the only positive distance is 1
        MetricKind::Discrete => !(epsilon <= 1.0 && 1.0 < epsilon + width),
        _ => epsilon > diameter,
    };
    if infeasible {
        return Err(Error::InfeasibleBand {
            epsilon,
            width,
            diameter,
        });
    }
    Ok(())
}

/// Draw up to `budget` pairs with `epsilon ≤ d(p, q) < epsilon + width`.
///
/// Each attempt first tries a plain pair from the sampler, then a directional
/// construction `q = p + r·u` with `r` uniform in the band and `u` a unit
/// vector for the space's metric, and finally a pair of opposite corners of
/// the sampling box (the only pairs in a band starting at the diameter). Every accepted pair passes
/// the band test exactly under [`MetricSpace::distance`] and lies in the
/// sampling box. With `center`, base points are Gaussian around it with
/// σ = ε + width.
pub fn sample_pair_in_annulus(
    space: &MetricSpace,
    sampler: &Sampler,
    center: Option<&Point>,
    epsilon: f64,
    width: f64,
    budget: usize,
) -> Result<AnnulusSample> {
    if budget == 0 {
        return Err(Error::Usage("annulus budget must be at least 1".into()));
    }
    check_band(space, epsilon, width)?;
    let base = match center {
        Some(c) => {
            space.check_point(c)?;
            Sampler {
                seed: sampler.seed,
                scheme: Scheme::GaussianAroundCenter {
                    center: c.clone(),
                    sigma: epsilon + width,
                },
                stream: sampler.stream,
            }
        }
        None => sampler.clone(),
    };
    let in_band = |d: f64| epsilon <= d && d < epsilon + width;
    let attempt = |index: u64| -> Option<(Point, Point)> {
        let mut rng = base.rng_at(index);
        let p = base.draw_point(space, &mut rng);
        let q = base.draw_point(space, &mut rng);
        if in_band(space.metric().eval(p.coords(), q.coords())) {
            return Some((p, q));
        }
        let r = rng.random_range(epsilon..epsilon + width);
        let q = match space.metric() {
            MetricKind::Discrete => q,
            metric => match unit_direction(metric, space.dimension(), &mut rng) {
                Some(u) => {
                    let coords = p.coords().iter().zip(&u).map(|(x, ui)| x + r * ui).collect();
                    Point::from_vec_unchecked(coords)
                }
                None => q,
            },
        };
        let ok = q.coords().iter().all(|c| c.is_finite())
            && space.in_sampling_box(&q)
            && in_band(space.metric().eval(p.coords(), q.coords()));
        if ok {
            return Some((p, q));
        }
        // a band reaching the diameter may contain only antipodal corners
        let (p, q) = antipodal_corners(space, &mut rng);
        in_band(space.metric().eval(p.coords(), q.coords())).then_some((p, q))
    };

    let cap = ANNULUS_RETRY_FACTOR.saturating_mul(budget as u64);
    let mut pairs = Vec::with_capacity(budget);
    let mut attempts = 0u64;
    while pairs.len() < budget && attempts < cap {
        let end = (attempts + CHUNK).min(cap);
        let found: Vec<Option<(Point, Point)>> =
            (attempts..end).into_par_iter().map(attempt).collect();
        let mut consumed = end - attempts;
        for (offset, hit) in found.into_iter().enumerate() {
            if let Some(pair) = hit {
                pairs.push(pair);
                if pairs.len() == budget {
                    consumed = offset as u64 + 1;
                    break;
                }
            }
        }
        attempts += consumed;
    }
    Ok(AnnulusSample {
        exhausted: pairs.len() < budget,
        requested: budget,
        attempts,
        pairs,
    })
}
