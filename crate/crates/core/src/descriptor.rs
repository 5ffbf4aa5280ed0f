//! Shape descriptors and the dissimilarity between them.
//!
//! Everything above this module only sees [`ShapeDescriptor`] values, so any
//! method that fills a probability histogram and names itself with a
//! `method_tag` can replace D2. Descriptors with different tags never
//! compare.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{distance, sample_surface, surface_area, Mesh};
use crate::rng;

/// Upper edge of the histogram domain, in units of the mean pair distance.
pub const D2_RANGE: f64 = 3.0;
pub const DEFAULT_PAIRS: usize = 65_536;
pub const DEFAULT_BINS: usize = 64;

const SUM_TOLERANCE: f64 = 1e-9;

/// Normalized histogram summarizing one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDescriptor {
    bins: Vec<f64>,
    method_tag: Arc<str>,
}

impl ShapeDescriptor {
    /// Wraps an existing probability histogram. Bins must be finite,
    /// non-negative and sum to one.
    pub fn new(bins: Vec<f64>, method_tag: impl Into<Arc<str>>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidParameter("descriptor needs at least one bin".into()));
        }
        if bins.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidParameter(
                "descriptor bins must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = bins.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "descriptor bins sum to {sum}, expected 1"
            )));
        }
        Ok(ShapeDescriptor {
            bins,
            method_tag: method_tag.into(),
        })
    }

    /// Scales non-negative weights into a probability histogram.
    pub fn from_weights(weights: &[f64], method_tag: impl Into<Arc<str>>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidParameter(
                "weights must have a positive finite sum".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect(), method_tag)
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Dissimilarity(f64);

impl Dissimilarity {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Dissimilarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// L1 distance between two histograms of the same method.
pub fn descriptor_distance(a: &ShapeDescriptor, b: &ShapeDescriptor) -> Result<Dissimilarity> {
    if a.bins.len() != b.bins.len() {
        return Err(Error::DescriptorMismatch(format!(
            "bin counts {} and {}",
            a.bins.len(),
            b.bins.len()
        )));
    }
    if !Arc::ptr_eq(&a.method_tag, &b.method_tag) && a.method_tag != b.method_tag {
        return Err(Error::DescriptorMismatch(format!(
            "method tags `{}` and `{}`",
            a.method_tag, b.method_tag
        )));
    }
    Ok(Dissimilarity(
        a.bins.iter().zip(&b.bins).map(|(x, y)| (x - y).abs()).sum(),
    ))
}

/// Something that turns a mesh into a descriptor. Implementations must be
/// deterministic for a given mesh and must tag every output identically.
pub trait DescriptorMethod: Sync {
    fn method_tag(&self) -> String;

    /// Describes a database or query mesh. The mesh's `source_id` may feed
    /// per-model seeding.
    fn describe(&self, mesh: &Mesh) -> Result<ShapeDescriptor>;
}

/// Parameters of the D2 shape distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct D2Params {
    pub pairs: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for D2Params {
    fn default() -> Self {
        D2Params {
            pairs: DEFAULT_PAIRS,
            bins: DEFAULT_BINS,
            seed: 0,
        }
    }
}

impl D2Params {
    pub fn tag(&self) -> String {
        format!("d2/v1?pairs={}&bins={}&seed={}", self.pairs, self.bins, self.seed)
    }

    /// Inverse of [`D2Params::tag`].
    pub fn from_tag(tag: &str) -> Result<Self> {
        let bad = || Error::DescriptorMismatch(format!("unrecognized method tag `{tag}`"));
        let query = tag.strip_prefix("d2/v1?").ok_or_else(bad)?;
        let mut fields = query.split('&');
        let mut take = |key: &str| -> Result<&str> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .and_then(|f| f.strip_prefix('='))
                .ok_or_else(bad)
        };
        let pairs = take("pairs")?.parse().map_err(|_| bad())?;
        let bins = take("bins")?.parse().map_err(|_| bad())?;
        let seed = take("seed")?.parse().map_err(|_| bad())?;
        if fields.next().is_some() {
            return Err(bad());
        }
        Ok(D2Params { pairs, bins, seed })
    }
}

impl DescriptorMethod for D2Params {
    fn method_tag(&self) -> String {
        self.tag()
    }

    /// Samples with the per-model seed derived from `self.seed` and the
    /// mesh id, but tags the result with the run-level parameters.
    fn describe(&self, mesh: &Mesh) -> Result<ShapeDescriptor> {
        let seed = rng::model_seed(self.seed, mesh.source_id());
        let (bins, _) = d2_histogram(mesh, self.pairs, self.bins, seed)?;
        ShapeDescriptor::new(bins, self.tag())
    }
}

/// Histogram plus the raw mean pair distance it was normalized by.
#[derive(Debug, Clone, PartialEq)]
pub struct D2Stats {
    pub descriptor: ShapeDescriptor,
    pub mean_distance: f64,
}

/// D2 distribution of `mesh`, sampled with exactly `seed`.
pub fn compute_d2(mesh: &Mesh, n_pairs: usize, bin_count: usize, seed: u64) -> Result<ShapeDescriptor> {
    Ok(compute_d2_with_stats(mesh, n_pairs, bin_count, seed)?.descriptor)
}

pub fn compute_d2_with_stats(mesh: &Mesh, n_pairs: usize, bin_count: usize, seed: u64) -> Result<D2Stats> {
    let (bins, mean_distance) = d2_histogram(mesh, n_pairs, bin_count, seed)?;
    let tag = D2Params {
        pairs: n_pairs,
        bins: bin_count,
        seed,
    }
    .tag();
    Ok(D2Stats {
        descriptor: ShapeDescriptor::new(bins, tag)?,
        mean_distance,
    })
}

fn d2_histogram(mesh: &Mesh, n_pairs: usize, bin_count: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
    if n_pairs == 0 || bin_count == 0 {
        return Err(Error::InvalidParameter("pairs and bins must be positive".into()));
    }
    if n_pairs < bin_count {
        return Err(Error::InvalidParameter(format!(
            "pairs ({n_pairs}) must be at least bins ({bin_count})"
        )));
    }
    let mut bins = vec![0.0; bin_count];

    // a mesh collapsed to one point has every pair distance equal to zero
    let first = mesh.vertices()[0];
    if mesh.vertices().iter().all(|&v| v == first) {
        bins[0] = 1.0;
        return Ok((bins, 0.0));
    }
    let area = surface_area(mesh);
    if area.is_nan() || area <= 0.0 {
        return Err(Error::ZeroArea);
    }

    let sample = sample_surface(mesh, 2 * n_pairs, seed)?;
    let distances: Vec<f64> = sample.points.chunks_exact(2).map(|p| distance(p[0], p[1])).collect();
    let mean = distances.iter().sum::<f64>() / n_pairs as f64;
    if mean == 0.0 {
        bins[0] = 1.0;
        return Ok((bins, 0.0));
    }

    let scale = bin_count as f64 / D2_RANGE;
    let mut counts = vec![0u64; bin_count];
    for d in &distances {
        let slot = ((d / mean) * scale) as usize;
        counts[slot.min(bin_count - 1)] += 1;
    }
    for (b, c) in bins.iter_mut().zip(&counts) {
        *b = *c as f64 / n_pairs as f64;
    }
    Ok((bins, mean))
}
