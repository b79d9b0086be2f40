//! Frobenius distances between covariance descriptors, distance matrices,
//! random-pair distance sampling, and histograms.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covariance::BlockToeplitzCov;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::timeseries::Component;

/// A labeled mean descriptor standing for one system state.
#[derive(Clone, Debug)]
pub struct StateDescriptor<T> {
    pub label: String,
    /// Optional physical tag (e.g. the temperature behind the label).
    pub scalar_tag: Option<T>,
    pub matrix: BlockToeplitzCov<T>,
}

/// Symmetric nonnegative matrix of pairwise state distances.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<T> {
    labels: Vec<String>,
    values: Mat<T>,
}

impl<T: Real> DistanceMatrix<T> {
    /// Validates labels and metric structure (symmetry, zero diagonal,
    /// nonnegativity) of an existing matrix.
    pub fn from_parts(labels: Vec<String>, values: Mat<T>) -> Result<Self> {
        if !values.is_square() || values.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: values.rows(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let residual = values.symmetry_residual();
        if residual > T::zero() {
            return Err(Error::NotSymmetric {
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        for i in 0..values.rows() {
            if values[(i, i)] != T::zero() {
                return Err(Error::InvalidHeader(format!(
                    "distance matrix diagonal entry {i} is nonzero"
                )));
            }
            for j in 0..values.cols() {
                if !(values[(i, j)] >= T::zero()) {
                    return Err(Error::InvalidHeader(format!(
                        "distance matrix entry ({i},{j}) is negative or non-finite"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Mat<T> {
        &self.values
    }

    /// Number of states S.
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }
}

/// Histogram of sampled pair distances.
#[derive(Clone, Debug)]
pub struct DistanceHistogram<T> {
    pub bin_edges: Vec<T>,
    pub counts: Vec<u64>,
    pub sample_count: u64,
    pub label_pair: (String, String),
    pub rng_seed: u64,
}

impl<T: Real> DistanceHistogram<T> {
    pub fn labeled(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.label_pair = (a.into(), b.into());
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }
}

/// Frobenius distance `||R_i - R_j||_F` over the dense matrices.
///
/// This elementwise path is the default and the reference for the lag-table
/// shortcut below.
pub fn frobenius_distance<T: Real>(
    a: &BlockToeplitzCov<T>,
    b: &BlockToeplitzCov<T>,
) -> Result<T> {
    if a.block_size() != b.block_size() {
        return Err(Error::DimensionMismatch {
            expected: a.block_size(),
            got: b.block_size(),
        });
    }
    let mut sum = T::zero();
    for (&x, &y) in a.matrix().data().iter().zip(b.matrix().data()) {
        let d = x - y;
        sum += d * d;
    }
    Ok(sum.sqrt())
}

/// Frobenius distance computed from the generating lag tables.
///
/// Each lag value `r_k^{ab}` occupies `N - k` entries of block `(a, b)` and,
/// for `k >= 1`, another `N - k` entries of block `(b, a)`, so
/// `d^2 = sum_{a,b} [ N dr_0^2 + sum_{k>=1} 2 (N - k) dr_k^2 ]` — O(N) per
/// component pair instead of O(N^2).
pub fn frobenius_distance_via_lags<T: Real>(
    a: &BlockToeplitzCov<T>,
    b: &BlockToeplitzCov<T>,
) -> Result<T> {
    if a.block_size() != b.block_size() {
        return Err(Error::DimensionMismatch {
            expected: a.block_size(),
            got: b.block_size(),
        });
    }
    let (la, lb) = match (a.lag_table(), b.lag_table()) {
        (Some(la), Some(lb)) => (la, lb),
        _ => {
            return Err(Error::InsufficientData(
                "lag-table distance path requires descriptors with lag tables".to_string(),
            ))
        }
    };
    let n = a.block_size();
    let mut sum = T::zero();
    for alpha in Component::ALL {
        for beta in Component::ALL {
            for k in 0..n {
                let d = la.get(alpha, beta, k) - lb.get(alpha, beta, k);
                let occurrences = if k == 0 { n } else { 2 * (n - k) };
                sum += T::from_count(occurrences) * d * d;
            }
        }
    }
    Ok(sum.sqrt())
}

/// Pairwise Frobenius distance matrix over labeled state descriptors.
pub fn distance_matrix<T: Real>(descriptors: &[StateDescriptor<T>]) -> Result<DistanceMatrix<T>> {
    if descriptors.len() < 2 {
        return Err(Error::InsufficientData(
            "distance matrix needs at least 2 descriptors".to_string(),
        ));
    }
    let labels: Vec<String> = descriptors.iter().map(|d| d.label.clone()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    let s = descriptors.len();
    let mut values = Mat::zeros(s, s);
    for i in 0..s {
        for j in (i + 1)..s {
            let d = frobenius_distance(&descriptors[i].matrix, &descriptors[j].matrix)?;
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    DistanceMatrix::from_parts(labels, values)
}

/// Draws `n_pairs` descriptor pairs uniformly with replacement and returns
/// their Frobenius distances. When `a` and `b` are the same collection
/// (same slice), the two members of a pair are kept distinct.
///
/// Reproducible: the same seed yields the same pair sequence.
pub fn sample_pair_distances<T: Real>(
    a: &[BlockToeplitzCov<T>],
    b: &[BlockToeplitzCov<T>],
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("pair sampling collections"));
    }
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs", "must be at least 1"));
    }
    let same_collection = std::ptr::eq(a.as_ptr(), b.as_ptr()) && a.len() == b.len();
    if same_collection && a.len() < 2 {
        return Err(Error::InsufficientData(
            "same-collection sampling needs at least 2 descriptors".to_string(),
        ));
    }
    let n = a[0].block_size();
    for d in a.iter().chain(b.iter()) {
        if d.block_size() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.block_size(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let i = rng.random_range(0..a.len());
        let mut j = rng.random_range(0..b.len());
        while same_collection && j == i {
            j = rng.random_range(0..b.len());
        }
        out.push(frobenius_distance(&a[i], &b[j])?);
    }
    Ok(out)
}

/// Uniform-bin histogram. Default range is `[min, max]` of the samples.
///
/// Values exactly on an interior edge land in the lower bin; the maximum
/// joins the last bin. Samples outside an explicit range are clamped into
/// the boundary bins so counts always sum to the sample count. All-equal
/// samples with no explicit range collapse to a single degenerate bin.
pub fn histogram<T: Real>(
    samples: &[T],
    n_bins: usize,
    range: Option<(T, T)>,
) -> Result<DistanceHistogram<T>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("histogram samples"));
    }
    if n_bins == 0 {
        return Err(Error::invalid("n_bins", "must be at least 1"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("histogram samples".to_string()));
    }

    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo < hi) {
                return Err(Error::invalid("range", "requires lo < hi"));
            }
            (lo, hi)
        }
        None => {
            let lo = samples.iter().copied().fold(T::infinity(), T::min);
            let hi = samples.iter().copied().fold(T::neg_infinity(), T::max);
            if lo == hi {
                // Degenerate single bin holding every sample.
                return Ok(DistanceHistogram {
                    bin_edges: vec![lo, hi],
                    counts: vec![samples.len() as u64],
                    sample_count: samples.len() as u64,
                    label_pair: (String::new(), String::new()),
                    rng_seed: 0,
                });
            }
            (lo, hi)
        }
    };

    let nb = T::from_count(n_bins);
    let width = hi - lo;
    let mut edges: Vec<T> = (0..=n_bins)
        .map(|i| lo + width * (T::from_count(i) / nb))
        .collect();
    edges[0] = lo;
    edges[n_bins] = hi;

    let mut counts = vec![0u64; n_bins];
    for &x in samples {
        // Bin i covers (e_i, e_{i+1}]; bin 0 also includes its left edge.
        let idx = edges[1..=n_bins].partition_point(|e| *e < x).min(n_bins - 1);
        counts[idx] += 1;
    }

    Ok(DistanceHistogram {
        bin_edges: edges,
        counts,
        sample_count: samples.len() as u64,
        label_pair: (String::new(), String::new()),
        rng_seed: 0,
    })
}
