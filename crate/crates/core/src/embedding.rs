//! PCA embedding of a distance matrix and linear correlation of the leading
//! component with physical observables.

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::scalar::Real;

/// Low-dimensional embedding of the states behind a distance matrix.
#[derive(Clone, Debug)]
pub struct Embedding<T> {
    pub labels: Vec<String>,
    /// S x D coordinates; row i is the embedded point for state i.
    pub coordinates: Mat<T>,
    /// Fraction of total variance captured per returned component.
    pub explained_variance_ratio: Vec<T>,
    /// S x D matrix whose columns are the (orthonormal) component axes.
    pub component_axes: Mat<T>,
}

impl<T: Real> Embedding<T> {
    pub fn dims(&self) -> usize {
        self.coordinates.cols()
    }

    /// Coordinates along the leading component.
    pub fn pc1(&self) -> Vec<T> {
        (0..self.coordinates.rows())
            .map(|i| self.coordinates[(i, 0)])
            .collect()
    }
}

/// Ordinary least-squares line plus the Pearson correlation of the inputs.
#[derive(Clone, Copy, Debug)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub pearson_r: T,
    pub n_points: usize,
}

/// PCA of the distance matrix, treating each row as an S-dimensional feature
/// vector: rows are centered by the column means and projected onto the top
/// eigenvectors of the feature covariance.
///
/// The sign of each axis is fixed deterministically: the entry of largest
/// magnitude (first such entry on ties) is made positive.
pub fn pca_embed<T: Real>(dm: &DistanceMatrix<T>, dims: usize) -> Result<Embedding<T>> {
    let s = dm.dim();
    if s < 2 {
        return Err(Error::InsufficientData(
            "embedding needs at least 2 states".to_string(),
        ));
    }
    if dims == 0 || dims > s {
        return Err(Error::invalid(
            "dims",
            format!("must be between 1 and the number of states ({s})"),
        ));
    }

    // Center columns.
    let count = T::from_count(s);
    let col_means: Vec<T> = (0..s)
        .map(|j| (0..s).map(|i| dm.get(i, j)).fold(T::zero(), |a, v| a + v) / count)
        .collect();
    let centered = Mat::from_fn(s, s, |i, j| dm.get(i, j) - col_means[j]);

    // Feature covariance (1/S) C^T C.
    let mut cov = Mat::zeros(s, s);
    for j in 0..s {
        for k in j..s {
            let mut acc = T::zero();
            for i in 0..s {
                acc += centered[(i, j)] * centered[(i, k)];
            }
            cov[(j, k)] = acc / count;
            cov[(k, j)] = cov[(j, k)];
        }
    }

    let total_variance = (0..s).map(|j| cov[(j, j)]).fold(T::zero(), |a, v| a + v);
    if total_variance == T::zero() {
        return Ok(Embedding {
            labels: dm.labels().to_vec(),
            coordinates: Mat::zeros(s, dims),
            explained_variance_ratio: vec![T::zero(); dims],
            component_axes: Mat::from_fn(s, dims, |i, j| {
                if i == j {
                    T::one()
                } else {
                    T::zero()
                }
            }),
        });
    }

    let eigen = symmetric_eigen(&cov)?;
    let clamped_total = eigen
        .eigenvalues
        .iter()
        .map(|&l| l.max(T::zero()))
        .fold(T::zero(), |a, v| a + v);

    let mut axes = Mat::zeros(s, dims);
    for d in 0..dims {
        let mut axis: Vec<T> = (0..s).map(|i| eigen.eigenvectors[(i, d)]).collect();
        orient_axis(&mut axis);
        for i in 0..s {
            axes[(i, d)] = axis[i];
        }
    }

    let coordinates = Mat::from_fn(s, dims, |i, d| {
        (0..s)
            .map(|j| centered[(i, j)] * axes[(j, d)])
            .fold(T::zero(), |a, v| a + v)
    });
    let explained_variance_ratio = (0..dims)
        .map(|d| eigen.eigenvalues[d].max(T::zero()) / clamped_total)
        .collect();

    Ok(Embedding {
        labels: dm.labels().to_vec(),
        coordinates,
        explained_variance_ratio,
        component_axes: axes,
    })
}

/// Classical multidimensional scaling of the distance matrix
/// (double-centering of squared distances), provided as the standard
/// alternative to [`pca_embed`].
pub fn mds_embed<T: Real>(dm: &DistanceMatrix<T>, dims: usize) -> Result<Embedding<T>> {
    let s = dm.dim();
    if s < 2 {
        return Err(Error::InsufficientData(
            "embedding needs at least 2 states".to_string(),
        ));
    }
    if dims == 0 || dims > s {
        return Err(Error::invalid(
            "dims",
            format!("must be between 1 and the number of states ({s})"),
        ));
    }

    // B = -1/2 J D2 J with J = I - (1/S) 11^T.
    let count = T::from_count(s);
    let d2 = Mat::from_fn(s, s, |i, j| dm.get(i, j) * dm.get(i, j));
    let row_means: Vec<T> = (0..s)
        .map(|i| (0..s).map(|j| d2[(i, j)]).fold(T::zero(), |a, v| a + v) / count)
        .collect();
    let col_means: Vec<T> = (0..s)
        .map(|j| (0..s).map(|i| d2[(i, j)]).fold(T::zero(), |a, v| a + v) / count)
        .collect();
    let grand = row_means.iter().fold(T::zero(), |a, &v| a + v) / count;
    let b = Mat::from_fn(s, s, |i, j| {
        T::lit(-0.5) * (d2[(i, j)] - row_means[i] - col_means[j] + grand)
    });

    let eigen = symmetric_eigen(&b)?;
    let clamped_total = eigen
        .eigenvalues
        .iter()
        .map(|&l| l.max(T::zero()))
        .fold(T::zero(), |a, v| a + v);

    let mut axes = Mat::zeros(s, dims);
    let mut coordinates = Mat::zeros(s, dims);
    for d in 0..dims {
        let mut axis: Vec<T> = (0..s).map(|i| eigen.eigenvectors[(i, d)]).collect();
        orient_axis(&mut axis);
        let scale = eigen.eigenvalues[d].max(T::zero()).sqrt();
        for i in 0..s {
            axes[(i, d)] = axis[i];
            coordinates[(i, d)] = axis[i] * scale;
        }
    }
    let explained_variance_ratio = (0..dims)
        .map(|d| {
            if clamped_total == T::zero() {
                T::zero()
            } else {
                eigen.eigenvalues[d].max(T::zero()) / clamped_total
            }
        })
        .collect();

    Ok(Embedding {
        labels: dm.labels().to_vec(),
        coordinates,
        explained_variance_ratio,
        component_axes: axes,
    })
}

/// Flips the axis so its entry of largest magnitude is positive. Entries
/// within a small relative band of the maximum count as tied and the
/// earliest one decides, so symmetric axes (e.g. `(a, 0, -a)`) orient
/// stably despite last-bit differences.
fn orient_axis<T: Real>(axis: &mut [T]) {
    let max_abs = axis.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if max_abs == T::zero() {
        return;
    }
    let band = max_abs * (T::one() - T::lit(1e-12));
    let leader = axis
        .iter()
        .position(|v| v.abs() >= band)
        .expect("max entry exists");
    if axis[leader] < T::zero() {
        for v in axis.iter_mut() {
            *v = -*v;
        }
    }
}

/// Ordinary least squares y = slope * x + intercept with the Pearson
/// correlation coefficient. A constant `y` is well defined (slope 0, r 0);
/// a constant `x` is rejected.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "linear fit needs at least 2 points".to_string(),
        ));
    }
    let count = T::from_count(n);
    let mean_x = x.iter().copied().fold(T::zero(), |a, v| a + v) / count;
    let mean_y = y.iter().copied().fold(T::zero(), |a, v| a + v) / count;
    let mut sxx = T::zero();
    let mut syy = T::zero();
    let mut sxy = T::zero();
    let mut max_abs_x = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        max_abs_x = max_abs_x.max(xi.abs());
    }
    let x_floor = {
        let e = T::epsilon() * count * max_abs_x;
        e * e
    };
    if sxx <= x_floor {
        return Err(Error::invalid("x", "degenerate: all x values are equal"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let pearson_r = if syy == T::zero() {
        T::zero()
    } else {
        (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one())
    };
    Ok(LinearFit {
        slope,
        intercept,
        pearson_r,
        n_points: n,
    })
}
