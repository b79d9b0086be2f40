//! Sample moments and block-Toeplitz covariance descriptors.
//!
//! A segment's descriptor is a `3N x 3N` symmetric matrix of nine `N x N`
//! Toeplitz blocks, one per ordered pair of spatial components. Block
//! `(alpha, beta)` has first row `(r_0, .., r_{N-1})` built from the lag
//! correlations `r_k^{alpha beta}` and first column from the transposed pair,
//! which makes `block(alpha, beta) = block(beta, alpha)^T` and the assembled
//! matrix exactly symmetric.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::scalar::Real;
use crate::timeseries::{Component, SegmentMatrix};

/// The generating lag correlations `r[alpha][beta][k]` of a descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct LagTable<T> {
    n: usize,
    values: [[Vec<T>; 3]; 3],
}

impl<T: Real> LagTable<T> {
    /// Block size N (lags run over `0..N`).
    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn get(&self, alpha: Component, beta: Component, lag: usize) -> T {
        self.values[alpha.index()][beta.index()][lag]
    }
}

/// Symmetric `3N x 3N` covariance descriptor with exact block-Toeplitz
/// structure, optionally carrying its generating lag table.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockToeplitzCov<T> {
    n: usize,
    matrix: Mat<T>,
    lags: Option<LagTable<T>>,
}

impl<T: Real> BlockToeplitzCov<T> {
    /// Block size N.
    pub fn block_size(&self) -> usize {
        self.n
    }

    /// Full matrix dimension 3N.
    pub fn dim(&self) -> usize {
        3 * self.n
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.matrix
    }

    pub fn lag_table(&self) -> Option<&LagTable<T>> {
        self.lags.as_ref()
    }

    /// Validates an existing `3N x 3N` matrix and reconstructs its lag table.
    ///
    /// The matrix must be exactly symmetric and exactly block-Toeplitz (our
    /// own construction and serialization preserve both bit-for-bit).
    pub fn from_matrix(matrix: Mat<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() % 3 != 0 || matrix.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                got: matrix.cols(),
            });
        }
        if !matrix.all_finite() {
            return Err(Error::NonFinite("descriptor matrix".to_string()));
        }
        let n = matrix.rows() / 3;
        let residual = matrix.symmetry_residual();
        if residual > T::zero() {
            return Err(Error::NotSymmetric {
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }

        let mut values: [[Vec<T>; 3]; 3] = Default::default();
        for a in 0..3 {
            for b in 0..3 {
                // First row of block (a, b) carries r_k^{ab}.
                values[a][b] = (0..n).map(|k| matrix[(a * n, b * n + k)]).collect();
            }
        }
        let lags = LagTable { n, values };

        // Every entry must match the Toeplitz pattern it claims to encode.
        for a in 0..3 {
            for b in 0..3 {
                for i in 0..n {
                    for j in 0..n {
                        let expect = if j >= i {
                            lags.values[a][b][j - i]
                        } else {
                            lags.values[b][a][i - j]
                        };
                        if matrix[(a * n + i, b * n + j)] != expect {
                            return Err(Error::InvalidHeader(format!(
                                "matrix is not block-Toeplitz at block ({a},{b}) entry ({i},{j})"
                            )));
                        }
                    }
                }
            }
        }

        Ok(BlockToeplitzCov {
            n,
            matrix,
            lags: Some(lags),
        })
    }

    /// Runs [`spd_check`] on the descriptor matrix.
    pub fn spd_check(&self, tolerance: T) -> Result<SpdDiagnostics<T>> {
        spd_check(&self.matrix, tolerance)
    }
}

/// Positive-definiteness diagnostics for a symmetric matrix.
#[derive(Clone, Copy, Debug)]
pub struct SpdDiagnostics<T> {
    pub min_eigenvalue: T,
    pub is_positive_definite: bool,
    pub symmetry_residual: T,
}

/// Componentwise arithmetic mean of a nonempty list of equal-length vectors.
pub fn sample_mean<T: Real, V: AsRef<[T]>>(vectors: &[V]) -> Result<Vec<T>> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("sample_mean vectors"));
    }
    let dim = vectors[0].as_ref().len();
    let mut acc = vec![T::zero(); dim];
    for v in vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            if !x.is_finite() {
                return Err(Error::NonFinite("sample_mean input".to_string()));
            }
            *a += x;
        }
    }
    let count = T::from_count(vectors.len());
    for a in &mut acc {
        *a /= count;
    }
    Ok(acc)
}

/// Sample covariance with 1/N normalization:
/// `(1/N) sum (x_i - mu)(x_i - mu)^T`.
pub fn sample_covariance<T: Real, V: AsRef<[T]>>(vectors: &[V]) -> Result<Mat<T>> {
    let mean = sample_mean(vectors)?;
    let dim = mean.len();
    let mut cov = Mat::zeros(dim, dim);
    for v in vectors {
        let v = v.as_ref();
        for i in 0..dim {
            let di = v[i] - mean[i];
            for j in i..dim {
                cov[(i, j)] += di * (v[j] - mean[j]);
            }
        }
    }
    let count = T::from_count(vectors.len());
    for i in 0..dim {
        for j in i..dim {
            cov[(i, j)] /= count;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    Ok(cov)
}

/// Normalization convention for [`lag_correlation_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagNormalization {
    /// Divide by N regardless of lag (the default).
    Biased,
    /// Divide by N - k.
    Unbiased,
}

/// Lag correlation `r_k = (1/N) sum_{l=0}^{N-k-1} x_l^alpha x_{l+k}^beta`
/// with the biased 1/N normalization.
pub fn lag_correlation<T: Real>(
    segment: &SegmentMatrix<T>,
    alpha: Component,
    beta: Component,
    lag: usize,
) -> Result<T> {
    lag_correlation_with(segment, alpha, beta, lag, LagNormalization::Biased)
}

/// Lag correlation with an explicit normalization convention.
pub fn lag_correlation_with<T: Real>(
    segment: &SegmentMatrix<T>,
    alpha: Component,
    beta: Component,
    lag: usize,
    normalization: LagNormalization,
) -> Result<T> {
    let n = segment.len();
    if lag >= n {
        return Err(Error::LagOutOfRange {
            lag,
            segment_len: n,
        });
    }
    let ra = segment.row(alpha);
    let rb = segment.row(beta);
    let mut acc = T::zero();
    for l in 0..(n - lag) {
        acc += ra[l] * rb[l + lag];
    }
    let denom = match normalization {
        LagNormalization::Biased => T::from_count(n),
        LagNormalization::Unbiased => T::from_count(n - lag),
    };
    Ok(acc / denom)
}

/// Assembles the block-Toeplitz covariance descriptor of one segment.
///
/// Cost is O(9 N^2): N lag sums per component pair plus the dense fill.
pub fn build_block_toeplitz<T: Real>(segment: &SegmentMatrix<T>) -> BlockToeplitzCov<T> {
    let n = segment.len();
    let mut values: [[Vec<T>; 3]; 3] = Default::default();
    for alpha in Component::ALL {
        for beta in Component::ALL {
            values[alpha.index()][beta.index()] = (0..n)
                .map(|k| {
                    lag_correlation(segment, alpha, beta, k)
                        .expect("lag < segment length by construction")
                })
                .collect();
        }
    }

    let mut matrix = Mat::zeros(3 * n, 3 * n);
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..n {
                for j in 0..n {
                    matrix[(a * n + i, b * n + j)] = if j >= i {
                        values[a][b][j - i]
                    } else {
                        values[b][a][i - j]
                    };
                }
            }
        }
    }

    BlockToeplitzCov {
        n,
        matrix,
        lags: Some(LagTable { n, values }),
    }
}

/// Entrywise arithmetic mean of descriptors sharing the same block size.
///
/// Averaging preserves the block-Toeplitz structure, so the result keeps a
/// lag table whenever every input carries one.
pub fn euclidean_mean<T: Real>(descriptors: &[BlockToeplitzCov<T>]) -> Result<BlockToeplitzCov<T>> {
    let first = descriptors
        .first()
        .ok_or(Error::EmptyInput("euclidean_mean descriptors"))?;
    let n = first.block_size();
    for d in descriptors {
        if d.block_size() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.block_size(),
            });
        }
    }
    let count = T::from_count(descriptors.len());

    let mut matrix = first.matrix.clone();
    for d in &descriptors[1..] {
        matrix.add_assign(&d.matrix);
    }
    let matrix = matrix.map(|v| v / count);

    let lags = if descriptors.iter().all(|d| d.lags.is_some()) {
        let mut values: [[Vec<T>; 3]; 3] = Default::default();
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = descriptors[0].lags.as_ref().unwrap().values[a][b].clone();
                for d in &descriptors[1..] {
                    for (s, &v) in acc.iter_mut().zip(&d.lags.as_ref().unwrap().values[a][b]) {
                        *s += v;
                    }
                }
                for s in &mut acc {
                    *s /= count;
                }
                values[a][b] = acc;
            }
        }
        Some(LagTable { n, values })
    } else {
        None
    };

    Ok(BlockToeplitzCov { n, matrix, lags })
}

/// Reports the smallest eigenvalue of a symmetric matrix and whether it sits
/// above `tolerance`. Rejects inputs whose symmetry residual exceeds 1e-9.
pub fn spd_check<T: Real>(matrix: &Mat<T>, tolerance: T) -> Result<SpdDiagnostics<T>> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.rows(),
            got: matrix.cols(),
        });
    }
    let residual = matrix.symmetry_residual();
    if residual > T::lit(1e-9) {
        return Err(Error::NotSymmetric {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let eigen = symmetric_eigen(matrix)?;
    let min_eigenvalue = *eigen
        .eigenvalues
        .last()
        .expect("eigensolver returns one eigenvalue per row");
    Ok(SpdDiagnostics {
        min_eigenvalue,
        is_positive_definite: min_eigenvalue > tolerance,
        symmetry_residual: residual,
    })
}

/// Default positive-definiteness tolerance: 1e-10 relative to the largest
/// diagonal entry.
pub fn default_spd_tolerance<T: Real>(matrix: &Mat<T>) -> T {
    T::lit(1e-10) * matrix.max_abs_diagonal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::Component::{X, Y, Z};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn lcg_stream(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    fn random_segment(n: usize, seed: u64) -> SegmentMatrix<f64> {
        let mut next = lcg_stream(seed);
        SegmentMatrix::from_rows(
            1,
            [
                (0..n).map(|_| next()).collect(),
                (0..n).map(|_| next()).collect(),
                (0..n).map(|_| next()).collect(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sample_mean_examples() {
        assert_eq!(sample_mean(&[vec![1.0, 1.0, 1.0]]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(
            sample_mean(&[vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert!(matches!(
            sample_mean::<f64, Vec<f64>>(&[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn sample_mean_matches_accumulation_oracle() {
        let mut next = lcg_stream(7);
        let vectors: Vec<Vec<f64>> = (0..100).map(|_| (0..3).map(|_| next()).collect()).collect();
        let mean = sample_mean(&vectors).unwrap();
        for c in 0..3 {
            let direct: f64 = vectors.iter().map(|v| v[c]).sum::<f64>() / 100.0;
            assert_close(mean[c], direct, 1e-14);
        }
    }

    #[test]
    fn sample_covariance_examples() {
        let single = sample_covariance(&[vec![3.0, -1.0, 2.0]]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(single[(i, j)], 0.0);
            }
        }

        let two = sample_covariance(&[vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(two[(0, 0)], 1.0);
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (0, 0) {
                    assert_eq!(two[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn sample_covariance_matches_double_loop_oracle() {
        let mut next = lcg_stream(99);
        let vectors: Vec<Vec<f64>> = (0..50).map(|_| (0..4).map(|_| next()).collect()).collect();
        let cov = sample_covariance(&vectors).unwrap();
        let mean = sample_mean(&vectors).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let direct: f64 = vectors
                    .iter()
                    .map(|v| (v[i] - mean[i]) * (v[j] - mean[j]))
                    .sum::<f64>()
                    / 50.0;
                assert_close(cov[(i, j)], direct, 1e-12);
            }
        }
    }

    #[test]
    fn sample_covariance_is_psd() {
        for seed in 0..10 {
            let mut next = lcg_stream(1000 + seed);
            let vectors: Vec<Vec<f64>> =
                (0..30).map(|_| (0..5).map(|_| next()).collect()).collect();
            let cov = sample_covariance(&vectors).unwrap();
            let eigen = symmetric_eigen(&cov).unwrap();
            assert!(*eigen.eigenvalues.last().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn lag_correlation_examples() {
        let ones = SegmentMatrix::from_rows(1, [vec![1.0; 4], vec![1.0; 4], vec![1.0; 4]]).unwrap();
        assert_close(lag_correlation(&ones, X, X, 1).unwrap(), 0.75, 0.0);

        let zeros = SegmentMatrix::from_rows(1, [vec![0.0; 4], vec![0.0; 4], vec![0.0; 4]]).unwrap();
        for k in 0..4 {
            assert_eq!(lag_correlation(&zeros, Y, Z, k).unwrap(), 0.0);
        }

        let seg = SegmentMatrix::from_rows(
            1,
            [vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![0.0; 3]],
        )
        .unwrap();
        assert_close(lag_correlation(&seg, X, Y, 1).unwrap(), 17.0 / 3.0, 1e-15);
    }

    #[test]
    fn lag_correlation_rejects_out_of_range() {
        let seg = random_segment(4, 5);
        assert!(matches!(
            lag_correlation(&seg, X, X, 4),
            Err(Error::LagOutOfRange { lag: 4, segment_len: 4 })
        ));
    }

    #[test]
    fn lag_zero_is_symmetric_in_components() {
        for seed in 0..20 {
            let seg = random_segment(8, seed);
            for a in Component::ALL {
                for b in Component::ALL {
                    let ab = lag_correlation(&seg, a, b, 0).unwrap();
                    let ba = lag_correlation(&seg, b, a, 0).unwrap();
                    assert_eq!(ab.to_bits(), ba.to_bits());
                }
            }
        }
    }

    #[test]
    fn unbiased_normalization_divides_by_n_minus_k() {
        let ones = SegmentMatrix::from_rows(1, [vec![1.0; 4], vec![1.0; 4], vec![1.0; 4]]).unwrap();
        let unbiased =
            lag_correlation_with(&ones, X, X, 1, LagNormalization::Unbiased).unwrap();
        assert_close(unbiased, 1.0, 0.0);
    }

    #[test]
    fn build_all_ones_segment() {
        let ones = SegmentMatrix::from_rows(1, [vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]]).unwrap();
        let cov = build_block_toeplitz(&ones);
        assert_eq!(cov.dim(), 6);
        // Every 2x2 block is [[1, 0.5], [0.5, 1]].
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(cov.matrix()[(2 * a, 2 * b)], 1.0);
                assert_eq!(cov.matrix()[(2 * a, 2 * b + 1)], 0.5);
                assert_eq!(cov.matrix()[(2 * a + 1, 2 * b)], 0.5);
                assert_eq!(cov.matrix()[(2 * a + 1, 2 * b + 1)], 1.0);
            }
        }
    }

    #[test]
    fn build_zero_segment_is_not_pd() {
        let zeros = SegmentMatrix::from_rows(1, [vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]).unwrap();
        let cov = build_block_toeplitz(&zeros);
        assert!(cov.matrix().data().iter().all(|&v| v == 0.0));
        let diag = cov.spd_check(1e-12).unwrap();
        assert_eq!(diag.min_eigenvalue, 0.0);
        assert!(!diag.is_positive_definite);
    }

    #[test]
    fn build_matches_entrywise_oracle_exactly() {
        // Independent oracle: fill all (3N)^2 entries one by one straight from
        // the Toeplitz definition, sharing only the lag sum primitive.
        for seed in 0..100 {
            let seg = random_segment(8, 31 + seed);
            let cov = build_block_toeplitz(&seg);
            let n = seg.len();
            for a in 0..3 {
                for b in 0..3 {
                    for i in 0..n {
                        for j in 0..n {
                            let expect = if j >= i {
                                lag_correlation(&seg, Component::ALL[a], Component::ALL[b], j - i)
                            } else {
                                lag_correlation(&seg, Component::ALL[b], Component::ALL[a], i - j)
                            }
                            .unwrap();
                            let got = cov.matrix()[(a * n + i, b * n + j)];
                            assert_eq!(got.to_bits(), expect.to_bits());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_descriptor_is_exactly_symmetric() {
        for seed in 0..20 {
            let seg = random_segment(8, 500 + seed);
            let cov = build_block_toeplitz(&seg);
            assert_eq!(cov.matrix().symmetry_residual(), 0.0);
        }
    }

    #[test]
    fn block_transpose_relation_holds() {
        for seed in 0..20 {
            let seg = random_segment(6, 900 + seed);
            let cov = build_block_toeplitz(&seg);
            let n = 6;
            for a in 0..3 {
                for b in 0..3 {
                    for i in 0..n {
                        for j in 0..n {
                            let ab = cov.matrix()[(a * n + i, b * n + j)];
                            let ba_t = cov.matrix()[(b * n + j, a * n + i)];
                            assert_eq!(ab.to_bits(), ba_t.to_bits());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn euclidean_mean_examples() {
        let r = build_block_toeplitz(&random_segment(4, 77));
        let mean = euclidean_mean(&[r.clone(), r.clone()]).unwrap();
        assert_eq!(mean.matrix(), r.matrix());

        let identity = BlockToeplitzCov::from_matrix(Mat::identity(6)).unwrap();
        let triple = BlockToeplitzCov::from_matrix(Mat::identity(6).scaled(3.0)).unwrap();
        let mean = euclidean_mean(&[identity, triple]).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 2.0 } else { 0.0 };
                assert_eq!(mean.matrix()[(i, j)], expect);
            }
        }
    }

    #[test]
    fn euclidean_mean_matches_accumulation_oracle() {
        let descriptors: Vec<_> = (0..100)
            .map(|s| build_block_toeplitz(&random_segment(4, 4000 + s)))
            .collect();
        let mean = euclidean_mean(&descriptors).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let direct: f64 = descriptors.iter().map(|d| d.matrix()[(i, j)]).sum::<f64>() / 100.0;
                assert_close(mean.matrix()[(i, j)], direct, 1e-12);
            }
        }
        // The averaged lag table stays consistent with the averaged matrix.
        let lags = mean.lag_table().unwrap();
        for a in Component::ALL {
            for b in Component::ALL {
                for k in 0..4 {
                    let expect = mean.matrix()[(a.index() * 4, b.index() * 4 + k)];
                    assert_eq!(lags.get(a, b, k).to_bits(), expect.to_bits());
                }
            }
        }
    }

    #[test]
    fn euclidean_mean_rejects_bad_input() {
        assert!(matches!(
            euclidean_mean::<f64>(&[]),
            Err(Error::EmptyInput(_))
        ));
        let a = build_block_toeplitz(&random_segment(4, 1));
        let b = build_block_toeplitz(&random_segment(8, 2));
        assert!(matches!(
            euclidean_mean(&[a, b]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn euclidean_mean_commutes_with_scaling() {
        let descriptors: Vec<_> = (0..10)
            .map(|s| build_block_toeplitz(&random_segment(4, 6000 + s)))
            .collect();
        let mean = euclidean_mean(&descriptors).unwrap();
        let c = 3.7;
        let scaled: Vec<_> = descriptors
            .iter()
            .map(|d| BlockToeplitzCov::from_matrix(d.matrix().scaled(c)).unwrap())
            .collect();
        let scaled_mean = euclidean_mean(&scaled).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_close(scaled_mean.matrix()[(i, j)], c * mean.matrix()[(i, j)], 1e-12);
            }
        }
    }

    #[test]
    fn spd_check_examples() {
        let identity = Mat::<f64>::identity(6);
        let diag = spd_check(&identity, 1e-12).unwrap();
        assert_eq!(diag.min_eigenvalue, 1.0);
        assert!(diag.is_positive_definite);

        let zero = Mat::<f64>::zeros(6, 6);
        let diag = spd_check(&zero, 1e-12).unwrap();
        assert_eq!(diag.min_eigenvalue, 0.0);
        assert!(!diag.is_positive_definite);
    }

    #[test]
    fn spd_check_rejects_asymmetric_input() {
        let mut m = Mat::<f64>::identity(4);
        m[(0, 1)] = 0.5;
        assert!(matches!(spd_check(&m, 0.0), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn single_segment_descriptor_is_psd_but_rank_deficient() {
        // One segment factors as (1/N) U U^T with U of width 2N-1 < 3N, so
        // its descriptor is PSD yet singular: min eigenvalue ~ 0.
        let seg = random_segment(8, 424242);
        let cov = build_block_toeplitz(&seg);
        let diag = cov.spd_check(default_spd_tolerance(cov.matrix())).unwrap();
        assert!(diag.min_eigenvalue.abs() < 1e-12);
        assert!(!diag.is_positive_definite);
    }

    #[test]
    fn genuine_velocity_segment_mean_is_pd() {
        // Averaging descriptors over the segments of a noisy series fills the
        // rank; the mean is strictly positive definite. Cross-checked via a
        // test-only Cholesky factorization.
        let descriptors: Vec<_> = (0..10)
            .map(|m| build_block_toeplitz(&random_segment(8, 88_000 + m)))
            .collect();
        let mean = euclidean_mean(&descriptors).unwrap();
        let tol = default_spd_tolerance(mean.matrix());
        let diag = mean.spd_check(tol).unwrap();
        assert!(diag.is_positive_definite, "min eig {}", diag.min_eigenvalue);
        assert!(cholesky_is_pd(mean.matrix()));
    }

    /// Test-only Cholesky factorization as an independent PD oracle.
    fn cholesky_is_pd(m: &Mat<f64>) -> bool {
        let n = m.rows();
        let mut l = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= 0.0 {
                        return false;
                    }
                    l[(i, i)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        true
    }

    #[test]
    fn from_matrix_rejects_non_toeplitz() {
        let seg = random_segment(4, 9);
        let mut m = build_block_toeplitz(&seg).matrix().clone();
        // Break the Toeplitz pattern while keeping symmetry.
        m[(0, 1)] += 1.0;
        m[(1, 0)] = m[(0, 1)];
        assert!(BlockToeplitzCov::from_matrix(m).is_err());
    }
}
