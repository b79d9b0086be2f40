//! Property-based suites for the estimator, distance, and embedding
//! invariants.

use proptest::prelude::*;

use covtraj::covariance::{build_block_toeplitz, euclidean_mean, BlockToeplitzCov};
use covtraj::distance::{
    distance_matrix, frobenius_distance, frobenius_distance_via_lags, histogram, DistanceMatrix,
    StateDescriptor,
};
use covtraj::embedding::pca_embed;
use covtraj::linalg::Mat;
use covtraj::timeseries::{
    denormalize, normalize, segment, Channel, Component, NormalizePolicy, ParticleSeries,
    SegmentMatrix,
};

fn component_value() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn series_strategy(min_len: usize, max_len: usize) -> impl Strategy<Value = ParticleSeries<f64>> {
    proptest::collection::vec(
        (component_value(), component_value(), component_value()),
        min_len..=max_len,
    )
    .prop_map(|samples| {
        let data: Vec<[f64; 3]> = samples.iter().map(|&(x, y, z)| [x, y, z]).collect();
        ParticleSeries::new(0, 0.005, Channel::Velocity, data).unwrap()
    })
}

fn segment_strategy(n: usize) -> impl Strategy<Value = SegmentMatrix<f64>> {
    proptest::collection::vec(
        (component_value(), component_value(), component_value()),
        n,
    )
    .prop_map(|samples| {
        let data: Vec<[f64; 3]> = samples.iter().map(|&(x, y, z)| [x, y, z]).collect();
        SegmentMatrix::from_samples(1, &data).unwrap()
    })
}

fn descriptor_strategy(n: usize) -> impl Strategy<Value = BlockToeplitzCov<f64>> {
    segment_strategy(n).prop_map(|seg| build_block_toeplitz(&seg))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn segmentation_reproduces_prefix(series in series_strategy(1, 64), n in 1usize..12) {
        prop_assume!(n <= series.len());
        let segments = segment(&series, n).unwrap();
        let k = series.len() / n;
        prop_assert_eq!(segments.len(), k);
        for (m, seg) in segments.iter().enumerate() {
            prop_assert_eq!(seg.segment_index(), m + 1);
            for j in 0..n {
                let expect = series.samples()[m * n + j];
                prop_assert_eq!(seg.value(Component::X, j), expect[0]);
                prop_assert_eq!(seg.value(Component::Y, j), expect[1]);
                prop_assert_eq!(seg.value(Component::Z, j), expect[2]);
            }
        }
    }

    #[test]
    fn normalize_round_trips(series in series_strategy(4, 64)) {
        let zscore = normalize(&series, NormalizePolicy::ZScore);
        prop_assume!(zscore.is_ok());
        let (normalized, record) = zscore.unwrap();
        let back = denormalize(&normalized, &record).unwrap();
        for (a, b) in back.samples().iter().zip(series.samples()) {
            for c in 0..3 {
                let tol = 1e-12 * b[c].abs().max(1.0);
                prop_assert!((a[c] - b[c]).abs() <= tol);
            }
        }
    }

    #[test]
    fn lag_zero_symmetric_and_blocks_transpose(seg in segment_strategy(8)) {
        let cov = build_block_toeplitz(&seg);
        let n = seg.len();
        prop_assert_eq!(cov.matrix().symmetry_residual(), 0.0);
        for a in 0..3 {
            for b in 0..3 {
                for i in 0..n {
                    for j in 0..n {
                        let ab = cov.matrix()[(a * n + i, b * n + j)];
                        let ba = cov.matrix()[(b * n + j, a * n + i)];
                        prop_assert_eq!(ab.to_bits(), ba.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn metric_axioms(a in descriptor_strategy(6), b in descriptor_strategy(6), c in descriptor_strategy(6)) {
        let dab = frobenius_distance(&a, &b).unwrap();
        let dba = frobenius_distance(&b, &a).unwrap();
        prop_assert_eq!(dab.to_bits(), dba.to_bits());
        prop_assert!(dab >= 0.0);
        prop_assert_eq!(frobenius_distance(&a, &a).unwrap(), 0.0);
        let dac = frobenius_distance(&a, &c).unwrap();
        let dcb = frobenius_distance(&c, &b).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-9);
    }

    #[test]
    fn lag_table_distance_matches_dense(a in descriptor_strategy(8), b in descriptor_strategy(8)) {
        let dense = frobenius_distance(&a, &b).unwrap();
        let lagged = frobenius_distance_via_lags(&a, &b).unwrap();
        prop_assert!((dense - lagged).abs() <= 1e-12 * dense.max(1.0));
    }

    #[test]
    fn mean_scales_linearly(segs in proptest::collection::vec(segment_strategy(4), 2..8), c in -4.0..4.0f64) {
        let descriptors: Vec<_> = segs.iter().map(build_block_toeplitz).collect();
        let mean = euclidean_mean(&descriptors).unwrap();
        let scaled: Vec<_> = descriptors
            .iter()
            .map(|d| BlockToeplitzCov::from_matrix(d.matrix().scaled(c)).unwrap())
            .collect();
        let scaled_mean = euclidean_mean(&scaled).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let expect = c * mean.matrix()[(i, j)];
                let tol = 1e-12 * expect.abs().max(1.0);
                prop_assert!((scaled_mean.matrix()[(i, j)] - expect).abs() <= tol);
            }
        }
    }

    #[test]
    fn histogram_conserves_counts(samples in proptest::collection::vec(0.0..50.0f64, 1..500), bins in 1usize..40) {
        let h = histogram(&samples, bins, None).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), samples.len() as u64);
    }

    #[test]
    fn pca_axes_orthonormal_on_random_matrices(seed_rows in proptest::collection::vec(proptest::collection::vec(0.1..10.0f64, 5), 5)) {
        // Symmetrize into a valid distance matrix with zero diagonal.
        let mut values = Mat::<f64>::zeros(5, 5);
        for i in 0..5 {
            for j in (i + 1)..5 {
                let v = 0.5 * (seed_rows[i][j] + seed_rows[j][i]);
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        let labels = (0..5).map(|i| format!("s{i}")).collect();
        let dm = DistanceMatrix::from_parts(labels, values).unwrap();
        let e = pca_embed(&dm, 3).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..5).map(|i| e.component_axes[(i, a)] * e.component_axes[(i, b)]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - expect).abs() <= 1e-10);
            }
        }
        for w in e.explained_variance_ratio.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }
}

#[test]
fn distance_matrix_rows_follow_descriptor_order() {
    // Deterministic cross-check that the matrix builder and sampler agree on
    // descriptor identity.
    let seg = |seed: u64, n: usize| {
        let vals: Vec<f64> = (0..n).map(|i| ((seed + i as u64) as f64 * 0.73).sin()).collect();
        SegmentMatrix::from_rows(1, [vals.clone(), vals.clone(), vals]).unwrap()
    };
    let descriptors: Vec<StateDescriptor<f64>> = (0..4)
        .map(|i| StateDescriptor {
            label: format!("s{i}"),
            scalar_tag: None,
            matrix: build_block_toeplitz(&seg(7 * i as u64 + 1, 6)),
        })
        .collect();
    let dm = distance_matrix(&descriptors).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let direct =
                frobenius_distance(&descriptors[i].matrix, &descriptors[j].matrix).unwrap();
            assert_eq!(dm.get(i, j).to_bits(), direct.to_bits());
        }
    }
}
