//! Per-particle 3-component time series: data model, ingestion,
//! normalization, and segmentation into sub-windows.

use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};
use crate::io;
use crate::scalar::Real;

/// Physical quantity stored in a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Velocity,
    Position,
    Dipole,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Velocity => "velocity",
            Channel::Position => "position",
            Channel::Dipole => "dipole",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Spatial component of a 3-vector sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::X, Component::Y, Component::Z];

    pub fn index(self) -> usize {
        match self {
            Component::X => 0,
            Component::Y => 1,
            Component::Z => 2,
        }
    }

    pub fn label(self) -> char {
        match self {
            Component::X => 'x',
            Component::Y => 'y',
            Component::Z => 'z',
        }
    }
}

/// One particle's 3-component time series with timestep metadata.
#[derive(Clone, Debug)]
pub struct ParticleSeries<T> {
    particle_id: u64,
    dt: T,
    channel: Channel,
    data: Vec<[T; 3]>,
}

impl<T: Real> ParticleSeries<T> {
    pub fn new(particle_id: u64, dt: T, channel: Channel, data: Vec<[T; 3]>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("particle series"));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::invalid("dt", "must be a positive finite real"));
        }
        if data.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::NonFinite(format!("series for particle {particle_id}")));
        }
        Ok(ParticleSeries {
            particle_id,
            dt,
            channel,
            data,
        })
    }

    pub fn particle_id(&self) -> u64 {
        self.particle_id
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn samples(&self) -> &[[T; 3]] {
        &self.data
    }
}

/// How a series is shifted/scaled before segmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizePolicy {
    /// Per-component z-score over the full series.
    ZScore,
    /// Identity transform.
    None,
}

impl NormalizePolicy {
    pub fn name(self) -> &'static str {
        match self {
            NormalizePolicy::ZScore => "zscore",
            NormalizePolicy::None => "none",
        }
    }
}

impl fmt::Display for NormalizePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shift and scale applied per component; inverts a [`normalize`] call.
#[derive(Clone, Debug)]
pub struct NormalizationRecord<T> {
    shift: [T; 3],
    scale: [T; 3],
    policy: NormalizePolicy,
}

impl<T: Real> NormalizationRecord<T> {
    pub fn new(shift: [T; 3], scale: [T; 3], policy: NormalizePolicy) -> Result<Self> {
        for (c, s) in Component::ALL.iter().zip(scale.iter()) {
            if !(*s > T::zero()) || !s.is_finite() {
                return Err(Error::invalid(
                    "scale",
                    format!("component {} scale must be positive", c.label()),
                ));
            }
        }
        Ok(NormalizationRecord {
            shift,
            scale,
            policy,
        })
    }

    pub fn identity() -> Self {
        NormalizationRecord {
            shift: [T::zero(); 3],
            scale: [T::one(); 3],
            policy: NormalizePolicy::None,
        }
    }

    pub fn shift(&self) -> [T; 3] {
        self.shift
    }

    pub fn scale(&self) -> [T; 3] {
        self.scale
    }

    pub fn policy(&self) -> NormalizePolicy {
        self.policy
    }
}

/// A 3 x N sub-window of one series: rows are spatial components, columns are
/// consecutive samples. Segment indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentMatrix<T> {
    segment_index: usize,
    n: usize,
    /// Row-major 3 x n storage.
    values: Vec<T>,
}

impl<T: Real> SegmentMatrix<T> {
    pub fn from_samples(segment_index: usize, samples: &[[T; 3]]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::EmptyInput("segment samples"));
        }
        if segment_index == 0 {
            return Err(Error::invalid("segment_index", "segment indices are 1-based"));
        }
        let mut values = vec![T::zero(); 3 * n];
        for (j, s) in samples.iter().enumerate() {
            for c in 0..3 {
                if !s[c].is_finite() {
                    return Err(Error::NonFinite(format!("segment {segment_index}")));
                }
                values[c * n + j] = s[c];
            }
        }
        Ok(SegmentMatrix {
            segment_index,
            n,
            values,
        })
    }

    /// Builds a segment from three component rows (mostly for tests).
    pub fn from_rows(segment_index: usize, rows: [Vec<T>; 3]) -> Result<Self> {
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.iter().map(|r| r.len()).find(|&l| l != n).unwrap_or(n),
            });
        }
        let samples: Vec<[T; 3]> = (0..n).map(|j| [rows[0][j], rows[1][j], rows[2][j]]).collect();
        Self::from_samples(segment_index, &samples)
    }

    /// Segment length N.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// 1-based segment index m.
    pub fn segment_index(&self) -> usize {
        self.segment_index
    }

    pub fn row(&self, component: Component) -> &[T] {
        let c = component.index();
        &self.values[c * self.n..(c + 1) * self.n]
    }

    pub fn value(&self, component: Component, j: usize) -> T {
        self.values[component.index() * self.n + j]
    }
}

/// Supported ingestion formats. The binary trajectory is self-describing;
/// CSV needs the timestep and channel supplied out of band.
#[derive(Clone, Copy, Debug)]
pub enum IngestFormat<T> {
    BinaryTrajectory,
    Csv { dt: T, channel: Channel },
}

/// Reads per-particle series from a byte stream.
pub fn ingest_series<T: Real, R: Read>(
    source: R,
    format: IngestFormat<T>,
) -> Result<Vec<ParticleSeries<T>>> {
    match format {
        IngestFormat::BinaryTrajectory => {
            let (meta, frames) = io::read_trajectory(source)?;
            io::trajectory_to_series(&meta, &frames)
        }
        IngestFormat::Csv { dt, channel } => io::read_csv_series(source, dt, channel),
    }
}

/// Applies the given normalization policy over the full series.
pub fn normalize<T: Real>(
    series: &ParticleSeries<T>,
    policy: NormalizePolicy,
) -> Result<(ParticleSeries<T>, NormalizationRecord<T>)> {
    match policy {
        NormalizePolicy::None => Ok((series.clone(), NormalizationRecord::identity())),
        NormalizePolicy::ZScore => {
            let len = series.len();
            let count = T::from_count(len);
            let mut mean = [T::zero(); 3];
            let mut mean_sq = [T::zero(); 3];
            for s in series.samples() {
                for c in 0..3 {
                    mean[c] += s[c];
                    mean_sq[c] += s[c] * s[c];
                }
            }
            for c in 0..3 {
                mean[c] /= count;
                mean_sq[c] /= count;
            }

            let mut scale = [T::zero(); 3];
            for component in Component::ALL {
                let c = component.index();
                let var = series
                    .samples()
                    .iter()
                    .map(|s| (s[c] - mean[c]) * (s[c] - mean[c]))
                    .fold(T::zero(), |acc, v| acc + v)
                    / count;
                // Constant components produce a tiny nonzero variance through
                // roundoff in the mean; treat anything at that level as zero.
                let floor = mean_sq[c] * (T::epsilon() * count) * (T::epsilon() * count);
                if var <= floor {
                    return Err(Error::ZeroVariance {
                        component: component.label(),
                    });
                }
                scale[c] = var.sqrt();
            }

            let data = series
                .samples()
                .iter()
                .map(|s| {
                    [
                        (s[0] - mean[0]) / scale[0],
                        (s[1] - mean[1]) / scale[1],
                        (s[2] - mean[2]) / scale[2],
                    ]
                })
                .collect();
            let out = ParticleSeries::new(series.particle_id(), series.dt(), series.channel(), data)?;
            let record = NormalizationRecord::new(mean, scale, NormalizePolicy::ZScore)?;
            Ok((out, record))
        }
    }
}

/// Inverts [`normalize`] using the recorded shift and scale.
pub fn denormalize<T: Real>(
    series: &ParticleSeries<T>,
    record: &NormalizationRecord<T>,
) -> Result<ParticleSeries<T>> {
    let shift = record.shift();
    let scale = record.scale();
    let data = series
        .samples()
        .iter()
        .map(|s| {
            [
                s[0] * scale[0] + shift[0],
                s[1] * scale[1] + shift[1],
                s[2] * scale[2] + shift[2],
            ]
        })
        .collect();
    ParticleSeries::new(series.particle_id(), series.dt(), series.channel(), data)
}

/// Splits a series into disjoint sub-windows of length `n`; the trailing
/// remainder shorter than `n` is discarded.
pub fn segment<T: Real>(series: &ParticleSeries<T>, n: usize) -> Result<Vec<SegmentMatrix<T>>> {
    if n == 0 {
        return Err(Error::invalid("segment_len", "must be at least 1"));
    }
    let len = series.len();
    if n > len {
        return Err(Error::SeriesTooShort {
            len,
            segment_len: n,
        });
    }
    let k = len / n;
    let mut segments = Vec::with_capacity(k);
    for m in 1..=k {
        let start = (m - 1) * n;
        segments.push(SegmentMatrix::from_samples(m, &series.samples()[start..start + n])?);
    }
    Ok(segments)
}
