//! File formats: the `CVTJ` binary trajectory, the CSV exchange format for
//! external series, and the CSV artifact formats emitted by the pipeline.
//!
//! # Binary trajectory (`.cvtj`)
//!
//! Fixed 64-byte header, all integers little-endian:
//!
//! | offset | size | field                                    |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic `CVTJ`                             |
//! | 4      | 4    | format version (u32, currently 1)        |
//! | 8      | 4    | channel tag (u32: 0 vel, 1 pos, 2 dip)   |
//! | 12     | 8    | particle count (u64)                     |
//! | 20     | 8    | frame count (u64)                        |
//! | 28     | 8    | integrator timestep dt (f64)             |
//! | 36     | 8    | sample stride (u64)                      |
//! | 44     | 20   | reserved (zero)                          |
//!
//! followed by frame-major, particle-major, component-major 64-bit
//! little-endian floats. The time between consecutive frames is
//! `dt * sample_stride`.
//!
//! # CSV exchange format
//!
//! Header row `particle_id,step,cx,cy,cz`; the timestep arrives out of band.
//! Artifact CSVs (distance matrix, embedding, histogram, energy log) carry
//! `# key = value` comment lines before the header row and print floats with
//! Rust's shortest round-trip formatting, so parsing them back reproduces the
//! in-memory values exactly.

use std::io::{BufRead, BufReader, Read, Write};

use crate::distance::{DistanceHistogram, DistanceMatrix};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::timeseries::{Channel, ParticleSeries};

pub const TRAJECTORY_MAGIC: [u8; 4] = *b"CVTJ";
pub const TRAJECTORY_VERSION: u32 = 1;
pub const TRAJECTORY_HEADER_LEN: usize = 64;

const CSV_SERIES_HEADER: &str = "particle_id,step,cx,cy,cz";

fn channel_tag(channel: Channel) -> u32 {
    match channel {
        Channel::Velocity => 0,
        Channel::Position => 1,
        Channel::Dipole => 2,
    }
}

fn channel_from_tag(tag: u32) -> Result<Channel> {
    match tag {
        0 => Ok(Channel::Velocity),
        1 => Ok(Channel::Position),
        2 => Ok(Channel::Dipole),
        other => Err(Error::InvalidHeader(format!("unknown channel tag {other}"))),
    }
}

/// Metadata carried by a binary trajectory header.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub channel: Channel,
    pub n_particles: u64,
    pub n_frames: u64,
    /// Integrator timestep; frame spacing is `dt * sample_stride`.
    pub dt: f64,
    pub sample_stride: u64,
}

impl TrajectoryMeta {
    /// Time between consecutive stored frames.
    pub fn frame_dt(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }
}

/// Streaming writer for the binary trajectory format. The frame count is
/// declared up front; `finish` fails if the declared count was not written.
pub struct TrajectoryWriter<W: Write> {
    writer: W,
    meta: TrajectoryMeta,
    frames_written: u64,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(mut writer: W, meta: TrajectoryMeta) -> Result<Self> {
        if meta.n_particles == 0 {
            return Err(Error::invalid("n_particles", "must be at least 1"));
        }
        if meta.sample_stride == 0 {
            return Err(Error::invalid("sample_stride", "must be at least 1"));
        }
        if !(meta.dt > 0.0) || !meta.dt.is_finite() {
            return Err(Error::invalid("dt", "must be a positive finite real"));
        }
        let mut header = [0u8; TRAJECTORY_HEADER_LEN];
        header[0..4].copy_from_slice(&TRAJECTORY_MAGIC);
        header[4..8].copy_from_slice(&TRAJECTORY_VERSION.to_le_bytes());
        header[8..12].copy_from_slice(&channel_tag(meta.channel).to_le_bytes());
        header[12..20].copy_from_slice(&meta.n_particles.to_le_bytes());
        header[20..28].copy_from_slice(&meta.n_frames.to_le_bytes());
        header[28..36].copy_from_slice(&meta.dt.to_le_bytes());
        header[36..44].copy_from_slice(&meta.sample_stride.to_le_bytes());
        writer.write_all(&header)?;
        Ok(TrajectoryWriter {
            writer,
            meta,
            frames_written: 0,
        })
    }

    pub fn write_frame<T: Real>(&mut self, frame: &[[T; 3]]) -> Result<()> {
        if frame.len() as u64 != self.meta.n_particles {
            return Err(Error::DimensionMismatch {
                expected: self.meta.n_particles as usize,
                got: frame.len(),
            });
        }
        let mut buf = Vec::with_capacity(frame.len() * 24);
        for p in frame {
            for c in 0..3 {
                let v = p[c].to_f64().ok_or_else(|| {
                    Error::NonFinite("trajectory frame component".to_string())
                })?;
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        self.writer.write_all(&buf)?;
        self.frames_written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.frames_written != self.meta.n_frames {
            return Err(Error::InvalidHeader(format!(
                "header declares {} frames but {} were written",
                self.meta.n_frames, self.frames_written
            )));
        }
        self.writer.flush()?;
        Ok(self.writer)
    }
}

/// Convenience wrapper writing a complete in-memory trajectory.
pub fn write_trajectory<T: Real, W: Write>(
    writer: W,
    channel: Channel,
    dt: f64,
    sample_stride: u64,
    frames: &[Vec<[T; 3]>],
) -> Result<()> {
    let n_particles = frames.first().map(|f| f.len()).unwrap_or(0) as u64;
    let meta = TrajectoryMeta {
        channel,
        n_particles,
        n_frames: frames.len() as u64,
        dt,
        sample_stride,
    };
    let mut w = TrajectoryWriter::new(writer, meta)?;
    for frame in frames {
        w.write_frame(frame)?;
    }
    w.finish()?;
    Ok(())
}

/// Reads a binary trajectory into frame-major storage.
pub fn read_trajectory<T: Real, R: Read>(reader: R) -> Result<(TrajectoryMeta, Vec<Vec<[T; 3]>>)> {
    let mut reader = BufReader::new(reader);
    let mut header = [0u8; TRAJECTORY_HEADER_LEN];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::InvalidHeader("file shorter than the 64-byte header".to_string()))?;
    if header[0..4] != TRAJECTORY_MAGIC {
        return Err(Error::InvalidHeader("bad magic (expected CVTJ)".to_string()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != TRAJECTORY_VERSION {
        return Err(Error::InvalidHeader(format!(
            "unsupported format version {version}"
        )));
    }
    let channel = channel_from_tag(u32::from_le_bytes(header[8..12].try_into().unwrap()))?;
    let n_particles = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let n_frames = u64::from_le_bytes(header[20..28].try_into().unwrap());
    let dt = f64::from_le_bytes(header[28..36].try_into().unwrap());
    let sample_stride = u64::from_le_bytes(header[36..44].try_into().unwrap());
    if n_particles == 0 || n_frames == 0 {
        return Err(Error::NoRecords);
    }
    if !(dt > 0.0) || !dt.is_finite() || sample_stride == 0 {
        return Err(Error::InvalidHeader(
            "non-positive dt or sample stride".to_string(),
        ));
    }
    let meta = TrajectoryMeta {
        channel,
        n_particles,
        n_frames,
        dt,
        sample_stride,
    };

    let frame_bytes = (n_particles as usize) * 24;
    let mut frames = Vec::with_capacity(n_frames as usize);
    let mut buf = vec![0u8; frame_bytes];
    for f in 0..n_frames {
        reader.read_exact(&mut buf).map_err(|_| {
            Error::InvalidHeader(format!(
                "truncated payload: frame {f} of {n_frames} incomplete"
            ))
        })?;
        let mut frame = Vec::with_capacity(n_particles as usize);
        for p in 0..n_particles as usize {
            let mut v = [T::zero(); 3];
            for c in 0..3 {
                let off = p * 24 + c * 8;
                let raw = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
                if !raw.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "frame {f}, particle {p}, component {c}"
                    )));
                }
                v[c] = T::lit(raw);
            }
            frame.push(v);
        }
        frames.push(frame);
    }
    Ok((meta, frames))
}

/// Transposes frame-major trajectory data into per-particle series; the
/// series timestep is the frame spacing `dt * sample_stride`.
pub fn trajectory_to_series<T: Real>(
    meta: &TrajectoryMeta,
    frames: &[Vec<[T; 3]>],
) -> Result<Vec<ParticleSeries<T>>> {
    let n = meta.n_particles as usize;
    let mut series = Vec::with_capacity(n);
    for p in 0..n {
        let data: Vec<[T; 3]> = frames.iter().map(|f| f[p]).collect();
        series.push(ParticleSeries::new(
            p as u64,
            T::lit(meta.frame_dt()),
            meta.channel,
            data,
        )?);
    }
    Ok(series)
}

/// Reads the CSV exchange format (`particle_id,step,cx,cy,cz`). Particles are
/// returned ordered by id; every particle must carry the same strictly
/// increasing step sequence.
pub fn read_csv_series<T: Real, R: Read>(
    reader: R,
    dt: T,
    channel: Channel,
) -> Result<Vec<ParticleSeries<T>>> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();

    let header = loop {
        match lines.next() {
            Some((idx, line)) => {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                break (idx + 1, trimmed.to_string());
            }
            None => return Err(Error::NoRecords),
        }
    };
    if header.1 != CSV_SERIES_HEADER {
        return Err(Error::parse(
            header.0,
            format!("expected header `{CSV_SERIES_HEADER}`, found `{}`", header.1),
        ));
    }

    // (particle_id, steps, samples) in first-seen order; sorted by id below.
    let mut particles: Vec<(u64, Vec<u64>, Vec<[T; 3]>)> = Vec::new();
    let mut any = false;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                line_no,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let id: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad particle_id `{}`", fields[0])))?;
        let step: u64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad step `{}`", fields[1])))?;
        let mut v = [T::zero(); 3];
        for c in 0..3 {
            let raw: f64 = fields[2 + c]
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad component `{}`", fields[2 + c])))?;
            if !raw.is_finite() {
                return Err(Error::parse(line_no, "non-finite component".to_string()));
            }
            v[c] = T::lit(raw);
        }
        any = true;
        let entry = match particles.iter_mut().find(|(pid, _, _)| *pid == id) {
            Some(entry) => entry,
            None => {
                particles.push((id, Vec::new(), Vec::new()));
                particles.last_mut().unwrap()
            }
        };
        if let Some(&last) = entry.1.last() {
            if step <= last {
                return Err(Error::parse(
                    line_no,
                    format!("step {step} not increasing for particle {id}"),
                ));
            }
        }
        entry.1.push(step);
        entry.2.push(v);
    }
    if !any {
        return Err(Error::NoRecords);
    }

    particles.sort_by_key(|(id, _, _)| *id);
    let reference_steps = particles[0].1.clone();
    for (id, steps, _) in &particles {
        if *steps != reference_steps {
            return Err(Error::InvalidHeader(format!(
                "particle {id} has a different step sequence than particle {}",
                particles[0].0
            )));
        }
    }

    particles
        .into_iter()
        .map(|(id, _, samples)| ParticleSeries::new(id, dt, channel, samples))
        .collect()
}

/// Writes series in the CSV exchange format.
pub fn write_csv_series<T: Real, W: Write>(
    mut writer: W,
    series: &[ParticleSeries<T>],
) -> Result<()> {
    writeln!(writer, "{CSV_SERIES_HEADER}")?;
    for s in series {
        for (step, v) in s.samples().iter().enumerate() {
            writeln!(
                writer,
                "{},{},{},{},{}",
                s.particle_id(),
                step,
                v[0],
                v[1],
                v[2]
            )?;
        }
    }
    Ok(())
}

/// `# key = value` metadata lines shared by the artifact CSVs.
pub type MetaPairs = Vec<(String, String)>;

fn write_meta<W: Write>(writer: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(writer, "# {k} = {v}")?;
    }
    Ok(())
}

/// Splits leading `# key = value` lines from the remaining content lines.
fn split_meta(lines: Vec<String>) -> (MetaPairs, Vec<String>) {
    let mut meta = Vec::new();
    let mut rest = Vec::new();
    for line in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else {
            rest.push(trimmed.to_string());
        }
    }
    (meta, rest)
}

fn read_lines<R: Read>(reader: R) -> Result<Vec<String>> {
    BufReader::new(reader)
        .lines()
        .map(|l| l.map_err(Error::from))
        .collect()
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains(',') || label.contains('\n') {
        return Err(Error::invalid(
            "label",
            format!("`{label}` must be nonempty and free of commas/newlines"),
        ));
    }
    Ok(())
}

/// Writes a distance matrix as CSV: `label,<l1>,...` header then one row per
/// state with its label in the first column.
pub fn write_distance_matrix_csv<T: Real, W: Write>(
    mut writer: W,
    dm: &DistanceMatrix<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(&mut writer, meta)?;
    for l in dm.labels() {
        validate_label(l)?;
    }
    writeln!(writer, "label,{}", dm.labels().join(","))?;
    for i in 0..dm.dim() {
        let row: Vec<String> = (0..dm.dim()).map(|j| format!("{}", dm.get(i, j))).collect();
        writeln!(writer, "{},{}", dm.labels()[i], row.join(","))?;
    }
    Ok(())
}

/// Parses a distance matrix CSV back into memory.
pub fn read_distance_matrix_csv<T: Real, R: Read>(
    reader: R,
) -> Result<(MetaPairs, DistanceMatrix<T>)> {
    let (meta, rows) = split_meta(read_lines(reader)?);
    if rows.is_empty() {
        return Err(Error::NoRecords);
    }
    let header: Vec<&str> = rows[0].split(',').collect();
    if header.first() != Some(&"label") {
        return Err(Error::InvalidHeader(
            "distance matrix CSV must start with a `label,...` header".to_string(),
        ));
    }
    let labels: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
    let s = labels.len();
    if rows.len() != s + 1 {
        return Err(Error::DimensionMismatch {
            expected: s + 1,
            got: rows.len(),
        });
    }
    let mut values = Mat::zeros(s, s);
    for (i, row) in rows[1..].iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != s + 1 {
            return Err(Error::parse(i + 2, format!("expected {} fields", s + 1)));
        }
        if fields[0] != labels[i] {
            return Err(Error::parse(
                i + 2,
                format!("row label `{}` does not match header `{}`", fields[0], labels[i]),
            ));
        }
        for j in 0..s {
            let raw: f64 = fields[j + 1]
                .parse()
                .map_err(|_| Error::parse(i + 2, format!("bad value `{}`", fields[j + 1])))?;
            values[(i, j)] = T::lit(raw);
        }
    }
    Ok((meta, DistanceMatrix::from_parts(labels, values)?))
}

/// Writes an embedding as CSV: `label,scalar,pc1,..,pcD` with the explained
/// variance ratio recorded in the metadata block.
pub fn write_embedding_csv<T: Real, W: Write>(
    mut writer: W,
    embedding: &Embedding<T>,
    scalars: &[Option<T>],
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(&mut writer, meta)?;
    let evr: Vec<String> = embedding
        .explained_variance_ratio
        .iter()
        .map(|v| format!("{v}"))
        .collect();
    writeln!(writer, "# explained_variance_ratio = {}", evr.join(";"))?;
    let dims = embedding.dims();
    let pcs: Vec<String> = (1..=dims).map(|d| format!("pc{d}")).collect();
    writeln!(writer, "label,scalar,{}", pcs.join(","))?;
    for (i, label) in embedding.labels.iter().enumerate() {
        validate_label(label)?;
        let scalar = scalars
            .get(i)
            .and_then(|s| s.map(|v| format!("{v}")))
            .unwrap_or_default();
        let coords: Vec<String> = (0..dims)
            .map(|d| format!("{}", embedding.coordinates[(i, d)]))
            .collect();
        writeln!(writer, "{label},{scalar},{}", coords.join(","))?;
    }
    Ok(())
}

/// Parsed embedding CSV row set: labels, optional scalars, S x D coordinates.
pub struct EmbeddingTable<T> {
    pub labels: Vec<String>,
    pub scalars: Vec<Option<T>>,
    pub coordinates: Mat<T>,
}

pub fn read_embedding_csv<T: Real, R: Read>(reader: R) -> Result<(MetaPairs, EmbeddingTable<T>)> {
    let (meta, rows) = split_meta(read_lines(reader)?);
    if rows.len() < 2 {
        return Err(Error::NoRecords);
    }
    let header: Vec<&str> = rows[0].split(',').collect();
    if header.len() < 3 || header[0] != "label" || header[1] != "scalar" {
        return Err(Error::InvalidHeader(
            "embedding CSV must start with `label,scalar,pc1,...`".to_string(),
        ));
    }
    let dims = header.len() - 2;
    let s = rows.len() - 1;
    let mut labels = Vec::with_capacity(s);
    let mut scalars = Vec::with_capacity(s);
    let mut coordinates = Mat::zeros(s, dims);
    for (i, row) in rows[1..].iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != dims + 2 {
            return Err(Error::parse(i + 2, format!("expected {} fields", dims + 2)));
        }
        labels.push(fields[0].to_string());
        scalars.push(if fields[1].is_empty() {
            None
        } else {
            Some(T::lit(fields[1].parse::<f64>().map_err(|_| {
                Error::parse(i + 2, format!("bad scalar `{}`", fields[1]))
            })?))
        });
        for d in 0..dims {
            let raw: f64 = fields[d + 2]
                .parse()
                .map_err(|_| Error::parse(i + 2, format!("bad value `{}`", fields[d + 2])))?;
            coordinates[(i, d)] = T::lit(raw);
        }
    }
    Ok((
        meta,
        EmbeddingTable {
            labels,
            scalars,
            coordinates,
        },
    ))
}

/// Writes a histogram as CSV: `bin_lo,bin_hi,count`.
pub fn write_histogram_csv<T: Real, W: Write>(
    mut writer: W,
    hist: &DistanceHistogram<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(&mut writer, meta)?;
    writeln!(writer, "# labels = {} vs {}", hist.label_pair.0, hist.label_pair.1)?;
    writeln!(writer, "# seed = {}", hist.rng_seed)?;
    writeln!(writer, "# samples = {}", hist.sample_count)?;
    writeln!(writer, "bin_lo,bin_hi,count")?;
    for (i, count) in hist.counts.iter().enumerate() {
        writeln!(
            writer,
            "{},{},{count}",
            hist.bin_edges[i],
            hist.bin_edges[i + 1]
        )?;
    }
    Ok(())
}

pub fn read_histogram_csv<T: Real, R: Read>(
    reader: R,
) -> Result<(MetaPairs, Vec<T>, Vec<u64>)> {
    let (meta, rows) = split_meta(read_lines(reader)?);
    if rows.len() < 2 || rows[0] != "bin_lo,bin_hi,count" {
        return Err(Error::InvalidHeader(
            "histogram CSV must start with `bin_lo,bin_hi,count`".to_string(),
        ));
    }
    let mut edges: Vec<T> = Vec::new();
    let mut counts = Vec::new();
    for (i, row) in rows[1..].iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(i + 2, "expected 3 fields".to_string()));
        }
        let lo: f64 = fields[0]
            .parse()
            .map_err(|_| Error::parse(i + 2, format!("bad edge `{}`", fields[0])))?;
        let hi: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(i + 2, format!("bad edge `{}`", fields[1])))?;
        let count: u64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(i + 2, format!("bad count `{}`", fields[2])))?;
        if edges.is_empty() {
            edges.push(T::lit(lo));
        }
        edges.push(T::lit(hi));
        counts.push(count);
    }
    Ok((meta, edges, counts))
}

/// One row of the plain-text energy log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord<T> {
    pub step: u64,
    pub kinetic: T,
    pub potential: T,
    pub total: T,
    pub temperature: T,
}

pub fn write_energy_log<T: Real, W: Write>(
    mut writer: W,
    records: &[EnergyRecord<T>],
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(&mut writer, meta)?;
    writeln!(writer, "step,kinetic,potential,total,temperature")?;
    for r in records {
        writeln!(
            writer,
            "{},{},{},{},{}",
            r.step, r.kinetic, r.potential, r.total, r.temperature
        )?;
    }
    Ok(())
}

pub fn read_energy_log<T: Real, R: Read>(reader: R) -> Result<(MetaPairs, Vec<EnergyRecord<T>>)> {
    let (meta, rows) = split_meta(read_lines(reader)?);
    if rows.is_empty() || rows[0] != "step,kinetic,potential,total,temperature" {
        return Err(Error::InvalidHeader(
            "energy log must start with `step,kinetic,potential,total,temperature`".to_string(),
        ));
    }
    let mut records = Vec::new();
    for (i, row) in rows[1..].iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(i + 2, "expected 5 fields".to_string()));
        }
        let step: u64 = fields[0]
            .parse()
            .map_err(|_| Error::parse(i + 2, format!("bad step `{}`", fields[0])))?;
        let mut vals = [0.0f64; 4];
        for (c, v) in vals.iter_mut().enumerate() {
            *v = fields[c + 1]
                .parse()
                .map_err(|_| Error::parse(i + 2, format!("bad value `{}`", fields[c + 1])))?;
        }
        records.push(EnergyRecord {
            step,
            kinetic: T::lit(vals[0]),
            potential: T::lit(vals[1]),
            total: T::lit(vals[2]),
            temperature: T::lit(vals[3]),
        });
    }
    Ok((meta, records))
}

/// Caches a descriptor as a dense matrix CSV (`# block_size = N` plus 3N
/// value rows). Reading validates and restores the block-Toeplitz structure.
pub fn write_descriptor_csv<T: Real, W: Write>(
    mut writer: W,
    descriptor: &crate::covariance::BlockToeplitzCov<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(&mut writer, meta)?;
    writeln!(writer, "# block_size = {}", descriptor.block_size())?;
    let dim = descriptor.dim();
    for i in 0..dim {
        let row: Vec<String> = (0..dim)
            .map(|j| format!("{}", descriptor.matrix()[(i, j)]))
            .collect();
        writeln!(writer, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_descriptor_csv<T: Real, R: Read>(
    reader: R,
) -> Result<(MetaPairs, crate::covariance::BlockToeplitzCov<T>)> {
    let (meta, rows) = split_meta(read_lines(reader)?);
    if rows.is_empty() {
        return Err(Error::NoRecords);
    }
    let dim = rows.len();
    let mut values = Mat::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != dim {
            return Err(Error::parse(i + 1, format!("expected {dim} fields")));
        }
        for (j, f) in fields.iter().enumerate() {
            let raw: f64 = f
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad value `{f}`")))?;
            values[(i, j)] = T::lit(raw);
        }
    }
    Ok((meta, crate::covariance::BlockToeplitzCov::from_matrix(values)?))
}
