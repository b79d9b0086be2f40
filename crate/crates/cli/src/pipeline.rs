//! Pipeline stages behind the CLI subcommands.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use covtraj::covariance::{build_block_toeplitz, euclidean_mean, BlockToeplitzCov};
use covtraj::distance::{
    distance_matrix, histogram, sample_pair_distances, DistanceHistogram, DistanceMatrix,
    StateDescriptor,
};
use covtraj::embedding::{linear_fit, mds_embed, pca_embed, Embedding, LinearFit};
use covtraj::io as cio;
use covtraj::linalg::Mat;
use covtraj::mdengine::{
    diffusion_msd, diffusion_vacf, run_simulation, simulate, MsdEstimate, SimOutputPaths,
    VacfEstimate,
};
use covtraj::timeseries::{normalize, segment, Channel, NormalizePolicy, ParticleSeries};

use crate::config::{
    sanitize_label, DescriptorMode, EmbeddingMethod, PipelineFile, SimulateFile, StateSource,
};
use crate::{report, CliError, CliResult};

/// One state's raw data, ready for descriptor construction and diffusion
/// estimation.
pub struct LoadedState {
    pub label: String,
    pub scalar: Option<f64>,
    pub channel: Channel,
    /// Per-particle series on the analysis channel.
    pub series: Vec<ParticleSeries<f64>>,
    /// Frame-major velocities for the Green-Kubo estimator.
    pub velocity_frames: Option<Vec<Vec<[f64; 3]>>>,
    /// Frame-major unwrapped positions for the Einstein estimator.
    pub position_frames: Option<Vec<Vec<[f64; 3]>>>,
    pub frame_dt: f64,
}

fn frames_to_series(
    frames: &[Vec<[f64; 3]>],
    frame_dt: f64,
    channel: Channel,
) -> CliResult<Vec<ParticleSeries<f64>>> {
    let n = frames
        .first()
        .ok_or_else(|| CliError::validation("trajectory holds no frames"))?
        .len();
    let mut series = Vec::with_capacity(n);
    for p in 0..n {
        let data: Vec<[f64; 3]> = frames.iter().map(|f| f[p]).collect();
        series.push(ParticleSeries::new(p as u64, frame_dt, channel, data)?);
    }
    Ok(series)
}

fn read_trajectory_file(path: &Path) -> CliResult<(cio::TrajectoryMeta, Vec<Vec<[f64; 3]>>)> {
    let file = File::open(path)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
    cio::read_trajectory(BufReader::new(file))
        .map_err(CliError::from)
        .map_err(|e| match e {
            CliError::Validation(msg) => {
                CliError::Validation(format!("{}: {msg}", path.display()))
            }
            CliError::Runtime(msg) => CliError::Runtime(format!("{}: {msg}", path.display())),
        })
}

/// Loads every state in the pipeline config. States must agree on channel
/// and frame spacing.
pub fn load_states(config: &PipelineFile) -> CliResult<Vec<LoadedState>> {
    let mut states = Vec::with_capacity(config.state.len());
    for (index, spec) in config.state.iter().enumerate() {
        let source = config.state_source(index)?;
        let state = match source {
            StateSource::Simulate { temperature, seed } => {
                let template = config.simulate.as_ref().expect("state_source checked");
                let sim_config = template.sim_config(temperature, seed)?;
                let run = simulate(&sim_config)?;
                let series =
                    frames_to_series(&run.velocity_frames, run.frame_dt, Channel::Velocity)?;
                LoadedState {
                    label: spec.label.clone(),
                    scalar: spec.scalar.or(Some(temperature)),
                    channel: Channel::Velocity,
                    series,
                    velocity_frames: Some(run.velocity_frames),
                    position_frames: Some(run.position_frames),
                    frame_dt: run.frame_dt,
                }
            }
            StateSource::Trajectory {
                velocities,
                positions,
            } => {
                let (meta, frames) = read_trajectory_file(&velocities)?;
                let frame_dt = meta.frame_dt();
                let series = frames_to_series(&frames, frame_dt, meta.channel)?;
                let position_frames = match positions {
                    Some(path) => {
                        let (pos_meta, pos_frames) = read_trajectory_file(&path)?;
                        if (pos_meta.frame_dt() - frame_dt).abs() > 1e-12 {
                            return Err(CliError::validation(format!(
                                "state `{}`: position frame spacing {} does not match velocity spacing {}",
                                spec.label,
                                pos_meta.frame_dt(),
                                frame_dt
                            )));
                        }
                        Some(pos_frames)
                    }
                    None => None,
                };
                let velocity_frames = if meta.channel == Channel::Velocity {
                    Some(frames)
                } else {
                    None
                };
                LoadedState {
                    label: spec.label.clone(),
                    scalar: spec.scalar,
                    channel: meta.channel,
                    series,
                    velocity_frames,
                    position_frames,
                    frame_dt,
                }
            }
            StateSource::Csv { path, dt, channel } => {
                let file = File::open(&path).map_err(|e| {
                    CliError::runtime(format!("cannot open {}: {e}", path.display()))
                })?;
                let series = cio::read_csv_series(BufReader::new(file), dt, channel)?;
                LoadedState {
                    label: spec.label.clone(),
                    scalar: spec.scalar,
                    channel,
                    series,
                    velocity_frames: None,
                    position_frames: None,
                    frame_dt: dt,
                }
            }
        };
        states.push(state);
    }

    let channel = states[0].channel;
    let frame_dt = states[0].frame_dt;
    for s in &states[1..] {
        if s.channel != channel {
            return Err(CliError::validation(format!(
                "states mix channels: `{}` is {} but `{}` is {}",
                states[0].label, channel, s.label, s.channel
            )));
        }
        if (s.frame_dt - frame_dt).abs() > 1e-12 {
            return Err(CliError::validation(format!(
                "states mix frame spacings: `{}` has {} but `{}` has {}",
                states[0].label, frame_dt, s.label, s.frame_dt
            )));
        }
    }
    Ok(states)
}

/// Per-particle and state-level descriptors of one state.
pub struct StateDescriptors {
    pub label: String,
    pub scalar: Option<f64>,
    pub per_particle: Vec<BlockToeplitzCov<f64>>,
    pub state_descriptor: BlockToeplitzCov<f64>,
    pub segments_per_particle: usize,
}

/// normalize -> segment -> per-segment descriptors -> per-particle means,
/// then the state descriptor per the configured mode.
pub fn build_descriptors(
    state: &LoadedState,
    policy: NormalizePolicy,
    segment_len: usize,
    mode: DescriptorMode,
    particle_index: usize,
) -> CliResult<StateDescriptors> {
    let mut per_particle = Vec::with_capacity(state.series.len());
    let mut segments_per_particle = 0;
    for series in &state.series {
        let (normalized, _) = normalize(series, policy)?;
        let segments = segment(&normalized, segment_len)?;
        segments_per_particle = segments.len();
        let descriptors: Vec<_> = segments.iter().map(build_block_toeplitz).collect();
        per_particle.push(euclidean_mean(&descriptors)?);
    }

    let state_descriptor = match mode {
        DescriptorMode::StateMean | DescriptorMode::PerParticle => euclidean_mean(&per_particle)?,
        DescriptorMode::SingleParticle => per_particle
            .get(particle_index)
            .cloned()
            .ok_or_else(|| {
                CliError::validation(format!(
                    "invalid parameter `particle_index`: {particle_index} out of range for state `{}` with {} particles",
                    state.label,
                    per_particle.len()
                ))
            })?,
    };

    Ok(StateDescriptors {
        label: state.label.clone(),
        scalar: state.scalar,
        per_particle,
        state_descriptor,
        segments_per_particle,
    })
}

pub fn build_all_descriptors(
    config: &PipelineFile,
    states: &[LoadedState],
) -> CliResult<Vec<StateDescriptors>> {
    let policy = config.normalization()?;
    let mode = config.descriptor_mode()?;
    states
        .iter()
        .map(|s| build_descriptors(s, policy, config.segment_len, mode, config.particle_index))
        .collect()
}

/// Assembles the state-level distance matrix; a single state yields the
/// 1 x 1 zero matrix.
pub fn state_distance_matrix(descriptors: &[StateDescriptors]) -> CliResult<DistanceMatrix<f64>> {
    if descriptors.len() == 1 {
        return Ok(DistanceMatrix::from_parts(
            vec![descriptors[0].label.clone()],
            Mat::zeros(1, 1),
        )?);
    }
    let states: Vec<StateDescriptor<f64>> = descriptors
        .iter()
        .map(|d| StateDescriptor {
            label: d.label.clone(),
            scalar_tag: d.scalar,
            matrix: d.state_descriptor.clone(),
        })
        .collect();
    Ok(distance_matrix(&states)?)
}

/// Embeds the distance matrix; a 1 x 1 matrix maps to the origin.
pub fn embed_matrix(
    dm: &DistanceMatrix<f64>,
    dims: usize,
    method: EmbeddingMethod,
) -> CliResult<Embedding<f64>> {
    if dm.dim() == 1 {
        return Ok(Embedding {
            labels: dm.labels().to_vec(),
            coordinates: Mat::zeros(1, 1),
            explained_variance_ratio: vec![0.0],
            component_axes: Mat::identity(1),
        });
    }
    let dims = dims.min(dm.dim());
    Ok(match method {
        EmbeddingMethod::Pca => pca_embed(dm, dims)?,
        EmbeddingMethod::Mds => mds_embed(dm, dims)?,
    })
}

/// Diffusion estimates for one state; fields stay `None` when the state
/// lacks the needed channel.
pub struct DiffusionRow {
    pub label: String,
    pub scalar: Option<f64>,
    pub msd: Option<MsdEstimate<f64>>,
    pub vacf: Option<VacfEstimate<f64>>,
}

pub fn diffusion_rows(states: &[LoadedState]) -> CliResult<Vec<DiffusionRow>> {
    states
        .iter()
        .map(|s| {
            let msd = s
                .position_frames
                .as_ref()
                .map(|frames| diffusion_msd(frames, s.frame_dt))
                .transpose()?;
            let vacf = s
                .velocity_frames
                .as_ref()
                .map(|frames| diffusion_vacf(frames, s.frame_dt))
                .transpose()?;
            Ok(DiffusionRow {
                label: s.label.clone(),
                scalar: s.scalar,
                msd,
                vacf,
            })
        })
        .collect()
}

/// Everything `analyze` computed, for reporting and tests.
pub struct AnalyzeOutcome {
    pub distance_matrix: DistanceMatrix<f64>,
    pub embedding: Embedding<f64>,
    pub diffusion: Vec<DiffusionRow>,
    pub fit: Option<LinearFit<f64>>,
    pub fit_skipped_reason: Option<String>,
    pub segments_per_particle: Vec<(String, usize)>,
    pub written: Vec<PathBuf>,
}

/// Full pipeline: descriptors -> distance matrix -> embedding -> diffusion
/// -> PC1 fit, with artifacts written under `out_dir`.
pub fn cmd_analyze(config: &PipelineFile, emit_svg: bool) -> CliResult<AnalyzeOutcome> {
    let out_dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&out_dir)?;

    let states = load_states(config)?;
    let descriptors = build_all_descriptors(config, &states)?;
    let dm = state_distance_matrix(&descriptors)?;
    let embedding = embed_matrix(&dm, config.embedding_dims, config.embedding_method()?)?;
    let diffusion = diffusion_rows(&states)?;

    // PC1 vs the MSD diffusion coefficient.
    let pc1 = embedding.pc1();
    let msd_d: Vec<Option<f64>> = diffusion
        .iter()
        .map(|r| r.msd.as_ref().map(|m| m.diffusion_coefficient))
        .collect();
    let (fit, fit_skipped_reason) = if states.len() < 2 {
        (None, Some("insufficient states".to_string()))
    } else if msd_d.iter().any(|d| d.is_none()) {
        (
            None,
            Some("missing position data for the MSD diffusion coefficient".to_string()),
        )
    } else {
        let d: Vec<f64> = msd_d.iter().map(|v| v.unwrap()).collect();
        match linear_fit(&pc1, &d) {
            Ok(fit) => (Some(fit), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };

    let segments_per_particle: Vec<(String, usize)> = descriptors
        .iter()
        .map(|d| (d.label.clone(), d.segments_per_particle))
        .collect();

    let written = report::write_analyze_artifacts(
        config,
        &out_dir,
        &dm,
        &embedding,
        &diffusion,
        fit.as_ref(),
        fit_skipped_reason.as_deref(),
        &segments_per_particle,
        emit_svg,
    )?;

    Ok(AnalyzeOutcome {
        distance_matrix: dm,
        embedding,
        diffusion,
        fit,
        fit_skipped_reason,
        segments_per_particle,
        written,
    })
}

/// Result of `hist`: one histogram per (reference, state) pair over a shared
/// bin range.
pub struct HistOutcome {
    pub histograms: Vec<DistanceHistogram<f64>>,
    pub written: Vec<PathBuf>,
}

/// With a reference label, draws one histogram per (reference, state) pair
/// including the reference against itself. Without one, covers every state
/// combination (a-a, a-b, b-b, ...). All histograms share one bin range.
pub fn cmd_hist(config: &PipelineFile, emit_svg: bool) -> CliResult<HistOutcome> {
    let out_dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&out_dir)?;

    let states = load_states(config)?;
    let descriptors = build_all_descriptors(config, &states)?;

    let pairs: Vec<(usize, usize)> = match &config.reference {
        Some(reference) => {
            let ref_index = descriptors
                .iter()
                .position(|d| &d.label == reference)
                .ok_or_else(|| {
                    let labels: Vec<&str> =
                        descriptors.iter().map(|d| d.label.as_str()).collect();
                    CliError::validation(format!(
                        "reference label `{reference}` not found; available: {}",
                        labels.join(", ")
                    ))
                })?;
            (0..descriptors.len()).map(|j| (ref_index, j)).collect()
        }
        None => {
            let s = descriptors.len();
            (0..s)
                .flat_map(|i| (i..s).map(move |j| (i, j)))
                .collect()
        }
    };

    // Draw all sample sets first so every histogram shares one bin range.
    let mut sample_sets = Vec::with_capacity(pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let seed = config.seed.wrapping_add(k as u64);
        let samples = if i == j {
            sample_pair_distances(
                &descriptors[i].per_particle,
                &descriptors[i].per_particle,
                config.pairs,
                seed,
            )?
        } else {
            sample_pair_distances(
                &descriptors[i].per_particle,
                &descriptors[j].per_particle,
                config.pairs,
                seed,
            )?
        };
        sample_sets.push((
            descriptors[i].label.clone(),
            descriptors[j].label.clone(),
            seed,
            samples,
        ));
    }

    let lo = sample_sets
        .iter()
        .flat_map(|(_, _, _, s)| s.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let hi = sample_sets
        .iter()
        .flat_map(|(_, _, _, s)| s.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let range = if lo < hi { Some((lo, hi)) } else { None };

    let mut histograms = Vec::with_capacity(sample_sets.len());
    for (from, to, seed, samples) in &sample_sets {
        let h = histogram(samples, config.bins, range)?
            .labeled(from.clone(), to.clone())
            .seeded(*seed);
        histograms.push(h);
    }

    let written = report::write_hist_artifacts(config, &out_dir, &histograms, emit_svg)?;
    Ok(HistOutcome {
        histograms,
        written,
    })
}

/// `distmat`: descriptors and the distance matrix only.
pub fn cmd_distmat(config: &PipelineFile) -> CliResult<(DistanceMatrix<f64>, PathBuf)> {
    let out_dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&out_dir)?;
    let states = load_states(config)?;
    let descriptors = build_all_descriptors(config, &states)?;
    let dm = state_distance_matrix(&descriptors)?;
    let segments: Vec<(String, usize)> = descriptors
        .iter()
        .map(|d| (d.label.clone(), d.segments_per_particle))
        .collect();
    let path = report::write_distance_matrix(config, &out_dir, &dm, &segments)?;
    Ok((dm, path))
}

/// `embed`: embeds either a previously written distance-matrix CSV or the
/// matrix computed from the config.
pub fn cmd_embed(
    config: Option<&PipelineFile>,
    matrix_path: Option<&Path>,
    dims: usize,
    method: EmbeddingMethod,
    out_dir: &Path,
) -> CliResult<(Embedding<f64>, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let dm = match (matrix_path, config) {
        (Some(path), _) => {
            let file = File::open(path)
                .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
            let (_, dm) = cio::read_distance_matrix_csv::<f64, _>(BufReader::new(file))?;
            dm
        }
        (None, Some(config)) => {
            let states = load_states(config)?;
            let descriptors = build_all_descriptors(config, &states)?;
            state_distance_matrix(&descriptors)?
        }
        (None, None) => {
            return Err(CliError::validation(
                "embed needs either --config or --matrix",
            ))
        }
    };
    let embedding = embed_matrix(&dm, dims, method)?;
    let path = report::write_embedding(out_dir, &embedding, method)?;
    Ok((embedding, path))
}

/// `diffusion`: per-state MSD and Green-Kubo estimates.
pub fn cmd_diffusion(config: &PipelineFile) -> CliResult<(Vec<DiffusionRow>, PathBuf)> {
    let out_dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&out_dir)?;
    let states = load_states(config)?;
    let rows = diffusion_rows(&states)?;
    let path = report::write_diffusion(&out_dir, &rows)?;
    Ok((rows, path))
}

/// Outcome of one `simulate` run.
pub struct SimulateOutcome {
    pub label: String,
    pub stem: String,
    pub paths: SimOutputPaths,
    pub energy_drift_rel: f64,
    pub max_energy_deviation_rel: f64,
    pub mean_temperature: f64,
    pub n_frames: u64,
}

pub fn cmd_simulate(file: &SimulateFile, out_dir: &Path) -> CliResult<Vec<SimulateOutcome>> {
    fs::create_dir_all(out_dir)?;
    let mut outcomes = Vec::with_capacity(file.run.len());
    for (i, run) in file.run.iter().enumerate() {
        let seed = file.seed_for(i);
        let config = file.template.sim_config(run.temperature, seed)?;
        let stem = sanitize_label(&run.label);
        let paths = SimOutputPaths::with_stem(out_dir, &stem);
        let summary = run_simulation(&config, &paths)?;
        outcomes.push(SimulateOutcome {
            label: run.label.clone(),
            stem,
            paths,
            energy_drift_rel: summary.energy_drift_rel,
            max_energy_deviation_rel: summary.max_energy_deviation_rel,
            mean_temperature: summary.mean_temperature,
            n_frames: summary.n_frames,
        });
    }
    Ok(outcomes)
}
