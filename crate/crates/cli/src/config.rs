//! TOML configuration schemas and their validation.
//!
//! Two file kinds exist. A simulation file drives `covtraj simulate`:
//!
//! ```toml
//! n_particles = 500
//! density = 0.8            # or box_length = 8.55
//! dt = 0.005
//! equilibration_steps = 8000
//! production_steps = 20000
//! cutoff_radius = 2.5      # optional, default 2.5
//! langevin_gamma = 1.0     # optional, default 1.0
//! sample_stride = 2        # optional, default 1
//! base_seed = 1000         # optional, default 0
//!
//! [[run]]
//! label = "T=0.80"
//! temperature = 0.80
//! # seed = 1234            # optional, default base_seed + run index
//! ```
//!
//! A pipeline file drives `analyze`, `hist`, `distmat`, `embed`, and
//! `diffusion`. States come from inline simulation (a `[simulate]` template
//! plus per-state temperatures), from trajectory files, or from CSV series:
//!
//! ```toml
//! segment_len = 8
//! normalization = "zscore"         # or "none" (reduced-unit velocities)
//! descriptor_mode = "state-mean"   # "per-particle" | "single-particle"
//! pairs = 4000
//! seed = 0
//! embedding_dims = 2
//! embedding_method = "pca"         # or "mds"
//! bins = 50
//! out_dir = "out"
//!
//! [[state]]
//! label = "T=0.80"
//! velocities = "t080.vel.cvtj"
//! positions = "t080.pos.cvtj"      # optional; enables the MSD estimate
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use covtraj::mdengine::SimConfig;
use covtraj::timeseries::{Channel, NormalizePolicy};

use crate::{CliError, CliResult};

fn default_cutoff() -> f64 {
    2.5
}
fn default_gamma() -> f64 {
    1.0
}
fn default_stride() -> u64 {
    1
}
fn default_segment_len() -> usize {
    8
}
fn default_normalization() -> String {
    "zscore".to_string()
}
fn default_descriptor_mode() -> String {
    "state-mean".to_string()
}
fn default_pairs() -> usize {
    4000
}
fn default_dims() -> usize {
    2
}
fn default_method() -> String {
    "pca".to_string()
}
fn default_bins() -> usize {
    50
}
fn default_out_dir() -> String {
    "out".to_string()
}

/// Shared simulation parameters (the per-run temperature and seed come from
/// [`RunSpec`] or [`StateSpec`]).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimTemplate {
    pub n_particles: usize,
    pub box_length: Option<f64>,
    pub density: Option<f64>,
    pub dt: f64,
    pub equilibration_steps: u64,
    pub production_steps: u64,
    #[serde(default = "default_cutoff")]
    pub cutoff_radius: f64,
    #[serde(default = "default_gamma")]
    pub langevin_gamma: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: u64,
    #[serde(default)]
    pub base_seed: u64,
}

impl SimTemplate {
    pub fn resolve_box_length(&self) -> CliResult<f64> {
        match (self.box_length, self.density) {
            (Some(l), None) => Ok(l),
            (None, Some(rho)) => {
                Ok(SimConfig::<f64>::box_length_for_density(self.n_particles, rho)?)
            }
            (Some(_), Some(_)) => Err(CliError::validation(
                "invalid parameter `box_length`: give either box_length or density, not both",
            )),
            (None, None) => Err(CliError::validation(
                "invalid parameter `box_length`: one of box_length or density is required",
            )),
        }
    }

    /// Builds the validated core config for one run.
    pub fn sim_config(&self, temperature: f64, seed: u64) -> CliResult<SimConfig<f64>> {
        let config = SimConfig {
            n_particles: self.n_particles,
            box_length: self.resolve_box_length()?,
            temperature,
            dt: self.dt,
            n_steps_equil: self.equilibration_steps,
            n_steps_prod: self.production_steps,
            cutoff_radius: self.cutoff_radius,
            langevin_gamma: self.langevin_gamma,
            seed,
            sample_stride: self.sample_stride,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub label: String,
    pub temperature: f64,
    pub seed: Option<u64>,
}

/// `covtraj simulate` input: a template plus one or more runs.
#[derive(Clone, Debug, Deserialize)]
pub struct SimulateFile {
    #[serde(flatten)]
    pub template: SimTemplate,
    pub run: Vec<RunSpec>,
}

impl SimulateFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
        let parsed: SimulateFile = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        if parsed.run.is_empty() {
            return Err(CliError::validation(
                "invalid parameter `run`: at least one [[run]] is required",
            ));
        }
        let mut seen = Vec::new();
        for r in &parsed.run {
            if seen.contains(&r.label) {
                return Err(CliError::validation(format!("duplicate label `{}`", r.label)));
            }
            seen.push(r.label.clone());
        }
        Ok(parsed)
    }

    /// Per-run seed: explicit, else `base_seed + run index`.
    pub fn seed_for(&self, index: usize) -> u64 {
        self.run[index]
            .seed
            .unwrap_or(self.template.base_seed.wrapping_add(index as u64))
    }
}

/// One analysis state: exactly one of temperature-under-`[simulate]`,
/// `velocities`, or `csv` must identify its data source.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub label: String,
    /// Physical tag used for reporting; defaults to `temperature`.
    pub scalar: Option<f64>,
    /// Target temperature when simulating inline.
    pub temperature: Option<f64>,
    pub seed: Option<u64>,
    pub velocities: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub csv_dt: Option<f64>,
    pub csv_channel: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineFile {
    #[serde(default = "default_segment_len")]
    pub segment_len: usize,
    #[serde(default = "default_normalization")]
    pub normalization: String,
    #[serde(default = "default_descriptor_mode")]
    pub descriptor_mode: String,
    /// Particle index used by the single-particle descriptor mode.
    #[serde(default)]
    pub particle_index: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dims")]
    pub embedding_dims: usize,
    #[serde(default = "default_method")]
    pub embedding_method: String,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Histogram reference label; defaults to the first state.
    pub reference: Option<String>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    pub simulate: Option<SimTemplate>,
    pub state: Vec<StateSpec>,
}

/// How one state's data is obtained.
#[derive(Clone, Debug)]
pub enum StateSource {
    Simulate { temperature: f64, seed: u64 },
    Trajectory {
        velocities: PathBuf,
        positions: Option<PathBuf>,
    },
    Csv {
        path: PathBuf,
        dt: f64,
        channel: Channel,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescriptorMode {
    StateMean,
    PerParticle,
    SingleParticle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingMethod {
    Pca,
    Mds,
}

impl PipelineFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
        let parsed: PipelineFile = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        parsed.validate()?;
        Ok(parsed)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.state.is_empty() {
            return Err(CliError::validation(
                "invalid parameter `state`: at least one [[state]] is required",
            ));
        }
        if self.segment_len == 0 {
            return Err(CliError::validation(
                "invalid parameter `segment_len`: must be at least 1",
            ));
        }
        if self.embedding_dims == 0 {
            return Err(CliError::validation(
                "invalid parameter `embedding_dims`: must be at least 1",
            ));
        }
        let mut seen = Vec::new();
        for s in &self.state {
            if seen.contains(&s.label) {
                return Err(CliError::validation(format!("duplicate label `{}`", s.label)));
            }
            seen.push(s.label.clone());
        }
        self.normalization()?;
        self.descriptor_mode()?;
        self.embedding_method()?;
        for (i, _) in self.state.iter().enumerate() {
            self.state_source(i)?;
        }
        if let Some(reference) = &self.reference {
            if !self.state.iter().any(|s| &s.label == reference) {
                let labels: Vec<&str> = self.state.iter().map(|s| s.label.as_str()).collect();
                return Err(CliError::validation(format!(
                    "reference label `{reference}` not found; available: {}",
                    labels.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn normalization(&self) -> CliResult<NormalizePolicy> {
        match self.normalization.as_str() {
            "zscore" => Ok(NormalizePolicy::ZScore),
            "none" => Ok(NormalizePolicy::None),
            other => Err(CliError::validation(format!(
                "invalid parameter `normalization`: `{other}` (expected zscore or none)"
            ))),
        }
    }

    pub fn descriptor_mode(&self) -> CliResult<DescriptorMode> {
        match self.descriptor_mode.as_str() {
            "state-mean" => Ok(DescriptorMode::StateMean),
            "per-particle" => Ok(DescriptorMode::PerParticle),
            "single-particle" => Ok(DescriptorMode::SingleParticle),
            other => Err(CliError::validation(format!(
                "invalid parameter `descriptor_mode`: `{other}` (expected state-mean, per-particle, or single-particle)"
            ))),
        }
    }

    pub fn embedding_method(&self) -> CliResult<EmbeddingMethod> {
        match self.embedding_method.as_str() {
            "pca" => Ok(EmbeddingMethod::Pca),
            "mds" => Ok(EmbeddingMethod::Mds),
            other => Err(CliError::validation(format!(
                "invalid parameter `embedding_method`: `{other}` (expected pca or mds)"
            ))),
        }
    }

    /// Resolves the data source for state `index`.
    pub fn state_source(&self, index: usize) -> CliResult<StateSource> {
        let s = &self.state[index];
        let has_sim = s.temperature.is_some() && self.simulate.is_some();
        let has_traj = s.velocities.is_some();
        let has_csv = s.csv.is_some();
        match (has_sim, has_traj, has_csv) {
            (true, false, false) => Ok(StateSource::Simulate {
                temperature: s.temperature.unwrap(),
                seed: s.seed.unwrap_or_else(|| {
                    self.simulate
                        .as_ref()
                        .map(|t| t.base_seed)
                        .unwrap_or(0)
                        .wrapping_add(index as u64)
                }),
            }),
            (false, true, false) => Ok(StateSource::Trajectory {
                velocities: s.velocities.clone().unwrap(),
                positions: s.positions.clone(),
            }),
            (false, false, true) => {
                let dt = s.csv_dt.ok_or_else(|| {
                    CliError::validation(format!(
                        "invalid parameter `csv_dt`: required for CSV state `{}`",
                        s.label
                    ))
                })?;
                let channel = match s.csv_channel.as_deref() {
                    Some("velocity") => Channel::Velocity,
                    Some("position") => Channel::Position,
                    Some("dipole") | None => Channel::Dipole,
                    Some(other) => {
                        return Err(CliError::validation(format!(
                            "invalid parameter `csv_channel`: `{other}`"
                        )))
                    }
                };
                Ok(StateSource::Csv {
                    path: s.csv.clone().unwrap(),
                    dt,
                    channel,
                })
            }
            (false, false, false) => Err(CliError::validation(format!(
                "state `{}` has no data source: give temperature (with a [simulate] template), velocities, or csv",
                s.label
            ))),
            _ => Err(CliError::validation(format!(
                "state `{}` has more than one data source",
                s.label
            ))),
        }
    }

}

/// Filesystem-safe version of a state label.
pub fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_file_parses_with_defaults() {
        let text = r#"
            n_particles = 108
            density = 0.8
            dt = 0.005
            equilibration_steps = 100
            production_steps = 200
            base_seed = 7

            [[run]]
            label = "T=0.90"
            temperature = 0.9
        "#;
        let parsed: SimulateFile = toml::from_str(text).unwrap();
        assert_eq!(parsed.template.cutoff_radius, 2.5);
        assert_eq!(parsed.template.sample_stride, 1);
        assert_eq!(parsed.seed_for(0), 7);
        let config = parsed.template.sim_config(0.9, 7).unwrap();
        assert!((config.box_length - (108.0f64 / 0.8).powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn pipeline_requires_a_source_per_state() {
        let text = r#"
            [[state]]
            label = "a"
        "#;
        let parsed: PipelineFile = toml::from_str(text).unwrap();
        let err = parsed.validate().unwrap_err();
        assert!(err.to_string().contains("no data source"), "{err}");
    }

    #[test]
    fn pipeline_rejects_unknown_reference() {
        let text = r#"
            reference = "missing"

            [simulate]
            n_particles = 32
            density = 0.8
            dt = 0.005
            equilibration_steps = 1
            production_steps = 8

            [[state]]
            label = "a"
            temperature = 0.9
        "#;
        let parsed: PipelineFile = toml::from_str(text).unwrap();
        let err = parsed.validate().unwrap_err();
        assert!(err.to_string().contains("available: a"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn label_sanitization() {
        assert_eq!(sanitize_label("T=0.80"), "T_0.80");
        assert_eq!(sanitize_label("ice/water #1"), "ice_water__1");
    }
}
