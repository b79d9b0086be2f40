use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use covtraj_cli::config::{EmbeddingMethod, PipelineFile, SimulateFile};
use covtraj_cli::{pipeline, CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "covtraj",
    version,
    about = "Covariance-distance analysis of molecular-dynamics trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Lennard-Jones simulations and write trajectories + energy logs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the template base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full pipeline: descriptors, distance matrix, embedding, diffusion, fit.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_name = "N")]
        segment_len: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render SVG figures next to the CSVs.
        #[arg(long)]
        svg: bool,
    },
    /// Histograms of sampled pair distances: against a reference state, or
    /// over all state combinations when no reference is given.
    Hist {
        #[arg(long)]
        config: PathBuf,
        /// Reference state label (default: the config's `reference`; if
        /// neither is set, all state combinations are compared).
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, value_name = "N")]
        segment_len: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
    /// Distance matrix only.
    Distmat {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_name = "N")]
        segment_len: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a distance matrix (from --matrix, or computed via --config).
    Embed {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Existing distance_matrix.csv to embed.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        dims: Option<usize>,
        /// pca (default) or mds.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-state diffusion coefficients (MSD and Green-Kubo).
    Diffusion {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn apply_overrides(
    config: &mut PipelineFile,
    segment_len: Option<usize>,
    pairs: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> CliResult<()> {
    if let Some(n) = segment_len {
        config.segment_len = n;
    }
    if let Some(p) = pairs {
        config.pairs = p;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(dir) = out {
        config.out_dir = dir
            .to_str()
            .ok_or_else(|| CliError::validation("invalid parameter `out`: not valid UTF-8"))?
            .to_string();
    }
    config.validate()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let mut file = SimulateFile::load(&config)?;
            if let Some(seed) = seed {
                file.template.base_seed = seed;
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from("."));
            let outcomes = pipeline::cmd_simulate(&file, &out_dir)?;
            for o in &outcomes {
                println!(
                    "run label={} out={} frames={} energy_drift_rel={:e} max_energy_deviation_rel={:e} mean_temperature={}",
                    o.label,
                    o.paths.velocities.display(),
                    o.n_frames,
                    o.energy_drift_rel,
                    o.max_energy_deviation_rel,
                    o.mean_temperature
                );
            }
            Ok(())
        }
        Command::Analyze {
            config,
            segment_len,
            pairs,
            seed,
            out,
            svg,
        } => {
            let mut file = PipelineFile::load(&config)?;
            apply_overrides(&mut file, segment_len, pairs, seed, out)?;
            let outcome = pipeline::cmd_analyze(&file, svg)?;
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            if let Some(fit) = &outcome.fit {
                println!(
                    "fit slope={} intercept={} pearson_r={} n_points={}",
                    fit.slope, fit.intercept, fit.pearson_r, fit.n_points
                );
            } else if let Some(reason) = &outcome.fit_skipped_reason {
                println!("fit skipped: {reason}");
            }
            Ok(())
        }
        Command::Hist {
            config,
            reference,
            segment_len,
            pairs,
            seed,
            out,
            svg,
        } => {
            let mut file = PipelineFile::load(&config)?;
            if let Some(reference) = reference {
                file.reference = Some(reference);
            }
            apply_overrides(&mut file, segment_len, pairs, seed, out)?;
            let outcome = pipeline::cmd_hist(&file, svg)?;
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Distmat {
            config,
            segment_len,
            out,
        } => {
            let mut file = PipelineFile::load(&config)?;
            apply_overrides(&mut file, segment_len, None, None, out)?;
            let (_, path) = pipeline::cmd_distmat(&file)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Embed {
            config,
            matrix,
            dims,
            method,
            out,
        } => {
            let file = match &config {
                Some(path) => Some(PipelineFile::load(path)?),
                None => None,
            };
            let method = match method.as_deref() {
                Some("pca") | None => EmbeddingMethod::Pca,
                Some("mds") => EmbeddingMethod::Mds,
                Some(other) => {
                    return Err(CliError::validation(format!(
                        "invalid parameter `method`: `{other}` (expected pca or mds)"
                    )))
                }
            };
            let dims = dims
                .or_else(|| file.as_ref().map(|f| f.embedding_dims))
                .unwrap_or(2);
            let out_dir = out
                .or_else(|| file.as_ref().map(|f| PathBuf::from(&f.out_dir)))
                .unwrap_or_else(|| PathBuf::from("out"));
            let (_, path) =
                pipeline::cmd_embed(file.as_ref(), matrix.as_deref(), dims, method, &out_dir)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Diffusion { config, out } => {
            let mut file = PipelineFile::load(&config)?;
            apply_overrides(&mut file, None, None, None, out)?;
            let (_, path) = pipeline::cmd_diffusion(&file)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
