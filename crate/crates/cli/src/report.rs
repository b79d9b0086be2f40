//! Artifact emission: CSV files with `# key = value` headers recording the
//! run parameters, plus a minimal SVG renderer for quick inspection.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use covtraj::distance::{DistanceHistogram, DistanceMatrix};
use covtraj::embedding::{Embedding, LinearFit};
use covtraj::io as cio;

use crate::config::{sanitize_label, EmbeddingMethod, PipelineFile};
use crate::pipeline::DiffusionRow;
use crate::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn meta_base(config: &PipelineFile, segments: &[(String, usize)]) -> Vec<(String, String)> {
    let mut meta = vec![
        ("generator".to_string(), format!("covtraj {VERSION}")),
        ("segment_len".to_string(), config.segment_len.to_string()),
        ("normalization".to_string(), config.normalization.clone()),
        (
            "descriptor_mode".to_string(),
            config.descriptor_mode.clone(),
        ),
        ("seed".to_string(), config.seed.to_string()),
    ];
    let k: Vec<String> = segments
        .iter()
        .map(|(label, k)| format!("{label}:{k}"))
        .collect();
    if !k.is_empty() {
        meta.push(("segments_per_particle".to_string(), k.join(";")));
    }
    meta
}

pub fn write_distance_matrix(
    config: &PipelineFile,
    out_dir: &Path,
    dm: &DistanceMatrix<f64>,
    segments: &[(String, usize)],
) -> CliResult<PathBuf> {
    let path = out_dir.join("distance_matrix.csv");
    let meta = meta_base(config, segments);
    cio::write_distance_matrix_csv(BufWriter::new(File::create(&path)?), dm, &meta)?;
    Ok(path)
}

pub fn write_embedding(
    out_dir: &Path,
    embedding: &Embedding<f64>,
    method: EmbeddingMethod,
) -> CliResult<PathBuf> {
    let path = out_dir.join("embedding.csv");
    let meta = vec![
        ("generator".to_string(), format!("covtraj {VERSION}")),
        (
            "method".to_string(),
            match method {
                EmbeddingMethod::Pca => "pca".to_string(),
                EmbeddingMethod::Mds => "mds".to_string(),
            },
        ),
        ("dims".to_string(), embedding.dims().to_string()),
    ];
    let scalars: Vec<Option<f64>> = vec![None; embedding.labels.len()];
    cio::write_embedding_csv(
        BufWriter::new(File::create(&path)?),
        embedding,
        &scalars,
        &meta,
    )?;
    Ok(path)
}

fn write_embedding_with_scalars(
    config: &PipelineFile,
    out_dir: &Path,
    embedding: &Embedding<f64>,
    scalars: &[Option<f64>],
    segments: &[(String, usize)],
) -> CliResult<PathBuf> {
    let path = out_dir.join("embedding.csv");
    let mut meta = meta_base(config, segments);
    meta.push(("method".to_string(), config.embedding_method.clone()));
    meta.push(("dims".to_string(), embedding.dims().to_string()));
    cio::write_embedding_csv(
        BufWriter::new(File::create(&path)?),
        embedding,
        scalars,
        &meta,
    )?;
    Ok(path)
}

pub fn write_diffusion(out_dir: &Path, rows: &[DiffusionRow]) -> CliResult<PathBuf> {
    let path = out_dir.join("diffusion.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "# generator = covtraj {VERSION}")?;
    writeln!(
        w,
        "label,scalar,d_msd,msd_r_squared,msd_window_lo,msd_window_hi,d_vacf,vacf_t_cut,vacf_decayed"
    )?;
    for r in rows {
        let scalar = r.scalar.map(|v| v.to_string()).unwrap_or_default();
        let (d_msd, r2, wlo, whi) = match &r.msd {
            Some(m) => (
                m.diffusion_coefficient.to_string(),
                m.r_squared.to_string(),
                m.window.0.to_string(),
                m.window.1.to_string(),
            ),
            None => Default::default(),
        };
        let (d_vacf, t_cut, decayed) = match &r.vacf {
            Some(v) => (
                v.diffusion_coefficient.to_string(),
                v.t_cut.to_string(),
                v.decayed.to_string(),
            ),
            None => Default::default(),
        };
        writeln!(
            w,
            "{},{scalar},{d_msd},{r2},{wlo},{whi},{d_vacf},{t_cut},{decayed}",
            r.label
        )?;
    }
    Ok(path)
}

pub fn write_fit(
    out_dir: &Path,
    fit: Option<&LinearFit<f64>>,
    skipped_reason: Option<&str>,
) -> CliResult<PathBuf> {
    let path = out_dir.join("fit.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "# generator = covtraj {VERSION}")?;
    writeln!(w, "# x = pc1")?;
    writeln!(w, "# y = d_msd")?;
    if let Some(reason) = skipped_reason {
        writeln!(w, "# skipped = {reason}")?;
    }
    writeln!(w, "slope,intercept,pearson_r,n_points")?;
    if let Some(fit) = fit {
        writeln!(
            w,
            "{},{},{},{}",
            fit.slope, fit.intercept, fit.pearson_r, fit.n_points
        )?;
    }
    Ok(path)
}

#[allow(clippy::too_many_arguments)]
pub fn write_analyze_artifacts(
    config: &PipelineFile,
    out_dir: &Path,
    dm: &DistanceMatrix<f64>,
    embedding: &Embedding<f64>,
    diffusion: &[DiffusionRow],
    fit: Option<&LinearFit<f64>>,
    fit_skipped: Option<&str>,
    segments: &[(String, usize)],
    emit_svg: bool,
) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    written.push(write_distance_matrix(config, out_dir, dm, segments)?);
    let scalars: Vec<Option<f64>> = diffusion.iter().map(|r| r.scalar).collect();
    written.push(write_embedding_with_scalars(
        config, out_dir, embedding, &scalars, segments,
    )?);
    written.push(write_diffusion(out_dir, diffusion)?);
    written.push(write_fit(out_dir, fit, fit_skipped)?);

    if emit_svg {
        let heatmap = out_dir.join("distance_matrix.svg");
        std::fs::write(&heatmap, svg_heatmap(dm))?;
        written.push(heatmap);

        let scatter = out_dir.join("embedding.svg");
        let points: Vec<(f64, f64, String)> = (0..embedding.labels.len())
            .map(|i| {
                let y = if embedding.dims() > 1 {
                    embedding.coordinates[(i, 1)]
                } else {
                    0.0
                };
                (
                    embedding.coordinates[(i, 0)],
                    y,
                    embedding.labels[i].clone(),
                )
            })
            .collect();
        std::fs::write(&scatter, svg_scatter(&points, "pc1", "pc2"))?;
        written.push(scatter);

        if fit.is_some() {
            let pc1 = embedding.pc1();
            let points: Vec<(f64, f64, String)> = diffusion
                .iter()
                .enumerate()
                .filter_map(|(i, r)| {
                    r.msd
                        .as_ref()
                        .map(|m| (pc1[i], m.diffusion_coefficient, r.label.clone()))
                })
                .collect();
            let fit_svg = out_dir.join("fit.svg");
            std::fs::write(&fit_svg, svg_scatter(&points, "pc1", "d_msd"))?;
            written.push(fit_svg);
        }
    }
    Ok(written)
}

pub fn write_hist_artifacts(
    config: &PipelineFile,
    out_dir: &Path,
    histograms: &[DistanceHistogram<f64>],
    emit_svg: bool,
) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for h in histograms {
        let stem = format!(
            "hist_{}_vs_{}",
            sanitize_label(&h.label_pair.0),
            sanitize_label(&h.label_pair.1)
        );
        let path = out_dir.join(format!("{stem}.csv"));
        let meta = vec![
            ("generator".to_string(), format!("covtraj {VERSION}")),
            ("segment_len".to_string(), config.segment_len.to_string()),
            ("normalization".to_string(), config.normalization.clone()),
            ("n_pairs".to_string(), config.pairs.to_string()),
            ("bins".to_string(), config.bins.to_string()),
        ];
        cio::write_histogram_csv(BufWriter::new(File::create(&path)?), h, &meta)?;
        if emit_svg {
            let svg_path = out_dir.join(format!("{stem}.svg"));
            std::fs::write(&svg_path, svg_histogram(h))?;
            written.push(svg_path);
        }
        written.push(path);
    }
    Ok(written)
}

// --- minimal SVG rendering -------------------------------------------------

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn svg_open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn scale(v: f64, lo: f64, hi: f64, out_lo: f64, out_hi: f64) -> f64 {
    if hi > lo {
        out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)
    } else {
        0.5 * (out_lo + out_hi)
    }
}

/// Labeled scatter plot.
pub fn svg_scatter(points: &[(f64, f64, String)], x_label: &str, y_label: &str) -> String {
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y, _) in points {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    if points.is_empty() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    let mut svg = svg_open();
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <text x=\"{2}\" y=\"{3}\" font-size=\"14\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{4}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 {4})\">{y_label}</text>\n",
        SVG_H - MARGIN,
        SVG_W - MARGIN,
        SVG_W / 2.0,
        SVG_H - 16.0,
        SVG_H / 2.0,
    ));
    for (x, y, label) in points {
        let px = scale(*x, x_lo, x_hi, MARGIN + 10.0, SVG_W - MARGIN - 10.0);
        let py = scale(*y, y_lo, y_hi, SVG_H - MARGIN - 10.0, MARGIN + 10.0);
        svg.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"5\" fill=\"steelblue\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{label}</text>\n",
            px + 8.0,
            py - 6.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Distance-matrix heatmap with a white-to-red ramp.
pub fn svg_heatmap(dm: &DistanceMatrix<f64>) -> String {
    let s = dm.dim();
    let max = (0..s)
        .flat_map(|i| (0..s).map(move |j| (i, j)))
        .map(|(i, j)| dm.get(i, j))
        .fold(0.0f64, f64::max);
    let cell = (SVG_H - 2.0 * MARGIN) / s as f64;
    let mut svg = svg_open();
    for i in 0..s {
        for j in 0..s {
            let v = if max > 0.0 { dm.get(i, j) / max } else { 0.0 };
            let shade = (255.0 * (1.0 - v)) as u8;
            let x = MARGIN + j as f64 * cell;
            let y = MARGIN + i as f64 * cell;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" \
                 fill=\"rgb(255,{shade},{shade})\" stroke=\"gray\" stroke-width=\"0.5\"/>\n"
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            MARGIN - 6.0,
            MARGIN + (i as f64 + 0.6) * cell,
            dm.labels()[i]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Bin-count bar chart.
pub fn svg_histogram(hist: &DistanceHistogram<f64>) -> String {
    let n = hist.counts.len();
    let max = hist.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let bar = (SVG_W - 2.0 * MARGIN) / n as f64;
    let mut svg = svg_open();
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-size=\"13\" text-anchor=\"middle\">{} vs {}</text>\n",
        SVG_W / 2.0,
        hist.label_pair.0,
        hist.label_pair.1
    ));
    for (i, &count) in hist.counts.iter().enumerate() {
        let h = (count as f64 / max) * (SVG_H - 2.0 * MARGIN);
        let x = MARGIN + i as f64 * bar;
        let y = SVG_H - MARGIN - h;
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" \
             fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n",
            bar.max(1.0)
        ));
    }
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n</svg>\n",
        SVG_H - MARGIN,
        SVG_W - MARGIN
    ));
    svg
}
