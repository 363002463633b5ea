//! Benchmark harness: dataset loading, the Wald protocol, parallel method
//! runs and report emission.

pub mod config;
pub mod published;
pub mod report;
pub mod synth;

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fusion::{fuse_upsampled, FusionParams};
use crate::metrics::{full_report, spectral_report, MetricReport};
use crate::preprocess::{downsample, upsample, DownsampleFilter, Resample};
use crate::raster::{save_image, Clamp, FileFormat, MultiBandImage, Raster};

pub use config::{DatasetConfig, ReportFormat, SyntheticSource};
pub use published::published_results;
pub use report::{emit_report, BenchmarkReport, MethodRow};
pub use synth::{synth_dataset, SynthDataset};

/// Wald consistency: box-mean downsample the fused image back to the MS grid
/// and score it against the original MS, with `h/l = 1/ratio`.
pub fn wald_consistency(fused: &MultiBandImage, original_ms: &MultiBandImage, ratio: usize) -> Result<MetricReport> {
    wald_consistency_with(fused, original_ms, ratio, 1.0 / ratio.max(1) as f64)
}

pub fn wald_consistency_with(
    fused: &MultiBandImage,
    original_ms: &MultiBandImage,
    ratio: usize,
    ratio_hl: f64,
) -> Result<MetricReport> {
    let (w, h) = original_ms.dims();
    if fused.dims() != (w * ratio, h * ratio) {
        return Err(Error::InvalidDimensions(format!(
            "fused {}x{} is not the MS {w}x{h} times ratio {ratio}",
            fused.width(),
            fused.height()
        )));
    }
    let down = downsample(fused, ratio, DownsampleFilter::BoxMean)?;
    spectral_report(original_ms, &down, ratio_hl)
}

/// Inputs of one benchmark run.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub ms: MultiBandImage,
    pub pan: Raster,
    pub truth: Option<MultiBandImage>,
}

fn load_any(path: &Path) -> Result<MultiBandImage> {
    let format = FileFormat::detect(path)?;
    crate::raster::load_image(path, format)
}

pub fn load_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    if let Some(s) = cfg.synthetic {
        let d = synth_dataset(s.seed, s.size, cfg.ratio, s.bands)?;
        return Ok(Dataset { ms: d.ms, pan: d.pan, truth: Some(d.truth) });
    }
    let (Some(ms_path), Some(pan_path)) = (&cfg.ms_path, &cfg.pan_path) else {
        return Err(Error::Config("dataset has no source".into()));
    };
    let ms = load_any(ms_path)?;
    let pan_img = load_any(pan_path)?;
    if pan_img.band_count() != 1 {
        return Err(Error::BandCount { found: pan_img.band_count(), reason: "PAN must have one band".into() });
    }
    let pan = pan_img.into_bands().remove(0);
    let (w, h) = ms.dims();
    if pan.dims() != (w * cfg.ratio, h * cfg.ratio) {
        return Err(Error::DimensionMismatch(format!(
            "PAN {}x{} is not MS {w}x{h} times ratio {}",
            pan.width(),
            pan.height(),
            cfg.ratio
        )));
    }
    Ok(Dataset { ms, pan, truth: None })
}

fn row_names(methods: &[FusionParams]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    methods
        .iter()
        .map(|p| {
            let id = p.method.id();
            let n = seen.entry(id).or_insert(0);
            *n += 1;
            if *n == 1 {
                id.to_string()
            } else {
                format!("{id}_{n}")
            }
        })
        .collect()
}

struct Outcome {
    row: MethodRow,
    fused: Option<MultiBandImage>,
    seconds: f64,
}

/// Runs every configured method on an already loaded dataset. Method
/// failures are recorded on their rows; nothing is written to disk.
pub fn run_on_dataset(cfg: &DatasetConfig, data: &Dataset) -> Result<(BenchmarkReport, Vec<Option<MultiBandImage>>)> {
    cfg.validate()?;
    let ratio_hl = cfg.ratio_hl();
    let methods: Vec<FusionParams> =
        cfg.methods.iter().map(|p| FusionParams { ratio: cfg.ratio, ..p.clone() }).collect();

    let mut upsampled: HashMap<Resample, MultiBandImage> = HashMap::new();
    for p in &methods {
        if let Entry::Vacant(e) = upsampled.entry(p.resample) {
            e.insert(upsample(&data.ms, cfg.ratio, p.resample)?);
        }
    }

    let names = row_names(&methods);
    let outcomes: Vec<Outcome> = methods
        .par_iter()
        .zip(names.par_iter())
        .map(|(p, name)| {
            let start = Instant::now();
            let ms_up = &upsampled[&p.resample];
            let mut row = MethodRow {
                name: name.clone(),
                method: p.method,
                metrics: None,
                consistency: None,
                synthesis: None,
                diagnostics: None,
                error: None,
            };
            let result = (|| -> Result<MultiBandImage> {
                let fused = fuse_upsampled(ms_up, &data.pan, p)?;
                row.diagnostics = Some(fused.diagnostics);
                row.metrics = Some(full_report(ms_up, &fused.fused, &data.pan, ratio_hl)?);
                row.consistency = Some(wald_consistency_with(&fused.fused, &data.ms, cfg.ratio, ratio_hl)?);
                if let Some(truth) = &data.truth {
                    row.synthesis = Some(full_report(truth, &fused.fused, &data.pan, ratio_hl)?);
                }
                Ok(fused.fused)
            })();
            let fused = match result {
                Ok(f) => Some(f),
                Err(e) => {
                    row.error = Some(e.to_string());
                    None
                }
            };
            Outcome { row, fused, seconds: start.elapsed().as_secs_f64() }
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut images = Vec::with_capacity(outcomes.len());
    let mut runtimes = BTreeMap::new();
    for o in outcomes {
        runtimes.insert(o.row.name.clone(), o.seconds);
        rows.push(o.row);
        images.push(o.fused);
    }
    let report = BenchmarkReport {
        dataset: cfg.name.clone(),
        ratio_h_over_l: ratio_hl,
        best_per_metric: report::best_per_metric(&rows),
        rows,
        runtimes,
    };
    Ok((report, images))
}

/// Loads the dataset, runs all methods, and writes fused images and reports
/// into `cfg.output_dir` (when set). Returns `Err` only for configuration or
/// I/O problems; per-method failures are inside the report.
pub fn run_benchmark(cfg: &DatasetConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let data = load_dataset(cfg)?;
    let (report, images) = run_on_dataset(cfg, &data)?;
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir)?;
        if cfg.save_images {
            for (row, img) in report.rows.iter().zip(&images) {
                let Some(img) = img else { continue };
                save_image(img, &dir.join(format!("{}.psrw", row.name)), FileFormat::RawF64, Clamp::None)?;
                if matches!(img.band_count(), 1 | 3) {
                    save_image(img, &dir.join(format!("{}.png", row.name)), FileFormat::Png8, Clamp::ClampToDepth)?;
                }
            }
        }
        for &format in &cfg.report_formats {
            emit_report(&report, format, &dir.join(format.file_name()))?;
        }
    }
    Ok(report)
}
