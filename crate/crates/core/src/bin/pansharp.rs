use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pansharp::bench::{report, run_benchmark, synth_dataset, DatasetConfig};
use pansharp::fusion::{fuse, DwtRule, FusionMethod, FusionParams, PanMatch};
use pansharp::metrics::{full_report, MetricReport, DEFAULT_RATIO_HL};
use pansharp::preprocess::{upsample, Resample};
use pansharp::raster::{load_image, save_image, Clamp, FileFormat, MultiBandImage, Raster};
use pansharp::{Error, Result};

#[derive(Parser)]
#[command(name = "pansharp", version, about = "Pansharpening fusion and quality benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method on a dataset and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fuse one MS/PAN pair.
    Fuse {
        #[arg(long)]
        method: FusionMethod,
        #[arg(long)]
        ms: PathBuf,
        #[arg(long)]
        pan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        ratio: usize,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value = "additive")]
        rule: DwtRule,
        #[arg(long, default_value = "bicubic")]
        resample: Resample,
        #[arg(long, default_value = "mean_std")]
        histmatch: PanMatch,
        /// Output format; guessed from the extension when omitted.
        #[arg(long)]
        format: Option<FileFormat>,
        /// Clamp to the integer range instead of failing on out-of-range values.
        #[arg(long)]
        clamp: bool,
    },
    /// Score a fused image against a reference.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        fused: PathBuf,
        #[arg(long)]
        pan: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RATIO_HL)]
        ratio_hl: f64,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded synthetic truth/MS/PAN triple.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 4)]
        ratio: usize,
        #[arg(long, default_value_t = 3)]
        bands: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn read(path: &Path) -> Result<MultiBandImage> {
    load_image(path, FileFormat::detect(path)?)
}

fn read_pan(path: &Path) -> Result<Raster> {
    let img = read(path)?;
    if img.band_count() != 1 {
        return Err(Error::BandCount { found: img.band_count(), reason: "PAN must have one band".into() });
    }
    Ok(img.into_bands().remove(0))
}

fn write_with_preview(img: &MultiBandImage, dir: &Path, stem: &str) -> Result<()> {
    save_image(img, &dir.join(format!("{stem}.psrw")), FileFormat::RawF64, Clamp::None)?;
    if matches!(img.band_count(), 1 | 3) {
        save_image(img, &dir.join(format!("{stem}.png")), FileFormat::Png8, Clamp::ClampToDepth)?;
    }
    Ok(())
}

fn print_metrics(rep: &MetricReport) {
    let a = rep.aggregate;
    println!("CC      {:.4}", a.cc);
    println!("ERGAS   {:.4}", a.ergas);
    println!("Quality {:.4}", a.quality);
    println!("RASE    {:.4}", a.rase);
    println!("RMSE    {:.4}", a.rmse);
    if let Some(s) = a.scc {
        println!("SCC     {s:.4}");
    }
    for (i, b) in rep.per_band.iter().enumerate() {
        println!("band {i}: cc {:.4} rmse {:.4} q {:.4}", b.cc, b.rmse, b.uqi);
    }
}

fn execute(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { config } => {
            let cfg = DatasetConfig::load(&config)?;
            let rep = run_benchmark(&cfg)?;
            print!("{}", report::to_text_table(&rep));
            Ok(if rep.rows.iter().any(|r| r.error.is_some()) { 1 } else { 0 })
        }
        Command::Fuse { method, ms, pan, out, ratio, levels, rule, resample, histmatch, format, clamp } => {
            let params = FusionParams {
                levels,
                dwt_rule: rule,
                resample,
                histmatch,
                ..FusionParams::new(method).with_ratio(ratio)
            };
            let result = fuse(&read(&ms)?, &read_pan(&pan)?, &params)?;
            let format = match format.or_else(|| FileFormat::from_extension(&out)) {
                Some(f) => f,
                None => return Err(Error::UnsupportedFormat(format!("cannot infer format of {}", out.display()))),
            };
            let clamp = if clamp { Clamp::ClampToDepth } else { Clamp::None };
            save_image(&result.fused, &out, format, clamp)?;
            Ok(0)
        }
        Command::Metrics { reference, fused, pan, ratio_hl, json } => {
            let fused = read(&fused)?;
            let pan = read_pan(&pan)?;
            let mut reference = read(&reference)?;
            let (fw, fh) = fused.dims();
            let (rw, rh) = reference.dims();
            if (rw, rh) != (fw, fh) && rw > 0 && fw % rw == 0 && fh == rh * (fw / rw) {
                reference = upsample(&reference, fw / rw, Resample::default())?;
            }
            let rep = full_report(&reference, &fused, &pan, ratio_hl)?;
            if json {
                let text = serde_json::to_string_pretty(&rep).map_err(|e| Error::Config(e.to_string()))?;
                println!("{text}");
            } else {
                print_metrics(&rep);
            }
            Ok(0)
        }
        Command::Synth { seed, size, ratio, bands, out_dir } => {
            let d = synth_dataset(seed, size, ratio, bands)?;
            fs::create_dir_all(&out_dir)?;
            write_with_preview(&d.truth, &out_dir, "truth")?;
            write_with_preview(&d.ms, &out_dir, "ms")?;
            write_with_preview(&MultiBandImage::single(d.pan), &out_dir, "pan")?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io_or_config() { 2 } else { 1 })
        }
    }
}
