//! Benchmark configuration, read from TOML.
//!
//! ```toml
//! name = "quickbird-subset"
//! ratio = 4
//! output_dir = "out"
//! report_formats = ["csv", "json", "text-table"]
//!
//! ms_path = "ms.tif"
//! pan_path = "pan.tif"
//! # or, instead of the two paths:
//! # [synthetic]
//! # seed = 7
//! # size = 256
//! # bands = 3
//!
//! [[methods]]
//! method = "dwt_atrous"
//! levels = 2
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{FusionMethod, FusionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
    TextTable,
}

impl ReportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "report.csv",
            ReportFormat::Json => "report.json",
            ReportFormat::TextTable => "report.txt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub seed: u64,
    /// Side length of the PAN / ground truth.
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_bands")]
    pub bands: usize,
}

fn default_size() -> usize {
    256
}

fn default_bands() -> usize {
    3
}

fn default_ratio() -> usize {
    4
}

fn default_methods() -> Vec<FusionParams> {
    FusionMethod::ALL.into_iter().map(FusionParams::new).collect()
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::TextTable]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ms_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pan_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSource>,
    /// PAN size / MS size. Overrides the ratio of every method.
    #[serde(default = "default_ratio")]
    pub ratio: usize,
    /// ERGAS pixel-size ratio; defaults to `1 / ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_hl: Option<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<FusionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub report_formats: Vec<ReportFormat>,
    /// Write each fused image (raw f64, plus an 8-bit PNG preview).
    #[serde(default = "default_true")]
    pub save_images: bool,
}

impl DatasetConfig {
    /// Default benchmark over a synthetic scene: ratio 4, every method.
    pub fn synthetic(name: impl Into<String>, seed: u64, size: usize, bands: usize) -> Self {
        Self {
            name: name.into(),
            ms_path: None,
            pan_path: None,
            synthetic: Some(SyntheticSource { seed, size, bands }),
            ratio: default_ratio(),
            ratio_hl: None,
            methods: default_methods(),
            output_dir: None,
            report_formats: default_formats(),
            save_images: true,
        }
    }

    pub fn ratio_hl(&self) -> f64 {
        self.ratio_hl.unwrap_or(1.0 / self.ratio as f64)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: DatasetConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.ms_path, &mut cfg.pan_path, &mut cfg.output_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratio == 0 {
            return Err(Error::Config("ratio must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if let Some(r) = self.ratio_hl {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config("ratio_hl must be positive".into()));
            }
        }
        match (&self.synthetic, &self.ms_path, &self.pan_path) {
            (Some(s), None, None) => {
                if s.size == 0 || s.size % self.ratio != 0 {
                    return Err(Error::Config(format!(
                        "synthetic size {} must be a positive multiple of ratio {}",
                        s.size, self.ratio
                    )));
                }
            }
            (None, Some(ms), Some(pan)) => {
                if ms == pan {
                    return Err(Error::Config("ms_path and pan_path must differ".into()));
                }
            }
            _ => return Err(Error::Config("give either both ms_path and pan_path, or a [synthetic] table".into())),
        }
        if let (Some(out), Some(ms), Some(pan)) = (&self.output_dir, &self.ms_path, &self.pan_path) {
            if out == ms || out == pan {
                return Err(Error::Config("output_dir must differ from the input paths".into()));
            }
        }
        let formats: BTreeSet<_> = self.report_formats.iter().collect();
        if formats.len() != self.report_formats.len() {
            return Err(Error::Config("report_formats lists a format twice".into()));
        }
        Ok(())
    }
}
