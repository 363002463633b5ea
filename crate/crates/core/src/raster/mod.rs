//! Image model: a [`Raster`] is one band, a [`MultiBandImage`] is an ordered
//! stack of co-registered rasters.
//!
//! Samples are `f64` everywhere. Integer bit depths exist only at the file
//! boundary (see [`io`]).

pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_image, save_image, Clamp, FileFormat};

/// One band: a row-major grid of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!("raster must be at least 1x1, got {width}x{height}")));
        }
        let expected =
            width.checked_mul(height).ok_or_else(|| Error::InvalidDimensions(format!("{width}x{height} overflows")))?;
        if samples.len() != expected {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height} raster needs {expected} samples, got {}",
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { width, height, samples })
    }

    /// Raster with every sample equal to `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a raster by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    /// Internal constructor for results of arithmetic on already-valid rasters.
    pub(crate) fn from_parts(width: usize, height: usize, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Self { width, height, samples }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Raster> {
        Raster::new(self.width, self.height, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Element-wise combination of two equally sized rasters.
    pub fn zip_map(&self, other: &Raster, f: impl Fn(f64, f64) -> f64) -> Result<Raster> {
        self.ensure_same_dims(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Raster::new(self.width, self.height, samples)
    }

    pub fn ensure_same_dims(&self, other: &Raster) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population variance (divisor `w·h`).
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.samples.len() as f64
    }

    pub fn stats(&self) -> BandStats {
        band_stats(self)
    }

    /// True when every sample equals the first one.
    pub fn is_constant(&self) -> bool {
        let first = self.samples[0];
        self.samples.iter().all(|&v| v == first)
    }
}

/// Summary statistics of one band. `std` is the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn band_stats(r: &Raster) -> BandStats {
    let (min, max) = r.samples().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    BandStats { mean: r.mean(), std: r.variance().sqrt(), min, max }
}

/// N co-registered bands of identical dimensions. Band order is meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiBandImage {
    bands: Vec<Raster>,
}

impl MultiBandImage {
    pub fn new(bands: Vec<Raster>) -> Result<Self> {
        let Some(first) = bands.first() else {
            return Err(Error::BandCount { found: 0, reason: "at least one band required".into() });
        };
        let dims = first.dims();
        if let Some((i, b)) = bands.iter().enumerate().find(|(_, b)| b.dims() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "band {i} is {}x{}, band 0 is {}x{}",
                b.width(),
                b.height(),
                dims.0,
                dims.1
            )));
        }
        Ok(Self { bands })
    }

    pub fn single(band: Raster) -> Self {
        Self { bands: vec![band] }
    }

    /// Builds an image from band-major samples (all of band 0, then band 1, ...).
    pub fn from_band_major(width: usize, height: usize, band_count: usize, samples: &[f64]) -> Result<Self> {
        let plane = width.saturating_mul(height);
        if band_count == 0 {
            return Err(Error::BandCount { found: 0, reason: "at least one band required".into() });
        }
        if plane.checked_mul(band_count) != Some(samples.len()) {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height}x{band_count} needs {} samples, got {}",
                plane.saturating_mul(band_count),
                samples.len()
            )));
        }
        let bands = samples
            .chunks(plane)
            .map(|chunk| Raster::new(width, height, chunk.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bands)
    }

    pub fn to_band_major(&self) -> Vec<f64> {
        self.bands.iter().flat_map(|b| b.samples().iter().copied()).collect()
    }

    pub fn width(&self) -> usize {
        self.bands[0].width()
    }

    pub fn height(&self) -> usize {
        self.bands[0].height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.bands[0].dims()
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn band(&self, i: usize) -> &Raster {
        &self.bands[i]
    }

    pub fn bands(&self) -> &[Raster] {
        &self.bands
    }

    pub fn into_bands(self) -> Vec<Raster> {
        self.bands
    }

    /// Applies a fallible per-band operation and restacks the results.
    pub fn map_bands(&self, f: impl Fn(&Raster) -> Result<Raster>) -> Result<MultiBandImage> {
        MultiBandImage::new(self.bands.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    /// Per-pixel unweighted mean over bands.
    pub fn band_mean(&self) -> Raster {
        let n = self.bands.len() as f64;
        let mut acc = vec![0.0; self.bands[0].len()];
        for b in &self.bands {
            for (a, v) in acc.iter_mut().zip(b.samples()) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= n);
        let (w, h) = self.dims();
        Raster::from_parts(w, h, acc)
    }

    pub fn ensure_same_shape(&self, other: &MultiBandImage) -> Result<()> {
        if self.band_count() != other.band_count() {
            return Err(Error::BandCount {
                found: other.band_count(),
                reason: format!("expected {} bands", self.band_count()),
            });
        }
        self.bands[0].ensure_same_dims(&other.bands[0])
    }
}

impl From<Raster> for MultiBandImage {
    fn from(r: Raster) -> Self {
        Self::single(r)
    }
}
