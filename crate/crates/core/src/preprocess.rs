//! Resampling and histogram matching.
//!
//! Resampling uses sample-center alignment: output pixel `i` of a factor-`k`
//! upsample sits at input coordinate `(i + 0.5) / k - 0.5`. Samples outside
//! the grid are taken from the nearest edge.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{MultiBandImage, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resample {
    Nearest,
    Bilinear,
    /// Catmull-Rom cubic convolution (a = -0.5).
    #[default]
    Bicubic,
}

impl FromStr for Resample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Resample::Nearest),
            "bilinear" => Ok(Resample::Bilinear),
            "bicubic" => Ok(Resample::Bicubic),
            other => Err(Error::InvalidParameter(format!("unknown resampling method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownsampleFilter {
    #[default]
    BoxMean,
    Decimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistMatchMode {
    /// Affine map onto the reference mean and standard deviation.
    #[default]
    MeanStd,
    /// Rank-order (quantile) mapping.
    Cdf,
}

impl FromStr for HistMatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_std" => Ok(HistMatchMode::MeanStd),
            "cdf" => Ok(HistMatchMode::Cdf),
            other => Err(Error::InvalidParameter(format!("unknown histogram match mode `{other}`"))),
        }
    }
}

const CATMULL_ROM_A: f64 = -0.5;

fn cubic_weight(x: f64) -> f64 {
    let a = CATMULL_ROM_A;
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Per-output-index taps `(input index, weight)` for one axis.
fn axis_taps(len: usize, factor: usize, method: Resample) -> Vec<Vec<(usize, f64)>> {
    let clamp = |i: isize| i.clamp(0, len as isize - 1) as usize;
    (0..len * factor)
        .map(|i| {
            if method == Resample::Nearest {
                return vec![(i / factor, 1.0)];
            }
            let u = (i as f64 + 0.5) / factor as f64 - 0.5;
            let base = u.floor();
            let t = u - base;
            let base = base as isize;
            match method {
                Resample::Bilinear => vec![(clamp(base), 1.0 - t), (clamp(base + 1), t)],
                _ => vec![
                    (clamp(base - 1), cubic_weight(t + 1.0)),
                    (clamp(base), cubic_weight(t)),
                    (clamp(base + 1), cubic_weight(1.0 - t)),
                    (clamp(base + 2), cubic_weight(2.0 - t)),
                ],
            }
        })
        .collect()
}

pub fn upsample_raster(r: &Raster, factor: usize, method: Resample) -> Result<Raster> {
    if factor == 0 {
        return Err(Error::InvalidParameter("upsample factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(r.clone());
    }
    let (w, h) = r.dims();
    let (ow, oh) = (w * factor, h * factor);
    let xtaps = axis_taps(w, factor, method);
    let ytaps = axis_taps(h, factor, method);

    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = r.row(y);
        for (x, taps) in xtaps.iter().enumerate() {
            horiz[y * ow + x] = taps.iter().map(|&(i, wt)| row[i] * wt).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for (y, taps) in ytaps.iter().enumerate() {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().map(|&(i, wt)| horiz[i * ow + x] * wt).sum();
        }
    }
    Raster::new(ow, oh, out)
}

pub fn upsample(img: &MultiBandImage, factor: usize, method: Resample) -> Result<MultiBandImage> {
    img.map_bands(|b| upsample_raster(b, factor, method))
}

pub fn downsample_raster(r: &Raster, factor: usize, filter: DownsampleFilter) -> Result<Raster> {
    if factor == 0 {
        return Err(Error::InvalidParameter("downsample factor must be >= 1".into()));
    }
    let (w, h) = r.dims();
    if w % factor != 0 || h % factor != 0 {
        return Err(Error::InvalidDimensions(format!("{w}x{h} is not divisible by downsample factor {factor}")));
    }
    let (ow, oh) = (w / factor, h / factor);
    let out = match filter {
        DownsampleFilter::Decimate => Raster::from_fn(ow, oh, |x, y| r.get(x * factor, y * factor))?,
        DownsampleFilter::BoxMean => {
            // accumulate offsets from each block's top-left sample so uniform blocks stay exact
            let mut sums = vec![0.0; ow * oh];
            for y in 0..h {
                let row = r.row(y);
                let anchor = r.row((y / factor) * factor);
                let dst = &mut sums[(y / factor) * ow..(y / factor + 1) * ow];
                for (x, v) in row.iter().enumerate() {
                    dst[x / factor] += v - anchor[(x / factor) * factor];
                }
            }
            let area = (factor * factor) as f64;
            Raster::from_fn(ow, oh, |x, y| r.get(x * factor, y * factor) + sums[y * ow + x] / area)?
        }
    };
    Ok(out)
}

pub fn downsample(img: &MultiBandImage, factor: usize, filter: DownsampleFilter) -> Result<MultiBandImage> {
    img.map_bands(|b| downsample_raster(b, factor, filter))
}

/// Maps the value distribution of `src` onto that of `reference`.
///
/// `MeanStd`: `(src - mean(src)) * std(ref) / std(src) + mean(ref)`. A constant
/// source can only be matched to a constant reference.
///
/// `Cdf`: each source sample at mid-rank `r` (ties share their average rank)
/// takes the reference quantile at `p = (r + 0.5) / n`, linearly
/// interpolated between sorted reference samples. `src` and `reference` may
/// differ in size.
pub fn histogram_match(src: &Raster, reference: &Raster, mode: HistMatchMode) -> Result<Raster> {
    match mode {
        HistMatchMode::MeanStd => match_mean_std(src, reference),
        HistMatchMode::Cdf => match_cdf(src, reference),
    }
}

fn match_mean_std(src: &Raster, reference: &Raster) -> Result<Raster> {
    let (sm, ss) = (src.mean(), src.variance().sqrt());
    let (rm, rs) = (reference.mean(), reference.variance().sqrt());
    if ss == 0.0 {
        if rs != 0.0 {
            return Err(Error::Degenerate("cannot match a constant source to a non-constant reference".into()));
        }
        return Raster::filled(src.width(), src.height(), rm);
    }
    let gain = rs / ss;
    src.map(|v| (v - sm) * gain + rm)
}

fn match_cdf(src: &Raster, reference: &Raster) -> Result<Raster> {
    let mut sorted_ref = reference.samples().to_vec();
    sorted_ref.sort_by(f64::total_cmp);
    let m = sorted_ref.len();
    let quantile = |p: f64| {
        let pos = (p * m as f64 - 0.5).clamp(0.0, (m - 1) as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(m - 1);
        let t = pos - lo as f64;
        sorted_ref[lo] + (sorted_ref[hi] - sorted_ref[lo]) * t
    };

    let n = src.len();
    let s = src.samples();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && s[order[end]] == s[order[start]] {
            end += 1;
        }
        let mid_rank = (start + end - 1) as f64 / 2.0;
        let value = quantile((mid_rank + 0.5) / n as f64);
        for &i in &order[start..end] {
            out[i] = value;
        }
        start = end;
    }
    Raster::new(src.width(), src.height(), out)
}
