//! Seeded synthetic scenes with a known high-resolution ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::preprocess::{downsample, DownsampleFilter};
use crate::raster::{MultiBandImage, Raster};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    /// Ground truth at PAN resolution.
    pub truth: MultiBandImage,
    /// Box-mean downsample of the truth.
    pub ms: MultiBandImage,
    pub pan: Raster,
    /// Band weights used to build the PAN (sum to 1).
    pub pan_weights: Vec<f64>,
}

struct Blob {
    cx: f64,
    cy: f64,
    sigma: f64,
    amplitude: f64,
}

fn random_blobs(rng: &mut ChaCha8Rng, count: usize, size: f64, amp: (f64, f64)) -> Vec<Blob> {
    let (lo, hi) = (1.5f64.ln(), (size / 6.0).max(2.0).ln());
    (0..count)
        .map(|_| Blob {
            cx: rng.gen_range(0.0..size),
            cy: rng.gen_range(0.0..size),
            sigma: rng.gen_range(lo..hi).exp(),
            amplitude: rng.gen_range(amp.0..amp.1),
        })
        .collect()
}

fn render(blobs: &[Blob], size: usize) -> Vec<f64> {
    let mut field = vec![0.0; size * size];
    for b in blobs {
        let reach = 4.0 * b.sigma;
        let x0 = (b.cx - reach).floor().max(0.0) as usize;
        let x1 = ((b.cx + reach).ceil() as usize).min(size - 1);
        let y0 = (b.cy - reach).floor().max(0.0) as usize;
        let y1 = ((b.cy + reach).ceil() as usize).min(size - 1);
        let inv = 1.0 / (2.0 * b.sigma * b.sigma);
        for y in y0..=y1 {
            let dy = y as f64 + 0.5 - b.cy;
            for x in x0..=x1 {
                let dx = x as f64 + 0.5 - b.cx;
                field[y * size + x] += b.amplitude * (-(dx * dx + dy * dy) * inv).exp();
            }
        }
    }
    field
}

/// Builds a scene of `band_count` correlated, positive bands.
///
/// Each band is a shared blob field (common scene geometry) scaled by a band
/// gain, plus band-specific blobs, a linear gradient and an offset. The MS
/// image is the box-mean downsample of the truth; the PAN is a seeded convex
/// combination of the truth bands.
pub fn synth_dataset(seed: u64, truth_size: usize, ratio: usize, band_count: usize) -> Result<SynthDataset> {
    if ratio == 0 || truth_size == 0 || !truth_size.is_multiple_of(ratio) {
        return Err(Error::InvalidDimensions(format!(
            "truth size {truth_size} must be a positive multiple of ratio {ratio}"
        )));
    }
    if band_count == 0 {
        return Err(Error::BandCount { found: 0, reason: "at least one band required".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = truth_size as f64;
    let shared = render(&random_blobs(&mut rng, 60, size, (10.0, 50.0)), truth_size);

    let bands = (0..band_count)
        .map(|_| {
            let gain = rng.gen_range(0.6..1.4);
            let offset = rng.gen_range(20.0..40.0);
            let (gx, gy) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let own = render(&random_blobs(&mut rng, 20, size, (5.0, 25.0)), truth_size);
            Raster::from_fn(truth_size, truth_size, |x, y| {
                let i = y * truth_size + x;
                let ramp = gx * (x as f64 / size) + gy * (y as f64 / size);
                offset + 20.0 + ramp + gain * shared[i] + own[i]
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = MultiBandImage::new(bands)?;

    let raw: Vec<f64> = (0..band_count).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let pan_weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let pan = crate::fusion::intensity(&truth, &pan_weights)?;
    let ms = downsample(&truth, ratio, DownsampleFilter::BoxMean)?;
    Ok(SynthDataset { truth, ms, pan, pan_weights })
}
