//! Pansharpening methods behind one entry point, [`fuse`].
//!
//! Every method first upsamples the MS image to the PAN grid, then injects
//! PAN detail:
//!
//! | method         | rule                                                        |
//! |----------------|-------------------------------------------------------------|
//! | `brovey`       | `out_i = M_i / Σ_j M_j · PAN`                               |
//! | `ihs`          | `out_i = M_i + (P' - I)`, `I = Σ α_i M_i`                   |
//! | `adaptive_ihs` | as `ihs`, α from non-negative least squares `I ≈ PAN`       |
//! | `pca`          | replace PC1 by `P'`, invert                                 |
//! | `hpf`          | `out_i = M_i + hpf ⊛ PAN`                                   |
//! | `dwt_atrous`   | à trous detail planes of `P'` added to / substituted in `M_i` |
//! | `dwt_mallat`   | same with the decimated Haar transform                      |
//!
//! `P'` is the PAN histogram-matched to the component it replaces. Outputs
//! are not clamped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multires::{
    convolve2d, decompose, pca_forward, pca_inverse, reconstruct, Boundary, Kernel2D, WaveletScheme, WaveletStack,
};
use crate::nnls::nnls;
use crate::preprocess::{histogram_match, upsample, HistMatchMode, Resample};
use crate::raster::{MultiBandImage, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMethod {
    Brovey,
    Ihs,
    AdaptiveIhs,
    Pca,
    Hpf,
    DwtAtrous,
    DwtMallat,
    /// Baseline: the upsampled MS image, no detail injection.
    Identity,
}

impl FusionMethod {
    /// The methods a default benchmark runs.
    pub const ALL: [FusionMethod; 7] = [
        FusionMethod::Brovey,
        FusionMethod::Ihs,
        FusionMethod::AdaptiveIhs,
        FusionMethod::Pca,
        FusionMethod::Hpf,
        FusionMethod::DwtAtrous,
        FusionMethod::DwtMallat,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FusionMethod::Brovey => "brovey",
            FusionMethod::Ihs => "ihs",
            FusionMethod::AdaptiveIhs => "adaptive_ihs",
            FusionMethod::Pca => "pca",
            FusionMethod::Hpf => "hpf",
            FusionMethod::DwtAtrous => "dwt_atrous",
            FusionMethod::DwtMallat => "dwt_mallat",
            FusionMethod::Identity => "identity",
        }
    }

    /// Column label used in text tables.
    pub fn label(self) -> &'static str {
        match self {
            FusionMethod::Brovey => "Brovey",
            FusionMethod::Ihs => "IHS",
            FusionMethod::AdaptiveIhs => "Adaptive-IHS",
            FusionMethod::Pca => "PCA",
            FusionMethod::Hpf => "HPF",
            FusionMethod::DwtAtrous => "DWT",
            FusionMethod::DwtMallat => "DWT-Mallat",
            FusionMethod::Identity => "Identity",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FusionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FusionMethod::ALL
            .into_iter()
            .chain([FusionMethod::Identity])
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown fusion method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DwtRule {
    /// Add PAN detail coefficients to the MS image.
    #[default]
    Additive,
    /// Replace MS detail coefficients with PAN ones.
    Substitutive,
}

impl FromStr for DwtRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(DwtRule::Additive),
            "substitutive" => Ok(DwtRule::Substitutive),
            other => Err(Error::InvalidParameter(format!("unknown DWT rule `{other}`"))),
        }
    }
}

/// How the PAN is radiometrically matched before substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanMatch {
    /// Use the PAN as-is.
    None,
    #[default]
    MeanStd,
    Cdf,
}

impl FromStr for PanMatch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PanMatch::None),
            other => HistMatchMode::from_str(other).map(|m| match m {
                HistMatchMode::MeanStd => PanMatch::MeanStd,
                HistMatchMode::Cdf => PanMatch::Cdf,
            }),
        }
    }
}

fn default_ratio() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionParams {
    pub method: FusionMethod,
    /// PAN size / MS size.
    #[serde(default = "default_ratio")]
    pub ratio: usize,
    #[serde(default)]
    pub resample: Resample,
    #[serde(default)]
    pub histmatch: PanMatch,
    #[serde(default = "Kernel2D::default_high_pass")]
    pub hpf_kernel: Kernel2D,
    /// Decomposition depth; `None` means `log2(ratio)` (at least 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default)]
    pub dwt_rule: DwtRule,
    /// Intensity weights for `ihs`; `None` means `1/N` each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

impl FusionParams {
    pub fn new(method: FusionMethod) -> Self {
        Self {
            method,
            ratio: default_ratio(),
            resample: Resample::default(),
            histmatch: PanMatch::default(),
            hpf_kernel: Kernel2D::default_high_pass(),
            levels: None,
            dwt_rule: DwtRule::default(),
            alpha: None,
        }
    }

    pub fn with_ratio(mut self, ratio: usize) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn effective_levels(&self) -> usize {
        self.levels.unwrap_or_else(|| {
            let r = self.ratio.max(1) as f64;
            (r.log2().round() as usize).max(1)
        })
    }

    pub fn validate(&self, band_count: usize) -> Result<()> {
        if self.ratio == 0 {
            return Err(Error::InvalidParameter("ratio must be >= 1".into()));
        }
        if self.levels == Some(0) {
            return Err(Error::InvalidParameter("levels must be >= 1".into()));
        }
        if let Some(alpha) = &self.alpha {
            if alpha.len() != band_count {
                return Err(Error::InvalidParameter(format!(
                    "alpha has {} weights for {band_count} bands",
                    alpha.len()
                )));
            }
            if alpha.iter().any(|a| !a.is_finite()) || alpha.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidParameter("alpha weights must be finite with a positive sum".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solved_alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca_eigenvalues: Option<Vec<f64>>,
    /// Mean squared difference between the fused and the upsampled MS image.
    pub injected_detail_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    pub fused: MultiBandImage,
    pub method: FusionMethod,
    pub diagnostics: Diagnostics,
}

fn check_inputs(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<()> {
    p.validate(ms.band_count())?;
    let (w, h) = ms.dims();
    if pan.dims() != (w * p.ratio, h * p.ratio) {
        return Err(Error::DimensionMismatch(format!(
            "PAN is {}x{}, expected {}x{} (MS {w}x{h} times ratio {})",
            pan.width(),
            pan.height(),
            w * p.ratio,
            h * p.ratio,
            p.ratio
        )));
    }
    Ok(())
}

/// Upsamples the MS image to the PAN grid with the configured resampler.
pub fn upsample_ms(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<MultiBandImage> {
    check_inputs(ms, pan, p)?;
    upsample(ms, p.ratio, p.resample)
}

/// Fuses a low-resolution MS image with a PAN band.
pub fn fuse(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    let up = upsample_ms(ms, pan, p)?;
    fuse_upsampled(&up, pan, p)
}

/// Same as [`fuse`] for an MS image already on the PAN grid.
pub fn fuse_upsampled(ms_up: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    p.validate(ms_up.band_count())?;
    if ms_up.dims() != pan.dims() {
        return Err(Error::DimensionMismatch(format!(
            "upsampled MS is {}x{}, PAN is {}x{}",
            ms_up.width(),
            ms_up.height(),
            pan.width(),
            pan.height()
        )));
    }
    let mut diagnostics = Diagnostics::default();
    let fused = match p.method {
        FusionMethod::Brovey => brovey(ms_up, pan)?,
        FusionMethod::Ihs => {
            let n = ms_up.band_count();
            if n < 2 {
                return Err(Error::BandCount { found: n, reason: "IHS needs at least 2 bands".into() });
            }
            let alpha = p.alpha.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
            intensity_substitution(ms_up, pan, &alpha, p.histmatch)?
        }
        FusionMethod::AdaptiveIhs => {
            let alpha = solve_adaptive_alpha(ms_up, pan)?;
            let fused = intensity_substitution(ms_up, pan, &alpha, p.histmatch)?;
            diagnostics.solved_alpha = Some(alpha);
            fused
        }
        FusionMethod::Pca => {
            let (fused, eigenvalues) = pca_substitution(ms_up, pan, p.histmatch)?;
            diagnostics.pca_eigenvalues = Some(eigenvalues);
            fused
        }
        FusionMethod::Hpf => high_pass_injection(ms_up, pan, &p.hpf_kernel)?,
        FusionMethod::DwtAtrous => wavelet_fusion(ms_up, pan, p, WaveletScheme::Atrous)?,
        FusionMethod::DwtMallat => wavelet_fusion(ms_up, pan, p, WaveletScheme::MallatHaar)?,
        FusionMethod::Identity => ms_up.clone(),
    };
    diagnostics.injected_detail_energy = mean_sq_diff(&fused, ms_up);
    Ok(FusionResult { fused, method: p.method, diagnostics })
}

fn with_method(p: &FusionParams, method: FusionMethod) -> FusionParams {
    FusionParams { method, ..p.clone() }
}

pub fn fuse_brovey(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    fuse(ms, pan, &with_method(p, FusionMethod::Brovey))
}

pub fn fuse_ihs(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    fuse(ms, pan, &with_method(p, FusionMethod::Ihs))
}

pub fn fuse_adaptive_ihs(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    fuse(ms, pan, &with_method(p, FusionMethod::AdaptiveIhs))
}

pub fn fuse_pca(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    fuse(ms, pan, &with_method(p, FusionMethod::Pca))
}

pub fn fuse_hpf(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    fuse(ms, pan, &with_method(p, FusionMethod::Hpf))
}

/// Wavelet fusion; `p.method` selects the scheme and must be a DWT method.
pub fn fuse_dwt(ms: &MultiBandImage, pan: &Raster, p: &FusionParams) -> Result<FusionResult> {
    match p.method {
        FusionMethod::DwtAtrous | FusionMethod::DwtMallat => fuse(ms, pan, p),
        other => Err(Error::InvalidParameter(format!("{other} is not a wavelet method"))),
    }
}

fn mean_sq_diff(a: &MultiBandImage, b: &MultiBandImage) -> f64 {
    let (x, y) = (a.to_band_major(), b.to_band_major());
    x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / x.len() as f64
}

/// Matches the PAN to `reference`. A constant PAN carries no detail and is
/// mapped to a flat raster at the reference mean.
fn match_pan(pan: &Raster, reference: &Raster, mode: PanMatch) -> Result<Raster> {
    match mode {
        PanMatch::None => Ok(pan.clone()),
        PanMatch::MeanStd if pan.is_constant() => Raster::filled(pan.width(), pan.height(), reference.mean()),
        PanMatch::MeanStd => histogram_match(pan, reference, HistMatchMode::MeanStd),
        PanMatch::Cdf => histogram_match(pan, reference, HistMatchMode::Cdf),
    }
}

fn brovey(ms: &MultiBandImage, pan: &Raster) -> Result<MultiBandImage> {
    if ms.band_count() != 3 {
        return Err(Error::BandCount { found: ms.band_count(), reason: "Brovey needs exactly 3 bands".into() });
    }
    let pixels = pan.len();
    let mut out = vec![vec![0.0; pixels]; 3];
    for p in 0..pixels {
        let v = [0, 1, 2].map(|b| ms.band(b).samples()[p]);
        let sum = v[0] + v[1] + v[2];
        if sum != 0.0 {
            for b in 0..3 {
                out[b][p] = v[b] / sum * pan.samples()[p];
            }
        }
    }
    let (w, h) = pan.dims();
    MultiBandImage::new(out.into_iter().map(|v| Raster::new(w, h, v)).collect::<Result<_>>()?)
}

/// `I = Σ α_i M_i`.
pub fn intensity(ms: &MultiBandImage, alpha: &[f64]) -> Result<Raster> {
    if alpha.len() != ms.band_count() {
        return Err(Error::InvalidParameter(format!("{} weights for {} bands", alpha.len(), ms.band_count())));
    }
    let mut acc = vec![0.0; ms.band(0).len()];
    for (band, a) in ms.bands().iter().zip(alpha) {
        for (s, v) in acc.iter_mut().zip(band.samples()) {
            *s += a * v;
        }
    }
    Raster::new(ms.width(), ms.height(), acc)
}

fn intensity_substitution(ms: &MultiBandImage, pan: &Raster, alpha: &[f64], mode: PanMatch) -> Result<MultiBandImage> {
    let i = intensity(ms, alpha)?;
    let matched = match_pan(pan, &i, mode)?;
    let detail = matched.zip_map(&i, |p, q| p - q)?;
    ms.map_bands(|b| b.zip_map(&detail, |m, d| m + d))
}

/// Non-negative weights minimising `‖Σ α_i M_i - PAN‖²` over an MS image
/// already on the PAN grid.
pub fn solve_adaptive_alpha(ms_up: &MultiBandImage, pan: &Raster) -> Result<Vec<f64>> {
    if ms_up.dims() != pan.dims() {
        return Err(Error::DimensionMismatch("MS must be upsampled to the PAN grid".into()));
    }
    let cols: Vec<&[f64]> = ms_up.bands().iter().map(Raster::samples).collect();
    Ok(nnls(&cols, pan.samples())?.x)
}

fn pca_substitution(ms: &MultiBandImage, pan: &Raster, mode: PanMatch) -> Result<(MultiBandImage, Vec<f64>)> {
    let (components, model) = pca_forward(ms)?;
    let mut bands = components.into_bands();
    bands[0] = match_pan(pan, &bands[0], mode)?;
    let fused = pca_inverse(&MultiBandImage::new(bands)?, &model)?;
    Ok((fused, model.eigenvalues))
}

fn high_pass_injection(ms: &MultiBandImage, pan: &Raster, kernel: &Kernel2D) -> Result<MultiBandImage> {
    if !kernel.is_zero_sum() {
        return Err(Error::InvalidParameter(format!("high-pass kernel must sum to zero, sums to {}", kernel.sum())));
    }
    let detail = convolve2d(pan, kernel, Boundary::Replicate);
    ms.map_bands(|b| b.zip_map(&detail, |m, d| m + d))
}

fn wavelet_fusion(
    ms: &MultiBandImage,
    pan: &Raster,
    p: &FusionParams,
    scheme: WaveletScheme,
) -> Result<MultiBandImage> {
    let levels = p.effective_levels();
    ms.map_bands(|band| {
        let matched = match_pan(pan, band, p.histmatch)?;
        let (pan_details, pan_residual) = decompose(&matched, levels, scheme)?.into_parts();
        match p.dwt_rule {
            DwtRule::Additive => {
                let zero = Raster::filled(pan_residual.width(), pan_residual.height(), 0.0)?;
                let detail = reconstruct(&WaveletStack::new(pan_details, zero, scheme)?)?;
                band.zip_map(&detail, |m, d| m + d)
            }
            DwtRule::Substitutive => {
                let (_, ms_residual) = decompose(band, levels, scheme)?.into_parts();
                reconstruct(&WaveletStack::new(pan_details, ms_residual, scheme)?)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multires::B3_SPLINE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(w: usize, h: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Raster {
        Raster::from_fn(w, h, |_, _| rng.gen_range(lo..hi)).unwrap()
    }

    fn random_ms(w: usize, h: usize, n: usize, seed: u64) -> MultiBandImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MultiBandImage::new((0..n).map(|_| random(w, h, 10.0, 100.0, &mut rng)).collect()).unwrap()
    }

    fn constant_pixel_ms(values: &[f64], w: usize, h: usize) -> MultiBandImage {
        MultiBandImage::new(values.iter().map(|&v| Raster::filled(w, h, v).unwrap()).collect()).unwrap()
    }

    fn max_diff(a: &Raster, b: &Raster) -> f64 {
        a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn ratio1(method: FusionMethod) -> FusionParams {
        FusionParams::new(method).with_ratio(1)
    }

    #[test]
    fn brovey_pixels() {
        let pan = Raster::filled(2, 2, 3.0).unwrap();
        let r = fuse(&constant_pixel_ms(&[1.0, 1.0, 1.0], 2, 2), &pan, &ratio1(FusionMethod::Brovey)).unwrap();
        assert!(r.fused.bands().iter().all(|b| b.samples().iter().all(|&v| v == 1.0)));

        let pan = Raster::filled(2, 2, 7.0).unwrap();
        let r = fuse(&constant_pixel_ms(&[5.0, 5.0, 5.0], 2, 2), &pan, &ratio1(FusionMethod::Brovey)).unwrap();
        assert!(r.fused.bands().iter().all(|b| b.samples().iter().all(|&v| (v - 7.0 / 3.0).abs() < 1e-15)));

        let pan = Raster::filled(1, 1, 12.0).unwrap();
        let r = fuse(&constant_pixel_ms(&[1.0, 2.0, 3.0], 1, 1), &pan, &ratio1(FusionMethod::Brovey)).unwrap();
        let px: Vec<f64> = r.fused.bands().iter().map(|b| b.samples()[0]).collect();
        assert_eq!(px, vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn brovey_zero_sum_and_band_count() {
        let pan = Raster::filled(1, 1, 12.0).unwrap();
        let r = fuse(&constant_pixel_ms(&[1.0, -2.0, 1.0], 1, 1), &pan, &ratio1(FusionMethod::Brovey)).unwrap();
        assert!(r.fused.to_band_major().iter().all(|&v| v == 0.0));
        let err = fuse(&constant_pixel_ms(&[1.0, 2.0], 1, 1), &pan, &ratio1(FusionMethod::Brovey)).unwrap_err();
        assert!(matches!(err, Error::BandCount { found: 2, .. }));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ms = random_ms(4, 4, 3, 1);
        let pan = Raster::filled(15, 16, 1.0).unwrap();
        for m in FusionMethod::ALL {
            assert!(matches!(fuse(&ms, &pan, &FusionParams::new(m)), Err(Error::DimensionMismatch(_))));
        }
    }

    #[test]
    fn ihs_hand_example() {
        // I = 6, matched pan 8 (no matching), out = M + 2
        let ms = constant_pixel_ms(&[3.0, 6.0, 9.0], 1, 1);
        let pan = Raster::filled(1, 1, 8.0).unwrap();
        let p = FusionParams { histmatch: PanMatch::None, ..ratio1(FusionMethod::Ihs) };
        let r = fuse(&ms, &pan, &p).unwrap();
        let px: Vec<f64> = r.fused.bands().iter().map(|b| b.samples()[0]).collect();
        assert_eq!(px, vec![5.0, 8.0, 11.0]);
    }

    #[test]
    fn ihs_constant_bands_closed_form() {
        let ms = constant_pixel_ms(&[10.0, 20.0, 60.0], 4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pan = random(4, 4, 0.0, 50.0, &mut rng);
        let i_bar = 30.0;
        for mode in [PanMatch::MeanStd, PanMatch::Cdf, PanMatch::None] {
            let p = FusionParams { histmatch: mode, ..ratio1(FusionMethod::Ihs) };
            let r = fuse(&ms, &pan, &p).unwrap();
            let i = Raster::filled(4, 4, i_bar).unwrap();
            let matched = match_pan(&pan, &i, mode).unwrap();
            for (b, c) in r.fused.bands().iter().zip([10.0, 20.0, 60.0]) {
                let want = matched.map(|v| c + (v - i_bar)).unwrap();
                assert!(max_diff(b, &want) < 1e-12);
            }
        }
    }

    #[test]
    fn ihs_pan_equal_intensity_is_fixed_point() {
        let ms = random_ms(8, 8, 4, 2);
        let pan = intensity(&ms, &[0.25; 4]).unwrap();
        let r = fuse(&ms, &pan, &ratio1(FusionMethod::Ihs)).unwrap();
        for (a, b) in r.fused.bands().iter().zip(ms.bands()) {
            assert!(max_diff(a, b) < 1e-12);
        }
    }

    #[test]
    fn ihs_alpha_validation() {
        let ms = random_ms(2, 2, 3, 3);
        let pan = Raster::filled(2, 2, 1.0).unwrap();
        let bad = FusionParams { alpha: Some(vec![1.0, 1.0]), ..ratio1(FusionMethod::Ihs) };
        assert!(fuse(&ms, &pan, &bad).is_err());
        let bad = FusionParams { alpha: Some(vec![0.0, 0.0, 0.0]), ..ratio1(FusionMethod::Ihs) };
        assert!(fuse(&ms, &pan, &bad).is_err());
    }

    #[test]
    fn adaptive_alpha_cases() {
        let ms = random_ms(16, 32, 3, 4);
        let pan = intensity(&ms, &[0.2, 0.3, 0.5]).unwrap();
        let alpha = solve_adaptive_alpha(&ms, &pan).unwrap();
        for (a, want) in alpha.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - want).abs() < 1e-6);
        }

        // orthogonal bands, pan equal to band 1
        let b1 = Raster::new(4, 1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b2 = Raster::new(4, 1, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let b3 = Raster::new(4, 1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let ms = MultiBandImage::new(vec![b1.clone(), b2, b3]).unwrap();
        let alpha = solve_adaptive_alpha(&ms, &b1).unwrap();
        assert!((alpha[0] - 1.0).abs() < 1e-12 && alpha[1].abs() < 1e-12 && alpha[2].abs() < 1e-12);

        // pan orthogonal to every band: the zero vector satisfies KKT
        let pan = Raster::new(4, 1, vec![0.0, 0.0, 1.0, -1.0]).unwrap();
        assert_eq!(solve_adaptive_alpha(&ms, &pan).unwrap(), vec![0.0; 3]);

        let collinear = MultiBandImage::new(vec![b1.clone(), b1.map(|v| 2.0 * v).unwrap()]).unwrap();
        assert!(matches!(solve_adaptive_alpha(&collinear, &b1), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn adaptive_ihs_injects_known_detail() {
        // h orthogonal to every band; without matching, out_i - M_i == h
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ms = random_ms(16, 16, 3, 5);
        let raw = random(16, 16, -1.0, 1.0, &mut rng);
        let cols: Vec<&[f64]> = ms.bands().iter().map(Raster::samples).collect();
        // project the band span out of the noise (Gram-Schmidt)
        let mut h = raw.samples().to_vec();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for c in &cols {
            let mut v = c.to_vec();
            for q in &basis {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
        for q in &basis {
            let d: f64 = h.iter().zip(q).map(|(a, b)| a * b).sum();
            h.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
        let h = Raster::new(16, 16, h).unwrap();
        let base = intensity(&ms, &[0.2, 0.3, 0.5]).unwrap();
        let pan = base.zip_map(&h, |a, b| a + b).unwrap();
        let p = FusionParams { histmatch: PanMatch::None, ..ratio1(FusionMethod::AdaptiveIhs) };
        let r = fuse(&ms, &pan, &p).unwrap();
        let alpha = r.diagnostics.solved_alpha.as_ref().unwrap();
        assert!((alpha[0] - 0.2).abs() < 1e-6);
        for (f, m) in r.fused.bands().iter().zip(ms.bands()) {
            assert!(max_diff(&f.zip_map(m, |a, b| a - b).unwrap(), &h) < 1e-6);
        }
    }

    #[test]
    fn adaptive_reduces_to_ihs_with_equal_weights() {
        let ms = random_ms(8, 8, 3, 6);
        let pan = intensity(&ms, &[1.0 / 3.0; 3]).unwrap();
        let a = fuse(&ms, &pan, &ratio1(FusionMethod::AdaptiveIhs)).unwrap();
        let i = fuse(&ms, &pan, &ratio1(FusionMethod::Ihs)).unwrap();
        for (x, y) in a.fused.bands().iter().zip(i.fused.bands()) {
            assert!(max_diff(x, y) < 1e-9);
        }
    }

    #[test]
    fn pca_substitution_no_op_and_unaltered_components() {
        let ms = random_ms(8, 8, 3, 7);
        let (comp, _) = pca_forward(&ms).unwrap();
        let r = fuse(&ms, comp.band(0), &ratio1(FusionMethod::Pca)).unwrap();
        for (a, b) in r.fused.bands().iter().zip(ms.bands()) {
            assert!(max_diff(a, b) < 1e-9);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pan = random(8, 8, 0.0, 255.0, &mut rng);
        let r = fuse(&ms, &pan, &ratio1(FusionMethod::Pca)).unwrap();
        assert_eq!(r.diagnostics.pca_eigenvalues.as_ref().unwrap().len(), 3);
        // project the fused image with the original model
        let (_, model) = pca_forward(&ms).unwrap();
        for k in 1..3 {
            for p in 0..64 {
                let fused_c: f64 =
                    (0..3).map(|b| model.basis[k][b] * (r.fused.band(b).samples()[p] - model.band_means[b])).sum();
                assert!((fused_c - comp.band(k).samples()[p]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pca_two_band_constant_pan() {
        // bands a, b with known covariance; a constant pan carries no detail so PC1 becomes 0
        let a = Raster::new(4, 1, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let b = Raster::new(4, 1, vec![2.0, 2.0, 6.0, 6.0]).unwrap();
        let ms = MultiBandImage::new(vec![a, b]).unwrap();
        let (comp, model) = pca_forward(&ms).unwrap();
        let pan = Raster::filled(4, 1, 100.0).unwrap();
        let r = fuse(&ms, &pan, &ratio1(FusionMethod::Pca)).unwrap();
        for p in 0..4 {
            let c1 = comp.band(1).samples()[p];
            for band in 0..2 {
                let want = model.band_means[band] + model.basis[1][band] * c1;
                assert!((r.fused.band(band).samples()[p] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hpf_properties() {
        let ms = random_ms(6, 6, 3, 10);
        let flat = Raster::filled(12, 12, 40.0).unwrap();
        let p = FusionParams::new(FusionMethod::Hpf).with_ratio(2);
        let up = upsample_ms(&ms, &flat, &p).unwrap();
        let r = fuse(&ms, &flat, &p).unwrap();
        assert_eq!(r.fused, up);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pan = random(12, 12, 0.0, 100.0, &mut rng);
        let r = fuse(&ms, &pan, &p).unwrap();
        for q in 0..144 {
            let d_out = r.fused.band(0).samples()[q] - r.fused.band(2).samples()[q];
            let d_in = up.band(0).samples()[q] - up.band(2).samples()[q];
            assert!((d_out - d_in).abs() < 1e-12);
        }

        let bad = FusionParams { hpf_kernel: Kernel2D::identity(), ..p };
        assert!(fuse(&ms, &pan, &bad).is_err());
    }

    #[test]
    fn hpf_impulse_response() {
        let ms = constant_pixel_ms(&[1.0, 2.0, 3.0], 7, 7);
        let mut v = vec![0.0; 49];
        v[3 * 7 + 3] = 9.0;
        let pan = Raster::new(7, 7, v).unwrap();
        let r = fuse(&ms, &pan, &ratio1(FusionMethod::Hpf)).unwrap();
        let detail = r.fused.band(0).map(|x| x - 1.0).unwrap();
        for y in 0..7usize {
            for x in 0..7usize {
                let want = if (x, y) == (3, 3) {
                    8.0
                } else if x.abs_diff(3) <= 1 && y.abs_diff(3) <= 1 {
                    -1.0
                } else {
                    0.0
                };
                assert!((detail.get(x, y) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dwt_flat_pan_is_fixed_point() {
        let ms = random_ms(8, 8, 3, 12);
        let flat = Raster::filled(32, 32, 5.0).unwrap();
        for m in [FusionMethod::DwtAtrous, FusionMethod::DwtMallat] {
            let p = FusionParams::new(m);
            let up = upsample_ms(&ms, &flat, &p).unwrap();
            let r = fuse(&ms, &flat, &p).unwrap();
            for (a, b) in r.fused.bands().iter().zip(up.bands()) {
                assert!(max_diff(a, b) < 1e-10);
            }
        }
    }

    #[test]
    fn dwt_substitutive_self() {
        let ms = random_ms(16, 16, 1, 13);
        for m in [FusionMethod::DwtAtrous, FusionMethod::DwtMallat] {
            let p = FusionParams { dwt_rule: DwtRule::Substitutive, ..ratio1(m) };
            let r = fuse(&ms, ms.band(0), &p).unwrap();
            assert!(max_diff(r.fused.band(0), ms.band(0)) < 1e-10);
        }
    }

    #[test]
    fn dwt_additive_one_level_definition() {
        let ms = random_ms(12, 12, 2, 14);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let pan = random(12, 12, 0.0, 200.0, &mut rng);
        let p = FusionParams { levels: Some(1), ..ratio1(FusionMethod::DwtAtrous) };
        let r = fuse(&ms, &pan, &p).unwrap();
        for (b, m) in ms.bands().iter().enumerate() {
            let matched = histogram_match(&pan, m, HistMatchMode::MeanStd).unwrap();
            // direct 5x5 B3 smoothing with symmetric boundary
            let smooth = Raster::from_fn(12, 12, |x, y| {
                let mut acc = 0.0;
                for j in 0..5 {
                    for i in 0..5 {
                        let sx = Boundary::Symmetric.index(x as isize + i as isize - 2, 12);
                        let sy = Boundary::Symmetric.index(y as isize + j as isize - 2, 12);
                        acc += B3_SPLINE[i] * B3_SPLINE[j] * matched.get(sx, sy);
                    }
                }
                acc
            })
            .unwrap();
            let want = matched.zip_map(&smooth, |a, s| a - s).unwrap();
            let got = r.fused.band(b).zip_map(m, |f, x| f - x).unwrap();
            assert!(max_diff(&got, &want) < 1e-10);
        }
    }

    #[test]
    fn mallat_divisibility_propagates() {
        let ms = random_ms(3, 3, 3, 16);
        let pan = Raster::filled(6, 6, 1.0).unwrap();
        let p = FusionParams { levels: Some(2), ..FusionParams::new(FusionMethod::DwtMallat).with_ratio(2) };
        assert!(matches!(fuse(&ms, &pan, &p), Err(Error::InvalidDimensions(_))));
        assert!(fuse_dwt(&ms, &pan, &FusionParams::new(FusionMethod::Hpf)).is_err());
    }

    #[test]
    fn params_parse_from_toml() {
        let p: FusionParams = toml::from_str(
            "method = \"dwt_mallat\"\nratio = 2\nlevels = 3\ndwt_rule = \"substitutive\"\nresample = \"bilinear\"",
        )
        .unwrap();
        assert_eq!(p.method, FusionMethod::DwtMallat);
        assert_eq!(p.effective_levels(), 3);
        assert_eq!(p.histmatch, PanMatch::MeanStd);
        assert_eq!(FusionParams::new(FusionMethod::Ihs).effective_levels(), 2);
        assert!(toml::from_str::<FusionParams>("method = \"nope\"").is_err());
        assert_eq!("adaptive_ihs".parse::<FusionMethod>().unwrap(), FusionMethod::AdaptiveIhs);
    }

    proptest::proptest! {
        #[test]
        fn brovey_ratio_and_scaling(seed in 0u64..200, s in 0.1f64..10.0) {
            let ms = random_ms(4, 4, 3, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let pan = random(4, 4, 1.0, 255.0, &mut rng);
            let p = ratio1(FusionMethod::Brovey);
            let out = fuse(&ms, &pan, &p).unwrap().fused;
            let scaled = fuse(&ms, &pan.map(|v| v * s).unwrap(), &p).unwrap().fused;
            for q in 0..16 {
                for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                    let lhs = out.band(i).samples()[q] / out.band(j).samples()[q];
                    let rhs = ms.band(i).samples()[q] / ms.band(j).samples()[q];
                    proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
                }
                for b in 0..3 {
                    let (x, y) = (scaled.band(b).samples()[q], out.band(b).samples()[q] * s);
                    proptest::prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
                }
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn output_matches_pan_grid(seed in 0u64..100, ratio in 1usize..4, m in 0usize..7) {
            let method = FusionMethod::ALL[m];
            let ms = random_ms(4, 4, 3, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
            let pan = random(4 * ratio, 4 * ratio, 10.0, 200.0, &mut rng);
            let p = FusionParams::new(method).with_ratio(ratio);
            match fuse(&ms, &pan, &p) {
                Ok(r) => {
                    proptest::prop_assert_eq!(r.fused.dims(), pan.dims());
                    proptest::prop_assert_eq!(r.fused.band_count(), 3);
                    proptest::prop_assert_eq!(r.method, method);
                }
                // Haar needs dimensions divisible by 2^levels
                Err(e) => proptest::prop_assert!(method == FusionMethod::DwtMallat, "{method}: {e}"),
            }
        }
    }
}
