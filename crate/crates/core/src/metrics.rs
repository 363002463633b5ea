//! Spectral and spatial quality indices between a reference MS image `R`
//! and a fused image `F` (plus the PAN for SCC).
//!
//! All statistics use population (1/n) moments. Multi-band aggregates of
//! CC, RMSE and Q are unweighted band means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multires::{convolve2d, Boundary, Kernel2D};
use crate::raster::{MultiBandImage, Raster};

/// Default PAN/MS pixel-size ratio `h/l` used by ERGAS.
pub const DEFAULT_RATIO_HL: f64 = 0.25;

struct Moments {
    mean_r: f64,
    mean_f: f64,
    var_r: f64,
    var_f: f64,
    cov: f64,
}

fn moments(r: &Raster, f: &Raster) -> Result<Moments> {
    r.ensure_same_dims(f)?;
    let n = r.len() as f64;
    let (mean_r, mean_f) = (r.mean(), f.mean());
    let (mut var_r, mut var_f, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in r.samples().iter().zip(f.samples()) {
        let (da, db) = (a - mean_r, b - mean_f);
        var_r += da * da;
        var_f += db * db;
        cov += da * db;
    }
    Ok(Moments { mean_r, mean_f, var_r: var_r / n, var_f: var_f / n, cov: cov / n })
}

/// Pearson correlation coefficient.
pub fn cc(r: &Raster, f: &Raster) -> Result<f64> {
    let m = moments(r, f)?;
    if m.var_r == 0.0 || m.var_f == 0.0 {
        return Err(Error::Degenerate("correlation is undefined for a constant raster".into()));
    }
    Ok((m.cov / (m.var_r.sqrt() * m.var_f.sqrt())).clamp(-1.0, 1.0))
}

pub fn rmse(r: &Raster, f: &Raster) -> Result<f64> {
    r.ensure_same_dims(f)?;
    let ss: f64 = r.samples().iter().zip(f.samples()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / r.len() as f64).sqrt())
}

fn ensure_same_shape(r: &MultiBandImage, f: &MultiBandImage) -> Result<()> {
    if r.band_count() != f.band_count() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} bands, fused has {}",
            r.band_count(),
            f.band_count()
        )));
    }
    r.band(0).ensure_same_dims(f.band(0))
}

/// Relative average spectral error: `100/μ · sqrt(mean_i RMSE_i²)`, with `μ`
/// the mean of `R` over all bands and pixels.
pub fn rase(r: &MultiBandImage, f: &MultiBandImage) -> Result<f64> {
    ensure_same_shape(r, f)?;
    let mu = r.bands().iter().map(Raster::mean).sum::<f64>() / r.band_count() as f64;
    if mu == 0.0 {
        return Err(Error::Degenerate("RASE is undefined for a zero-mean reference".into()));
    }
    let mean_sq = r.bands().iter().zip(f.bands()).map(|(a, b)| rmse(a, b).map(|e| e * e)).sum::<Result<f64>>()?
        / r.band_count() as f64;
    Ok(100.0 / mu * mean_sq.sqrt())
}

/// Universal quality index, computed over the whole raster:
/// `4 σ_RF R̄ F̄ / ((σ_R² + σ_F²)(R̄² + F̄²))`.
pub fn uqi(r: &Raster, f: &Raster) -> Result<f64> {
    let m = moments(r, f)?;
    let denom = (m.var_r + m.var_f) * (m.mean_r * m.mean_r + m.mean_f * m.mean_f);
    if denom == 0.0 {
        return Err(Error::Degenerate("UQI denominator is zero".into()));
    }
    Ok(4.0 * m.cov * m.mean_r * m.mean_f / denom)
}

/// `100 · (h/l) · sqrt(mean_i (RMSE_i / μ_i)²)` with `μ_i` the band means of `R`.
pub fn ergas(r: &MultiBandImage, f: &MultiBandImage, ratio_h_over_l: f64) -> Result<f64> {
    ensure_same_shape(r, f)?;
    let mut acc = 0.0;
    for (i, (a, b)) in r.bands().iter().zip(f.bands()).enumerate() {
        let mu = a.mean();
        if mu == 0.0 {
            return Err(Error::Degenerate(format!("ERGAS is undefined: band {i} has zero mean")));
        }
        let rel = rmse(a, b)? / mu;
        acc += rel * rel;
    }
    Ok(100.0 * ratio_h_over_l * (acc / r.band_count() as f64).sqrt())
}

/// Spatial correlation: mean over bands of `cc(L ⊛ F_i, L ⊛ P)` with the
/// 8-neighbour Laplacian `L` and replicated borders.
pub fn scc(f: &MultiBandImage, p: &Raster) -> Result<f64> {
    f.band(0).ensure_same_dims(p)?;
    let lap = Kernel2D::laplacian();
    let pan_edges = convolve2d(p, &lap, Boundary::Replicate);
    let total =
        f.bands().iter().map(|b| cc(&convolve2d(b, &lap, Boundary::Replicate), &pan_edges)).sum::<Result<f64>>()?;
    Ok(total / f.band_count() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandMetrics {
    pub cc: f64,
    pub rmse: f64,
    pub uqi: f64,
}

/// One row of the quality table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub cc: f64,
    pub ergas: f64,
    pub quality: f64,
    pub rase: f64,
    pub rmse: f64,
    /// Absent when no PAN was available (e.g. the consistency check).
    pub scc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_band: Vec<BandMetrics>,
    pub aggregate: AggregateMetrics,
    pub ratio_h_over_l: f64,
}

/// Spectral indices only (no SCC).
pub fn spectral_report(r: &MultiBandImage, f: &MultiBandImage, ratio_h_over_l: f64) -> Result<MetricReport> {
    ensure_same_shape(r, f)?;
    let per_band = r
        .bands()
        .iter()
        .zip(f.bands())
        .map(|(a, b)| Ok(BandMetrics { cc: cc(a, b)?, rmse: rmse(a, b)?, uqi: uqi(a, b)? }))
        .collect::<Result<Vec<_>>>()?;
    let n = per_band.len() as f64;
    let mean_of = |g: fn(&BandMetrics) -> f64| per_band.iter().map(g).sum::<f64>() / n;
    let aggregate = AggregateMetrics {
        cc: mean_of(|b| b.cc),
        ergas: ergas(r, f, ratio_h_over_l)?,
        quality: mean_of(|b| b.uqi),
        rase: rase(r, f)?,
        rmse: mean_of(|b| b.rmse),
        scc: None,
    };
    Ok(MetricReport { per_band, aggregate, ratio_h_over_l })
}

/// All six indices: `r_upsampled` is the reference MS on the fused grid.
pub fn full_report(
    r_upsampled: &MultiBandImage,
    f: &MultiBandImage,
    p: &Raster,
    ratio_h_over_l: f64,
) -> Result<MetricReport> {
    let mut report = spectral_report(r_upsampled, f, ratio_h_over_l)?;
    report.aggregate.scc = Some(scc(f, p)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(v: &[f64]) -> Raster {
        Raster::new(v.len(), 1, v.to_vec()).unwrap()
    }

    fn random(w: usize, h: usize, seed: u64) -> Raster {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Raster::from_fn(w, h, |_, _| rng.gen_range(1.0..100.0)).unwrap()
    }

    #[test]
    fn cc_cases() {
        let x = random(5, 5, 1);
        assert!((cc(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((cc(&x, &x.map(|v| 3.0 * v + 2.0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((cc(&x, &x.map(|v| -0.5 * v + 2.0).unwrap()).unwrap() + 1.0).abs() < 1e-12);
        assert!((cc(&r(&[1.0, 2.0, 3.0, 4.0]), &r(&[1.0, 3.0, 2.0, 4.0])).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(cc(&x, &Raster::filled(5, 5, 1.0).unwrap()), Err(Error::Degenerate(_))));
        assert!(cc(&x, &random(4, 5, 2)).is_err());
    }

    #[test]
    fn rmse_cases() {
        let x = random(4, 4, 3);
        assert_eq!(rmse(&x, &x).unwrap(), 0.0);
        assert_eq!(rmse(&r(&[0.0; 3]), &r(&[1.0; 3])).unwrap(), 1.0);
        assert_eq!(rmse(&r(&[0.0, 0.0, 3.0, 4.0]), &r(&[0.0; 4])).unwrap(), 2.5);
    }

    #[test]
    fn rase_and_ergas_formula_examples() {
        // one band, mean 50, rmse 5
        let reference = MultiBandImage::single(r(&[45.0, 55.0]));
        let fused = MultiBandImage::single(r(&[50.0, 50.0]));
        assert!((rase(&reference, &fused).unwrap() - 10.0).abs() < 1e-12);
        // rmse / mean = 0.1 at ratio 0.25 gives 2.5; doubling the ratio doubles it
        assert!((ergas(&reference, &fused, 0.25).unwrap() - 2.5).abs() < 1e-12);
        assert!((ergas(&reference, &fused, 0.5).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(rase(&reference, &reference).unwrap(), 0.0);
        assert_eq!(ergas(&reference, &reference, 0.25).unwrap(), 0.0);

        let zero = MultiBandImage::single(r(&[-1.0, 1.0]));
        assert!(rase(&zero, &zero).is_err());
        assert!(ergas(&zero, &zero, 0.25).is_err());
    }

    #[test]
    fn uqi_cases() {
        let x = random(6, 6, 4);
        assert!((uqi(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let mirrored = x.map(|v| 2.0 * x.mean() - v).unwrap();
        assert!((uqi(&x, &mirrored).unwrap() + 1.0).abs() < 1e-12);
        let q = uqi(&r(&[1.0, 2.0, 3.0, 4.0]), &r(&[2.0, 3.0, 4.0, 5.0])).unwrap();
        let luminance = 2.0 * 2.5 * 3.5 / (2.5f64.powi(2) + 3.5f64.powi(2));
        assert!((q - luminance).abs() < 1e-12);
        assert!((q - 0.945_945_945_945_946).abs() < 1e-12);
        let zero = r(&[0.0, 0.0]);
        assert!(uqi(&zero, &zero).is_err());
    }

    #[test]
    fn scc_cases() {
        let p = random(8, 8, 5);
        let same = MultiBandImage::new(vec![p.clone(), p.clone(), p.clone()]).unwrap();
        assert!((scc(&same, &p).unwrap() - 1.0).abs() < 1e-12);
        let neg = MultiBandImage::single(p.map(|v| -v).unwrap());
        assert!((scc(&neg, &p).unwrap() + 1.0).abs() < 1e-12);
        // a blurred copy loses detail
        let blurred = convolve2d(&p, &Kernel2D::new(3, 3, vec![1.0 / 9.0; 9]).unwrap(), Boundary::Replicate);
        let s = scc(&MultiBandImage::single(blurred), &p).unwrap();
        assert!(s < 1.0);
        // a constant band has no edges to correlate
        let flat = MultiBandImage::single(Raster::filled(8, 8, 3.0).unwrap());
        assert!(scc(&flat, &p).is_err());
    }

    #[test]
    fn identity_report() {
        let img = MultiBandImage::new((0..3).map(|b| random(8, 8, 10 + b)).collect()).unwrap();
        let rep = full_report(&img, &img, &img.band_mean(), DEFAULT_RATIO_HL).unwrap();
        let a = rep.aggregate;
        assert!((a.cc - 1.0).abs() < 1e-12 && (a.quality - 1.0).abs() < 1e-12);
        assert_eq!((a.rmse, a.rase, a.ergas), (0.0, 0.0, 0.0));
        assert!(a.scc.is_some());
        assert_eq!(rep.per_band.len(), 3);
    }

    #[test]
    fn error_metrics_grow_with_perturbation() {
        let img = MultiBandImage::new((0..3).map(|b| random(8, 8, 20 + b)).collect()).unwrap();
        let noise =
            MultiBandImage::new((0..3).map(|b| random(8, 8, 30 + b).map(|v| v - 50.0).unwrap()).collect()).unwrap();
        let perturb = |eps: f64| {
            MultiBandImage::new(
                img.bands().iter().zip(noise.bands()).map(|(a, n)| a.zip_map(n, |x, e| x + eps * e).unwrap()).collect(),
            )
            .unwrap()
        };
        let small = spectral_report(&img, &perturb(0.01), 0.25).unwrap().aggregate;
        let large = spectral_report(&img, &perturb(0.1), 0.25).unwrap().aggregate;
        assert!(large.rmse > small.rmse && large.rase > small.rase && large.ergas > small.ergas);
        assert!(large.cc < small.cc && large.quality < small.quality);
    }

    proptest::proptest! {
        #[test]
        fn cc_symmetric_bounded(s1 in 0u64..300, s2 in 300u64..600) {
            let (a, b) = (random(5, 4, s1), random(5, 4, s2));
            let ab = cc(&a, &b).unwrap();
            proptest::prop_assert!((ab - cc(&b, &a).unwrap()).abs() < 1e-15);
            proptest::prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn rmse_triangle_inequality(s1 in 0u64..300, s2 in 300u64..600, s3 in 600u64..900) {
            let (a, b, c) = (random(4, 4, s1), random(4, 4, s2), random(4, 4, s3));
            proptest::prop_assert!(rmse(&a, &c).unwrap() <= rmse(&a, &b).unwrap() + rmse(&b, &c).unwrap() + 1e-12);
            proptest::prop_assert!((rmse(&a, &b).unwrap() - rmse(&b, &a).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn relative_errors_scale_invariant(s1 in 0u64..300, k in 0.01f64..100.0) {
            let a = MultiBandImage::new((0..3).map(|b| random(4, 4, s1 + b)).collect()).unwrap();
            let f = MultiBandImage::new((0..3).map(|b| random(4, 4, s1 + 1000 + b)).collect()).unwrap();
            let scale = |m: &MultiBandImage| m.map_bands(|b| b.map(|v| v * k)).unwrap();
            let (ra, rb) = (rase(&a, &f).unwrap(), rase(&scale(&a), &scale(&f)).unwrap());
            proptest::prop_assert!((ra - rb).abs() < 1e-9 * ra.max(1.0));
            let (ea, eb) = (ergas(&a, &f, 0.25).unwrap(), ergas(&scale(&a), &scale(&f), 0.25).unwrap());
            proptest::prop_assert!((ea - eb).abs() < 1e-9 * ea.max(1.0));
        }
    }
}
