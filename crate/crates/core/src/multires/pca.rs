//! Principal component analysis over the band dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{MultiBandImage, Raster};

/// Forward/inverse PCA model.
///
/// `basis` rows are unit principal directions ordered by descending
/// eigenvalue. Each row is oriented so its entries sum to a non-negative
/// value; a zero-sum row has its first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub basis: Vec<Vec<f64>>,
    pub band_means: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn band_count(&self) -> usize {
        self.band_means.len()
    }
}

/// Population covariance of the bands.
pub(crate) fn covariance(img: &MultiBandImage, means: &[f64]) -> Vec<Vec<f64>> {
    let n = img.band_count();
    let pixels = img.band(0).len() as f64;
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let (a, b) = (img.band(i).samples(), img.band(j).samples());
            let s: f64 = a.iter().zip(b).map(|(x, y)| (x - means[i]) * (y - means[j])).sum();
            cov[i][j] = s / pixels;
            cov[j][i] = cov[i][j];
        }
    }
    cov
}

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix.
/// Returns `(eigenvalues, eigenvectors as rows)`, unsorted.
pub(crate) fn symmetric_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                // accumulate eigenvectors as rows of v
                for k in 0..n {
                    let (vpk, vqk) = (v[p][k], v[q][k]);
                    v[p][k] = c * vpk - s * vqk;
                    v[q][k] = s * vpk + c * vqk;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

fn orient(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    let scale: f64 = row.iter().map(|x| x.abs()).sum();
    let flip = if sum.abs() > 1e-12 * scale {
        sum < 0.0
    } else {
        row.iter().find(|x| x.abs() > 1e-12 * scale).is_some_and(|&x| x < 0.0)
    };
    if flip {
        row.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Projects centred pixels onto the principal directions.
pub fn pca_forward(ms: &MultiBandImage) -> Result<(MultiBandImage, PcaModel)> {
    let n = ms.band_count();
    if n < 2 {
        return Err(Error::BandCount { found: n, reason: "PCA needs at least 2 bands".into() });
    }
    if ms.bands().iter().all(Raster::is_constant) {
        return Err(Error::Degenerate("all bands are constant; covariance has rank 0".into()));
    }
    let means: Vec<f64> = ms.bands().iter().map(Raster::mean).collect();
    let cov = covariance(ms, &means);
    let (values, vectors) = symmetric_eigen(&cov);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let basis: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let mut row = vectors[i].clone();
            orient(&mut row);
            row
        })
        .collect();

    let model = PcaModel { basis, band_means: means, eigenvalues };
    let components = project(ms, &model)?;
    Ok((components, model))
}

fn project(ms: &MultiBandImage, model: &PcaModel) -> Result<MultiBandImage> {
    let n = model.band_count();
    let (w, h) = ms.dims();
    let pixels = w * h;
    let mut out = vec![vec![0.0; pixels]; n];
    for p in 0..pixels {
        for (k, row) in model.basis.iter().enumerate() {
            out[k][p] = row.iter().enumerate().map(|(b, c)| c * (ms.band(b).samples()[p] - model.band_means[b])).sum();
        }
    }
    MultiBandImage::new(out.into_iter().map(|v| Raster::new(w, h, v)).collect::<Result<_>>()?)
}

/// `pixels = basisᵀ · components + means`.
pub fn pca_inverse(components: &MultiBandImage, model: &PcaModel) -> Result<MultiBandImage> {
    let n = model.band_count();
    if components.band_count() != n || model.basis.len() != n || model.basis.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("{} components for a {n}-band model", components.band_count())));
    }
    let (w, h) = components.dims();
    let pixels = w * h;
    let mut out = vec![vec![0.0; pixels]; n];
    for p in 0..pixels {
        for (b, band) in out.iter_mut().enumerate() {
            band[p] =
                model.band_means[b] + (0..n).map(|k| model.basis[k][b] * components.band(k).samples()[p]).sum::<f64>();
        }
    }
    MultiBandImage::new(out.into_iter().map(|v| Raster::new(w, h, v)).collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, n: usize, seed: u64) -> MultiBandImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Raster::from_fn(w, h, |_, _| rng.gen_range(0.0..10.0)).unwrap();
        MultiBandImage::new(
            (0..n)
                .map(|i| {
                    let s = base.samples().iter().map(|v| v * (1.0 + i as f64) + rng.gen_range(-2.0..2.0)).collect();
                    Raster::new(w, h, s).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn max_abs_diff(a: &MultiBandImage, b: &MultiBandImage) -> f64 {
        a.to_band_major().iter().zip(b.to_band_major()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn identical_bands() {
        let b = Raster::new(4, 1, vec![1.0, 2.0, 4.0, 9.0]).unwrap();
        let img = MultiBandImage::new(vec![b.clone(), b.clone()]).unwrap();
        let (comp, model) = pca_forward(&img).unwrap();
        let var = b.variance();
        // 2x2 covariance [[v, v], [v, v]] has eigenvalues 2v and 0
        assert!((model.eigenvalues[0] - 2.0 * var).abs() < 1e-12);
        assert!(model.eigenvalues[1].abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((model.basis[0][0] - s).abs() < 1e-12 && (model.basis[0][1] - s).abs() < 1e-12);
        assert!((model.basis[1][0] - s).abs() < 1e-12 && (model.basis[1][1] + s).abs() < 1e-12);
        let mean = b.mean();
        for (c, v) in comp.band(0).samples().iter().zip(b.samples()) {
            assert!((c - 2f64.sqrt() * (v - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn uncorrelated_bands() {
        // band a: variance 1, band b: variance 4, zero covariance
        let a = Raster::new(4, 1, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let b = Raster::new(4, 1, vec![2.0, 2.0, -2.0, -2.0]).unwrap();
        let (_, model) = pca_forward(&MultiBandImage::new(vec![a, b]).unwrap()).unwrap();
        assert!((model.eigenvalues[0] - 4.0).abs() < 1e-12);
        assert!((model.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((model.basis[0][1] - 1.0).abs() < 1e-12 && model.basis[0][0].abs() < 1e-12);
        assert!((model.basis[1][0] - 1.0).abs() < 1e-12 && model.basis[1][1].abs() < 1e-12);
    }

    #[test]
    fn invariants_and_round_trip() {
        let img = random_image(9, 7, 4, 1);
        let (comp, model) = pca_forward(&img).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| model.basis[i][k] * model.basis[j][k]).sum();
                assert!((dot - f64::from(i == j)).abs() < 1e-10);
            }
            assert!(model.basis[i].iter().sum::<f64>() >= 0.0);
        }
        assert!(model.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(model.eigenvalues.iter().all(|&e| e >= -1e-12));
        let zeros = vec![0.0; 4];
        let cov = covariance(&comp, &zeros);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(cov[i][j].abs() < 1e-9);
                }
            }
            assert!((cov[i][i] - model.eigenvalues[i]).abs() < 1e-9);
        }
        let trace: f64 = img.bands().iter().map(Raster::variance).sum();
        assert!((model.eigenvalues.iter().sum::<f64>() - trace).abs() < 1e-9);
        assert!(max_abs_diff(&pca_inverse(&comp, &model).unwrap(), &img) < 1e-9);
    }

    #[test]
    fn zero_components_give_means() {
        let img = random_image(3, 3, 3, 2);
        let (_, model) = pca_forward(&img).unwrap();
        let zero = MultiBandImage::new(vec![Raster::filled(3, 3, 0.0).unwrap(); 3]).unwrap();
        let out = pca_inverse(&zero, &model).unwrap();
        for (b, m) in out.bands().iter().zip(&model.band_means) {
            assert!(b.samples().iter().all(|v| (v - m).abs() < 1e-12));
        }
    }

    #[test]
    fn scaling_first_component_moves_only_along_first_direction() {
        let img = random_image(5, 5, 3, 3);
        let (comp, model) = pca_forward(&img).unwrap();
        let mut bands = comp.clone().into_bands();
        bands[0] = bands[0].map(|v| 2.0 * v).unwrap();
        let out = pca_inverse(&MultiBandImage::new(bands).unwrap(), &model).unwrap();
        // difference at pixel p is c0(p) · basis[0]
        for p in 0..25 {
            let c0 = comp.band(0).samples()[p];
            for b in 0..3 {
                let diff = out.band(b).samples()[p] - img.band(b).samples()[p];
                assert!((diff - c0 * model.basis[0][b]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn errors() {
        let c = Raster::filled(3, 3, 1.0).unwrap();
        assert!(matches!(
            pca_forward(&MultiBandImage::new(vec![c.clone(), c.clone()]).unwrap()),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(pca_forward(&MultiBandImage::single(c.clone())), Err(Error::BandCount { .. })));
        let img = random_image(3, 3, 3, 4);
        let (_, model) = pca_forward(&img).unwrap();
        assert!(pca_inverse(&MultiBandImage::new(vec![c.clone(), c]).unwrap(), &model).is_err());
    }

    #[test]
    fn jacobi_on_known_matrix() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]];
        let (mut vals, _) = symmetric_eigen(&m);
        vals.sort_by(f64::total_cmp);
        let r2 = 2f64.sqrt();
        for (v, want) in vals.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn spectrum_invariants(seed in 0u64..200, n in 2usize..6) {
            let img = random_image(9, 7, n, seed);
            let (pcs, model) = pca_forward(&img).unwrap();
            proptest::prop_assert!(model.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let trace: f64 = img.bands().iter().map(Raster::variance).sum();
            let eig: f64 = model.eigenvalues.iter().sum();
            proptest::prop_assert!((trace - eig).abs() < 1e-9 * trace.max(1.0));
            for row in &model.basis {
                let s: f64 = row.iter().sum();
                proptest::prop_assert!(s >= 0.0);
            }
            let back = pca_inverse(&pcs, &model).unwrap();
            proptest::prop_assert!(max_abs_diff(&back, &img) < 1e-9);
        }
    }
}
