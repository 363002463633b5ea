//! Decimated orthonormal Haar transform (Mallat scheme).
//!
//! For a 2x2 block `[a b; c d]`:
//! `LL = (a+b+c+d)/2`, `LH = (a+b-c-d)/2`, `HL = (a-b+c-d)/2`, `HH = (a-b-c+d)/2`.

use super::{WaveletScheme, WaveletStack};
use crate::error::{Error, Result};
use crate::raster::Raster;

fn analyze(r: &Raster) -> [Raster; 4] {
    let (w, h) = (r.width() / 2, r.height() / 2);
    let mut bands = [(); 4].map(|_| vec![0.0; w * h]);
    for y in 0..h {
        let top = r.row(2 * y);
        let bottom = r.row(2 * y + 1);
        for x in 0..w {
            let (a, b, c, d) = (top[2 * x], top[2 * x + 1], bottom[2 * x], bottom[2 * x + 1]);
            let i = y * w + x;
            bands[0][i] = (a + b + c + d) / 2.0;
            bands[1][i] = (a + b - c - d) / 2.0;
            bands[2][i] = (a - b + c - d) / 2.0;
            bands[3][i] = (a - b - c + d) / 2.0;
        }
    }
    bands.map(|v| Raster::from_parts(w, h, v))
}

fn synthesize(ll: &Raster, lh: &Raster, hl: &Raster, hh: &Raster) -> Raster {
    let (w, h) = ll.dims();
    let ow = 2 * w;
    let mut out = vec![0.0; 4 * w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (s, v, u, d) = (ll.samples()[i], lh.samples()[i], hl.samples()[i], hh.samples()[i]);
            out[2 * y * ow + 2 * x] = (s + v + u + d) / 2.0;
            out[2 * y * ow + 2 * x + 1] = (s + v - u - d) / 2.0;
            out[(2 * y + 1) * ow + 2 * x] = (s - v + u - d) / 2.0;
            out[(2 * y + 1) * ow + 2 * x + 1] = (s - v - u + d) / 2.0;
        }
    }
    Raster::from_parts(ow, 2 * h, out)
}

pub fn mallat_decompose(r: &Raster, levels: usize) -> Result<WaveletStack> {
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    let block = 1usize.checked_shl(levels as u32).filter(|b| *b <= r.width().max(r.height()));
    let divisible = block.is_some_and(|b| r.width().is_multiple_of(b) && r.height().is_multiple_of(b));
    if !divisible {
        return Err(Error::InvalidDimensions(format!("{}x{} is not divisible by 2^{levels}", r.width(), r.height())));
    }
    let mut planes = Vec::with_capacity(3 * levels);
    let mut ll = r.clone();
    for _ in 0..levels {
        let [next, lh, hl, hh] = analyze(&ll);
        planes.extend([lh, hl, hh]);
        ll = next;
    }
    WaveletStack::new(planes, ll, WaveletScheme::MallatHaar)
}

pub fn mallat_reconstruct(s: &WaveletStack) -> Result<Raster> {
    if s.scheme() != WaveletScheme::MallatHaar {
        return Err(Error::InvalidParameter(format!("expected a Haar stack, got {:?}", s.scheme())));
    }
    let mut ll = s.residual().clone();
    for level in s.detail_planes().chunks(3).rev() {
        ll = synthesize(&ll, &level[0], &level[1], &level[2]);
    }
    Ok(ll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(w: usize, h: usize, seed: u64) -> Raster {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Raster::from_fn(w, h, |_, _| rng.gen_range(-50.0..50.0)).unwrap()
    }

    fn energy(s: &WaveletStack) -> f64 {
        s.detail_planes().iter().chain(std::iter::once(s.residual())).flat_map(|p| p.samples()).map(|v| v * v).sum()
    }

    #[test]
    fn constant_kills_details() {
        let r = Raster::filled(4, 4, 3.0).unwrap();
        let s = mallat_decompose(&r, 1).unwrap();
        assert_eq!(s.detail_planes().len(), 3);
        for p in s.detail_planes() {
            assert!(p.samples().iter().all(|&v| v == 0.0));
        }
        assert!(s.residual().samples().iter().all(|&v| v == 6.0));
    }

    /// Matrix-form oracle: a 1-level 2-D Haar transform is `H · X · Hᵀ` with
    /// `H` the 8x8 orthonormal Haar analysis matrix (averages on top, differences below).
    #[test]
    fn matches_matrix_form_and_round_trips() {
        let r = random(8, 8, 1);
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut hmat = [[0.0; 8]; 8];
        for i in 0..4 {
            hmat[i][2 * i] = s2;
            hmat[i][2 * i + 1] = s2;
            hmat[i + 4][2 * i] = s2;
            hmat[i + 4][2 * i + 1] = -s2;
        }
        // Y = H X Hᵀ, rows index y, columns index x
        let mut y = [[0.0; 8]; 8];
        for (i, yrow) in y.iter_mut().enumerate() {
            for (j, yv) in yrow.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..8 {
                    for l in 0..8 {
                        acc += hmat[i][k] * r.get(l, k) * hmat[j][l];
                    }
                }
                *yv = acc;
            }
        }
        let s = mallat_decompose(&r, 1).unwrap();
        let [lh, hl, hh] = [&s.detail_planes()[0], &s.detail_planes()[1], &s.detail_planes()[2]];
        for i in 0..4 {
            for j in 0..4 {
                assert!((s.residual().get(j, i) - y[i][j]).abs() < 1e-12);
                assert!((lh.get(j, i) - y[i + 4][j]).abs() < 1e-12);
                assert!((hl.get(j, i) - y[i][j + 4]).abs() < 1e-12);
                assert!((hh.get(j, i) - y[i + 4][j + 4]).abs() < 1e-12);
            }
        }
        let back = mallat_reconstruct(&s).unwrap();
        for (a, b) in back.samples().iter().zip(r.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_multi_level() {
        let r = random(8, 8, 2);
        let e0: f64 = r.samples().iter().map(|v| v * v).sum();
        for levels in 1..=3 {
            let s = mallat_decompose(&r, levels).unwrap();
            assert!((energy(&s) - e0).abs() < 1e-9);
            assert_eq!(s.levels(), levels);
            assert_eq!(s.residual().dims(), (8 >> levels, 8 >> levels));
        }
    }

    #[test]
    fn divisibility_enforced() {
        assert!(mallat_decompose(&random(6, 8, 3), 2).is_err());
        assert!(mallat_decompose(&random(8, 8, 3), 4).is_err());
        assert!(mallat_decompose(&random(8, 8, 3), 0).is_err());
        assert!(mallat_decompose(&random(12, 8, 3), 2).is_ok());
    }
}
